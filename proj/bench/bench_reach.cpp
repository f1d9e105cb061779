// Benchmark: the serial reference reach kernel against the OpenMP one on the
// shipped taxiing scenario.  Both kernels produce identical results (the
// equivalence is asserted in the unit tests); this target measures the
// speedup only.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <string>

#include "gridreach/grid.hpp"
#include "gridreach/reach.hpp"
#include "gridreach/scenario.hpp"

namespace {

using namespace gridreach;

Scenario shipped_scenario() {
  return load_scenario(std::string(GRIDREACH_DATA_DIR) + "/taxi32.json");
}

// A spread-out sample of cells, so one iteration stays in the millisecond
// range while still covering the whole grid.
CellSet sample_cells(const Grid& g, std::int64_t stride) {
  CellSet s(g);
  for (std::int64_t f = 0; f < g.total_cells(); f += stride) s.insert(f);
  return s;
}

void bench_kernel(benchmark::State& state, bool parallel) {
  Scenario sc = shipped_scenario();
  sc.workers = parallel ? omp_get_max_threads() : 0;
  PreparedScenario ps = prepare(std::move(sc));
  const CellSet cells = sample_cells(ps.sc.grid, 8);

  for (auto _ : state) {
    state.PauseTiming();
    ps.freach_cache.clear();  // the kernels memoize; time cold runs only
    state.ResumeTiming();
    FReachSummary out = parallel ? freach_parallel(cells, 1, ps)
                                 : freach_serial(cells, 1, ps);
    benchmark::DoNotOptimize(out.cells.count());
  }
  state.counters["cells"] = static_cast<double>(cells.count());
  state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
}

void BM_FreachSerial(benchmark::State& state) { bench_kernel(state, false); }
void BM_FreachParallel(benchmark::State& state) { bench_kernel(state, true); }

BENCHMARK(BM_FreachSerial)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(BM_FreachParallel)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
