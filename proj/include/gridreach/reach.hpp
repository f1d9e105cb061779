#ifndef GRIDREACH_REACH_HPP
#define GRIDREACH_REACH_HPP

// Reachability kernels and fixpoints: the per-cell i-period reach map, the
// forward accumulation loop, transition-map construction with the backward
// fixpoint, the incremental bound prover, and the cell simulator.
//
// The per-cell analyses are independent; freach() runs them on an OpenMP
// worker pool when the scenario asks for workers, and a serial reference
// kernel otherwise.  Both produce identical results (cells are merged in
// index order), which the benchmark and tests rely on.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridreach/scenario.hpp"

namespace gridreach {

// One cell's reachable set after i control periods.
struct CellReach {
  StarUnion stars;         // star-engine leaves ((state) stars)
  std::optional<Box> box;  // box-engine result
  CellSet cells;           // abstraction; all cells when a pole flooded it
  bool escaped = false;    // region left the grid (treated unsafe)
  bool degraded = false;   // split budget hit; interval fallback used
  bool pole = false;       // tan pole crossed; cells flooded
};

CellReach freach_cell(const CellIndex& c, int i, const PreparedScenario& ps);

struct FReachSummary {
  CellSet cells;
  CellSet escaped_sources;
  CellSet degraded_sources;
  CellSet pole_sources;
};

// Memoized i-period reach of a cell set (union over members).
FReachSummary freach(const CellSet& from, int i, PreparedScenario& ps);
// The two kernels behind it; exposed for the equivalence test + benchmark.
FReachSummary freach_serial(const CellSet& from, int i, PreparedScenario& ps);
FReachSummary freach_parallel(const CellSet& from, int i,
                              PreparedScenario& ps);

struct ReachResult {
  std::vector<CellSet> per_step;  // C_0 .. C_K (every computed step)
  CellSet global;
  std::optional<int> converged_at;
  bool is_safe = false;
  CellSet degraded;
  CellSet escaped_sources;
  CellSet pole_sources;
  int m = 1;

  // C_k for any k: past the computed range the sets repeat with period m
  // (the loop stopped because C_k == C_{k+m}).  Only valid to extrapolate
  // when converged_at is set.
  const CellSet& cells_at_step(int k) const;
};

// Forward fixpoint: abstract R0, then repeatedly push the frontier through
// 1..m periods, abstracting and accumulating, until the frontier repeats or
// k_max periods are covered.
ReachResult forward_reach(PreparedScenario& ps, const Box& r0);
ReachResult forward_reach(PreparedScenario& ps);  // uses the scenario's r0

struct TransitionMaps {
  int m = 1;
  // fwd[i-1][flat cell] = abstraction of that cell's i-period reach.
  std::vector<std::vector<CellSet>> fwd;
  // bwd[i-1][flat cell] = exact inverse relation of fwd[i-1].
  std::vector<std::vector<CellSet>> bwd;
  // Cells whose analysis escaped the grid or flooded (treated unsafe).
  CellSet flagged;
};

TransitionMaps build_transition_maps(PreparedScenario& ps);

// Backward fixpoint over the maps: start from the unsafe cells plus every
// cell that reaches them in fewer than m periods, then keep adding m-period
// predecessors of newly added cells until nothing grows.  Returns the
// possibly-unsafe set; its complement is guaranteed safe.
CellSet backward_reach(const TransitionMaps& maps, const PreparedScenario& ps);

struct ProvenRange {
  std::vector<std::pair<int, int>> index_range;  // inclusive, per dimension
  Box box;                                       // the proven cell-aligned box
};

// Simulation-guided bound proof: seed per-dimension cell index ranges from
// `sims` random evaluations of the network, then widen one cell on any side
// the interval bounds still violate, until the bounds fit.  Throws
// OutOfDomain if a range would leave the grid.
ProvenRange prove_bounds_incremental(const Network& net, const Box& input,
                                     int sims, const Grid& out_grid,
                                     std::uint64_t seed);

// One concrete closed-loop control period is simulate_period; simulate_cells
// runs seeded random trajectories from every cell and flags the cells whose
// trajectories enter an unsafe box within the horizon.
Eigen::VectorXd simulate_period(const PreparedScenario& ps,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& z);
CellSet simulate_cells(const PreparedScenario& ps, int runs_per_cell,
                       int horizon);

// Serialization: result JSON and plotting CSVs of cell rectangles.
std::string reach_result_json(const ReachResult& r, const Grid& g);
std::string reach_result_csv(const ReachResult& r, const Grid& g);
std::string cells_csv(const CellSet& cells, const Grid& g);

}  // namespace gridreach

#endif
