#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "doctest.h"

#include <Eigen/Dense>

#include "json.hpp"

#include "gridreach/errors.hpp"
#include "gridreach/propagation.hpp"
#include "gridreach/reach.hpp"
#include "gridreach/rng.hpp"
#include "gridreach/scenario.hpp"

using namespace gridreach;

namespace {

// A scalar closed loop over [0, 4] with 4 cells.  The surrogate ignores
// state and latent (command held at zero), so the plant map x' = a x + c
// alone drives the evolution, optionally floored at zero.
Scenario scalar_loop(double a, double c, std::vector<int> floors,
                     std::vector<Box> unsafe, Engine engine, int m) {
  AffineDynamics map{Eigen::MatrixXd::Constant(1, 1, a),
                     Eigen::MatrixXd::Zero(1, 1),
                     Eigen::VectorXd::Constant(1, c)};
  return Scenario{
      /*surrogate=*/Network(2, {Layer::affine(Eigen::MatrixXd::Zero(1, 2),
                                              Eigen::VectorXd::Zero(1))}),
      /*control=*/std::nullopt,
      /*dynamics=*/AffinePlant{std::move(map), 1, std::move(floors)},
      /*grid=*/Grid(Box{Interval(0.0, 4.0)}, {4}),
      /*latent_box=*/Box{Interval(-1.0, 1.0)},
      /*unsafe=*/std::move(unsafe),
      /*engine=*/engine,
      /*m=*/m,
      /*k_max=*/10,
      /*split_cap=*/4096,
      /*r0=*/Box{Interval(0.25, 0.75)},
      /*seed=*/7,
      /*workers=*/0,
      /*output_dir=*/"."};
}

// A planar loop with a genuine relu surrogate: u = w2 . relu(W1 (x, z)),
// plant a damped rotation nudged by the command.
Scenario planar_relu_loop(Engine engine, int m, int workers, int split_cap) {
  Eigen::MatrixXd w1(3, 3);
  w1 << 1.0, 0.5, 0.2,  //
      -0.6, 1.0, -0.3,  //
      0.4, -0.8, 0.5;
  Eigen::MatrixXd w2(1, 3);
  w2 << 0.5, -0.4, 0.3;
  AffineDynamics map{(Eigen::MatrixXd(2, 2) << 0.9, -0.2, 0.2, 0.9).finished(),
                     (Eigen::MatrixXd(2, 1) << 0.05, 0.0).finished(),
                     Eigen::VectorXd::Zero(2)};
  return Scenario{
      /*surrogate=*/
      Network(3, {Layer::affine(w1, Eigen::VectorXd::Zero(3)), Layer::relu(),
                  Layer::affine(w2, Eigen::VectorXd::Zero(1))}),
      /*control=*/std::nullopt,
      /*dynamics=*/AffinePlant{std::move(map), 1, {}},
      /*grid=*/Grid(Box{Interval(-2.0, 2.0), Interval(-2.0, 2.0)}, {4, 4}),
      /*latent_box=*/Box{Interval(-0.5, 0.5)},
      /*unsafe=*/{Box{Interval(1.5, 2.0), Interval(1.5, 2.0)}},
      /*engine=*/engine,
      /*m=*/m,
      /*k_max=*/6,
      /*split_cap=*/split_cap,
      /*r0=*/Box{Interval(-0.25, 0.25), Interval(-0.25, 0.25)},
      /*seed=*/11,
      /*workers=*/workers,
      /*output_dir=*/"."};
}

// A taxiing loop whose commanded steering angle straddles the tan pole on
// every cell: phi = 0.1 * heading + pi/2.
Scenario taxi_pole_loop() {
  Eigen::MatrixXd w(1, 3);
  w << 0.0, 0.1, 0.0;
  Eigen::VectorXd b(1);
  b << std::acos(-1.0) / 2.0;
  TaxiParams tp;
  tp.substeps = 2;
  return Scenario{
      /*surrogate=*/Network(3, {Layer::affine(w, b)}),
      /*control=*/std::nullopt,
      /*dynamics=*/tp,
      /*grid=*/Grid(Box{Interval(0.0, 1.0), Interval(-0.5, 0.5)}, {2, 2}),
      /*latent_box=*/Box{Interval(-0.1, 0.1)},
      /*unsafe=*/{},
      /*engine=*/Engine::StarComposed,
      /*m=*/1,
      /*k_max=*/5,
      /*split_cap=*/4096,
      /*r0=*/Box{Interval(0.1, 0.4), Interval(-0.4, -0.1)},
      /*seed=*/3,
      /*workers=*/0,
      /*output_dir=*/"."};
}

std::int64_t flat1(const Grid& g, int i) { return g.flatten(CellIndex{{i}}); }

CellSet set_of(const Grid& g, std::vector<std::int64_t> flats) {
  CellSet s(g);
  for (std::int64_t f : flats) s.insert(f);
  return s;
}

}  // namespace

TEST_CASE("forward fixpoint on a contraction settles in one block") {
  for (Engine e :
       {Engine::Baseline, Engine::IbpComposed, Engine::StarComposed}) {
    PreparedScenario ps = prepare(scalar_loop(
        0.5, 0.25, {}, {Box{Interval(3.5, 4.0)}}, e, 1));
    ReachResult r = forward_reach(ps);
    const Grid& g = ps.sc.grid;

    // Cell [0,1] maps to [0.25, 0.75], strictly inside itself.
    CHECK(r.per_step.size() == 2);
    CHECK(r.converged_at);
    CHECK(*r.converged_at == 0);
    CHECK(r.global == set_of(g, {0}));
    CHECK(r.per_step[0] == set_of(g, {0}));
    CHECK(r.per_step[1] == set_of(g, {0}));
    CHECK(r.is_safe);
    CHECK(r.degraded.empty());
    CHECK(r.escaped_sources.empty());
    CHECK(r.pole_sources.empty());
    // Past the computed range the converged sequence repeats.
    CHECK(r.cells_at_step(37) == set_of(g, {0}));
  }
}

TEST_CASE("forward fixpoint flags unsafe overlap at step zero") {
  PreparedScenario ps = prepare(scalar_loop(
      0.5, 0.25, {}, {Box{Interval(0.0, 0.49)}}, Engine::StarComposed, 1));
  ReachResult r = forward_reach(ps);
  CHECK(!r.is_safe);
  CHECK(r.global.intersects(ps.unsafe_cells));
}

TEST_CASE("forward fixpoint accumulates a shift until it escapes") {
  PreparedScenario ps = prepare(
      scalar_loop(1.0, 1.0, {}, {}, Engine::StarComposed, 1));
  ReachResult r = forward_reach(ps);
  const Grid& g = ps.sc.grid;

  // x' = x + 1: {0} -> {0,1,2} -> {0..3} -> repeat, with cell 3 leaving.
  CHECK(r.converged_at);
  CHECK(*r.converged_at == 2);
  CHECK(r.per_step.size() == 4);
  CHECK(r.per_step[1] == set_of(g, {0, 1, 2}));
  CHECK(r.global == set_of(g, {0, 1, 2, 3}));
  CHECK(r.escaped_sources == set_of(g, {3}));
  CHECK(!r.is_safe);  // egress is treated as unsafe
}

TEST_CASE("forward fixpoint reports non-convergence honestly") {
  // x' = -0.5 x + 3 cycles between cell families under one-period
  // abstraction, so the single-period frontier never repeats.
  Scenario sc = scalar_loop(-0.5, 3.0, {}, {}, Engine::StarComposed, 1);
  sc.k_max = 7;
  PreparedScenario ps = prepare(std::move(sc));
  ReachResult r = forward_reach(ps);
  CHECK(!r.converged_at);
  CHECK(r.per_step.size() == 8);  // C_0 .. C_7, then the budget ran out
  CHECK_THROWS_AS(r.cells_at_step(8), AnalysisError);
}

TEST_CASE("two-period composition is tighter than two abstractions") {
  PreparedScenario ps = prepare(
      scalar_loop(-0.5, 3.0, {}, {}, Engine::StarComposed, 2));
  const Grid& g = ps.sc.grid;

  // One period sends [0,1] to [2.5, 3]; abstracting and stepping again
  // would give [1.5, 2] over cells {0,1,2}.  The exact two-period image is
  // [1.5, 1.75], inside cell 1 alone.
  CellReach one = freach_cell(CellIndex{{0}}, 1, ps);
  CellReach two = freach_cell(CellIndex{{0}}, 2, ps);
  CHECK(one.cells == set_of(g, {2, 3}));
  CHECK(two.cells == set_of(g, {1}));
  CHECK(!two.escaped);
  CHECK(!two.degraded);

  CHECK_THROWS_AS(freach_cell(CellIndex{{0}}, 0, ps), AnalysisError);
  CHECK_THROWS_AS(freach_cell(CellIndex{{0}}, 3, ps), AnalysisError);
}

TEST_CASE("forward frontier with period two converges") {
  PreparedScenario ps = prepare(
      scalar_loop(-0.5, 3.0, {}, {}, Engine::StarComposed, 2));
  ReachResult r = forward_reach(ps);
  const Grid& g = ps.sc.grid;
  CHECK(r.converged_at);
  CHECK(*r.converged_at == 4);
  CHECK(r.per_step.size() == 7);
  CHECK(r.per_step[1] == set_of(g, {2, 3}));  // one period from {0}
  CHECK(r.per_step[2] == set_of(g, {1}));     // two exact periods from {0}
  CHECK(r.per_step.back() == set_of(g, {1, 2}));
  CHECK(r.global == set_of(g, {0, 1, 2, 3}));
  CHECK(r.is_safe);
  // Extrapolation folds into the last m computed steps.
  CHECK(r.cells_at_step(7) == r.per_step[5]);
  CHECK(r.cells_at_step(8) == r.per_step[6]);
  CHECK(r.cells_at_step(101) == r.per_step[5]);
}

TEST_CASE("cells_at_step folds by the convergence period") {
  Grid g(Box{Interval(0.0, 4.0)}, {4});
  ReachResult r;
  r.m = 2;
  r.per_step = {set_of(g, {0}), set_of(g, {1}), set_of(g, {2}),
                set_of(g, {3}), set_of(g, {2})};
  r.converged_at = 2;  // C_2 == C_4 by construction
  r.global = set_of(g, {0, 1, 2, 3});

  CHECK(r.cells_at_step(3) == set_of(g, {3}));
  CHECK(r.cells_at_step(5) == set_of(g, {3}));  // odd offsets repeat C_3
  CHECK(r.cells_at_step(6) == set_of(g, {2}));  // even offsets repeat C_4
  CHECK(r.cells_at_step(101) == set_of(g, {3}));
  CHECK(r.cells_at_step(100) == set_of(g, {2}));
  CHECK_THROWS_AS(r.cells_at_step(-1), AnalysisError);
}

TEST_CASE("initial sets outside or straddling the grid are rejected") {
  PreparedScenario ps = prepare(
      scalar_loop(0.5, 0.25, {}, {}, Engine::StarComposed, 1));
  CHECK_THROWS_AS(forward_reach(ps, Box{Interval(3.5, 4.5)}), ConfigError);
  ps.sc.r0.reset();
  CHECK_THROWS_AS(forward_reach(ps), ConfigError);
}

TEST_CASE("split budget exhaustion degrades to interval fallback") {
  // u = relu(x) through a surrogate that straddles zero only on the middle
  // cell of [-2, 2] / 3.
  Eigen::MatrixXd w1(1, 2);
  w1 << 1.0, 0.0;
  Eigen::MatrixXd w2(1, 1);
  w2 << 1.0;
  AffineDynamics map{Eigen::MatrixXd::Identity(1, 1),
                     Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};
  Scenario sc{
      /*surrogate=*/
      Network(2, {Layer::affine(w1, Eigen::VectorXd::Zero(1)), Layer::relu(),
                  Layer::affine(w2, Eigen::VectorXd::Zero(1))}),
      /*control=*/std::nullopt,
      /*dynamics=*/AffinePlant{map, 1, {}},
      /*grid=*/Grid(Box{Interval(-2.0, 2.0)}, {3}),
      /*latent_box=*/Box{Interval(-1.0, 1.0)},
      /*unsafe=*/{},
      /*engine=*/Engine::StarComposed,
      /*m=*/1,
      /*k_max=*/3,
      /*split_cap=*/1,
      /*r0=*/std::nullopt,
      /*seed=*/0,
      /*workers=*/0,
      /*output_dir=*/"."};
  PreparedScenario tight = prepare(sc);
  sc.split_cap = 4096;
  PreparedScenario roomy = prepare(std::move(sc));

  CellReach mid_tight = freach_cell(CellIndex{{1}}, 1, tight);
  CellReach mid_roomy = freach_cell(CellIndex{{1}}, 1, roomy);
  CHECK(mid_tight.degraded);
  CHECK(mid_tight.box);
  CHECK(!mid_roomy.degraded);
  // The fallback is coarser but never tighter than the exact result.
  CHECK(mid_roomy.cells.is_subset_of(mid_tight.cells));

  // The outer cells never straddle, so even the tight budget suffices.
  CHECK(!freach_cell(CellIndex{{0}}, 1, tight).degraded);
  CHECK(!freach_cell(CellIndex{{2}}, 1, tight).degraded);
}

TEST_CASE("a tan pole floods the cell and poisons the run") {
  PreparedScenario ps = prepare(taxi_pole_loop());
  const Grid& g = ps.sc.grid;

  CellReach r = freach_cell(CellIndex{{0, 0}}, 1, ps);
  CHECK(r.pole);
  CHECK(r.cells.count() == g.total_cells());

  ReachResult fwd = forward_reach(ps);
  CHECK(!fwd.is_safe);
  CHECK(!fwd.pole_sources.empty());
  CHECK(fwd.global.count() == g.total_cells());
}

TEST_CASE("star cells are contained in interval cells per source cell") {
  PreparedScenario star =
      prepare(planar_relu_loop(Engine::StarComposed, 2, 0, 4096));
  PreparedScenario ibpd =
      prepare(planar_relu_loop(Engine::IbpComposed, 2, 0, 4096));
  const Grid& g = star.sc.grid;
  for (std::int64_t f = 0; f < g.total_cells(); ++f) {
    for (int i = 1; i <= 2; ++i) {
      CellReach rs = freach_cell(g.unflatten(f), i, star);
      CellReach rb = freach_cell(g.unflatten(f), i, ibpd);
      REQUIRE(!rs.degraded);
      CHECK(rs.cells.is_subset_of(rb.cells));
      if (rs.escaped) CHECK(rb.escaped);
    }
  }
}

TEST_CASE("parallel and serial kernels produce identical results") {
  PreparedScenario serial =
      prepare(planar_relu_loop(Engine::StarComposed, 2, 0, 4096));
  PreparedScenario parallel =
      prepare(planar_relu_loop(Engine::StarComposed, 2, 4, 4096));
  const Grid& g = serial.sc.grid;
  CellSet all(g);
  for (std::int64_t f = 0; f < g.total_cells(); ++f) all.insert(f);

  for (int i = 1; i <= 2; ++i) {
    FReachSummary a = freach_serial(all, i, serial);
    FReachSummary b = freach_parallel(all, i, parallel);
    CHECK(a.cells == b.cells);
    CHECK(a.escaped_sources == b.escaped_sources);
    CHECK(a.degraded_sources == b.degraded_sources);
    CHECK(a.pole_sources == b.pole_sources);
  }
  REQUIRE(serial.freach_cache.size() == parallel.freach_cache.size());
  auto it_a = serial.freach_cache.begin();
  auto it_b = parallel.freach_cache.begin();
  for (; it_a != serial.freach_cache.end(); ++it_a, ++it_b) {
    CHECK(it_a->first == it_b->first);
    CHECK(it_a->second.cells == it_b->second.cells);
    CHECK(it_a->second.escaped == it_b->second.escaped);
    CHECK(it_a->second.degraded == it_b->second.degraded);
    CHECK(it_a->second.pole == it_b->second.pole);
  }

  // End-to-end determinism across worker counts: byte-identical reports.
  PreparedScenario s2 =
      prepare(planar_relu_loop(Engine::StarComposed, 2, 0, 4096));
  PreparedScenario p2 =
      prepare(planar_relu_loop(Engine::StarComposed, 2, 4, 4096));
  const std::string ja = reach_result_json(forward_reach(s2), g);
  const std::string jb = reach_result_json(forward_reach(p2), g);
  CHECK(ja == jb);
}

TEST_CASE("memoization reuses per-cell analyses") {
  PreparedScenario ps = prepare(
      scalar_loop(1.0, 1.0, {}, {}, Engine::StarComposed, 1));
  const Grid& g = ps.sc.grid;
  CellSet all(g);
  for (std::int64_t f = 0; f < g.total_cells(); ++f) all.insert(f);

  FReachSummary first = freach(all, 1, ps);
  const std::size_t entries = ps.freach_cache.size();
  FReachSummary again = freach(all, 1, ps);
  CHECK(ps.freach_cache.size() == entries);
  CHECK(first.cells == again.cells);
  CHECK(first.escaped_sources == again.escaped_sources);
}

TEST_CASE("transition maps invert exactly and feed the backward fixpoint") {
  // x' = max(x - 1, 0): everything drains toward the origin, so only the
  // cell containing the unsafe band near the top is ever in danger.
  for (int m : {1, 2, 3}) {
    PreparedScenario ps = prepare(scalar_loop(
        1.0, -1.0, {0}, {Box{Interval(3.5, 4.0)}}, Engine::StarComposed, m));
    const Grid& g = ps.sc.grid;
    TransitionMaps maps = build_transition_maps(ps);
    REQUIRE(maps.m == m);
    REQUIRE(static_cast<int>(maps.fwd.size()) == m);
    CHECK(maps.flagged.empty());

    if (m == 1) {
      CHECK(maps.fwd[0][0] == set_of(g, {0}));
      CHECK(maps.fwd[0][1] == set_of(g, {0, 1}));
      CHECK(maps.fwd[0][2] == set_of(g, {0, 1, 2}));
      CHECK(maps.fwd[0][3] == set_of(g, {1, 2, 3}));
      CHECK(maps.bwd[0][3] == set_of(g, {3}));
    }
    for (int i = 0; i < m; ++i) {
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        for (std::int64_t t = 0; t < g.total_cells(); ++t) {
          CHECK(maps.fwd[i][c].contains(t) == maps.bwd[i][t].contains(c));
        }
      }
    }

    CellSet possibly_unsafe = backward_reach(maps, ps);
    CHECK(possibly_unsafe == set_of(g, {3}));
  }
}

TEST_CASE("backward fixpoint drags every upstream cell in") {
  // x' = x + 1: every cell eventually reaches the top band, and cell 3
  // leaves the grid, so nothing is provably safe.
  PreparedScenario ps = prepare(scalar_loop(
      1.0, 1.0, {}, {Box{Interval(3.5, 4.0)}}, Engine::StarComposed, 1));
  TransitionMaps maps = build_transition_maps(ps);
  CHECK(maps.flagged == set_of(ps.sc.grid, {3}));
  CellSet possibly_unsafe = backward_reach(maps, ps);
  CHECK(possibly_unsafe.count() == ps.sc.grid.total_cells());
}

TEST_CASE("bound prover: exact fit needs no widening") {
  Network net(1, {Layer::affine(Eigen::MatrixXd::Identity(1, 1),
                                Eigen::VectorXd::Zero(1))});
  Grid g(Box{Interval(0.0, 4.0)}, {4});
  ProvenRange pr =
      prove_bounds_incremental(net, Box{Interval(0.5, 0.5)}, 16, g, 42);
  REQUIRE(pr.index_range.size() == 1);
  CHECK(pr.index_range[0] == std::pair<int, int>{0, 0});
  CHECK(pr.box[0].lo == 0.0);
  CHECK(pr.box[0].hi == 1.0);
}

TEST_CASE("bound prover widens until the interval bounds fit") {
  Network net(1, {Layer::affine(Eigen::MatrixXd::Constant(1, 1, 2.0),
                                Eigen::VectorXd::Zero(1))});
  Grid g(Box{Interval(0.0, 4.0)}, {8});
  // One sample seeds a single cell; the bounds [0.8, 2.4] force growth.
  ProvenRange pr =
      prove_bounds_incremental(net, Box{Interval(0.4, 1.2)}, 1, g, 9);
  CHECK(pr.box[0].lo <= 0.8);
  CHECK(pr.box[0].hi >= 2.4);
  CHECK(pr.box[0].lo == g.edge(0, pr.index_range[0].first));
  CHECK(pr.box[0].hi == g.edge(0, pr.index_range[0].second + 1));
}

TEST_CASE("bound prover refuses ranges that leave the grid") {
  Network net(1, {Layer::affine(Eigen::MatrixXd::Identity(1, 1),
                                Eigen::VectorXd::Zero(1))});
  Grid g(Box{Interval(0.0, 4.0)}, {4});
  // Every sample lands outside the output grid.
  CHECK_THROWS_AS(
      prove_bounds_incremental(net, Box{Interval(4.1, 4.5)}, 8, g, 1),
      OutOfDomain);
  // Samples fit but the proven bounds would cross the top edge.
  Network doubler(1, {Layer::affine(Eigen::MatrixXd::Constant(1, 1, 2.0),
                                    Eigen::VectorXd::Zero(1))});
  CHECK_THROWS_AS(
      prove_bounds_incremental(doubler, Box{Interval(1.0, 2.5)}, 64, g, 1),
      OutOfDomain);
}

TEST_CASE("bound prover output contains the network image") {
  std::mt19937_64 rng = make_rng(5);
  Eigen::MatrixXd w1(3, 2), w2(2, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) w1(r, c) = normal(rng) * 0.4;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) w2(r, c) = normal(rng) * 0.4;
  Network net(2, {Layer::affine(w1, Eigen::VectorXd::Zero(3)), Layer::relu(),
                  Layer::affine(w2, Eigen::VectorXd::Zero(2))});
  const Box input{Interval(-1.0, 1.0), Interval(-1.0, 1.0)};
  Grid g(Box{Interval(-4.0, 4.0), Interval(-4.0, 4.0)}, {16, 16});
  ProvenRange pr = prove_bounds_incremental(net, input, 32, g, 77);

  const Box got = ibp(net, input);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(pr.box[d].lo <= got[d].lo);
    CHECK(pr.box[d].hi >= got[d].hi);
  }
  Eigen::VectorXd x(2);
  for (int s = 0; s < 500; ++s) {
    x << uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0);
    const Eigen::VectorXd y = net.eval(x);
    CHECK(pr.box[0].lo <= y[0]);
    CHECK(y[0] <= pr.box[0].hi);
    CHECK(pr.box[1].lo <= y[1]);
    CHECK(y[1] <= pr.box[1].hi);
  }
}

TEST_CASE("simulation flags exactly the cells whose runs go bad") {
  // No unsafe boxes: nothing to hit.
  PreparedScenario clean = prepare(
      scalar_loop(1.0, -1.0, {0}, {}, Engine::StarComposed, 1));
  CHECK(simulate_cells(clean, 3, 5).empty());

  // Draining flow with an unsafe band at the bottom: every cell reaches it.
  PreparedScenario drain = prepare(scalar_loop(
      1.0, -1.0, {0}, {Box{Interval(0.0, 0.5)}}, Engine::StarComposed, 1));
  CHECK(simulate_cells(drain, 2, 6).count() == 4);

  // With horizon zero only cells already inside the band are flagged.
  CellSet start_only = simulate_cells(drain, 40, 0);
  CHECK(start_only.contains(flat1(drain.sc.grid, 0)));
  CHECK(start_only.count() == 1);

  // Pole crossings during simulation count as bad runs.
  PreparedScenario pole = prepare(taxi_pole_loop());
  CHECK(simulate_cells(pole, 1, 3).count() == 4);

  CHECK_THROWS_AS(simulate_cells(drain, 0, 5), AnalysisError);
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  PreparedScenario a = prepare(scalar_loop(
      1.0, -1.0, {0}, {Box{Interval(0.0, 0.3)}}, Engine::StarComposed, 1));
  PreparedScenario b = prepare(scalar_loop(
      1.0, -1.0, {0}, {Box{Interval(0.0, 0.3)}}, Engine::StarComposed, 1));
  CHECK(simulate_cells(a, 3, 4) == simulate_cells(b, 3, 4));
}

TEST_CASE("result serialization: pinned keys, null marker, cell rows") {
  Grid g(Box{Interval(0.0, 4.0)}, {4});
  ReachResult r;
  r.m = 1;
  r.per_step = {set_of(g, {0}), set_of(g, {0, 2})};
  r.global = set_of(g, {0, 2});
  r.is_safe = true;
  r.degraded = CellSet(g);

  const std::string text = reach_result_json(r, g);
  const nlohmann::json doc = nlohmann::json::parse(text);
  REQUIRE(doc.size() == 5);
  CHECK(doc.contains("per_step"));
  CHECK(doc.contains("global"));
  CHECK(doc.contains("converged_at"));
  CHECK(doc.contains("is_safe"));
  CHECK(doc.contains("degraded"));
  CHECK(doc["converged_at"].is_null());
  CHECK(doc["is_safe"] == true);
  CHECK(doc["global"].size() == 2);
  CHECK(doc["per_step"][1][1][0] == 2);

  r.converged_at = 0;
  const nlohmann::json doc2 =
      nlohmann::json::parse(reach_result_json(r, g));
  CHECK(doc2["converged_at"] == 0);

  const std::string csv = reach_result_csv(r, g);
  CHECK(csv.rfind("step,i0,lo0,hi0\n", 0) == 0);
  CHECK(csv.find("\n1,2,2,3\n") != std::string::npos);

  const std::string cells = cells_csv(r.global, g);
  CHECK(cells.rfind("i0,lo0,hi0\n", 0) == 0);
  CHECK(cells.find("\n2,2,3\n") != std::string::npos);
}
