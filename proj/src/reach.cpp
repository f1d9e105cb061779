#include "gridreach/reach.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <omp.h>

#include "json.hpp"

#include "gridreach/errors.hpp"
#include "gridreach/propagation.hpp"
#include "gridreach/rng.hpp"

namespace gridreach {

namespace {

CellSet full_set(const Grid& g) {
  CellSet s(g);
  for (std::int64_t f = 0; f < g.total_cells(); ++f) s.insert(f);
  return s;
}

// One interval period from a state box: bound the command over the box and
// the latents, then push the box through the plant.  Used by the baseline
// engine and as the sound fallback when star propagation runs out of its
// split budget.
Box interval_period(const PreparedScenario& ps, const Box& state) {
  const Box u = ibp(ps.control_net, state.concat(ps.sc.latent_box));
  if (ps.is_taxi()) {
    return taxi_monotonic_step(state, u[0], ps.taxi());
  }
  return affine_interval_step(state, u, ps.plant->map, ps.plant->substeps,
                              ps.plant->floor_dims);
}

// Applies the plant to a union of (state, command) stars for one control
// period, producing (state) stars.  The command block stays attached across
// substeps so each substep reuses the same held command.
void star_plant_period(const PreparedScenario& ps,
                       std::vector<StarSet>& joint_leaves,
                       std::vector<StarSet>& out_states, int split_cap) {
  if (ps.is_taxi()) {
    const TaxiParams& P = ps.taxi();
    Eigen::MatrixXd drop = Eigen::MatrixXd::Zero(2, 3);
    drop(0, 0) = 1.0;
    drop(1, 1) = 1.0;
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    for (const StarSet& leaf : joint_leaves) {
      // phi is invariant across the period's substeps: bound it once.
      const Interval phi = leaf.coord_bounds(2);
      StarSet cur = leaf;
      for (int s = 0; s < P.substeps; ++s) {
        cur = taxi_linearized_substep(cur, P, phi);
      }
      out_states.push_back(cur.affine_map(drop, zero2));
    }
    return;
  }

  const AffinePlant& plant = *ps.plant;
  const Eigen::Index n = plant.map.A_x.rows();
  const Eigen::Index nu = plant.map.A_u.cols();
  // Substep on the joint (x, u) space, keeping u for the next substep.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + nu, n + nu);
  M.topLeftCorner(n, n) = plant.map.A_x;
  M.topRightCorner(n, nu) = plant.map.A_u;
  M.bottomRightCorner(nu, nu) = Eigen::MatrixXd::Identity(nu, nu);
  Eigen::VectorXd cv = Eigen::VectorXd::Zero(n + nu);
  cv.head(n) = plant.map.c;

  Eigen::MatrixXd drop = Eigen::MatrixXd::Zero(n, n + nu);
  drop.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);

  std::vector<StarSet> work = std::move(joint_leaves);
  joint_leaves.clear();
  for (int s = 0; s < plant.substeps; ++s) {
    std::vector<StarSet> next;
    next.reserve(work.size());
    for (const StarSet& leaf : work) {
      StarSet stepped = leaf.affine_map(M, cv);
      std::vector<StarSet> pieces{std::move(stepped)};
      for (int f : plant.floor_dims) {
        std::vector<StarSet> floored;
        floored.reserve(pieces.size() + 1);
        for (const StarSet& piece : pieces) {
          StarUnion u = relu_coordinate(piece, f);
          for (StarSet& t : u.stars) floored.push_back(std::move(t));
        }
        pieces = std::move(floored);
      }
      for (StarSet& piece : pieces) {
        next.push_back(std::move(piece));
        if (static_cast<int>(next.size()) > split_cap) {
          throw SplitBudgetExceeded(
              "plant stepping needs more than " + std::to_string(split_cap) +
              " pieces");
        }
      }
    }
    work = std::move(next);
  }
  for (StarSet& leaf : work) out_states.push_back(leaf.affine_map(drop, zero));
}

// Exact star analysis of i periods from a cell, or throws
// SplitBudgetExceeded / PoleCrossed.
StarUnion star_periods(const PreparedScenario& ps, const Box& cell, int i) {
  std::vector<StarSet> states;
  states.push_back(StarSet::from_box(cell));
  for (int period = 0; period < i; ++period) {
    std::vector<StarSet> next;
    for (const StarSet& state : states) {
      // Fresh latent block per period: the environment draws independently.
      StarUnion joint = exact_star(ps.joint_net,
                                   state.cartesian_box(ps.sc.latent_box),
                                   ps.sc.split_cap);
      star_plant_period(ps, joint.stars, next, ps.sc.split_cap);
      if (static_cast<int>(next.size()) > ps.sc.split_cap) {
        throw SplitBudgetExceeded("period composition needs more than " +
                                  std::to_string(ps.sc.split_cap) +
                                  " pieces");
      }
    }
    states = std::move(next);
  }
  StarUnion out;
  out.stars = std::move(states);
  return out;
}

CachedReach to_cached(const CellReach& r) {
  return CachedReach{r.cells, r.escaped, r.degraded, r.pole};
}

}  // namespace

CellReach freach_cell(const CellIndex& c, int i, const PreparedScenario& ps) {
  if (i < 1 || i > ps.sc.m) {
    throw AnalysisError("freach period count must be in 1..m");
  }
  const Grid& g = ps.sc.grid;
  const Box cell = g.cell_box(c);

  CellReach r;
  r.cells = CellSet(g);
  try {
    switch (ps.sc.engine) {
      case Engine::Baseline: {
        // Defined for m = 1 (prepare() enforces it).
        r.box = interval_period(ps, cell);
        break;
      }
      case Engine::IbpComposed: {
        Box in = cell;
        for (int p = 0; p < i; ++p) in = in.concat(ps.sc.latent_box);
        r.box = ibp(ps.unrolled[static_cast<std::size_t>(i - 1)], in);
        break;
      }
      case Engine::StarComposed: {
        try {
          r.stars = star_periods(ps, cell, i);
        } catch (const SplitBudgetExceeded&) {
          // Sound fallback: chain interval periods for this cell.
          r.degraded = true;
          Box out = cell;
          for (int p = 0; p < i; ++p) out = interval_period(ps, out);
          r.box = out;
        }
        break;
      }
    }

    AlphaResult a = r.box ? alpha(*r.box, g) : alpha(r.stars, g);
    r.cells = std::move(a.cells);
    r.escaped = a.escaped;
  } catch (const PoleCrossed&) {
    // The heading dynamics left the model's domain somewhere in this cell's
    // tube; nothing can be bounded, so the cell reaches everything.
    r.pole = true;
    r.stars.stars.clear();
    r.box.reset();
    r.cells = full_set(g);
  } catch (const OutOfDomain&) {
    // The whole region left the grid: no cells inside, egress flagged.
    r.escaped = true;
    r.stars.stars.clear();
    r.box.reset();
    r.cells = CellSet(g);
  }
  return r;
}

namespace {

FReachSummary summarize(const CellSet& from, int i, PreparedScenario& ps) {
  const Grid& g = ps.sc.grid;
  FReachSummary s{CellSet(g), CellSet(g), CellSet(g), CellSet(g)};
  for (std::int64_t flat : from.to_sorted()) {
    const CachedReach& cr = ps.freach_cache.at({flat, i});
    s.cells.unite(cr.cells);
    if (cr.escaped) s.escaped_sources.insert(flat);
    if (cr.degraded) s.degraded_sources.insert(flat);
    if (cr.pole) s.pole_sources.insert(flat);
  }
  return s;
}

std::vector<std::int64_t> missing_cells(const CellSet& from, int i,
                                        const PreparedScenario& ps) {
  std::vector<std::int64_t> todo;
  for (std::int64_t flat : from.to_sorted()) {
    if (ps.freach_cache.find({flat, i}) == ps.freach_cache.end()) {
      todo.push_back(flat);
    }
  }
  return todo;
}

}  // namespace

FReachSummary freach_serial(const CellSet& from, int i, PreparedScenario& ps) {
  for (std::int64_t flat : missing_cells(from, i, ps)) {
    ps.freach_cache.emplace(
        std::make_pair(flat, i),
        to_cached(freach_cell(ps.sc.grid.unflatten(flat), i, ps)));
  }
  return summarize(from, i, ps);
}

FReachSummary freach_parallel(const CellSet& from, int i,
                              PreparedScenario& ps) {
  const std::vector<std::int64_t> todo = missing_cells(from, i, ps);
  std::vector<CachedReach> results(todo.size());
  const int threads = ps.sc.workers > 0 ? ps.sc.workers : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(todo.size()); ++t) {
    try {
      results[static_cast<std::size_t>(t)] = to_cached(freach_cell(
          ps.sc.grid.unflatten(todo[static_cast<std::size_t>(t)]), i, ps));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  // Serial insertion in index order keeps the cache layout (and therefore
  // every downstream artifact) identical to the serial kernel's.
  for (std::size_t t = 0; t < todo.size(); ++t) {
    ps.freach_cache.emplace(std::make_pair(todo[t], i),
                            std::move(results[t]));
  }
  return summarize(from, i, ps);
}

FReachSummary freach(const CellSet& from, int i, PreparedScenario& ps) {
  if (ps.sc.workers == 0) return freach_serial(from, i, ps);
  return freach_parallel(from, i, ps);
}

const CellSet& ReachResult::cells_at_step(int k) const {
  if (k < 0) throw AnalysisError("step index must be nonnegative");
  const int computed = static_cast<int>(per_step.size()) - 1;
  if (k <= computed) return per_step[static_cast<std::size_t>(k)];
  if (!converged_at) {
    throw AnalysisError("step " + std::to_string(k) +
                        " was not computed and the sequence did not "
                        "converge, so it cannot be extrapolated");
  }
  // After convergence the sequence is periodic with period m from step
  // converged_at on: fold k back into the computed tail.
  const int base = computed - m;
  return per_step[static_cast<std::size_t>(base + (k - base) % m)];
}

ReachResult forward_reach(PreparedScenario& ps, const Box& r0) {
  const Grid& g = ps.sc.grid;
  const int m = ps.sc.m;

  AlphaResult a0 = alpha(r0, g);
  if (a0.escaped) {
    throw ConfigError("the initial set must lie inside the grid");
  }

  ReachResult res;
  res.m = m;
  res.global = CellSet(g);
  res.degraded = CellSet(g);
  res.escaped_sources = CellSet(g);
  res.pole_sources = CellSet(g);

  res.per_step.push_back(a0.cells);
  res.global.unite(a0.cells);

  CellSet frontier = a0.cells;
  int k = 0;
  while (k < ps.sc.k_max) {
    for (int i = 1; i <= m; ++i) {
      FReachSummary s = freach(frontier, i, ps);
      res.per_step.push_back(s.cells);
      res.global.unite(s.cells);
      res.degraded.unite(s.degraded_sources);
      res.escaped_sources.unite(s.escaped_sources);
      res.pole_sources.unite(s.pole_sources);
    }
    const CellSet& next_frontier = res.per_step.back();
    if (frontier == next_frontier) {
      res.converged_at = k;
      frontier = next_frontier;
      k += m;
      break;
    }
    frontier = next_frontier;
    k += m;
  }

  res.is_safe = !res.global.intersects(ps.unsafe_cells) &&
                res.escaped_sources.empty() && res.pole_sources.empty();
  return res;
}

ReachResult forward_reach(PreparedScenario& ps) {
  if (!ps.sc.r0) {
    throw ConfigError("the scenario has no \"r0\" initial set");
  }
  return forward_reach(ps, *ps.sc.r0);
}

TransitionMaps build_transition_maps(PreparedScenario& ps) {
  const Grid& g = ps.sc.grid;
  const int m = ps.sc.m;
  TransitionMaps maps;
  maps.m = m;
  maps.flagged = CellSet(g);

  const CellSet all = full_set(g);
  for (int i = 1; i <= m; ++i) {
    freach(all, i, ps);  // fills the cache for every cell
    std::vector<CellSet> fwd(static_cast<std::size_t>(g.total_cells()),
                             CellSet(g));
    std::vector<CellSet> bwd(static_cast<std::size_t>(g.total_cells()),
                             CellSet(g));
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
      const CachedReach& cr = ps.freach_cache.at({c, i});
      fwd[static_cast<std::size_t>(c)] = cr.cells;
      if (cr.escaped || cr.pole) maps.flagged.insert(c);
      for (std::int64_t t : cr.cells.to_sorted()) {
        bwd[static_cast<std::size_t>(t)].insert(c);
      }
    }
    maps.fwd.push_back(std::move(fwd));
    maps.bwd.push_back(std::move(bwd));
  }
  return maps;
}

CellSet backward_reach(const TransitionMaps& maps,
                       const PreparedScenario& ps) {
  const Grid& g = ps.sc.grid;
  const int m = maps.m;
  if (m != ps.sc.m || static_cast<int>(maps.fwd.size()) != m) {
    throw AnalysisError("transition maps do not match the scenario");
  }

  // Seed: the unsafe cells themselves, everything that reaches them in
  // fewer than m periods (those entries are checked against the unsafe set
  // directly, not iterated), and every flagged cell.
  CellSet A = ps.unsafe_cells;
  A.unite(maps.flagged);
  for (int i = 1; i < m; ++i) {
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
      if (maps.fwd[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(c)]
              .intersects(ps.unsafe_cells)) {
        A.insert(c);
      }
    }
  }

  // Fixpoint on m-period predecessors of the newly added cells.
  CellSet fresh = A;
  while (!fresh.empty()) {
    CellSet preds(g);
    for (std::int64_t c : fresh.to_sorted()) {
      preds.unite(maps.bwd[static_cast<std::size_t>(m - 1)]
                          [static_cast<std::size_t>(c)]);
    }
    preds.subtract(A);
    A.unite(preds);
    fresh = std::move(preds);
  }
  return A;
}

ProvenRange prove_bounds_incremental(const Network& net, const Box& input,
                                     int sims, const Grid& out_grid,
                                     std::uint64_t seed) {
  if (sims < 1) throw AnalysisError("bound proving needs at least one sample");
  if (static_cast<int>(input.size()) != net.in_dim()) {
    throw AnalysisError("input box does not match the network");
  }
  if (static_cast<int>(out_grid.dims()) != net.out_dim()) {
    throw AnalysisError("output grid does not match the network");
  }

  // Seed the candidate ranges from random concrete evaluations.
  std::mt19937_64 rng = make_rng(seed);
  std::vector<std::pair<int, int>> ranges(
      out_grid.dims(), {std::numeric_limits<int>::max(), -1});
  Eigen::VectorXd x(net.in_dim());
  for (int s = 0; s < sims; ++s) {
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      const Interval& iv = input[static_cast<std::size_t>(d)];
      x[d] = uniform(rng, iv.lo, iv.hi);
    }
    const Eigen::VectorXd y = net.eval(x);
    const CellIndex c = out_grid.cell_of(y);  // OutOfDomain if it leaves
    for (std::size_t d = 0; d < out_grid.dims(); ++d) {
      ranges[d].first = std::min(ranges[d].first, c.idx[d]);
      ranges[d].second = std::max(ranges[d].second, c.idx[d]);
    }
  }

  const Box got = ibp(net, input);
  while (true) {
    bool grew = false;
    for (std::size_t d = 0; d < out_grid.dims(); ++d) {
      if (got[d].lo < out_grid.edge(d, ranges[d].first)) {
        if (ranges[d].first == 0) {
          throw OutOfDomain("proved bounds would extend below the grid in "
                            "dimension " + std::to_string(d));
        }
        --ranges[d].first;
        grew = true;
      }
      if (got[d].hi > out_grid.edge(d, ranges[d].second + 1)) {
        if (ranges[d].second == out_grid.counts()[d] - 1) {
          throw OutOfDomain("proved bounds would extend above the grid in "
                            "dimension " + std::to_string(d));
        }
        ++ranges[d].second;
        grew = true;
      }
    }
    if (!grew) break;
  }

  std::vector<Interval> dims;
  dims.reserve(out_grid.dims());
  for (std::size_t d = 0; d < out_grid.dims(); ++d) {
    dims.emplace_back(out_grid.edge(d, ranges[d].first),
                      out_grid.edge(d, ranges[d].second + 1));
  }
  return ProvenRange{std::move(ranges), Box(std::move(dims))};
}

Eigen::VectorXd simulate_period(const PreparedScenario& ps,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& z) {
  if (x.size() != ps.state_dim || z.size() != ps.latent_dim) {
    throw AnalysisError("simulation state/latent sizes disagree with the "
                        "scenario");
  }
  Eigen::VectorXd joint(x.size() + z.size());
  joint << x, z;
  const Eigen::VectorXd u = ps.control_net.eval(joint);

  if (ps.is_taxi()) {
    return taxi_step(Eigen::Vector2d(x[0], x[1]), u[0], ps.taxi());
  }
  if (std::holds_alternative<BrakeParams>(ps.sc.dynamics)) {
    return brake_step(Eigen::Vector2d(x[0], x[1]), u[0],
                      std::get<BrakeParams>(ps.sc.dynamics));
  }
  const AffinePlant& plant = *ps.plant;
  Eigen::VectorXd cur = x;
  for (int s = 0; s < plant.substeps; ++s) {
    cur = (plant.map.A_x * cur + plant.map.A_u * u + plant.map.c).eval();
    for (int f : plant.floor_dims) cur[f] = std::max(cur[f], 0.0);
  }
  return cur;
}

CellSet simulate_cells(const PreparedScenario& ps, int runs_per_cell,
                       int horizon) {
  if (runs_per_cell < 1 || horizon < 0) {
    throw AnalysisError("simulation needs runs >= 1 and horizon >= 0");
  }
  const Grid& g = ps.sc.grid;
  CellSet bad(g);

  const auto in_unsafe = [&](const Eigen::VectorXd& x) {
    for (const Box& u : ps.sc.unsafe) {
      if (u.contains(x)) return true;
    }
    return false;
  };

  for (std::int64_t flat = 0; flat < g.total_cells(); ++flat) {
    const Box cell = g.cell_box(g.unflatten(flat));
    bool hit = false;
    for (int run = 0; run < runs_per_cell && !hit; ++run) {
      std::mt19937_64 rng =
          make_rng(ps.sc.seed, static_cast<std::uint64_t>(flat),
                   static_cast<std::uint64_t>(run));
      Eigen::VectorXd x(ps.state_dim);
      for (int d = 0; d < ps.state_dim; ++d) {
        x[d] = uniform(rng, cell[static_cast<std::size_t>(d)].lo,
                       cell[static_cast<std::size_t>(d)].hi);
      }
      if (in_unsafe(x)) {
        hit = true;
        break;
      }
      Eigen::VectorXd z(ps.latent_dim);
      for (int t = 0; t < horizon && !hit; ++t) {
        for (int d = 0; d < ps.latent_dim; ++d) {
          const Interval& iv = ps.sc.latent_box[static_cast<std::size_t>(d)];
          z[d] = uniform(rng, iv.lo, iv.hi);
        }
        try {
          x = simulate_period(ps, x, z);
        } catch (const PoleCrossed&) {
          hit = true;  // the model left its domain: count the cell
          break;
        }
        if (in_unsafe(x)) hit = true;
      }
    }
    if (hit) bad.insert(flat);
  }
  return bad;
}

namespace {

nlohmann::json cells_to_json(const CellSet& s, const Grid& g) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::int64_t flat : s.to_sorted()) {
    const CellIndex c = g.unflatten(flat);
    nlohmann::json tuple = nlohmann::json::array();
    for (int v : c.idx) tuple.push_back(v);
    arr.push_back(std::move(tuple));
  }
  return arr;
}

void append_cell_rows(std::string& out, const CellSet& s, const Grid& g,
                      int step) {
  for (std::int64_t flat : s.to_sorted()) {
    const CellIndex c = g.unflatten(flat);
    const Box b = g.cell_box(c);
    if (step >= 0) out += std::to_string(step);
    for (std::size_t d = 0; d < g.dims(); ++d) {
      if (step >= 0 || d > 0) out += ",";
      out += std::to_string(c.idx[d]);
    }
    for (std::size_t d = 0; d < g.dims(); ++d) {
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", b[d].lo, b[d].hi);
      out += buf;
    }
    out += "\n";
  }
}

std::string csv_header(const Grid& g, bool with_step) {
  std::string h;
  if (with_step) h += "step";
  for (std::size_t d = 0; d < g.dims(); ++d) {
    if (!h.empty() || d > 0) h += ",";
    h += "i" + std::to_string(d);
  }
  for (std::size_t d = 0; d < g.dims(); ++d) {
    h += ",lo" + std::to_string(d) + ",hi" + std::to_string(d);
  }
  h += "\n";
  return h;
}

}  // namespace

std::string reach_result_json(const ReachResult& r, const Grid& g) {
  nlohmann::json doc;
  nlohmann::json steps = nlohmann::json::array();
  for (const CellSet& s : r.per_step) steps.push_back(cells_to_json(s, g));
  doc["per_step"] = std::move(steps);
  doc["global"] = cells_to_json(r.global, g);
  if (r.converged_at) {
    doc["converged_at"] = *r.converged_at;
  } else {
    doc["converged_at"] = nullptr;
  }
  doc["is_safe"] = r.is_safe;
  doc["degraded"] = cells_to_json(r.degraded, g);
  return doc.dump(1);
}

std::string reach_result_csv(const ReachResult& r, const Grid& g) {
  std::string out = csv_header(g, /*with_step=*/true);
  for (std::size_t k = 0; k < r.per_step.size(); ++k) {
    append_cell_rows(out, r.per_step[k], g, static_cast<int>(k));
  }
  return out;
}

std::string cells_csv(const CellSet& cells, const Grid& g) {
  std::string out = csv_header(g, /*with_step=*/false);
  append_cell_rows(out, cells, g, /*step=*/-1);
  return out;
}

}  // namespace gridreach
