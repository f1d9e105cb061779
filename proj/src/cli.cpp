#include "gridreach/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridreach/errors.hpp"
#include "gridreach/reach.hpp"
#include "gridreach/scenario.hpp"
#include "gridreach/scenario_gen.hpp"

namespace gridreach::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw ConfigError("failed while writing " + path.string());
}

struct CommonOpts {
  std::string config;
  std::optional<int> m;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_m = true) {
  cmd->add_option("--config", o.config, "scenario config file (JSON)")
      ->required();
  if (with_m) {
    cmd->add_option("--m", o.m, "override the composition depth m");
  }
  cmd->add_option("--workers", o.workers,
                  "override the worker count (0 = serial)");
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_option("--out", o.out, "override the output directory");
}

Scenario load_with_overrides(const CommonOpts& o) {
  Scenario sc = load_scenario(o.config);
  if (o.m) sc.m = *o.m;
  if (o.workers) sc.workers = *o.workers;
  if (o.seed) sc.seed = *o.seed;
  if (o.out) sc.output_dir = *o.out;
  return sc;
}

std::filesystem::path ensure_out_dir(const Scenario& sc) {
  std::filesystem::path dir(sc.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

nlohmann::json cells_json_doc(const CellSet& s, const Grid& g) {
  return nlohmann::json::parse(cell_set_json(s, g));
}

int run_forward(const CommonOpts& o) {
  PreparedScenario ps = prepare(load_with_overrides(o));
  const Grid& g = ps.sc.grid;
  ReachResult res = forward_reach(ps);

  const std::filesystem::path dir = ensure_out_dir(ps.sc);
  write_file(dir / "result.json", reach_result_json(res, g));
  write_file(dir / "steps.csv", reach_result_csv(res, g));
  write_file(dir / "global.csv", cells_csv(res.global, g));

  std::cout << "is_safe=" << (res.is_safe ? "true" : "false")
            << " converged_at="
            << (res.converged_at ? std::to_string(*res.converged_at) : "none")
            << " steps=" << res.per_step.size() - 1
            << " global_cells=" << res.global.count()
            << " degraded=" << res.degraded.count()
            << " escaped=" << res.escaped_sources.count() << "\n";
  return res.is_safe ? 0 : 1;
}

int run_backward(const CommonOpts& o) {
  PreparedScenario ps = prepare(load_with_overrides(o));
  const Grid& g = ps.sc.grid;
  TransitionMaps maps = build_transition_maps(ps);
  CellSet possibly_unsafe = backward_reach(maps, ps);

  CellSet safe(g);
  for (std::int64_t c = 0; c < g.total_cells(); ++c) {
    if (!possibly_unsafe.contains(c)) safe.insert(c);
  }

  nlohmann::json doc;
  doc["m"] = maps.m;
  doc["possibly_unsafe"] = cells_json_doc(possibly_unsafe, g);
  doc["safe_count"] = safe.count();
  doc["total_cells"] = g.total_cells();
  doc["flagged"] = cells_json_doc(maps.flagged, g);

  const std::filesystem::path dir = ensure_out_dir(ps.sc);
  write_file(dir / "backward.json", doc.dump(1));
  write_file(dir / "safe.csv", cells_csv(safe, g));

  std::cout << "safe_cells=" << safe.count() << "/" << g.total_cells()
            << " m=" << maps.m << " flagged=" << maps.flagged.count() << "\n";
  return safe.empty() ? 1 : 0;
}

int run_simulate(const CommonOpts& o, int runs, int horizon) {
  PreparedScenario ps = prepare(load_with_overrides(o));
  const Grid& g = ps.sc.grid;
  CellSet bad = simulate_cells(ps, runs, horizon);

  nlohmann::json doc;
  doc["runs_per_cell"] = runs;
  doc["horizon"] = horizon;
  doc["seed"] = ps.sc.seed;
  doc["unsafe_cells"] = cells_json_doc(bad, g);

  const std::filesystem::path dir = ensure_out_dir(ps.sc);
  write_file(dir / "simulation.json", doc.dump(1));
  write_file(dir / "simulation.csv", cells_csv(bad, g));

  std::cout << "empirically_unsafe=" << bad.count() << "/" << g.total_cells()
            << " runs=" << runs << " horizon=" << horizon << "\n";
  return bad.empty() ? 0 : 1;
}

int run_maps(const CommonOpts& o) {
  PreparedScenario ps = prepare(load_with_overrides(o));
  const Grid& g = ps.sc.grid;
  TransitionMaps maps = build_transition_maps(ps);

  nlohmann::json doc;
  doc["m"] = maps.m;
  doc["flagged"] = cells_json_doc(maps.flagged, g);
  nlohmann::json fwd = nlohmann::json::array();
  nlohmann::json bwd = nlohmann::json::array();
  for (int i = 0; i < maps.m; ++i) {
    nlohmann::json fi = nlohmann::json::array();
    nlohmann::json bi = nlohmann::json::array();
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
      fi.push_back(cells_json_doc(
          maps.fwd[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)],
          g));
      bi.push_back(cells_json_doc(
          maps.bwd[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)],
          g));
    }
    fwd.push_back(std::move(fi));
    bwd.push_back(std::move(bi));
  }
  doc["fwd"] = std::move(fwd);
  doc["bwd"] = std::move(bwd);

  const std::filesystem::path dir = ensure_out_dir(ps.sc);
  write_file(dir / "maps.json", doc.dump(1));

  std::cout << "maps_written m=" << maps.m << " cells=" << g.total_cells()
            << " flagged=" << maps.flagged.count() << "\n";
  return 0;
}

int run_gen(const std::string& out, std::uint64_t seed) {
  write_generated_artifacts(out, seed);
  std::cout << "artifacts_written dir=" << out << " seed=" << seed << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Grid-abstraction reachability for perception-driven "
               "closed-loop systems"};
  app.require_subcommand(1);

  CommonOpts fwd_opts, bwd_opts, sim_opts, maps_opts;
  int runs = 500;
  int horizon = 60;
  std::string gen_out = "data";
  std::uint64_t gen_seed = 2024;

  CLI::App* fwd = app.add_subcommand(
      "forward", "forward reachability fixpoint from the initial set");
  add_common(fwd, fwd_opts);

  CLI::App* bwd = app.add_subcommand(
      "backward", "backward fixpoint over the whole grid");
  add_common(bwd, bwd_opts);

  CLI::App* sim = app.add_subcommand(
      "simulate", "seeded random closed-loop trajectories from every cell");
  add_common(sim, sim_opts);
  sim->add_option("--runs", runs, "trajectories per cell");
  sim->add_option("--horizon", horizon, "control periods per trajectory");

  CLI::App* maps = app.add_subcommand(
      "maps", "per-cell transition maps for 1..m periods");
  add_common(maps, maps_opts);

  CLI::App* gen = app.add_subcommand(
      "gen", "regenerate the surrogate network artifacts");
  gen->add_option("--out", gen_out, "artifact directory");
  gen->add_option("--seed", gen_seed, "generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fwd->parsed()) return run_forward(fwd_opts);
    if (bwd->parsed()) return run_backward(bwd_opts);
    if (sim->parsed()) return run_simulate(sim_opts, runs, horizon);
    if (maps->parsed()) return run_maps(maps_opts);
    if (gen->parsed()) return run_gen(gen_out, gen_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace gridreach::cli
