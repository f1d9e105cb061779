#include "gridreach/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <omp.h>

#include "json.hpp"

#include "gridreach/errors.hpp"

namespace gridreach {

namespace {

using nlohmann::json;

constexpr double kDegToRad = 0.017453292519943295;

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      std::string hint = "valid keys:";
      for (const std::string& k : allowed) hint += " \"" + k + "\"";
      throw ConfigError(where + " has unknown key \"" + item.key() + "\" (" +
                        hint + ")");
    }
  }
}

double number_at(const json& j, const std::string& key,
                 const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(where + " needs a numeric \"" + key + "\"");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) {
    throw ConfigError(where + ": \"" + key + "\" is not finite");
  }
  return v;
}

int int_at(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw ConfigError(where + " needs an integer \"" + key + "\"");
  }
  return j[key].get<int>();
}

// {"lo": a, "hi": b} or {"lo_deg": a, "hi_deg": b} (converted to radians).
Interval parse_span(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object with lo/hi bounds");
  }
  expect_keys(j, {"lo", "hi", "lo_deg", "hi_deg"}, where);
  const bool plain = j.contains("lo") || j.contains("hi");
  const bool deg = j.contains("lo_deg") || j.contains("hi_deg");
  if (plain == deg) {
    throw ConfigError(where + " needs either lo/hi or lo_deg/hi_deg");
  }
  double lo, hi;
  if (plain) {
    lo = number_at(j, "lo", where);
    hi = number_at(j, "hi", where);
  } else {
    lo = number_at(j, "lo_deg", where) * kDegToRad;
    hi = number_at(j, "hi_deg", where) * kDegToRad;
  }
  if (!(lo <= hi)) throw ConfigError(where + " needs lo <= hi");
  return Interval(lo, hi);
}

Box parse_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + " must be a non-empty array of lo/hi spans");
  }
  std::vector<Interval> dims;
  dims.reserve(j.size());
  std::size_t d = 0;
  for (const json& span : j) {
    dims.push_back(
        parse_span(span, where + " dimension " + std::to_string(d)));
    ++d;
  }
  return Box(std::move(dims));
}

Box parse_latent(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + " must be a non-empty array of [lo, hi] pairs");
  }
  std::vector<Interval> dims;
  dims.reserve(j.size());
  std::size_t d = 0;
  for (const json& pair : j) {
    const std::string here = where + " dimension " + std::to_string(d);
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      throw ConfigError(here + " must be a [lo, hi] pair");
    }
    const double lo = pair[0].get<double>();
    const double hi = pair[1].get<double>();
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) {
      throw ConfigError(here + " needs finite lo <= hi");
    }
    dims.emplace_back(lo, hi);
    ++d;
  }
  return Box(std::move(dims));
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ConfigError(where + " must be a non-empty matrix (array of rows)");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(where + " row " + std::to_string(r) +
                        " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number() || !std::isfinite(j[r][c].get<double>())) {
        throw ConfigError(where + " entry (" + std::to_string(r) + ", " +
                          std::to_string(c) + ") is not a finite number");
      }
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + " must be a non-empty array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number() || !std::isfinite(j[i].get<double>())) {
      throw ConfigError(where + " entry " + std::to_string(i) +
                        " is not a finite number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Box default_latent(const std::variant<TaxiParams, BrakeParams, AffinePlant>&
                       dynamics) {
  if (std::holds_alternative<TaxiParams>(dynamics)) {
    return Box{Interval(-0.8, 0.8), Interval(-0.8, 0.8)};
  }
  if (std::holds_alternative<BrakeParams>(dynamics)) {
    return Box{Interval(-0.01, 0.01), Interval(-0.01, 0.01),
               Interval(-0.01, 0.01), Interval(-0.01, 0.01)};
  }
  throw ConfigError("explicit affine dynamics need an explicit \"latent\"");
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": config must be an object");
  expect_keys(doc,
              {"network", "control", "dynamics", "grid", "latent", "unsafe",
               "r0", "engine", "m", "k_max", "split_cap", "seed", "workers",
               "output_dir"},
              "config");

  // Plant first: the latent default depends on it.
  if (!doc.contains("dynamics") || !doc["dynamics"].is_object()) {
    throw ConfigError("config needs a \"dynamics\" object");
  }
  const json& jd = doc["dynamics"];
  if (!jd.contains("kind") || !jd["kind"].is_string()) {
    throw ConfigError("\"dynamics\" needs a \"kind\" string "
                      "(\"taxi\", \"brake\" or \"affine\")");
  }
  std::variant<TaxiParams, BrakeParams, AffinePlant> dynamics;
  const std::string kind = jd["kind"].get<std::string>();
  if (kind == "taxi") {
    expect_keys(jd, {"kind", "v", "L", "dt", "substeps"}, "dynamics");
    TaxiParams P;
    if (jd.contains("v")) P.v = number_at(jd, "v", "dynamics");
    if (jd.contains("L")) P.L = number_at(jd, "L", "dynamics");
    if (jd.contains("dt")) P.dt = number_at(jd, "dt", "dynamics");
    if (jd.contains("substeps")) P.substeps = int_at(jd, "substeps", "dynamics");
    dynamics = P;
  } else if (kind == "brake") {
    expect_keys(jd, {"kind", "dt", "substeps"}, "dynamics");
    BrakeParams P;
    if (jd.contains("dt")) P.dt = number_at(jd, "dt", "dynamics");
    if (jd.contains("substeps")) P.substeps = int_at(jd, "substeps", "dynamics");
    dynamics = P;
  } else if (kind == "affine") {
    expect_keys(jd, {"kind", "a_x", "a_u", "c", "substeps", "floor_dims"},
                "dynamics");
    AffinePlant P;
    if (!jd.contains("a_x") || !jd.contains("a_u") || !jd.contains("c")) {
      throw ConfigError("affine dynamics need \"a_x\", \"a_u\" and \"c\"");
    }
    P.map.A_x = parse_matrix(jd["a_x"], "dynamics \"a_x\"");
    P.map.A_u = parse_matrix(jd["a_u"], "dynamics \"a_u\"");
    P.map.c = parse_vector(jd["c"], "dynamics \"c\"");
    if (jd.contains("substeps")) P.substeps = int_at(jd, "substeps", "dynamics");
    if (jd.contains("floor_dims")) {
      if (!jd["floor_dims"].is_array()) {
        throw ConfigError("dynamics \"floor_dims\" must be an array");
      }
      for (const json& f : jd["floor_dims"]) {
        if (!f.is_number_integer()) {
          throw ConfigError("dynamics \"floor_dims\" entries must be integers");
        }
        P.floor_dims.push_back(f.get<int>());
      }
    }
    dynamics = P;
  } else {
    throw ConfigError("unknown dynamics kind \"" + kind +
                      "\" (expected \"taxi\", \"brake\" or \"affine\")");
  }

  // Network path, resolved relative to the config file.
  if (!doc.contains("network") || !doc["network"].is_string()) {
    throw ConfigError("config needs a \"network\" file path");
  }
  std::filesystem::path net_path(doc["network"].get<std::string>());
  if (net_path.is_relative()) {
    net_path = std::filesystem::path(path).parent_path() / net_path;
  }

  // Grid.
  if (!doc.contains("grid") || !doc["grid"].is_object()) {
    throw ConfigError("config needs a \"grid\" object");
  }
  expect_keys(doc["grid"], {"dims"}, "grid");
  if (!doc["grid"].contains("dims") || !doc["grid"]["dims"].is_array() ||
      doc["grid"]["dims"].empty()) {
    throw ConfigError("grid needs a non-empty \"dims\" array");
  }
  std::vector<Interval> gbounds;
  std::vector<int> gcounts;
  std::size_t gd = 0;
  for (const json& dim : doc["grid"]["dims"]) {
    const std::string where = "grid dimension " + std::to_string(gd);
    if (!dim.is_object()) throw ConfigError(where + " must be an object");
    expect_keys(dim, {"lo", "hi", "lo_deg", "hi_deg", "count"}, where);
    if (!dim.contains("count")) throw ConfigError(where + " needs \"count\"");
    json span = dim;
    span.erase("count");
    gbounds.push_back(parse_span(span, where));
    gcounts.push_back(int_at(dim, "count", where));
    ++gd;
  }

  Scenario sc{
      /*surrogate=*/Network::load(net_path.string()),
      /*control=*/std::nullopt,
      /*dynamics=*/std::move(dynamics),
      /*grid=*/Grid(Box(std::move(gbounds)), std::move(gcounts)),
      /*latent_box=*/Box{Interval(0, 1)},  // placeholder, replaced below
      /*unsafe=*/{},
  };

  if (doc.contains("control")) {
    const json& jc = doc["control"];
    if (!jc.is_object()) throw ConfigError("\"control\" must be an object");
    expect_keys(jc, {"w", "b"}, "control");
    if (!jc.contains("w") || !jc.contains("b")) {
      throw ConfigError("control needs \"w\" and \"b\"");
    }
    sc.control = Layer::affine(parse_matrix(jc["w"], "control \"w\""),
                               parse_vector(jc["b"], "control \"b\""));
  }

  sc.latent_box = doc.contains("latent")
                      ? parse_latent(doc["latent"], "\"latent\"")
                      : default_latent(sc.dynamics);

  if (doc.contains("unsafe")) {
    if (!doc["unsafe"].is_array()) {
      throw ConfigError("\"unsafe\" must be an array of boxes");
    }
    std::size_t ui = 0;
    for (const json& jb : doc["unsafe"]) {
      sc.unsafe.push_back(
          parse_box(jb, "unsafe box " + std::to_string(ui)));
      ++ui;
    }
  }
  if (doc.contains("r0")) sc.r0 = parse_box(doc["r0"], "\"r0\"");

  if (doc.contains("engine")) {
    if (!doc["engine"].is_string()) {
      throw ConfigError("\"engine\" must be a string");
    }
    const std::string e = doc["engine"].get<std::string>();
    if (e == "baseline") {
      sc.engine = Engine::Baseline;
    } else if (e == "ibp") {
      sc.engine = Engine::IbpComposed;
    } else if (e == "star") {
      sc.engine = Engine::StarComposed;
    } else {
      throw ConfigError("unknown engine \"" + e +
                        "\" (expected \"baseline\", \"ibp\" or \"star\")");
    }
  }

  if (doc.contains("m")) sc.m = int_at(doc, "m", "config");
  if (doc.contains("k_max")) sc.k_max = int_at(doc, "k_max", "config");
  if (doc.contains("split_cap")) sc.split_cap = int_at(doc, "split_cap", "config");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) {
      throw ConfigError("config \"seed\" must be an integer");
    }
    sc.seed = doc["seed"].get<std::uint64_t>();
  }
  sc.workers = doc.contains("workers") ? int_at(doc, "workers", "config")
                                       : omp_get_max_threads();
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) {
      throw ConfigError("config \"output_dir\" must be a string");
    }
    sc.output_dir = doc["output_dir"].get<std::string>();
  }
  return sc;
}

PreparedScenario prepare(Scenario sc) {
  PreparedScenario ps{
      /*sc=*/std::move(sc),
      /*state_dim=*/0,
      /*latent_dim=*/0,
      /*control_dim=*/0,
      /*control_net=*/Network(1, {}),
      /*joint_net=*/Network(1, {}),
  };
  Scenario& s = ps.sc;

  if (std::holds_alternative<TaxiParams>(s.dynamics)) {
    const TaxiParams& P = std::get<TaxiParams>(s.dynamics);
    if (!(P.v > 0) || !(P.L > 0) || !(P.dt > 0) || P.substeps < 1) {
      throw ConfigError("taxi dynamics need v, L, dt > 0 and substeps >= 1");
    }
    ps.state_dim = 2;
  } else if (std::holds_alternative<BrakeParams>(s.dynamics)) {
    const BrakeParams& P = std::get<BrakeParams>(s.dynamics);
    if (!(P.dt > 0)) throw ConfigError("brake dynamics need dt > 0");
    if (P.substeps != 1 && P.substeps != 2 && P.substeps != 4) {
      throw ConfigError("brake substeps must be 1, 2 or 4 "
                        "(20, 10 or 5 Hz control)");
    }
    ps.state_dim = 2;
  } else {
    const AffinePlant& P = std::get<AffinePlant>(s.dynamics);
    if (P.map.A_x.rows() != P.map.A_x.cols() ||
        P.map.A_u.rows() != P.map.A_x.rows() ||
        P.map.c.size() != P.map.A_x.rows()) {
      throw ConfigError("affine plant shapes disagree (a_x square; a_u, c "
                        "with matching rows)");
    }
    if (P.substeps < 1) throw ConfigError("affine substeps must be >= 1");
    for (int f : P.floor_dims) {
      if (f < 0 || f >= P.map.A_x.rows()) {
        throw ConfigError("floor dimension out of range for the plant");
      }
    }
    ps.state_dim = static_cast<int>(P.map.A_x.rows());
  }

  ps.latent_dim = static_cast<int>(s.latent_box.size());
  if (s.surrogate.in_dim() != ps.state_dim + ps.latent_dim) {
    throw ConfigError(
        "surrogate expects " + std::to_string(s.surrogate.in_dim()) +
        " inputs but state (" + std::to_string(ps.state_dim) +
        ") + latent (" + std::to_string(ps.latent_dim) + ") = " +
        std::to_string(ps.state_dim + ps.latent_dim) +
        "; fix the \"latent\" list or the network");
  }

  ps.control_net = s.control ? append_affine(s.surrogate, s.control->W,
                                             s.control->b)
                             : s.surrogate;
  ps.control_dim = ps.control_net.out_dim();

  const bool taxi = std::holds_alternative<TaxiParams>(s.dynamics);
  const bool brake = std::holds_alternative<BrakeParams>(s.dynamics);
  if ((taxi || brake) && ps.control_dim != 1) {
    throw ConfigError("this plant takes a single control command, the "
                      "control pipeline produces " +
                      std::to_string(ps.control_dim));
  }

  // Canonical affine plant and its exact period map.
  if (brake) {
    const BrakeParams& P = std::get<BrakeParams>(s.dynamics);
    AffinePlant plant;
    plant.map.A_x.resize(2, 2);
    plant.map.A_x << 1.0, -P.dt, 0.0, 1.0;
    plant.map.A_u.resize(2, 1);
    plant.map.A_u << 0.0, -0.009 * P.dt;
    plant.map.c.resize(2);
    plant.map.c << 0.0, -0.0042 * P.dt;
    plant.substeps = P.substeps;
    plant.floor_dims = {1};
    ps.plant = std::move(plant);
  } else if (!taxi) {
    ps.plant = std::get<AffinePlant>(s.dynamics);
  }
  if (ps.plant) {
    if (ps.plant->map.A_x.rows() != ps.state_dim) {
      throw ConfigError("plant state size disagrees with the grid/state");
    }
    if (ps.plant->map.A_u.cols() != ps.control_dim) {
      throw ConfigError("plant expects " +
                        std::to_string(ps.plant->map.A_u.cols()) +
                        " control inputs, the pipeline produces " +
                        std::to_string(ps.control_dim));
    }
    ps.period_map = compose_substeps(ps.plant->map, ps.plant->substeps);
  }

  if (static_cast<int>(s.grid.dims()) != ps.state_dim) {
    throw ConfigError("grid must partition the " +
                      std::to_string(ps.state_dim) + "-dimensional state");
  }
  for (const Box& u : s.unsafe) {
    if (static_cast<int>(u.size()) != ps.state_dim) {
      throw ConfigError("unsafe boxes must match the state dimension");
    }
  }
  if (s.r0 && static_cast<int>(s.r0->size()) != ps.state_dim) {
    throw ConfigError("r0 must match the state dimension");
  }
  if (s.m < 1) throw ConfigError("m must be >= 1");
  if (s.k_max < 1) throw ConfigError("k_max must be >= 1");
  if (s.split_cap < 1) throw ConfigError("split_cap must be >= 1");
  if (s.workers < 0) throw ConfigError("workers must be >= 0");

  if (s.engine == Engine::Baseline && s.m != 1) {
    throw ConfigError("the baseline engine abstracts after every period and "
                      "is defined for m = 1 only; use engine \"star\" for "
                      "multi-period composition");
  }
  if (s.engine == Engine::IbpComposed && !ps.plant) {
    throw ConfigError("interval composition needs an affine plant; the "
                      "taxiing dynamics are nonlinear — use engine "
                      "\"baseline\" or \"star\"");
  }

  // Joint network (x, z) -> (x, u): passthrough keeps the state bits and
  // the control stays a function of the same latent variables.
  ps.joint_net = build_state_passthrough(ps.control_net, ps.state_dim);

  if (s.engine == Engine::IbpComposed) {
    ps.unrolled.reserve(static_cast<std::size_t>(s.m));
    for (int i = 1; i <= s.m; ++i) {
      ps.unrolled.push_back(unroll_affine_system(
          ps.control_net, ps.plant->map, ps.plant->substeps, i,
          ps.latent_dim));
    }
  }

  ps.unsafe_cells = CellSet(s.grid);
  for (const Box& u : s.unsafe) {
    try {
      AlphaResult a = alpha(u, s.grid);
      ps.unsafe_cells.unite(a.cells);
    } catch (const OutOfDomain&) {
      // An unsafe box entirely outside the grid contributes no cells.
    }
  }

  return ps;
}

}  // namespace gridreach
