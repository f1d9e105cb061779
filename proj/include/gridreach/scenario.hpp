#ifndef GRIDREACH_SCENARIO_HPP
#define GRIDREACH_SCENARIO_HPP

// A scenario bundles everything one verification run needs: the surrogate
// network, the control map, the plant, the grid, the per-period latent
// environment box, the unsafe regions, and the analysis knobs.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridreach/dynamics.hpp"
#include "gridreach/grid.hpp"
#include "gridreach/network.hpp"

namespace gridreach {

enum class Engine { Baseline, IbpComposed, StarComposed };

// Affine plant with period structure and optional zero floors (coordinates
// clamped at zero after every substep, like the braking velocity).
struct AffinePlant {
  AffineDynamics map;  // one substep
  int substeps = 1;
  std::vector<int> floor_dims;
};

struct Scenario {
  Network surrogate;             // (state, latent) -> perception output
  std::optional<Layer> control;  // affine layer appended to that output
  std::variant<TaxiParams, BrakeParams, AffinePlant> dynamics;
  Grid grid;
  Box latent_box;
  std::vector<Box> unsafe;
  Engine engine = Engine::StarComposed;
  int m = 1;
  int k_max = 50;
  int split_cap = 4096;
  std::optional<Box> r0;
  std::uint64_t seed = 0;
  int workers = 0;  // worker threads for per-cell analyses; 0 = serial
  std::string output_dir = ".";
};

// Parses and strictly validates a scenario config file (JSON).  Unknown
// keys are rejected; *_deg fields are converted to radians; the network
// path is resolved relative to the config file's directory.
Scenario load_scenario(const std::string& path);

// Cached results of one cell's i-period analysis; the set representation
// is dropped, only the abstraction and flags are kept.
struct CachedReach {
  CellSet cells;
  bool escaped = false;
  bool degraded = false;
  bool pole = false;
};

// A validated scenario plus every derived object freach needs: the control
// pipeline, the dependency-preserving joint network, the canonical affine
// plant, unrolled networks, and the memo of per-cell results.
struct PreparedScenario {
  Scenario sc;

  int state_dim = 0;
  int latent_dim = 0;
  int control_dim = 0;

  // (state, latent) -> control command.
  Network control_net;
  // (state, latent) -> (state, control command), exact passthrough.
  Network joint_net;

  // Canonical affine plant (braking or explicitly affine dynamics);
  // absent for the taxiing plant.
  std::optional<AffinePlant> plant;
  // plant->map composed over one control period (no floors).
  std::optional<AffineDynamics> period_map;

  // Unrolled closed-loop networks for i = 1..m (IbpComposed engine only).
  std::vector<Network> unrolled;

  // Abstraction of the union of unsafe boxes (clipped to the grid).
  CellSet unsafe_cells;

  // Memo: (flat cell, i) -> result, shared across fixpoint iterations.
  std::map<std::pair<std::int64_t, int>, CachedReach> freach_cache;

  bool is_taxi() const {
    return std::holds_alternative<TaxiParams>(sc.dynamics);
  }
  const TaxiParams& taxi() const { return std::get<TaxiParams>(sc.dynamics); }
};

// Validates cross-field consistency (engine/dynamics compatibility, shape
// agreement, parameter ranges) and builds the derived objects.  Throws
// ConfigError with a remediation hint on bad combinations.
PreparedScenario prepare(Scenario sc);

}  // namespace gridreach

#endif
