#ifndef GRIDREACH_SCENARIO_GEN_HPP
#define GRIDREACH_SCENARIO_GEN_HPP

// Deterministic, seeded generation of the desk-scale surrogate networks.
// The networks are regression-trained stand-ins for perception stacks:
// small enough for exact analysis, with genuine latent sensitivity so the
// environment inputs matter.  Generated files are versioned artifacts
// checked into data/; regeneration is a maintenance task, not a test
// dependency.

#include <cstdint>
#include <string>

#include "gridreach/network.hpp"

namespace gridreach {

// (p, theta, z1, z2) -> (p_hat, theta_hat): near-identity observation with
// latent-dependent perturbation.
Network gen_taxi_surrogate(std::uint64_t seed);

// (d, v, z1..z4) -> u in [0, 1]: braking command, clamp realized as
// relu(u) - relu(u - 1) layers.
Network gen_brake_surrogate(std::uint64_t seed);

// Writes taxi_surrogate.json, brake_surrogate.json and goldens.json
// (pinned eval vectors plus FNV-1a64 content hashes) into dir.
void write_generated_artifacts(const std::string& dir,
                               std::uint64_t seed = 2024);

// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace gridreach

#endif
