#ifndef GRIDREACH_PROPAGATION_HPP
#define GRIDREACH_PROPAGATION_HPP

// The two set-propagation engines over networks: interval bound propagation
// (cheap, loses dependencies) and exact star propagation with ReLU case
// splitting (keeps the input latent parameterization on every leaf).

#include "gridreach/interval.hpp"
#include "gridreach/network.hpp"
#include "gridreach/star.hpp"

namespace gridreach {

// Sound output box: interval affine arithmetic for affine layers, endpoint
// max(.,0) for ReLU layers.
Box ibp(const Network& n, const Box& input);

// Exact image of a single-coordinate ReLU on a star.  Stability is decided
// by latent-box quick bounds first and LP bounds only when those straddle
// zero; a genuine straddle yields the two halfspace branches (the
// nonpositive branch zeroed by a projection), both feasible by
// construction.
StarUnion relu_coordinate(const StarSet& s, Eigen::Index j);

// Exact image of the network as a union of stars that all retain the
// input's latent parameterization.  Splits layer by layer, neuron index
// ascending; branches that would push the leaf count past split_cap raise
// SplitBudgetExceeded (callers fall back to ibp and flag the result).
StarUnion exact_star(const Network& n, const StarSet& input,
                     int split_cap = 4096);

}  // namespace gridreach

#endif
