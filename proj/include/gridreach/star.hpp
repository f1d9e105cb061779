#ifndef GRIDREACH_STAR_HPP
#define GRIDREACH_STAR_HPP

// Star sets (a.k.a. constrained zonotopes): affine images of a constrained
// latent box,  { center + basis*a : C a <= d, a in latent_box }.
// They carry the input-output dependency through affine maps exactly, which
// is what the exact propagation engine relies on.  All predicates that need
// optimization over the latent polytope go through the dense LP solver.

#include <vector>

#include <Eigen/Dense>

#include "gridreach/interval.hpp"
#include "gridreach/linprog.hpp"

namespace gridreach {

class StarSet {
 public:
  // Box as a star: identity basis, no constraints, re-centered latent box.
  static StarSet from_box(const Box& b);

  StarSet(Eigen::VectorXd center, Eigen::MatrixXd basis, Eigen::MatrixXd C,
          Eigen::VectorXd d, Box latent_box);

  Eigen::Index dim() const { return center_.size(); }
  Eigen::Index latent_dim() const { return basis_.cols(); }
  Eigen::Index num_constraints() const { return C_.rows(); }

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& constraint_matrix() const { return C_; }
  const Eigen::VectorXd& constraint_rhs() const { return d_; }
  const Box& latent_box() const { return latent_box_; }

  // {A x + b : x in S}; constraints and latent box are untouched.
  StarSet affine_map(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const;

  // S intersected with {x : g.x <= h}, as one extra constraint row.
  StarSet add_halfspace(const Eigen::VectorXd& g, double h) const;

  // Minkowski sum with a box: one fresh identity generator per dimension.
  StarSet minkowski_box(const Box& e) const;

  // Cartesian product with a box: new output dimensions, each backed by a
  // fresh generator.  Used to hand a propagated state star the next control
  // period's latent inputs.
  StarSet cartesian_box(const Box& b) const;

  // Point of the set for a given latent assignment (no feasibility check).
  Eigen::VectorXd point_at(const Eigen::VectorXd& alpha) const;

  // Emptiness test via phase-1 LP; violations up to 1e-9 count as feasible,
  // erring toward keeping (sound for overapproximation).
  bool is_feasible() const;

  // Interval arithmetic bounds from the latent box alone, ignoring (C, d).
  // Never tighter than the true range — used to prefilter before LPs.
  Box quick_bounds() const;
  Interval quick_coord(Eigen::Index i) const;

  // Exact range of one output coordinate over the constrained latent set.
  // Latent dimensions that appear in no constraint row are folded in by
  // interval arithmetic, so the LP only sees the constrained ones.
  Interval coord_bounds(Eigen::Index i) const;

  // Tightest axis-aligned enclosure (coord_bounds per dimension).
  Box box_bounds() const;

  // Whether the set meets a closed box (adds the 2n face halfspaces and
  // tests feasibility, after a sound bounding-box prefilter).
  bool intersects_box(const Box& cell) const;

  // Membership oracle: is x = center + basis*a solvable within the latent
  // polytope?  Equality rows with the given tolerance.
  bool contains_point(const Eigen::VectorXd& x, double tol = 1e-8) const;

 private:
  Eigen::VectorXd center_;  // n
  Eigen::MatrixXd basis_;   // n x p
  Eigen::MatrixXd C_;       // m x p
  Eigen::VectorXd d_;       // m
  Box latent_box_;          // p intervals
};

// A finite union of same-dimension stars; may be empty.
struct StarUnion {
  std::vector<StarSet> stars;

  bool empty() const { return stars.empty(); }
  std::size_t size() const { return stars.size(); }
};

}  // namespace gridreach

#endif
