#ifndef GRIDREACH_DYNAMICS_HPP
#define GRIDREACH_DYNAMICS_HPP

// Plant models: the taxiing kinematics (nonlinear through sin/tan), the
// braking kinematics (affine apart from the velocity floor), concrete
// stepping for simulation, the baseline interval step, and the
// conservatively linearized star step for the taxiing dynamics.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gridreach/interval.hpp"
#include "gridreach/star.hpp"

namespace gridreach {

struct TaxiParams {
  double v = 5.0;     // taxi speed, m/s
  double L = 5.0;     // wheelbase, m
  double dt = 0.05;   // dynamics substep, s
  int substeps = 20;  // substeps per control period (1 Hz at the defaults)
};

struct BrakeParams {
  double dt = 0.05;  // dynamics substep, s
  int substeps = 1;  // 1 / 2 / 4 -> 20 / 10 / 5 Hz control
};

// One affine substep x' = A_x x + A_u u + c; the control input u is held
// constant across the substeps of a control period.
struct AffineDynamics {
  Eigen::MatrixXd A_x;
  Eigen::MatrixXd A_u;
  Eigen::VectorXd c;
};

// Single map equivalent to k held-control substeps of dyn.
AffineDynamics compose_substeps(const AffineDynamics& dyn, int k);

// Concrete taxiing period: p += v*dt*sin(theta); theta += (v/L)*dt*tan(phi),
// iterated P.substeps times with phi held.  Throws PoleCrossed for
// |phi| >= pi/2.
Eigen::Vector2d taxi_step(const Eigen::Vector2d& s, double phi,
                          const TaxiParams& P);

// Concrete braking period: d -= v*dt; v = max(v - (0.009u + 0.0042)*dt, 0),
// iterated P.substeps times with u held.
Eigen::Vector2d brake_step(const Eigen::Vector2d& s, double u,
                           const BrakeParams& P);

// Exact substep-composed affine period map of the braking plant.  The
// velocity floor is omitted here (it is not affine); the result matches
// brake_step whenever the velocity stays nonnegative throughout.
AffineDynamics brake_affine(const BrakeParams& P);

// Baseline bounding of one taxiing period: endpoint substitution for the
// heading update (monotone in theta and phi), interval sine for the
// crosstrack update, applied per substep.
Box taxi_monotonic_step(const Box& s, const Interval& phi,
                        const TaxiParams& P);

// Interval image of one control period of an affine plant.  Coordinates in
// floor_dims are clamped at zero after every substep (the braking velocity
// floor); pass an empty list for a plain affine plant.
Box affine_interval_step(const Box& s, const Box& u, const AffineDynamics& dyn,
                         int substeps, const std::vector<int>& floor_dims);

// One conservatively linearized substep of the taxiing dynamics on a
// (p, theta, phi) star: first-order expansion at the center of the star's
// bounds plus an interval remainder added as fresh generators.  The phi
// coordinate is carried through unchanged.
StarSet taxi_linearized_step(const StarSet& s, const TaxiParams& P);

// Same step with the phi range supplied by the caller; phi is invariant
// across the substeps of a control period, so its bounds can be computed
// once and reused.
StarSet taxi_linearized_substep(const StarSet& s, const TaxiParams& P,
                                const Interval& phi_range);

// Interval enclosures of the second-order expansion residuals of the two
// taxiing state updates around (theta_star, phi_star):
//   first:  1/2 * v*dt * (-sin theta) * (theta - theta_star)^2
//   second: (v/L)*dt * tan(phi)*(tan^2(phi)+1) * (phi - phi_star)^2
// evaluated over the given ranges with interval arithmetic (factors
// enclosed independently, so the product covers every intermediate point).
std::pair<Interval, Interval> remainder_bounds(const Interval& theta,
                                               const Interval& phi,
                                               double theta_star,
                                               double phi_star,
                                               const TaxiParams& P);

}  // namespace gridreach

#endif
