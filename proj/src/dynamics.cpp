#include "gridreach/dynamics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gridreach/errors.hpp"

namespace gridreach {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

void check_taxi(const TaxiParams& P) {
  if (!(P.v > 0.0) || !(P.L > 0.0) || !(P.dt > 0.0) || P.substeps < 1) {
    throw ConfigError("taxi parameters need v, L, dt > 0 and substeps >= 1");
  }
}

void check_brake(const BrakeParams& P) {
  if (!(P.dt > 0.0) || P.substeps < 1) {
    throw ConfigError("brake parameters need dt > 0 and substeps >= 1");
  }
}

void check_affine(const AffineDynamics& dyn) {
  const Eigen::Index n = dyn.A_x.rows();
  if (dyn.A_x.cols() != n || dyn.A_u.rows() != n || dyn.c.size() != n) {
    throw ConfigError("affine plant shapes disagree: A_x must be square and "
                      "A_u, c must have matching rows");
  }
}

// The steering model is only defined for |phi| < pi/2; a concrete step
// rejects anything else, so an enclosure has to fit strictly inside that
// band — even when it dodges the tan poles by living on a farther branch.
void check_steering_domain(const Interval& phi) {
  if (!(phi.lo > -kHalfPi && phi.hi < kHalfPi)) {
    throw PoleCrossed("steering enclosure reaches +-pi/2");
  }
}

}  // namespace

AffineDynamics compose_substeps(const AffineDynamics& dyn, int k) {
  check_affine(dyn);
  if (k < 1) throw ConfigError("substep composition needs k >= 1");
  AffineDynamics out = dyn;
  for (int i = 1; i < k; ++i) {
    // x_{i+1} = A_x (A x + B u + c) + A_u u + c
    out.A_u = (dyn.A_x * out.A_u + dyn.A_u).eval();
    out.c = (dyn.A_x * out.c + dyn.c).eval();
    out.A_x = (dyn.A_x * out.A_x).eval();
  }
  return out;
}

Eigen::Vector2d taxi_step(const Eigen::Vector2d& s, double phi,
                          const TaxiParams& P) {
  check_taxi(P);
  if (!(std::abs(phi) < kHalfPi)) {
    throw PoleCrossed("steering angle reaches +-pi/2");
  }
  Eigen::Vector2d x = s;
  const double dtheta = (P.v / P.L) * P.dt * std::tan(phi);
  for (int i = 0; i < P.substeps; ++i) {
    x[0] += P.v * P.dt * std::sin(x[1]);
    x[1] += dtheta;
  }
  return x;
}

Eigen::Vector2d brake_step(const Eigen::Vector2d& s, double u,
                           const BrakeParams& P) {
  check_brake(P);
  Eigen::Vector2d x = s;
  const double a = 0.009 * u + 0.0042;
  for (int i = 0; i < P.substeps; ++i) {
    x[0] -= x[1] * P.dt;
    x[1] = std::max(x[1] - a * P.dt, 0.0);
  }
  return x;
}

AffineDynamics brake_affine(const BrakeParams& P) {
  check_brake(P);
  AffineDynamics step;
  step.A_x.resize(2, 2);
  step.A_x << 1.0, -P.dt, 0.0, 1.0;
  step.A_u.resize(2, 1);
  step.A_u << 0.0, -0.009 * P.dt;
  step.c.resize(2);
  step.c << 0.0, -0.0042 * P.dt;
  return compose_substeps(step, P.substeps);
}

Box taxi_monotonic_step(const Box& s, const Interval& phi,
                        const TaxiParams& P) {
  check_taxi(P);
  if (s.size() != 2) {
    throw AnalysisError("taxi state box must have (crosstrack, heading)");
  }
  check_steering_domain(phi);
  // tan is increasing on each branch, so endpoint substitution is exact for
  // the heading increment.
  const Interval dtheta = scale(tan_i(phi), (P.v / P.L) * P.dt);
  Interval p = s[0];
  Interval theta = s[1];
  for (int i = 0; i < P.substeps; ++i) {
    p = add(p, scale(sin_i(theta), P.v * P.dt));
    theta = add(theta, dtheta);
  }
  return Box{p, theta};
}

Box affine_interval_step(const Box& s, const Box& u, const AffineDynamics& dyn,
                         int substeps, const std::vector<int>& floor_dims) {
  check_affine(dyn);
  if (substeps < 1) throw AnalysisError("affine step needs substeps >= 1");
  const Eigen::Index n = dyn.A_x.rows();
  if (static_cast<Eigen::Index>(s.size()) != n ||
      static_cast<Eigen::Index>(u.size()) != dyn.A_u.cols()) {
    throw AnalysisError("affine step state/input sizes disagree with plant");
  }
  for (int f : floor_dims) {
    if (f < 0 || f >= n) throw AnalysisError("floor dimension out of range");
  }
  std::vector<Interval> x;
  x.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x.push_back(s[i]);
  for (int step = 0; step < substeps; ++step) {
    std::vector<Interval> next;
    next.reserve(x.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      Interval acc = Interval::point(dyn.c[i]);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (dyn.A_x(i, j) != 0.0) {
          acc = add(acc, scale(x[static_cast<std::size_t>(j)], dyn.A_x(i, j)));
        }
      }
      for (Eigen::Index j = 0; j < dyn.A_u.cols(); ++j) {
        if (dyn.A_u(i, j) != 0.0) {
          acc = add(acc, scale(u[static_cast<std::size_t>(j)], dyn.A_u(i, j)));
        }
      }
      next.push_back(acc);
    }
    for (int f : floor_dims) {
      Interval& v = next[static_cast<std::size_t>(f)];
      v = Interval(std::max(v.lo, 0.0), std::max(v.hi, 0.0));
    }
    x = std::move(next);
  }
  return Box(std::move(x));
}

std::pair<Interval, Interval> remainder_bounds(const Interval& theta,
                                               const Interval& phi,
                                               double theta_star,
                                               double phi_star,
                                               const TaxiParams& P) {
  check_taxi(P);
  const Interval dth = sub(theta, Interval::point(theta_star));
  const Interval dph = sub(phi, Interval::point(phi_star));
  const Interval first =
      scale(mul(neg(sin_i(theta)), sqr(dth)), 0.5 * P.v * P.dt);
  const Interval t = tan_i(phi);
  const Interval second = scale(
      mul(mul(t, add(sqr(t), Interval::point(1.0))), sqr(dph)),
      (P.v / P.L) * P.dt);
  return {first, second};
}

StarSet taxi_linearized_substep(const StarSet& s, const TaxiParams& P,
                                const Interval& phi_range) {
  check_taxi(P);
  if (s.dim() != 3) {
    throw AnalysisError("linearized taxi step needs a (p, theta, phi) star");
  }
  check_steering_domain(phi_range);
  const Interval theta = s.coord_bounds(1);
  const double ts = theta.mid();
  const double ps = phi_range.mid();

  const auto [r1, r2] = remainder_bounds(theta, phi_range, ts, ps, P);

  const double vt = P.v * P.dt;
  const double wt = (P.v / P.L) * P.dt;
  const double tn = std::tan(ps);
  // d/dphi tan = tan^2 + 1 at the expansion point; the expansion is exact
  // to first order, everything beyond lives in the remainder terms.
  const double dtan = tn * tn + 1.0;

  Eigen::MatrixXd A(3, 3);
  A << 1.0, vt * std::cos(ts), 0.0,
       0.0, 1.0, wt * dtan,
       0.0, 0.0, 1.0;
  Eigen::VectorXd b(3);
  b << vt * (std::sin(ts) - std::cos(ts) * ts),
       wt * (tn - dtan * ps),
       0.0;

  return s.affine_map(A, b).minkowski_box(
      Box{r1, r2, Interval::point(0.0)});
}

StarSet taxi_linearized_step(const StarSet& s, const TaxiParams& P) {
  check_taxi(P);
  if (s.dim() != 3) {
    throw AnalysisError("linearized taxi step needs a (p, theta, phi) star");
  }
  // The steering angle is held for the whole period, so its range is computed
  // once; theta moves, so each substep re-expands around the new midpoint.
  const Interval phi = s.coord_bounds(2);
  StarSet out = s;
  for (int i = 0; i < P.substeps; ++i) {
    out = taxi_linearized_substep(out, P, phi);
  }
  return out;
}

}  // namespace gridreach
