#ifndef GRIDREACH_INTERVAL_HPP
#define GRIDREACH_INTERVAL_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "gridreach/errors.hpp"

namespace gridreach {

// Closed interval [lo, hi] with finite endpoints.  There is no directed
// rounding: enclosures are tight up to double rounding, and soundness tests
// allow a 1e-12 slack instead.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_);
  static Interval point(double v) { return Interval(v, v); }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return 0.5 * (hi - lo); }
  bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
  bool contains(const Interval& other, double tol = 0.0) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }

  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

Interval add(const Interval& a, const Interval& b);
Interval sub(const Interval& a, const Interval& b);
Interval mul(const Interval& a, const Interval& b);
Interval neg(const Interval& a);
Interval scale(const Interval& a, double s);
Interval shift(const Interval& a, double s);
// Tight square: [min x^2, max x^2] over the interval (not mul(a, a)).
Interval sqr(const Interval& a);
Interval hull(const Interval& a, const Interval& b);

// Exact image of sin over [lo, hi]; accounts for interior extrema.
Interval sin_i(const Interval& a);
// Exact image of tan over [lo, hi].  Throws PoleCrossed when the interval
// contains pi/2 + k*pi; never returns an infinite interval.
Interval tan_i(const Interval& a);

// Axis-aligned box: a non-empty vector of intervals.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> dims);
  Box(std::initializer_list<Interval> dims);

  std::size_t size() const { return dims_.size(); }
  bool empty() const { return dims_.empty(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }
  const std::vector<Interval>& dims() const { return dims_; }

  Eigen::VectorXd center() const;
  Eigen::VectorXd radius() const;
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  bool contains(const Box& inner, double tol = 0.0) const;

  bool operator==(const Box& o) const { return dims_ == o.dims_; }

  // Cartesian product (this x other).
  Box concat(const Box& other) const;
  static Box from_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

 private:
  std::vector<Interval> dims_;
};

}  // namespace gridreach

#endif
