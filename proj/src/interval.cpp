#include "gridreach/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridreach {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw AnalysisError(std::string("non-finite interval endpoint in ") + what);
  }
}
}  // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  require_finite(lo, "Interval");
  require_finite(hi, "Interval");
  if (lo > hi) {
    throw AnalysisError("interval endpoints out of order");
  }
}

Interval add(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}

Interval sub(const Interval& a, const Interval& b) {
  return Interval(a.lo - b.hi, a.hi - b.lo);
}

Interval mul(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                  std::max(std::max(p1, p2), std::max(p3, p4)));
}

Interval neg(const Interval& a) { return Interval(-a.hi, -a.lo); }

Interval scale(const Interval& a, double s) {
  require_finite(s, "scale");
  return s >= 0 ? Interval(a.lo * s, a.hi * s) : Interval(a.hi * s, a.lo * s);
}

Interval shift(const Interval& a, double s) {
  return Interval(a.lo + s, a.hi + s);
}

Interval sqr(const Interval& a) {
  const double l2 = a.lo * a.lo, h2 = a.hi * a.hi;
  if (a.lo <= 0.0 && a.hi >= 0.0) {
    return Interval(0.0, std::max(l2, h2));
  }
  return Interval(std::min(l2, h2), std::max(l2, h2));
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval sin_i(const Interval& a) {
  double lo = std::min(std::sin(a.lo), std::sin(a.hi));
  double hi = std::max(std::sin(a.lo), std::sin(a.hi));
  // Interior extrema of sin live at pi/2 + k*pi: maxima for even k,
  // minima for odd k.
  const double kmin = std::ceil((a.lo - kPi / 2.0) / kPi);
  const double kmax = std::floor((a.hi - kPi / 2.0) / kPi);
  for (double k = kmin; k <= kmax; k += 1.0) {
    // Use llround so the parity test is exact for the relevant range.
    if (static_cast<long long>(std::llround(k)) % 2 == 0) {
      hi = 1.0;
    } else {
      lo = -1.0;
    }
  }
  return Interval(lo, hi);
}

Interval tan_i(const Interval& a) {
  // Poles at pi/2 + k*pi.  The smallest candidate k with pole >= lo:
  const double k = std::ceil((a.lo - kPi / 2.0) / kPi);
  const double pole = kPi / 2.0 + k * kPi;
  if (pole <= a.hi) {
    throw PoleCrossed("tan enclosure crosses a pole near " +
                      std::to_string(pole));
  }
  // tan is increasing on a pole-free interval.
  return Interval(std::tan(a.lo), std::tan(a.hi));
}

Box::Box(std::vector<Interval> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw AnalysisError("box must have at least one dimension");
  }
}

Box::Box(std::initializer_list<Interval> dims)
    : Box(std::vector<Interval>(dims)) {}

Eigen::VectorXd Box::center() const {
  Eigen::VectorXd c(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = dims_[i].mid();
  return c;
}

Eigen::VectorXd Box::radius() const {
  Eigen::VectorXd r(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) r[i] = dims_[i].rad();
  return r;
}

Eigen::VectorXd Box::lower() const {
  Eigen::VectorXd l(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) l[i] = dims_[i].lo;
  return l;
}

Eigen::VectorXd Box::upper() const {
  Eigen::VectorXd u(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) u[i] = dims_[i].hi;
  return u;
}

bool Box::contains(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!dims_[i].contains(x[static_cast<Eigen::Index>(i)], tol)) return false;
  }
  return true;
}

bool Box::contains(const Box& inner, double tol) const {
  if (inner.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!dims_[i].contains(inner[i], tol)) return false;
  }
  return true;
}

Box Box::concat(const Box& other) const {
  std::vector<Interval> d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return Box(std::move(d));
}

Box Box::from_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size()) {
    throw AnalysisError("box bound vectors differ in length");
  }
  std::vector<Interval> d;
  d.reserve(static_cast<std::size_t>(lo.size()));
  for (Eigen::Index i = 0; i < lo.size(); ++i) d.emplace_back(lo[i], hi[i]);
  return Box(std::move(d));
}

}  // namespace gridreach
