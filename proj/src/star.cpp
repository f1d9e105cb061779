#include "gridreach/star.hpp"

#include <cmath>
#include <utility>

namespace gridreach {

namespace {

// A latent dimension whose constraint column is entirely zero can be folded
// into interval arithmetic instead of burdening the LP.
std::vector<char> constrained_mask(const Eigen::MatrixXd& C) {
  std::vector<char> mask(static_cast<std::size_t>(C.cols()), 0);
  for (Eigen::Index r = 0; r < C.rows(); ++r) {
    for (Eigen::Index k = 0; k < C.cols(); ++k) {
      if (C(r, k) != 0.0) mask[static_cast<std::size_t>(k)] = 1;
    }
  }
  return mask;
}

Box recenter(const Box& b) {
  std::vector<Interval> dims;
  dims.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double mid = b[i].mid();
    dims.emplace_back(b[i].lo - mid, b[i].hi - mid);
  }
  return Box(std::move(dims));
}

}  // namespace

StarSet StarSet::from_box(const Box& b) {
  const Eigen::Index n = static_cast<Eigen::Index>(b.size());
  return StarSet(b.center(), Eigen::MatrixXd::Identity(n, n),
                 Eigen::MatrixXd(0, n), Eigen::VectorXd(0), recenter(b));
}

StarSet::StarSet(Eigen::VectorXd center, Eigen::MatrixXd basis,
                 Eigen::MatrixXd C, Eigen::VectorXd d, Box latent_box)
    : center_(std::move(center)),
      basis_(std::move(basis)),
      C_(std::move(C)),
      d_(std::move(d)),
      latent_box_(std::move(latent_box)) {
  if (basis_.rows() != center_.size() ||
      static_cast<std::size_t>(basis_.cols()) != latent_box_.size() ||
      C_.cols() != basis_.cols() || C_.rows() != d_.size()) {
    throw AnalysisError("star set fields have inconsistent shapes");
  }
}

StarSet StarSet::affine_map(const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b) const {
  if (A.cols() != dim() || b.size() != A.rows()) {
    throw AnalysisError("affine map shape does not match star dimension");
  }
  return StarSet(A * center_ + b, A * basis_, C_, d_, latent_box_);
}

StarSet StarSet::add_halfspace(const Eigen::VectorXd& g, double h) const {
  if (g.size() != dim()) {
    throw AnalysisError("halfspace normal does not match star dimension");
  }
  Eigen::MatrixXd C(C_.rows() + 1, latent_dim());
  C.topRows(C_.rows()) = C_;
  C.row(C_.rows()) = g.transpose() * basis_;
  Eigen::VectorXd d(d_.size() + 1);
  d.head(d_.size()) = d_;
  d[d_.size()] = h - g.dot(center_);
  return StarSet(center_, basis_, std::move(C), std::move(d), latent_box_);
}

StarSet StarSet::minkowski_box(const Box& e) const {
  if (static_cast<Eigen::Index>(e.size()) != dim()) {
    throw AnalysisError("error box does not match star dimension");
  }
  const Eigen::Index n = dim();
  const Eigen::Index p = latent_dim();
  // Degenerate (zero-width) summand coordinates only shift the center;
  // adding generator columns for them would bloat every later LP.
  std::vector<Eigen::Index> wide;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (e[static_cast<std::size_t>(i)].width() > 0.0) wide.push_back(i);
  }
  const Eigen::Index w = static_cast<Eigen::Index>(wide.size());
  if (w == 0) {
    return StarSet(center_ + e.center(), basis_, C_, d_, latent_box_);
  }
  Eigen::MatrixXd basis(n, p + w);
  basis.leftCols(p) = basis_;
  basis.rightCols(w).setZero();
  std::vector<Interval> extra;
  extra.reserve(wide.size());
  for (Eigen::Index k = 0; k < w; ++k) {
    basis(wide[static_cast<std::size_t>(k)], p + k) = 1.0;
    extra.push_back(e[static_cast<std::size_t>(wide[static_cast<std::size_t>(k)])]);
  }
  Eigen::MatrixXd C(C_.rows(), p + w);
  C.leftCols(p) = C_;
  C.rightCols(w).setZero();
  return StarSet(center_ + e.center(), std::move(basis), std::move(C), d_,
                 latent_box_.concat(recenter(Box(std::move(extra)))));
}

StarSet StarSet::cartesian_box(const Box& b) const {
  const Eigen::Index n = dim();
  const Eigen::Index p = latent_dim();
  const Eigen::Index nb = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXd center(n + nb);
  center << center_, b.center();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n + nb, p + nb);
  basis.topLeftCorner(n, p) = basis_;
  basis.bottomRightCorner(nb, nb) = Eigen::MatrixXd::Identity(nb, nb);
  Eigen::MatrixXd C(C_.rows(), p + nb);
  C.leftCols(p) = C_;
  C.rightCols(nb).setZero();
  return StarSet(std::move(center), std::move(basis), std::move(C), d_,
                 latent_box_.concat(recenter(b)));
}

Eigen::VectorXd StarSet::point_at(const Eigen::VectorXd& alpha) const {
  if (alpha.size() != latent_dim()) {
    throw AnalysisError("latent vector does not match star latent dimension");
  }
  return center_ + basis_ * alpha;
}

bool StarSet::is_feasible() const {
  if (C_.rows() == 0) return true;
  const auto mask = constrained_mask(C_);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < latent_dim(); ++k) {
    if (mask[static_cast<std::size_t>(k)]) cols.push_back(k);
  }
  if (cols.empty()) {
    // Rows read 0 <= d: satisfied exactly when every d is (almost) nonneg.
    return d_.minCoeff() >= -1e-9;
  }
  lp::Problem p;
  p.A.resize(C_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    p.A.col(static_cast<Eigen::Index>(j)) = C_.col(cols[j]);
  }
  p.rhs = d_;
  p.sense.assign(static_cast<std::size_t>(C_.rows()), lp::RowSense::LessEq);
  p.lower.resize(static_cast<Eigen::Index>(cols.size()));
  p.upper.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    p.lower[static_cast<Eigen::Index>(j)] =
        latent_box_[static_cast<std::size_t>(cols[j])].lo;
    p.upper[static_cast<Eigen::Index>(j)] =
        latent_box_[static_cast<std::size_t>(cols[j])].hi;
  }
  return lp::feasible(p, 1e-9);
}

Box StarSet::quick_bounds() const {
  std::vector<Interval> dims;
  dims.reserve(static_cast<std::size_t>(dim()));
  for (Eigen::Index i = 0; i < dim(); ++i) {
    Interval acc = Interval::point(center_[i]);
    for (Eigen::Index k = 0; k < latent_dim(); ++k) {
      if (basis_(i, k) != 0.0) {
        acc = add(acc,
                  scale(latent_box_[static_cast<std::size_t>(k)], basis_(i, k)));
      }
    }
    dims.push_back(acc);
  }
  return Box(std::move(dims));
}

Interval StarSet::quick_coord(Eigen::Index i) const {
  if (i < 0 || i >= dim()) {
    throw AnalysisError("coordinate index out of range");
  }
  Interval acc = Interval::point(center_[i]);
  for (Eigen::Index k = 0; k < latent_dim(); ++k) {
    if (basis_(i, k) != 0.0) {
      acc = add(acc,
                scale(latent_box_[static_cast<std::size_t>(k)], basis_(i, k)));
    }
  }
  return acc;
}

Interval StarSet::coord_bounds(Eigen::Index i) const {
  if (i < 0 || i >= dim()) {
    throw AnalysisError("coordinate index out of range");
  }
  const auto mask = constrained_mask(C_);
  Interval base = Interval::point(center_[i]);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < latent_dim(); ++k) {
    if (mask[static_cast<std::size_t>(k)]) {
      cols.push_back(k);
    } else if (basis_(i, k) != 0.0) {
      base = add(base,
                 scale(latent_box_[static_cast<std::size_t>(k)], basis_(i, k)));
    }
  }
  if (cols.empty()) return base;

  Eigen::VectorXd cost(static_cast<Eigen::Index>(cols.size()));
  bool any_nonzero = false;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    cost[static_cast<Eigen::Index>(j)] = basis_(i, cols[j]);
    any_nonzero = any_nonzero || basis_(i, cols[j]) != 0.0;
  }

  lp::Problem p;
  p.A.resize(C_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    p.A.col(static_cast<Eigen::Index>(j)) = C_.col(cols[j]);
  }
  p.rhs = d_;
  p.sense.assign(static_cast<std::size_t>(C_.rows()), lp::RowSense::LessEq);
  p.lower.resize(static_cast<Eigen::Index>(cols.size()));
  p.upper.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    p.lower[static_cast<Eigen::Index>(j)] =
        latent_box_[static_cast<std::size_t>(cols[j])].lo;
    p.upper[static_cast<Eigen::Index>(j)] =
        latent_box_[static_cast<std::size_t>(cols[j])].hi;
  }

  if (!any_nonzero) {
    if (!lp::feasible(p, 1e-9)) {
      throw AnalysisError("bounds requested for an empty star set");
    }
    return base;
  }

  const auto lo_sol = lp::minimize(p, cost);
  if (lo_sol.status == lp::Status::Infeasible) {
    throw AnalysisError("bounds requested for an empty star set");
  }
  if (lo_sol.status != lp::Status::Optimal) {
    throw AnalysisError("LP did not terminate while bounding a star set");
  }
  const auto hi_sol = lp::minimize(p, (-cost).eval());
  if (hi_sol.status != lp::Status::Optimal) {
    throw AnalysisError("LP did not terminate while bounding a star set");
  }
  return Interval(base.lo + lo_sol.objective, base.hi - hi_sol.objective);
}

Box StarSet::box_bounds() const {
  std::vector<Interval> dims;
  dims.reserve(static_cast<std::size_t>(dim()));
  for (Eigen::Index i = 0; i < dim(); ++i) dims.push_back(coord_bounds(i));
  return Box(std::move(dims));
}

bool StarSet::intersects_box(const Box& cell) const {
  if (static_cast<Eigen::Index>(cell.size()) != dim()) {
    throw AnalysisError("cell box does not match star dimension");
  }
  // Sound prefilter: if even the unconstrained bounds miss the cell, the
  // true set certainly does.
  const Box qb = quick_bounds();
  for (std::size_t j = 0; j < cell.size(); ++j) {
    if (qb[j].hi < cell[j].lo || qb[j].lo > cell[j].hi) return false;
  }

  // Fold unconstrained single-coordinate generators (the remainder/latent
  // padding dims) into an expansion of the cell; keep the rest for the LP.
  const auto mask = constrained_mask(C_);
  const Eigen::Index n = dim();
  std::vector<Eigen::Index> cols;
  std::vector<Interval> expanded;
  expanded.reserve(cell.size());
  for (std::size_t j = 0; j < cell.size(); ++j) expanded.push_back(cell[j]);
  for (Eigen::Index k = 0; k < latent_dim(); ++k) {
    bool foldable = !mask[static_cast<std::size_t>(k)];
    Eigen::Index hit = -1;
    if (foldable) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (basis_(j, k) != 0.0) {
          if (hit >= 0) {
            foldable = false;
            break;
          }
          hit = j;
        }
      }
    }
    if (!foldable) {
      cols.push_back(k);
    } else if (hit >= 0) {
      const Interval contrib =
          scale(latent_box_[static_cast<std::size_t>(k)], basis_(hit, k));
      expanded[static_cast<std::size_t>(hit)] =
          sub(expanded[static_cast<std::size_t>(hit)], contrib);
    }
  }

  const Eigen::Index m = C_.rows();
  const Eigen::Index nc = static_cast<Eigen::Index>(cols.size());
  if (nc == 0) {
    // Pure (shifted) box: intersection reduces to a per-coordinate check
    // plus the constant constraint rows.
    for (Eigen::Index j = 0; j < n; ++j) {
      const Interval& e = expanded[static_cast<std::size_t>(j)];
      if (center_[j] < e.lo - 1e-9 || center_[j] > e.hi + 1e-9) return false;
    }
    return m == 0 || d_.minCoeff() >= -1e-9;
  }

  lp::Problem p;
  p.A.resize(m + 2 * n, nc);
  p.rhs.resize(m + 2 * n);
  for (Eigen::Index j = 0; j < nc; ++j) {
    p.A.col(j).head(m) = C_.col(cols[static_cast<std::size_t>(j)]);
  }
  p.rhs.head(m) = d_;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < nc; ++k) {
      const double v = basis_(j, cols[static_cast<std::size_t>(k)]);
      p.A(m + 2 * j, k) = v;
      p.A(m + 2 * j + 1, k) = -v;
    }
    const Interval& e = expanded[static_cast<std::size_t>(j)];
    p.rhs[m + 2 * j] = e.hi - center_[j];
    p.rhs[m + 2 * j + 1] = center_[j] - e.lo;
  }
  p.sense.assign(static_cast<std::size_t>(m + 2 * n), lp::RowSense::LessEq);
  p.lower.resize(nc);
  p.upper.resize(nc);
  for (Eigen::Index j = 0; j < nc; ++j) {
    p.lower[j] = latent_box_[static_cast<std::size_t>(cols[j])].lo;
    p.upper[j] = latent_box_[static_cast<std::size_t>(cols[j])].hi;
  }
  return lp::feasible(p, 1e-9);
}

bool StarSet::contains_point(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) {
    throw AnalysisError("point does not match star dimension");
  }
  const Eigen::Index n = dim();
  const Eigen::Index m = C_.rows();
  const Eigen::Index p_dim = latent_dim();
  lp::Problem p;
  p.A.resize(m + n, p_dim);
  p.A.topRows(m) = C_;
  p.A.bottomRows(n) = basis_;
  p.rhs.resize(m + n);
  p.rhs.head(m) = d_;
  p.rhs.tail(n) = x - center_;
  p.sense.assign(static_cast<std::size_t>(m), lp::RowSense::LessEq);
  p.sense.insert(p.sense.end(), static_cast<std::size_t>(n),
                 lp::RowSense::Eq);
  p.lower = latent_box_.lower();
  p.upper = latent_box_.upper();
  return lp::feasible(p, tol);
}

}  // namespace gridreach
