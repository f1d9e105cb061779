#include "gridreach/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace gridreach::lp {

namespace {

constexpr double kEnterTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr int kStallWindow = 64;

struct Tableau {
  Eigen::MatrixXd T;
  Eigen::VectorXd b;        // kept nonnegative
  std::vector<int> basis;   // basic column of each row
  std::vector<char> active; // redundant rows get switched off after phase 1
  int n = 0;                // shifted problem variables sit in columns [0, n)
  int art_start = 0;        // artificial columns sit in [art_start, cols)
  int iters = 0;
  bool bland = false;
};

void validate(const Problem& p, const Eigen::VectorXd* cost) {
  const Eigen::Index n = p.lower.size();
  if (n == 0) throw AnalysisError("LP with no variables");
  if (p.upper.size() != n) throw AnalysisError("LP bound length mismatch");
  if (p.A.rows() != p.rhs.size() ||
      static_cast<Eigen::Index>(p.sense.size()) != p.A.rows()) {
    throw AnalysisError("LP row count mismatch");
  }
  if (p.A.rows() > 0 && p.A.cols() != n) {
    throw AnalysisError("LP column count mismatch");
  }
  if (cost && cost->size() != n) {
    throw AnalysisError("LP cost length mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(p.lower[i]) || !std::isfinite(p.upper[i])) {
      throw AnalysisError("LP requires finite variable bounds");
    }
  }
  if (p.A.rows() > 0 && (!p.A.allFinite() || !p.rhs.allFinite())) {
    throw AnalysisError("LP requires finite constraint data");
  }
}

// Shifts variables by their lower bounds so every variable is >= 0, turns
// upper bounds into explicit rows, and installs slack/artificial columns.
// Returns false when some variable box is empty (trivially infeasible).
bool build(const Problem& p, Tableau& t) {
  const int n = static_cast<int>(p.lower.size());
  const int m = static_cast<int>(p.A.rows());
  const int M = m + n;

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(M, n);
  Eigen::VectorXd rhs(M);
  // 0: "<=" needing only a slack; 1: ">=" needing surplus and artificial;
  // 2: "=" needing an artificial.
  std::vector<int> kind(static_cast<std::size_t>(M));

  for (int i = 0; i < m; ++i) {
    rows.row(i) = p.A.row(i);
    rhs[i] = p.rhs[i] - p.A.row(i).dot(p.lower);
    const bool eq = p.sense[static_cast<std::size_t>(i)] == RowSense::Eq;
    const bool flip = rhs[i] < 0.0;
    if (flip) {
      rows.row(i) = -rows.row(i);
      rhs[i] = -rhs[i];
    }
    kind[static_cast<std::size_t>(i)] = eq ? 2 : (flip ? 1 : 0);
  }
  for (int i = 0; i < n; ++i) {
    const double ub = p.upper[i] - p.lower[i];
    if (ub < -1e-12) return false;
    rows(m + i, i) = 1.0;
    rhs[m + i] = std::max(ub, 0.0);
    kind[static_cast<std::size_t>(m + i)] = 0;
  }

  int n_slack = 0, n_art = 0;
  for (int k : kind) {
    if (k != 2) ++n_slack;
    if (k != 0) ++n_art;
  }
  const int N = n + n_slack + n_art;
  t.T = Eigen::MatrixXd::Zero(M, N);
  t.T.leftCols(n) = rows;
  t.b = rhs;
  t.basis.assign(static_cast<std::size_t>(M), -1);
  t.active.assign(static_cast<std::size_t>(M), 1);
  t.n = n;
  t.art_start = n + n_slack;

  int slack = n;
  int art = t.art_start;
  for (int i = 0; i < M; ++i) {
    switch (kind[static_cast<std::size_t>(i)]) {
      case 0:
        t.T(i, slack) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = slack++;
        break;
      case 1:
        t.T(i, slack++) = -1.0;
        t.T(i, art) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = art++;
        break;
      default:
        t.T(i, art) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = art++;
        break;
    }
  }
  return true;
}

void pivot(Tableau& t, int row, int col) {
  const double pv = t.T(row, col);
  t.T.row(row) /= pv;
  t.b[row] /= pv;
  if (t.b[row] < 0.0 && t.b[row] > -1e-9) t.b[row] = 0.0;
  const int M = static_cast<int>(t.T.rows());
  for (int i = 0; i < M; ++i) {
    if (i == row || !t.active[static_cast<std::size_t>(i)]) continue;
    const double f = t.T(i, col);
    if (f == 0.0) continue;
    t.T.row(i) -= f * t.T.row(row);
    t.b[i] -= f * t.b[row];
    // Degenerate pivots can leave a whisker of negative slack; clamp it so
    // later ratio tests stay sane.
    if (t.b[i] < 0.0 && t.b[i] > -1e-9) t.b[i] = 0.0;
  }
  t.basis[static_cast<std::size_t>(row)] = col;
}

// Runs simplex to optimality with full-length column costs `c`.  Columns at
// or beyond `col_limit` never enter the basis (used to lock artificials
// out).  Returns false when the shared iteration budget runs dry.
bool optimize(Tableau& t, const Eigen::VectorXd& c, int col_limit,
              int iter_cap) {
  const int M = static_cast<int>(t.T.rows());
  double best_obj = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  while (true) {
    if (t.iters++ >= iter_cap) return false;

    Eigen::VectorXd cb = Eigen::VectorXd::Zero(M);
    double obj = 0.0;
    for (int i = 0; i < M; ++i) {
      if (!t.active[static_cast<std::size_t>(i)]) continue;
      cb[i] = c[t.basis[static_cast<std::size_t>(i)]];
      obj += cb[i] * t.b[i];
    }
    // Dantzig pricing is fast in practice but can stall on degenerate
    // vertices; once progress stops we switch to Bland's rule, which is
    // slower per step but provably cycle-free.
    if (obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
      best_obj = obj;
      since_improve = 0;
    } else if (++since_improve > kStallWindow) {
      t.bland = true;
    }

    Eigen::VectorXd d = c - t.T.transpose() * cb;
    int enter = -1;
    if (t.bland) {
      for (int j = 0; j < col_limit; ++j) {
        if (d[j] < -kEnterTol) {
          enter = j;
          break;
        }
      }
    } else {
      double best = -kEnterTol;
      for (int j = 0; j < col_limit; ++j) {
        if (d[j] < best) {
          best = d[j];
          enter = j;
        }
      }
    }
    if (enter < 0) return true;

    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < M; ++i) {
      if (!t.active[static_cast<std::size_t>(i)]) continue;
      const double a = t.T(i, enter);
      if (a <= kPivotTol) continue;
      const double r = t.b[i] / a;
      if (leave < 0 || r < best_ratio - 1e-12) {
        leave = i;
        best_ratio = r;
      } else if (r <= best_ratio + 1e-12 &&
                 t.basis[static_cast<std::size_t>(i)] <
                     t.basis[static_cast<std::size_t>(leave)]) {
        leave = i;
        best_ratio = std::min(best_ratio, r);
      }
    }
    if (leave < 0) {
      // Every variable is box-bounded, so a genuinely unbounded ray means
      // the tableau has been corrupted by roundoff.
      throw AnalysisError("LP became unbounded despite bounded variables");
    }
    pivot(t, leave, enter);
  }
}

// Minimizes the sum of artificials.  Returns the residual infeasibility, or
// nullopt if the iteration budget ran out first.
std::optional<double> phase1(Tableau& t, int iter_cap) {
  const int N = static_cast<int>(t.T.cols());
  if (t.art_start == N) return 0.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  c.tail(N - t.art_start).setOnes();
  if (!optimize(t, c, t.art_start, iter_cap)) return std::nullopt;
  double obj = 0.0;
  const int M = static_cast<int>(t.T.rows());
  for (int i = 0; i < M; ++i) {
    if (t.active[static_cast<std::size_t>(i)] &&
        t.basis[static_cast<std::size_t>(i)] >= t.art_start) {
      obj += t.b[i];
    }
  }
  return obj;
}

// Artificials still basic (at level zero) after phase 1 must not linger: a
// later pivot could lift them and silently violate the original rows.  Swap
// each one for a structural column, or retire the row as redundant.
void drive_out_artificials(Tableau& t) {
  const int M = static_cast<int>(t.T.rows());
  for (int i = 0; i < M; ++i) {
    if (!t.active[static_cast<std::size_t>(i)] ||
        t.basis[static_cast<std::size_t>(i)] < t.art_start) {
      continue;
    }
    if (t.b[i] <= 1e-9) t.b[i] = 0.0;
    int col = -1;
    for (int j = 0; j < t.art_start; ++j) {
      if (std::abs(t.T(i, j)) > kPivotTol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      pivot(t, i, col);  // b is zero here, so any pivot sign is safe
    } else {
      t.active[static_cast<std::size_t>(i)] = 0;
    }
  }
}

}  // namespace

Solution minimize(const Problem& p, const Eigen::VectorXd& cost,
                  int iter_cap) {
  validate(p, &cost);
  Tableau t;
  Solution s;
  if (!build(p, t)) {
    s.status = Status::Infeasible;
    return s;
  }
  const auto p1 = phase1(t, iter_cap);
  if (!p1) {
    s.status = Status::IterationLimit;
    return s;
  }
  if (*p1 > 1e-9) {
    s.status = Status::Infeasible;
    return s;
  }
  drive_out_artificials(t);

  const int N = static_cast<int>(t.T.cols());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  c.head(t.n) = cost;
  if (!optimize(t, c, t.art_start, iter_cap)) {
    s.status = Status::IterationLimit;
    return s;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(t.n);
  const int M = static_cast<int>(t.T.rows());
  for (int i = 0; i < M; ++i) {
    if (t.active[static_cast<std::size_t>(i)] &&
        t.basis[static_cast<std::size_t>(i)] < t.n) {
      y[t.basis[static_cast<std::size_t>(i)]] = t.b[i];
    }
  }
  s.status = Status::Optimal;
  s.x = y + p.lower;
  s.objective = cost.dot(s.x);
  return s;
}

bool feasible(const Problem& p, double tol, int iter_cap) {
  validate(p, nullptr);
  Tableau t;
  if (!build(p, t)) return false;
  const auto p1 = phase1(t, iter_cap);
  if (!p1) throw AnalysisError("LP feasibility probe hit iteration cap");
  return *p1 <= tol;
}

}  // namespace gridreach::lp
