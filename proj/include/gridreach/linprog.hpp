#ifndef GRIDREACH_LINPROG_HPP
#define GRIDREACH_LINPROG_HPP

// Small dense LP solver used by the star-set geometry routines.  All
// problems we solve have a handful of variables (latent dimension of a
// star) and up to a few hundred rows, so a two-phase tableau simplex with
// dense storage is both simple and fast enough.  Dantzig pricing is used
// until stalling is suspected, then we fall back to Bland's rule so the
// solver cannot cycle.  Everything is deterministic: no randomised
// perturbation, no time-based seeds.

#include <vector>

#include <Eigen/Dense>

#include "gridreach/errors.hpp"

namespace gridreach::lp {

enum class RowSense { LessEq, Eq };

// minimize c.x  s.t.  A x (<=|=) rhs,  lower <= x <= upper.
// Bounds must be finite; the callers always have box-bounded variables.
struct Problem {
  Eigen::MatrixXd A;            // row-major constraints, may have 0 rows
  Eigen::VectorXd rhs;          // one entry per row
  std::vector<RowSense> sense;  // one entry per row
  Eigen::VectorXd lower;        // per-variable lower bounds (finite)
  Eigen::VectorXd upper;        // per-variable upper bounds (finite)
};

enum class Status { Optimal, Infeasible, IterationLimit };

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;  // valid when status == Optimal
  Eigen::VectorXd x;       // valid when status == Optimal
};

// Solves the LP.  Throws AnalysisError if the problem is malformed
// (dimension mismatch, non-finite bounds).  An IterationLimit result is
// returned (not thrown) so callers can decide how to react; the geometry
// layer treats it as an analysis failure.
Solution minimize(const Problem& p, const Eigen::VectorXd& cost,
                  int iter_cap = 20000);

// Phase-1 only feasibility probe.  A point violating constraints by at
// most `tol` still counts as feasible; this keeps tangent/degenerate
// intersections from flapping on rounding noise.
bool feasible(const Problem& p, double tol = 1e-9, int iter_cap = 20000);

}  // namespace gridreach::lp

#endif
