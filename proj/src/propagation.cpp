#include "gridreach/propagation.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gridreach/errors.hpp"

namespace gridreach {

Box ibp(const Network& n, const Box& input) {
  if (static_cast<int>(input.size()) != n.in_dim()) {
    throw AnalysisError("interval propagation input has " +
                        std::to_string(input.size()) + " dims, network " +
                        "expects " + std::to_string(n.in_dim()));
  }
  Eigen::VectorXd c = input.center();
  Eigen::VectorXd r = input.radius();
  for (const Layer& l : n.layers()) {
    if (l.kind == Layer::Kind::Affine) {
      c = (l.W * c + l.b).eval();
      r = (l.W.cwiseAbs() * r).eval();
    } else {
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double lo = std::max(c[i] - r[i], 0.0);
        const double hi = std::max(c[i] + r[i], 0.0);
        c[i] = 0.5 * (lo + hi);
        r[i] = 0.5 * (hi - lo);
      }
    }
  }
  std::vector<Interval> dims;
  dims.reserve(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    dims.emplace_back(c[i] - r[i], c[i] + r[i]);
  }
  return Box(std::move(dims));
}

StarUnion relu_coordinate(const StarSet& s, Eigen::Index j) {
  // Cheap interval bound first; the LP only runs when the sign is unclear.
  Interval b = s.quick_coord(j);
  if (b.lo < 0.0 && b.hi > 0.0) b = s.coord_bounds(j);

  StarUnion out;
  if (b.lo >= 0.0) {
    out.stars.push_back(s);
    return out;
  }

  const Eigen::Index n = s.dim();
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
  proj(j, j) = 0.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);

  if (b.hi <= 0.0) {
    out.stars.push_back(s.affine_map(proj, zero));
    return out;
  }

  // Genuine straddle: both bound values are attained inside the set, so
  // both branches are non-empty and no feasibility check is needed.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  g[j] = 1.0;
  out.stars.push_back(s.add_halfspace(g, 0.0).affine_map(proj, zero));
  out.stars.push_back(s.add_halfspace(-g, 0.0));
  return out;
}

StarUnion exact_star(const Network& n, const StarSet& input, int split_cap) {
  if (static_cast<int>(input.dim()) != n.in_dim()) {
    throw AnalysisError("star propagation input has " +
                        std::to_string(input.dim()) + " dims, network " +
                        "expects " + std::to_string(n.in_dim()));
  }
  if (split_cap < 1) throw AnalysisError("split cap must be positive");

  std::vector<StarSet> cur;
  cur.push_back(input);
  for (const Layer& l : n.layers()) {
    if (l.kind == Layer::Kind::Affine) {
      for (StarSet& s : cur) s = s.affine_map(l.W, l.b);
      continue;
    }
    const Eigen::Index width = cur.front().dim();
    for (Eigen::Index j = 0; j < width; ++j) {
      std::vector<StarSet> next;
      next.reserve(cur.size() + 1);
      for (const StarSet& s : cur) {
        StarUnion split = relu_coordinate(s, j);
        for (StarSet& t : split.stars) {
          next.push_back(std::move(t));
          if (static_cast<int>(next.size()) > split_cap) {
            throw SplitBudgetExceeded(
                "exact propagation needs more than " +
                std::to_string(split_cap) + " pieces");
          }
        }
      }
      cur = std::move(next);
    }
  }

  StarUnion out;
  out.stars = std::move(cur);
  return out;
}

}  // namespace gridreach
