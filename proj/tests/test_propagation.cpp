#include <cmath>
#include <vector>

#include "doctest.h"

#include <Eigen/Dense>

#include "gridreach/errors.hpp"
#include "gridreach/network.hpp"
#include "gridreach/propagation.hpp"
#include "gridreach/rng.hpp"

using namespace gridreach;

namespace {

Network random_net(std::mt19937_64& g, const std::vector<int>& widths) {
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Eigen::MatrixXd W(widths[l + 1], widths[l]);
    Eigen::VectorXd b(widths[l + 1]);
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) {
        W(r, c) = uniform(g, -1.0, 1.0);
      }
      b[r] = uniform(g, -0.5, 0.5);
    }
    layers.push_back(Layer::affine(W, b));
    if (l + 2 < widths.size()) layers.push_back(Layer::relu());
  }
  return Network(widths.front(), std::move(layers));
}

Box random_box(std::mt19937_64& g, int n, double scale) {
  std::vector<Interval> dims;
  for (int i = 0; i < n; ++i) {
    const double c = uniform(g, -1.0, 1.0);
    const double r = uniform(g, 0.0, scale);
    dims.emplace_back(c - r, c + r);
  }
  return Box(std::move(dims));
}

Eigen::VectorXd sample_box(std::mt19937_64& g, const Box& b) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = uniform(g, b[i].lo, b[i].hi);
  }
  return x;
}

bool union_contains(const StarUnion& u, const Eigen::VectorXd& x, double tol) {
  for (const StarSet& s : u.stars) {
    if (s.contains_point(x, tol)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("one-dimensional relu splits a straddling star in two") {
  const Network relu1(1, {Layer::relu()});
  const StarSet in = StarSet::from_box(Box{Interval(-1.0, 2.0)});
  const StarUnion out = exact_star(relu1, in, 16);
  REQUIRE(out.size() == 2);

  // One branch is pinned at zero, the other covers (0, 2].
  const Box b0 = out.stars[0].box_bounds();
  const Box b1 = out.stars[1].box_bounds();
  CHECK(b0[0].lo == doctest::Approx(0.0));
  CHECK(b0[0].hi == doctest::Approx(0.0));
  CHECK(b1[0].lo == doctest::Approx(0.0));
  CHECK(b1[0].hi == doctest::Approx(2.0));
}

TEST_CASE("nonnegative stars pass relu unchanged") {
  const Network relu1(1, {Layer::relu()});
  const StarSet in = StarSet::from_box(Box{Interval(0.5, 2.0)});
  const StarUnion out = exact_star(relu1, in, 16);
  REQUIRE(out.size() == 1);
  CHECK(out.stars[0].box_bounds()[0].lo == doctest::Approx(0.5));
}

TEST_CASE("ibp matches hand interval arithmetic on a tiny net") {
  Eigen::MatrixXd W(1, 2);
  W << 1.0, -1.0;
  Eigen::VectorXd b(1);
  b << 0.5;
  const Network n(2, {Layer::affine(W, b), Layer::relu()});
  const Box out = ibp(n, Box{Interval(0.0, 1.0), Interval(0.0, 1.0)});
  // x - y + 0.5 in [-0.5, 1.5]; relu clips to [0, 1.5].
  CHECK(out[0].lo == doctest::Approx(0.0));
  CHECK(out[0].hi == doctest::Approx(1.5));
}

TEST_CASE("exact propagation is sound and tight on random networks") {
  std::mt19937_64 g = make_rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Network n = random_net(g, {2, 4, 4, 2});
    const Box in = random_box(g, 2, 0.8);
    const StarUnion out = exact_star(n, StarSet::from_box(in), 4096);
    const Box covered = ibp(n, in);

    for (int s = 0; s < 300; ++s) {
      const Eigen::VectorXd x = sample_box(g, in);
      const Eigen::VectorXd y = n.eval(x);
      // Soundness: every concrete output is in some union member.
      CHECK(union_contains(out, y, 1e-8));
      // And interval propagation covers it too.
      CHECK(covered.contains(y, 1e-9));
    }

    // Tightness (two-sided oracle): every union member's bounding box is
    // inside the interval bounds, so the union never exceeds ibp.
    for (const StarSet& s : out.stars) {
      const Box bb = s.box_bounds();
      for (std::size_t d = 0; d < bb.size(); ++d) {
        CHECK(bb[d].lo >= covered[d].lo - 1e-7);
        CHECK(bb[d].hi <= covered[d].hi + 1e-7);
      }
    }
  }
}

TEST_CASE("leaf count stays within 2^unstable") {
  std::mt19937_64 g = make_rng(52);
  for (int trial = 0; trial < 5; ++trial) {
    const Network n = random_net(g, {2, 4, 2});
    const Box in = random_box(g, 2, 1.0);

    // Count neurons whose pre-activation straddles zero under ibp (an
    // overestimate of the true unstable count).
    int unstable = 0;
    const Layer& first = n.layers()[0];
    const Box h = ibp(Network(2, {first}), in);
    for (std::size_t d = 0; d < h.size(); ++d) {
      if (h[d].lo < 0.0 && h[d].hi > 0.0) ++unstable;
    }
    const StarUnion out = exact_star(n, StarSet::from_box(in), 4096);
    CHECK(static_cast<double>(out.size()) <= std::pow(2.0, unstable) + 0.5);
  }
}

TEST_CASE("split budget trips SplitBudgetExceeded") {
  std::mt19937_64 g = make_rng(53);
  // A wide layer straddling zero in every neuron forces many splits.
  Eigen::MatrixXd W(8, 2);
  Eigen::VectorXd b(8);
  for (int r = 0; r < 8; ++r) {
    W(r, 0) = uniform(g, 0.5, 1.0);
    W(r, 1) = uniform(g, -1.0, -0.5);
    b[r] = uniform(g, -0.05, 0.05);
  }
  const Network n(2, {Layer::affine(W, b), Layer::relu()});
  const StarSet in =
      StarSet::from_box(Box{Interval(-1.0, 1.0), Interval(-1.0, 1.0)});
  CHECK_THROWS_AS(exact_star(n, in, 4), SplitBudgetExceeded);
  // With a generous budget the same input goes through.
  CHECK_NOTHROW(exact_star(n, in, 4096));
}

TEST_CASE("ibp result always contains the exact union") {
  std::mt19937_64 g = make_rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    const Network n = random_net(g, {3, 5, 3, 2});
    const Box in = random_box(g, 3, 0.5);
    const StarUnion out = exact_star(n, StarSet::from_box(in), 4096);
    const Box covered = ibp(n, in);
    for (const StarSet& s : out.stars) {
      const Box bb = s.box_bounds();
      for (std::size_t d = 0; d < bb.size(); ++d) {
        CHECK(bb[d].lo >= covered[d].lo - 1e-7);
        CHECK(bb[d].hi <= covered[d].hi + 1e-7);
      }
    }
  }
}
