#include <cmath>
#include <vector>

#include "doctest.h"

#include <Eigen/Dense>

#include "gridreach/errors.hpp"
#include "gridreach/grid.hpp"
#include "gridreach/rng.hpp"

using namespace gridreach;

namespace {

Grid unit_grid_4x4() {
  return Grid(Box{Interval(0.0, 4.0), Interval(0.0, 4.0)}, {4, 4});
}

}  // namespace

TEST_CASE("grid edges hit the domain bounds exactly") {
  const Grid g(Box{Interval(-11.0, 11.0), Interval(-0.5236, 0.5236)},
               {32, 32});
  CHECK(g.edge(0, 0) == -11.0);
  CHECK(g.edge(0, 32) == 11.0);  // no accumulation drift at the top
  CHECK(g.edge(1, 0) == -0.5236);
  CHECK(g.edge(1, 32) == 0.5236);
  CHECK(g.total_cells() == 1024);
  CHECK(g.width(0) == doctest::Approx(22.0 / 32.0));
}

TEST_CASE("cell_of conventions: half-open with closed top") {
  const Grid g = unit_grid_4x4();
  Eigen::VectorXd x(2);

  x << 0.0, 0.0;
  CHECK(g.cell_of(x).idx == std::vector<int>{0, 0});
  x << 1.0, 2.0;  // interior edges belong to the upper cell
  CHECK(g.cell_of(x).idx == std::vector<int>{1, 2});
  x << 4.0, 4.0;  // the top boundary belongs to the last cell
  CHECK(g.cell_of(x).idx == std::vector<int>{3, 3});
  x << 3.999999, 0.5;
  CHECK(g.cell_of(x).idx == std::vector<int>{3, 0});

  x << -0.001, 1.0;
  CHECK_THROWS_AS(g.cell_of(x), OutOfDomain);
  x << 1.0, 4.001;
  CHECK_THROWS_AS(g.cell_of(x), OutOfDomain);
}

TEST_CASE("cell_box round-trips through cell_of") {
  std::mt19937_64 rng = make_rng(71);
  const Grid g(Box{Interval(-3.0, 2.0), Interval(0.1, 0.9)}, {7, 13});
  for (std::int64_t flat = 0; flat < g.total_cells(); ++flat) {
    const CellIndex c = g.unflatten(flat);
    CHECK(g.flatten(c) == flat);
    const Box b = g.cell_box(c);
    // Interior points map back to the same cell.
    for (int s = 0; s < 5; ++s) {
      Eigen::VectorXd x(2);
      x << uniform(rng, b[0].lo + 1e-9, b[0].hi - 1e-9),
          uniform(rng, b[1].lo + 1e-9, b[1].hi - 1e-9);
      CHECK(g.cell_of(x) == c);
    }
  }
}

TEST_CASE("cells cover the domain with no gaps") {
  const Grid g(Box{Interval(-1.0, 1.0)}, {10});
  // Shared edges: each cell's top is the next cell's bottom, exactly.
  for (int i = 0; i + 1 < 10; ++i) {
    CHECK(g.cell_box(CellIndex{{i}})[0].hi ==
          g.cell_box(CellIndex{{i + 1}})[0].lo);
  }
  CHECK(g.cell_box(CellIndex{{0}})[0].lo == g.bounds()[0].lo);
  CHECK(g.cell_box(CellIndex{{9}})[0].hi == g.bounds()[0].hi);
}

TEST_CASE("overlap_range uses closed overlap and clips") {
  const Grid g = unit_grid_4x4();
  // Strictly interior span.
  CHECK(g.overlap_range(0, 0.5, 1.5) == std::pair<int, int>{0, 1});
  // Touching an interior edge pulls in the neighbor.
  CHECK(g.overlap_range(0, 1.0, 1.5) == std::pair<int, int>{0, 1});
  CHECK(g.overlap_range(0, 1.1, 2.0) == std::pair<int, int>{1, 2});
  // Degenerate point on an edge touches both sides.
  CHECK(g.overlap_range(0, 2.0, 2.0) == std::pair<int, int>{1, 2});
  // Clipping.
  CHECK(g.overlap_range(0, -5.0, 0.25) == std::pair<int, int>{0, 0});
  CHECK(g.overlap_range(0, 3.75, 9.0) == std::pair<int, int>{3, 3});
  CHECK(g.overlap_range(0, -5.0, 9.0) == std::pair<int, int>{0, 3});
}

TEST_CASE("cell set operations") {
  const Grid g = unit_grid_4x4();
  CellSet a(g), b(g);
  a.insert(0);
  a.insert(5);
  a.insert(15);
  b.insert(5);
  b.insert(7);

  CHECK(a.count() == 3);
  CHECK(a.contains(5));
  CHECK(!a.contains(7));
  CHECK(a.intersects(b));
  CHECK(!a.is_subset_of(b));

  CellSet u = a;
  u.unite(b);
  CHECK(u.count() == 4);
  CHECK(a.is_subset_of(u));
  CHECK(b.is_subset_of(u));

  CellSet d = u;
  d.subtract(b);
  CHECK(d.count() == 2);
  CHECK(d.contains(0));
  CHECK(d.contains(15));
  CHECK(!d.contains(5));

  d.erase(0);
  CHECK(d.count() == 1);
  CHECK(d.to_sorted() == std::vector<std::int64_t>{15});

  CHECK_THROWS_AS(a.insert(99), AnalysisError);
  CHECK_THROWS_AS(a.intersects(CellSet(Grid(Box{Interval(0.0, 1.0)}, {3}))),
                  AnalysisError);
}

TEST_CASE("alpha on boxes: examples and face-touch convention") {
  const Grid g = unit_grid_4x4();

  // A region equal to one cell: the cell plus the face-touching neighbors.
  const AlphaResult one = alpha(Box{Interval(1.0, 2.0), Interval(1.0, 2.0)}, g);
  CHECK(!one.escaped);
  CHECK(one.cells.count() == 9);  // 3 x 3 block around the center cell

  // Strictly interior region covering one and a half cells per axis.
  const AlphaResult r =
      alpha(Box{Interval(0.25, 1.5), Interval(0.25, 0.75)}, g);
  CHECK(r.cells.count() == 2);
  CHECK(r.cells.contains(g.flatten(CellIndex{{0, 0}})));
  CHECK(r.cells.contains(g.flatten(CellIndex{{1, 0}})));

  // With the epsilon shrink, the exact-cell region maps to just its cell.
  const AlphaResult tight =
      alpha(Box{Interval(1.0, 2.0), Interval(1.0, 2.0)}, g, true);
  CHECK(tight.cells.count() == 1);
  CHECK(tight.cells.contains(g.flatten(CellIndex{{1, 1}})));
}

TEST_CASE("alpha flags egress and rejects fully outside regions") {
  const Grid g = unit_grid_4x4();
  const AlphaResult partial =
      alpha(Box{Interval(3.5, 6.0), Interval(0.5, 1.0)}, g);
  CHECK(partial.escaped);
  CHECK(partial.cells.count() == 2);  // column 3, rows 0 and 1

  CHECK_THROWS_AS(alpha(Box{Interval(5.0, 6.0), Interval(0.5, 1.0)}, g),
                  OutOfDomain);
  // Touching the boundary from outside still overlaps the edge cells.
  const AlphaResult touch =
      alpha(Box{Interval(4.0, 6.0), Interval(0.5, 1.0)}, g);
  CHECK(touch.escaped);
  CHECK(touch.cells.count() == 2);
}

TEST_CASE("alpha on a rotated star keeps only truly met cells") {
  // A diamond (rotated square) centered in a 4x4 grid over [-2, 2]^2: its
  // bounding box meets all 16 cells, the diamond itself misses the corners.
  const Grid g(Box{Interval(-2.0, 2.0), Interval(-2.0, 2.0)}, {4, 4});
  Eigen::MatrixXd R(2, 2);
  const double s = std::sqrt(0.5);
  R << s, -s, s, s;
  const StarSet diamond =
      StarSet::from_box(Box{Interval(-s - 0.3, s + 0.3),
                            Interval(-s - 0.3, s + 0.3)})
          .affine_map(R, Eigen::VectorXd::Zero(2));
  StarUnion u;
  u.stars.push_back(diamond);
  const AlphaResult a = alpha(u, g);
  CHECK(!a.escaped);
  // |x| + |y| <= sqrt(2) * (s + 0.3) ~ 1.424 < 2: the four corner cells
  // (|x|, |y| >= 1 everywhere) are excluded, everything else is met.
  CHECK(a.cells.count() == 12);
  CHECK(!a.cells.contains(g.flatten(CellIndex{{0, 0}})));
  CHECK(!a.cells.contains(g.flatten(CellIndex{{0, 3}})));
  CHECK(!a.cells.contains(g.flatten(CellIndex{{3, 0}})));
  CHECK(!a.cells.contains(g.flatten(CellIndex{{3, 3}})));

  // The box abstraction of the same region keeps all 16.
  const AlphaResult boxed = alpha(diamond.box_bounds(), g);
  CHECK(boxed.cells.count() == 16);
}

TEST_CASE("alpha star union: escape and outside policies") {
  const Grid g = unit_grid_4x4();
  StarUnion inside;
  inside.stars.push_back(
      StarSet::from_box(Box{Interval(0.25, 0.75), Interval(0.25, 0.75)}));
  StarUnion outside;
  outside.stars.push_back(
      StarSet::from_box(Box{Interval(9.0, 10.0), Interval(0.5, 1.0)}));

  CHECK_THROWS_AS(alpha(outside, g), OutOfDomain);

  StarUnion mixed;
  mixed.stars = {inside.stars[0], outside.stars[0]};
  const AlphaResult a = alpha(mixed, g);
  CHECK(a.escaped);  // one member left the grid entirely
  CHECK(a.cells.count() == 1);

  StarUnion empty;
  const AlphaResult e = alpha(empty, g);
  CHECK(!e.escaped);
  CHECK(e.cells.empty());
}

TEST_CASE("cell_set_json is sorted and compact") {
  const Grid g = unit_grid_4x4();
  CellSet s(g);
  s.insert(g.flatten(CellIndex{{2, 1}}));
  s.insert(g.flatten(CellIndex{{0, 3}}));
  CHECK(cell_set_json(s, g) == "[[0,3],[2,1]]");
  CHECK(cell_set_json(CellSet(g), g) == "[]");
}
