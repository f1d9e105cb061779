#ifndef GRIDREACH_GRID_HPP
#define GRIDREACH_GRID_HPP

// Uniform rectangular partition of the state space and the abstraction map
// from continuous regions to the set of overlapping cells.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridreach/interval.hpp"
#include "gridreach/star.hpp"

namespace gridreach {

struct CellIndex {
  std::vector<int> idx;

  bool operator==(const CellIndex& o) const { return idx == o.idx; }
  // Lexicographic order — the serialization and iteration order everywhere.
  bool operator<(const CellIndex& o) const { return idx < o.idx; }
};

class Grid {
 public:
  Grid(Box bounds, std::vector<int> counts);

  std::size_t dims() const { return counts_.size(); }
  const Box& bounds() const { return bounds_; }
  const std::vector<int>& counts() const { return counts_; }
  double width(std::size_t d) const { return widths_[d]; }
  std::int64_t total_cells() const { return total_; }

  // i-th grid line of dimension d.  edge(d, 0) and edge(d, counts[d]) are
  // exactly the domain bounds, so the cells cover the domain with no
  // floating-point gaps; interior edges are shared between neighbors.
  double edge(std::size_t d, int i) const;

  // Half-open indexing: a point on an interior edge belongs to the higher
  // cell; the top boundary belongs to the last cell.  Throws OutOfDomain.
  CellIndex cell_of(const Eigen::VectorXd& x) const;

  // The cell's closed box.
  Box cell_box(const CellIndex& c) const;

  // Row-major linearization of an index (last dimension fastest).
  std::int64_t flatten(const CellIndex& c) const;
  CellIndex unflatten(std::int64_t flat) const;

  // Inclusive index range of cells with closed overlap against [lo, hi] in
  // dimension d, clipped to the grid.  Touching an edge counts as overlap.
  std::pair<int, int> overlap_range(std::size_t d, double lo, double hi) const;

 private:
  Box bounds_;
  std::vector<int> counts_;
  std::vector<double> widths_;
  std::int64_t total_ = 0;
};

// Fixed-capacity bitset over the cells of one grid shape.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(const Grid& g);

  std::int64_t capacity() const { return capacity_; }
  bool contains(std::int64_t flat) const;
  void insert(std::int64_t flat);
  void erase(std::int64_t flat);
  std::int64_t count() const;
  bool empty() const;

  CellSet& unite(const CellSet& o);
  CellSet& subtract(const CellSet& o);
  bool intersects(const CellSet& o) const;
  bool is_subset_of(const CellSet& o) const;
  bool operator==(const CellSet& o) const;

  // Ascending flat indices (lexicographic cell order).
  std::vector<std::int64_t> to_sorted() const;

 private:
  std::int64_t capacity_ = 0;
  std::vector<std::uint64_t> words_;
};

// JSON array of index tuples, sorted lexicographically.
std::string cell_set_json(const CellSet& s, const Grid& g);

struct AlphaResult {
  CellSet cells;
  // True when part of the region lies outside the grid; the cells cover
  // only the inside part, and the caller must handle the egress.
  bool escaped = false;
};

// Cells overlapping the region (closed overlap: sharing a face counts).
// With eps_shrink, the region is shrunk by 1e-12 * cell width per dimension
// first, dropping measure-zero touches (off by default).  Throws
// OutOfDomain when the region lies entirely outside the grid.
AlphaResult alpha(const Box& region, const Grid& g, bool eps_shrink = false);

// Star unions are filtered cell-exactly: candidates come from each member's
// LP bounds, then kept only when the member actually meets the cell.
AlphaResult alpha(const StarUnion& region, const Grid& g,
                  bool eps_shrink = false);

}  // namespace gridreach

#endif
