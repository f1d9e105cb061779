#include "gridreach/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gridreach/errors.hpp"

namespace gridreach {

namespace {

constexpr double kEpsShrinkFactor = 1e-12;

// Different propagation engines evaluate the same affine maps in different
// operation orders, so two sound enclosures of one region can disagree by a
// few ulp at the domain boundary.  An overhang below this fraction of the
// domain span is a boundary touch, not egress.
constexpr double kEscapeTolFactor = 1e-9;

}  // namespace

Grid::Grid(Box bounds, std::vector<int> counts)
    : bounds_(std::move(bounds)), counts_(std::move(counts)) {
  if (bounds_.size() != counts_.size()) {
    throw ConfigError("grid bounds and cell counts disagree in dimension");
  }
  widths_.reserve(counts_.size());
  total_ = 1;
  for (std::size_t d = 0; d < counts_.size(); ++d) {
    if (counts_[d] < 1) throw ConfigError("grid cell counts must be >= 1");
    if (!(bounds_[d].width() > 0.0)) {
      throw ConfigError("grid bounds must have positive width per dimension");
    }
    widths_.push_back(bounds_[d].width() / counts_[d]);
    total_ *= counts_[d];
  }
}

double Grid::edge(std::size_t d, int i) const {
  if (d >= counts_.size() || i < 0 || i > counts_[d]) {
    throw AnalysisError("grid edge index out of range");
  }
  if (i == 0) return bounds_[d].lo;
  if (i == counts_[d]) return bounds_[d].hi;
  return bounds_[d].lo + i * widths_[d];
}

CellIndex Grid::cell_of(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dims()) {
    throw AnalysisError("point dimension does not match the grid");
  }
  CellIndex c;
  c.idx.resize(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    const double v = x[static_cast<Eigen::Index>(d)];
    if (v < bounds_[d].lo || v > bounds_[d].hi) {
      throw OutOfDomain("point lies outside the grid in dimension " +
                        std::to_string(d));
    }
    const int n = counts_[d];
    int i = static_cast<int>(std::floor((v - bounds_[d].lo) / widths_[d]));
    i = std::clamp(i, 0, n - 1);
    // The division can land one cell off near an edge; fix by comparing
    // against the exact grid lines.
    while (i + 1 <= n - 1 && v >= edge(d, i + 1)) ++i;
    while (i > 0 && v < edge(d, i)) --i;
    c.idx[d] = i;
  }
  return c;
}

Box Grid::cell_box(const CellIndex& c) const {
  if (c.idx.size() != dims()) {
    throw AnalysisError("cell index dimension does not match the grid");
  }
  std::vector<Interval> b;
  b.reserve(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    const int i = c.idx[d];
    if (i < 0 || i >= counts_[d]) {
      throw AnalysisError("cell index out of range in dimension " +
                          std::to_string(d));
    }
    b.emplace_back(edge(d, i), edge(d, i + 1));
  }
  return Box(std::move(b));
}

std::int64_t Grid::flatten(const CellIndex& c) const {
  if (c.idx.size() != dims()) {
    throw AnalysisError("cell index dimension does not match the grid");
  }
  std::int64_t flat = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    const int i = c.idx[d];
    if (i < 0 || i >= counts_[d]) {
      throw AnalysisError("cell index out of range in dimension " +
                          std::to_string(d));
    }
    flat = flat * counts_[d] + i;
  }
  return flat;
}

CellIndex Grid::unflatten(std::int64_t flat) const {
  if (flat < 0 || flat >= total_) {
    throw AnalysisError("flat cell index out of range");
  }
  CellIndex c;
  c.idx.resize(dims());
  for (std::size_t d = dims(); d-- > 0;) {
    c.idx[d] = static_cast<int>(flat % counts_[d]);
    flat /= counts_[d];
  }
  return c;
}

std::pair<int, int> Grid::overlap_range(std::size_t d, double lo,
                                        double hi) const {
  if (d >= dims()) throw AnalysisError("grid dimension out of range");
  if (!(lo <= hi)) throw AnalysisError("overlap range needs lo <= hi");
  const int n = counts_[d];

  int a = static_cast<int>(std::floor((lo - bounds_[d].lo) / widths_[d]));
  a = std::clamp(a, 0, n - 1);
  while (a < n - 1 && edge(d, a + 1) < lo) ++a;
  // Cell a-1 = [edge(a-1), edge(a)] still overlaps when its top edge
  // touches lo (closed overlap).
  while (a > 0 && edge(d, a) >= lo) --a;

  int b = static_cast<int>(std::floor((hi - bounds_[d].lo) / widths_[d]));
  b = std::clamp(b, 0, n - 1);
  while (b > 0 && edge(d, b) > hi) --b;
  while (b < n - 1 && edge(d, b + 1) <= hi) ++b;

  return {a, b};
}

CellSet::CellSet(const Grid& g)
    : capacity_(g.total_cells()),
      words_(static_cast<std::size_t>((g.total_cells() + 63) / 64), 0) {}

bool CellSet::contains(std::int64_t flat) const {
  if (flat < 0 || flat >= capacity_) {
    throw AnalysisError("cell index out of range for this set");
  }
  return (words_[static_cast<std::size_t>(flat >> 6)] >>
          (static_cast<std::uint64_t>(flat) & 63)) &
         1u;
}

void CellSet::insert(std::int64_t flat) {
  if (flat < 0 || flat >= capacity_) {
    throw AnalysisError("cell index out of range for this set");
  }
  words_[static_cast<std::size_t>(flat >> 6)] |=
      std::uint64_t{1} << (static_cast<std::uint64_t>(flat) & 63);
}

void CellSet::erase(std::int64_t flat) {
  if (flat < 0 || flat >= capacity_) {
    throw AnalysisError("cell index out of range for this set");
  }
  words_[static_cast<std::size_t>(flat >> 6)] &=
      ~(std::uint64_t{1} << (static_cast<std::uint64_t>(flat) & 63));
}

std::int64_t CellSet::count() const {
  std::int64_t c = 0;
  for (std::uint64_t w : words_) c += std::popcount(w);
  return c;
}

bool CellSet::empty() const {
  for (std::uint64_t w : words_) {
    if (w != 0) return false;
  }
  return true;
}

namespace {

void check_same_shape(const CellSet& a, const CellSet& b) {
  if (a.capacity() != b.capacity()) {
    throw AnalysisError("cell sets belong to different grids");
  }
}

}  // namespace

CellSet& CellSet::unite(const CellSet& o) {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

CellSet& CellSet::subtract(const CellSet& o) {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

bool CellSet::intersects(const CellSet& o) const {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & o.words_[i]) return true;
  }
  return false;
}

bool CellSet::is_subset_of(const CellSet& o) const {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~o.words_[i]) return false;
  }
  return true;
}

bool CellSet::operator==(const CellSet& o) const {
  return capacity_ == o.capacity_ && words_ == o.words_;
}

std::vector<std::int64_t> CellSet::to_sorted() const {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w != 0) {
      const int bit = std::countr_zero(w);
      out.push_back(static_cast<std::int64_t>(i) * 64 + bit);
      w &= w - 1;
    }
  }
  return out;
}

std::string cell_set_json(const CellSet& s, const Grid& g) {
  if (s.capacity() != g.total_cells()) {
    throw AnalysisError("cell set does not belong to this grid");
  }
  std::string out = "[";
  bool first_cell = true;
  for (std::int64_t flat : s.to_sorted()) {
    if (!first_cell) out += ",";
    first_cell = false;
    const CellIndex c = g.unflatten(flat);
    out += "[";
    for (std::size_t d = 0; d < c.idx.size(); ++d) {
      if (d > 0) out += ",";
      out += std::to_string(c.idx[d]);
    }
    out += "]";
  }
  out += "]";
  return out;
}

namespace {

// Shared by both alpha overloads once per-dimension candidate ranges are
// known: inserts the full index product into the set.
void insert_product(const std::vector<std::pair<int, int>>& ranges,
                    const Grid& g, CellSet& cells) {
  CellIndex c;
  c.idx.resize(g.dims());
  for (std::size_t d = 0; d < g.dims(); ++d) c.idx[d] = ranges[d].first;
  while (true) {
    cells.insert(g.flatten(c));
    std::size_t d = g.dims();
    while (d-- > 0) {
      if (c.idx[d] < ranges[d].second) {
        ++c.idx[d];
        break;
      }
      c.idx[d] = ranges[d].first;
      if (d == 0) return;
    }
  }
}

struct ClippedRegion {
  std::vector<std::pair<int, int>> ranges;
  bool escaped = false;
  bool outside = false;  // strictly separated from the grid in some dim
};

ClippedRegion clip_region(const Box& region, const Grid& g, bool eps_shrink) {
  ClippedRegion out;
  out.ranges.resize(g.dims());
  for (std::size_t d = 0; d < g.dims(); ++d) {
    double lo = region[d].lo;
    double hi = region[d].hi;
    if (eps_shrink) {
      const double eps = kEpsShrinkFactor * g.width(d);
      if (hi - lo > 2 * eps) {
        lo += eps;
        hi -= eps;
      } else {
        lo = hi = 0.5 * (lo + hi);
      }
    }
    const Interval dom = g.bounds()[d];
    if (hi < dom.lo || lo > dom.hi) {
      out.outside = true;
      return out;
    }
    const double tol = kEscapeTolFactor * (dom.hi - dom.lo);
    if (region[d].lo < dom.lo - tol || region[d].hi > dom.hi + tol) {
      out.escaped = true;
    }
    out.ranges[d] =
        g.overlap_range(d, std::max(lo, dom.lo), std::min(hi, dom.hi));
  }
  return out;
}

}  // namespace

AlphaResult alpha(const Box& region, const Grid& g, bool eps_shrink) {
  if (region.size() != g.dims()) {
    throw AnalysisError("region dimension does not match the grid");
  }
  AlphaResult res;
  res.cells = CellSet(g);
  const ClippedRegion cr = clip_region(region, g, eps_shrink);
  if (cr.outside) {
    throw OutOfDomain("region lies entirely outside the grid");
  }
  res.escaped = cr.escaped;
  insert_product(cr.ranges, g, res.cells);
  return res;
}

AlphaResult alpha(const StarUnion& region, const Grid& g, bool eps_shrink) {
  AlphaResult res;
  res.cells = CellSet(g);
  if (region.empty()) return res;

  bool any_inside = false;
  for (const StarSet& s : region.stars) {
    if (s.dim() != static_cast<Eigen::Index>(g.dims())) {
      throw AnalysisError("star dimension does not match the grid");
    }
    const Box bb = s.box_bounds();
    const ClippedRegion cr = clip_region(bb, g, eps_shrink);
    if (cr.outside) {
      res.escaped = true;
      continue;
    }
    any_inside = true;
    res.escaped = res.escaped || cr.escaped;

    // Enumerate bounding-box candidates; keep those the member really meets
    // (LP test).  With eps_shrink the cell is shrunk instead of the star,
    // which drops the same measure-zero touches.
    CellIndex c;
    c.idx.resize(g.dims());
    for (std::size_t d = 0; d < g.dims(); ++d) c.idx[d] = cr.ranges[d].first;
    while (true) {
      const std::int64_t flat = g.flatten(c);
      if (!res.cells.contains(flat)) {
        Box cell = g.cell_box(c);
        if (eps_shrink) {
          std::vector<Interval> dims;
          dims.reserve(cell.size());
          for (std::size_t d = 0; d < cell.size(); ++d) {
            const double eps = kEpsShrinkFactor * g.width(d);
            dims.emplace_back(cell[d].lo + eps, cell[d].hi - eps);
          }
          cell = Box(std::move(dims));
        }
        if (s.intersects_box(cell)) res.cells.insert(flat);
      }
      std::size_t d = g.dims();
      bool done = true;
      while (d-- > 0) {
        if (c.idx[d] < cr.ranges[d].second) {
          ++c.idx[d];
          done = false;
          break;
        }
        c.idx[d] = cr.ranges[d].first;
      }
      if (done) break;
    }
  }

  if (!any_inside) {
    throw OutOfDomain("star union lies entirely outside the grid");
  }
  return res;
}

}  // namespace gridreach
