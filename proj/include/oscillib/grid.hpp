#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oscillib {

/// Largest supported grid dimension.
inline constexpr std::size_t kMaxDims = 4;

/// Multi-index (cell coordinates). Entries beyond the grid dimension are zero.
using Index = std::array<std::int64_t, kMaxDims>;

/// Shape and cell width of a uniform n-dimensional grid.
///
/// Cell i occupies the half-open box prod_k [i_k h, (i_k + 1) h); storage is
/// row-major with the last axis fastest.
class GridGeometry {
 public:
  GridGeometry() = default;

  GridGeometry(std::vector<std::size_t> shape, double cell_width)
      : shape_(std::move(shape)), cell_width_(cell_width) {
    if (shape_.empty() || shape_.size() > kMaxDims) {
      throw std::invalid_argument("grid dimension must be in [1, " +
                                  std::to_string(kMaxDims) + "]");
    }
    for (auto e : shape_) {
      if (e < 1) throw std::invalid_argument("grid extents must be >= 1");
    }
    if (!(cell_width_ > 0.0) || !std::isfinite(cell_width_)) {
      throw std::invalid_argument("cell width must be positive and finite");
    }
    strides_.assign(shape_.size(), 1);
    for (std::size_t k = shape_.size() - 1; k > 0; --k) {
      strides_[k - 1] = strides_[k] * shape_[k];
    }
    size_ = strides_[0] * shape_[0];
  }

  std::size_t ndim() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  double cell_width() const { return cell_width_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  std::size_t max_extent() const { return *std::max_element(shape_.begin(), shape_.end()); }
  std::size_t min_extent() const { return *std::min_element(shape_.begin(), shape_.end()); }

  /// h^n, the volume of one cell.
  double cell_volume() const { return std::pow(cell_width_, static_cast<double>(ndim())); }

  bool contains(const Index& i) const {
    for (std::size_t k = 0; k < ndim(); ++k) {
      if (i[k] < 0 || i[k] >= static_cast<std::int64_t>(shape_[k])) return false;
    }
    return true;
  }

  std::size_t linear(const Index& i) const {
    std::size_t lin = 0;
    for (std::size_t k = 0; k < ndim(); ++k) lin += static_cast<std::size_t>(i[k]) * strides_[k];
    return lin;
  }

  Index unravel(std::size_t lin) const {
    Index i{};
    for (std::size_t k = 0; k < ndim(); ++k) {
      i[k] = static_cast<std::int64_t>(lin / strides_[k]);
      lin %= strides_[k];
    }
    return i;
  }

  /// Physical coordinate of the centre of cell i along `axis`.
  double cell_center(const Index& i, std::size_t axis) const {
    return (static_cast<double>(i[axis]) + 0.5) * cell_width_;
  }

  bool operator==(const GridGeometry& other) const {
    return shape_ == other.shape_ && cell_width_ == other.cell_width_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  double cell_width_ = 1.0;
};

/// Real-valued function sampled on a uniform grid, extended by zero outside it.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(GridGeometry geometry)
      : geometry_(std::move(geometry)), values_(geometry_.size(), 0.0) {}

  GridFunction(GridGeometry geometry, std::vector<double> values)
      : geometry_(std::move(geometry)), values_(std::move(values)) {
    if (values_.size() != geometry_.size()) {
      throw std::invalid_argument("value count does not match grid shape");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
    }
  }

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

  double operator[](std::size_t lin) const { return values_[lin]; }
  double at(const Index& i) const { return values_[geometry_.linear(i)]; }

  /// Mutable access for builders; callers must keep values finite.
  double& mutable_at(std::size_t lin) { return values_[lin]; }

  bool has_negative() const {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return v < 0.0; });
  }

  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

/// Nonnegative mass per cell. A density g is stored as g * h^n per cell.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(GridGeometry geometry, std::vector<double> masses)
      : geometry_(std::move(geometry)), masses_(std::move(masses)) {
    if (masses_.size() != geometry_.size()) {
      throw std::invalid_argument("mass count does not match grid shape");
    }
    for (double m : masses_) {
      if (!std::isfinite(m) || m < 0.0) {
        throw std::invalid_argument("masses must be finite and nonnegative");
      }
    }
  }

  /// Lebesgue measure (times `scale`): mass scale * h^n in every cell.
  static DiscreteMeasure lebesgue(const GridGeometry& geometry, double scale = 1.0) {
    return {geometry, std::vector<double>(geometry.size(), scale * geometry.cell_volume())};
  }

  static DiscreteMeasure dirac(const GridGeometry& geometry, const Index& cell, double mass = 1.0) {
    if (!geometry.contains(cell)) throw std::invalid_argument("dirac cell outside grid");
    std::vector<double> masses(geometry.size(), 0.0);
    masses[geometry.linear(cell)] = mass;
    return {geometry, std::move(masses)};
  }

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return masses_.size(); }
  std::span<const double> masses() const { return masses_; }
  double operator[](std::size_t lin) const { return masses_[lin]; }

  /// True when every cell carries the same mass (a scaled Lebesgue measure).
  bool is_uniform() const {
    return std::all_of(masses_.begin(), masses_.end(),
                       [&](double m) { return m == masses_.front(); }) &&
           masses_.front() > 0.0;
  }

 private:
  GridGeometry geometry_;
  std::vector<double> masses_;
};

/// Axis-parallel cube: cells anchor_k <= i_k < anchor_k + side.
struct CubeSpec {
  std::size_t ndim = 1;
  Index anchor{};
  std::int64_t side = 1;

  static CubeSpec make(std::initializer_list<std::int64_t> anchor, std::int64_t side) {
    if (anchor.size() == 0 || anchor.size() > kMaxDims) {
      throw std::invalid_argument("cube dimension must be in [1, kMaxDims]");
    }
    if (side < 1) throw std::invalid_argument("cube side must be >= 1");
    CubeSpec q;
    q.ndim = anchor.size();
    std::copy(anchor.begin(), anchor.end(), q.anchor.begin());
    q.side = side;
    return q;
  }

  bool operator==(const CubeSpec&) const = default;
  auto operator<=>(const CubeSpec&) const = default;
};

/// Euclidean diameter of the closed cube, s * h * sqrt(n).
inline double cube_diameter(const CubeSpec& q, double cell_width) {
  return static_cast<double>(q.side) * cell_width * std::sqrt(static_cast<double>(q.ndim));
}

/// |Q| = (s h)^n.
inline double cube_volume(const CubeSpec& q, double cell_width) {
  return std::pow(static_cast<double>(q.side) * cell_width, static_cast<double>(q.ndim));
}

inline std::int64_t cube_cell_count(const CubeSpec& q) {
  std::int64_t c = 1;
  for (std::size_t k = 0; k < q.ndim; ++k) c *= q.side;
  return c;
}

inline bool cube_inside(const CubeSpec& q, const GridGeometry& g) {
  if (q.ndim != g.ndim()) return false;
  for (std::size_t k = 0; k < q.ndim; ++k) {
    if (q.anchor[k] < 0 || q.anchor[k] + q.side > static_cast<std::int64_t>(g.extent(k))) {
      return false;
    }
  }
  return true;
}

inline bool cube_contains_cell(const CubeSpec& q, const Index& i) {
  for (std::size_t k = 0; k < q.ndim; ++k) {
    if (i[k] < q.anchor[k] || i[k] >= q.anchor[k] + q.side) return false;
  }
  return true;
}

/// Cell-set inclusion inner ⊆ outer.
inline bool cube_contains(const CubeSpec& outer, const CubeSpec& inner) {
  for (std::size_t k = 0; k < outer.ndim; ++k) {
    if (inner.anchor[k] < outer.anchor[k] ||
        inner.anchor[k] + inner.side > outer.anchor[k] + outer.side) {
      return false;
    }
  }
  return true;
}

/// Same centre, side factor * s. Only odd factors keep the result on the cell lattice.
inline CubeSpec cube_dilate(const CubeSpec& q, std::int64_t factor) {
  if (factor < 1 || factor % 2 == 0) {
    throw std::invalid_argument("dilation factor must be a positive odd integer");
  }
  CubeSpec out = q;
  const std::int64_t grow = (factor - 1) / 2 * q.side;
  for (std::size_t k = 0; k < q.ndim; ++k) out.anchor[k] -= grow;
  out.side = factor * q.side;
  return out;
}

/// Visit every cell of q (no clipping) in row-major order.
template <typename Fn>
void for_each_cell(const CubeSpec& q, Fn&& fn) {
  Index i = q.anchor;
  const std::size_t n = q.ndim;
  while (true) {
    fn(static_cast<const Index&>(i));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++i[k] < q.anchor[k] + q.side) break;
      i[k] = q.anchor[k];
      if (k == 0) return;
    }
  }
}

/// Subset of grid cells forming a face-connected domain.
class DomainMask {
 public:
  DomainMask() = default;

  DomainMask(GridGeometry geometry, std::vector<std::uint8_t> cells)
      : geometry_(std::move(geometry)), cells_(std::move(cells)) {
    if (cells_.size() != geometry_.size()) {
      throw std::invalid_argument("mask size does not match grid shape");
    }
    for (auto& c : cells_) c = c ? 1 : 0;
    if (std::none_of(cells_.begin(), cells_.end(), [](auto c) { return c != 0; })) {
      throw std::invalid_argument("domain mask has no cells");
    }
    if (!face_connected()) throw std::invalid_argument("domain mask is not connected");
  }

  const GridGeometry& geometry() const { return geometry_; }
  bool operator[](std::size_t lin) const { return cells_[lin] != 0; }
  bool contains(const Index& i) const {
    return geometry_.contains(i) && cells_[geometry_.linear(i)] != 0;
  }
  std::span<const std::uint8_t> cells() const { return cells_; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }
  bool connected() const { return true; }

 private:
  bool face_connected() const {
    const auto start = static_cast<std::size_t>(
        std::find(cells_.begin(), cells_.end(), std::uint8_t{1}) - cells_.begin());
    std::vector<std::uint8_t> seen(cells_.size(), 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const auto lin = queue.front();
      queue.pop_front();
      const Index i = geometry_.unravel(lin);
      for (std::size_t k = 0; k < geometry_.ndim(); ++k) {
        for (int d : {-1, 1}) {
          Index j = i;
          j[k] += d;
          if (!geometry_.contains(j)) continue;
          const auto lj = geometry_.linear(j);
          if (cells_[lj] && !seen[lj]) {
            seen[lj] = 1;
            ++reached;
            queue.push_back(lj);
          }
        }
      }
    }
    return reached == count();
  }

  GridGeometry geometry_;
  std::vector<std::uint8_t> cells_;
};

}  // namespace oscillib
