#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "oscillib/grid.hpp"

namespace oscillib {

/// n-dimensional prefix-sum table with one extra slot per axis.
///
/// Built axis by axis in a fixed order, so the table (and every cube sum
/// read from it) is bit-reproducible. Cells outside the grid count as zero.
/// A cube whose clipped extent is a single cell is answered from the raw
/// value, which keeps single-cell sums exact.
class SummedAreaTable {
 public:
  SummedAreaTable() = default;

  SummedAreaTable(const GridGeometry& geometry, std::span<const double> values)
      : geometry_(geometry), values_(values.begin(), values.end()) {
    const std::size_t n = geometry_.ndim();
    table_shape_.resize(n);
    table_strides_.assign(n, 1);
    for (std::size_t k = 0; k < n; ++k) table_shape_[k] = geometry_.extent(k) + 1;
    for (std::size_t k = n - 1; k > 0; --k) {
      table_strides_[k - 1] = table_strides_[k] * table_shape_[k];
    }
    table_.assign(table_strides_[0] * table_shape_[0], 0.0);

    // Scatter values to the shifted slots, then run a cumulative sum per axis.
    for (std::size_t lin = 0; lin < values_.size(); ++lin) {
      const Index i = geometry_.unravel(lin);
      std::size_t t = 0;
      for (std::size_t k = 0; k < n; ++k) t += static_cast<std::size_t>(i[k] + 1) * table_strides_[k];
      table_[t] = values_[lin];
    }
    for (std::size_t axis = 0; axis < n; ++axis) {
      const std::size_t stride = table_strides_[axis];
      const std::size_t len = table_shape_[axis];
      const std::size_t outer = table_.size() / (stride * len);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < stride; ++in) {
          const std::size_t base = o * stride * len + in;
          for (std::size_t j = 1; j < len; ++j) {
            table_[base + j * stride] += table_[base + (j - 1) * stride];
          }
        }
      }
    }
  }

  static SummedAreaTable of(const GridFunction& u) { return {u.geometry(), u.values()}; }

  static SummedAreaTable of_abs(const GridFunction& u) {
    std::vector<double> a(u.values().begin(), u.values().end());
    for (auto& v : a) v = std::fabs(v);
    return {u.geometry(), a};
  }

  static SummedAreaTable of(const DiscreteMeasure& mu) { return {mu.geometry(), mu.masses()}; }

  const GridGeometry& geometry() const { return geometry_; }

  /// Sum over the cells of the cube (anchor, side) that lie in the grid.
  double sum(const Index& anchor, std::int64_t side) const {
    const std::size_t n = geometry_.ndim();
    Index lo{};
    Index hi{};
    bool single = true;
    for (std::size_t k = 0; k < n; ++k) {
      lo[k] = std::max<std::int64_t>(anchor[k], 0);
      hi[k] = std::min<std::int64_t>(anchor[k] + side, static_cast<std::int64_t>(geometry_.extent(k)));
      if (lo[k] >= hi[k]) return 0.0;
      single = single && (hi[k] - lo[k] == 1);
    }
    if (single) return values_[geometry_.linear(lo)];

    double acc = 0.0;
    const unsigned corners = 1u << n;
    for (unsigned mask = 0; mask < corners; ++mask) {
      std::size_t t = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto c = (mask >> k) & 1u ? hi[k] : lo[k];
        t += static_cast<std::size_t>(c) * table_strides_[k];
      }
      const bool negative = ((n - static_cast<std::size_t>(std::popcount(mask))) & 1u) != 0;
      acc += negative ? -table_[t] : table_[t];
    }
    return acc;
  }

  double cube_sum(const CubeSpec& q) const { return sum(q.anchor, q.side); }

  double total() const { return table_.back(); }

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
  std::vector<std::size_t> table_shape_;
  std::vector<std::size_t> table_strides_;
  std::vector<double> table_;
};

inline double cube_sum(const SummedAreaTable& table, const CubeSpec& q) { return table.cube_sum(q); }

/// Zero-extended mean over the full cube volume: sum * h^n / (s h)^n.
inline double cube_average(const SummedAreaTable& table, const CubeSpec& q) {
  return table.cube_sum(q) / std::pow(static_cast<double>(q.side), static_cast<double>(q.ndim));
}

inline double cube_average(const GridFunction& u, const CubeSpec& q) {
  return cube_average(SummedAreaTable::of(u), q);
}

/// mu(Q): mass of the cells of q inside the grid.
inline double cube_measure(const SummedAreaTable& mass_table, const CubeSpec& q) {
  return mass_table.cube_sum(q);
}

inline double cube_measure(const DiscreteMeasure& mu, const CubeSpec& q) {
  return cube_measure(SummedAreaTable::of(mu), q);
}

}  // namespace oscillib
