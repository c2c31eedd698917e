#pragma once

// Whitney decomposition of a cube Q' = [0, L]^n, with chains of cubes joining
// each cube to the central one and the cubes meeting a boundary annulus.
//
// All coordinates are integers on a lattice of D = 3 * 2^(depth-1) units per
// side L, so generation i has side 2^(depth-i) units and every identity below
// is checked without tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <boost/rational.hpp>

#include "oscillib/grid.hpp"

namespace oscillib {

using Rational = boost::rational<std::int64_t>;

/// Closed lattice box [corner, corner + side]^n in lattice units.
struct LatticeBox {
  std::size_t ndim = 1;
  Index corner{};
  std::int64_t side = 1;

  bool operator==(const LatticeBox&) const = default;
};

struct WhitneyCube {
  int generation = 1;
  LatticeBox box;

  bool operator==(const WhitneyCube&) const = default;
};

namespace detail {

inline bool boxes_touch(const LatticeBox& a, const LatticeBox& b) {
  for (std::size_t k = 0; k < a.ndim; ++k) {
    if (a.corner[k] > b.corner[k] + b.side || b.corner[k] > a.corner[k] + a.side) return false;
  }
  return true;
}

inline bool interiors_overlap(const LatticeBox& a, const LatticeBox& b) {
  for (std::size_t k = 0; k < a.ndim; ++k) {
    if (a.corner[k] >= b.corner[k] + b.side || b.corner[k] >= a.corner[k] + a.side) return false;
  }
  return true;
}

inline std::vector<LatticeBox> halve(const LatticeBox& b) {
  const std::int64_t half = b.side / 2;
  std::vector<LatticeBox> out;
  for (unsigned mask = 0; mask < (1u << b.ndim); ++mask) {
    LatticeBox c = b;
    c.side = half;
    for (std::size_t k = 0; k < b.ndim; ++k) c.corner[k] += ((mask >> k) & 1u) ? half : 0;
    out.push_back(c);
  }
  return out;
}

inline std::int64_t ipow(std::int64_t base, std::size_t e) {
  std::int64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace detail

class WhitneyDecomposition {
 public:
  Rational parent_side() const { return parent_side_; }
  std::size_t ndim() const { return ndim_; }
  int depth() const { return static_cast<int>(generations_.size()); }
  /// Lattice units per parent side.
  std::int64_t units() const { return units_; }

  const std::vector<std::vector<WhitneyCube>>& generations() const { return generations_; }
  const std::vector<LatticeBox>& residual() const { return residual_; }
  const WhitneyCube& central() const { return generations_.front().front(); }

  std::vector<WhitneyCube> cubes() const {
    std::vector<WhitneyCube> all;
    for (const auto& g : generations_) all.insert(all.end(), g.begin(), g.end());
    return all;
  }

  bool contains(const WhitneyCube& q) const {
    if (q.generation < 1 || q.generation > depth()) return false;
    const auto& gen = generations_[static_cast<std::size_t>(q.generation - 1)];
    return std::find(gen.begin(), gen.end(), q) != gen.end();
  }

  /// Length of `u` lattice units in the parent's length unit.
  Rational length(std::int64_t u) const { return parent_side_ * Rational(u, units_); }

  friend WhitneyDecomposition whitney_decompose(Rational parent_side, std::size_t n, int depth);

 private:
  Rational parent_side_{1};
  std::size_t ndim_ = 1;
  std::int64_t units_ = 3;
  std::vector<std::vector<WhitneyCube>> generations_;
  std::vector<LatticeBox> residual_;
};

/// Split Q' into 3^n cubes and keep the middle one as generation 1; then
/// repeatedly halve every unselected cube and keep the halves touching the
/// previous generation.
inline WhitneyDecomposition whitney_decompose(Rational parent_side, std::size_t n, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (n < 1 || n > kMaxDims) throw std::invalid_argument("dimension out of range");
  if (parent_side <= 0) throw std::invalid_argument("parent side must be positive");
  // Volumes are int64 lattice counts: units^n must stay below 2^62.
  if (static_cast<double>(n) * (std::log2(3.0) + depth - 1) >= 62.0) {
    throw std::invalid_argument("depth too large for the integer lattice");
  }

  WhitneyDecomposition d;
  d.parent_side_ = parent_side;
  d.ndim_ = n;
  d.units_ = 3 * (std::int64_t{1} << (depth - 1));
  const std::int64_t third = d.units_ / 3;

  std::vector<LatticeBox> remaining;
  std::vector<WhitneyCube> first;
  for (std::int64_t t = 0; t < detail::ipow(3, n); ++t) {
    LatticeBox b;
    b.ndim = n;
    b.side = third;
    std::int64_t r = t;
    bool middle = true;
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t digit = r % 3;
      r /= 3;
      b.corner[k] = digit * third;
      middle = middle && digit == 1;
    }
    if (middle) {
      first.push_back({1, b});
    } else {
      remaining.push_back(b);
    }
  }
  d.generations_.push_back(std::move(first));

  for (int gen = 2; gen <= depth; ++gen) {
    const auto& previous = d.generations_.back();
    std::vector<WhitneyCube> selected;
    std::vector<LatticeBox> next_remaining;
    for (const auto& b : remaining) {
      for (const auto& child : detail::halve(b)) {
        const bool touches = std::any_of(previous.begin(), previous.end(), [&](const WhitneyCube& p) {
          return detail::boxes_touch(child, p.box);
        });
        if (touches) {
          selected.push_back({gen, child});
        } else {
          next_remaining.push_back(child);
        }
      }
    }
    d.generations_.push_back(std::move(selected));
    remaining = std::move(next_remaining);
  }
  d.residual_ = std::move(remaining);
  return d;
}

/// d(Q, boundary of Q') in lattice units.
inline std::int64_t distance_to_boundary(const WhitneyDecomposition& d, const LatticeBox& b) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = 0; k < b.ndim; ++k) {
    best = std::min({best, b.corner[k], d.units() - b.corner[k] - b.side});
  }
  return best;
}

inline std::int64_t lattice_volume(const LatticeBox& b) { return detail::ipow(b.side, b.ndim); }

inline bool interiors_disjoint(const LatticeBox& a, const LatticeBox& b) {
  return !detail::interiors_overlap(a, b);
}

/// |2a ∩ 2b| / |a|, where 2Q has the centre of Q and twice its side.
inline Rational overlap_fraction(const WhitneyCube& a, const WhitneyCube& b) {
  // Doubled coordinates keep the dilated corners integral.
  std::int64_t overlap = 1;
  for (std::size_t k = 0; k < a.box.ndim; ++k) {
    const std::int64_t alo = 2 * a.box.corner[k] - a.box.side;
    const std::int64_t ahi = 2 * a.box.corner[k] + 3 * a.box.side;
    const std::int64_t blo = 2 * b.box.corner[k] - b.box.side;
    const std::int64_t bhi = 2 * b.box.corner[k] + 3 * b.box.side;
    const std::int64_t len = std::min(ahi, bhi) - std::max(alo, blo);
    if (len <= 0) return Rational(0);
    overlap *= len;
  }
  return Rational(overlap, detail::ipow(2 * a.box.side, a.box.ndim));
}

struct Chain {
  WhitneyCube source;
  std::vector<WhitneyCube> cubes;

  std::size_t length() const { return cubes.size(); }
};

namespace detail {

/// Parameter interval [enter, exit] of the segment c + t (target - c),
/// t in [0, 1], inside a closed box; doubled coordinates throughout.
inline std::optional<std::pair<Rational, Rational>> segment_interval(const Index& c, const Index& target,
                                                                      const LatticeBox& b) {
  Rational enter(0);
  Rational exit(1);
  for (std::size_t k = 0; k < b.ndim; ++k) {
    const std::int64_t lo = 2 * b.corner[k];
    const std::int64_t hi = 2 * (b.corner[k] + b.side);
    const std::int64_t dir = target[k] - c[k];
    if (dir == 0) {
      if (c[k] < lo || c[k] > hi) return std::nullopt;
      continue;
    }
    Rational t1(lo - c[k], dir);
    Rational t2(hi - c[k], dir);
    if (t1 > t2) std::swap(t1, t2);
    enter = std::max(enter, t1);
    exit = std::min(exit, t2);
    if (enter > exit) return std::nullopt;
  }
  return std::make_pair(enter, exit);
}

inline Index doubled_center(const LatticeBox& b) {
  Index c{};
  for (std::size_t k = 0; k < b.ndim; ++k) c[k] = 2 * b.corner[k] + b.side;
  return c;
}

}  // namespace detail

/// Cubes met by the segment from c(source) to the centre of Q', ordered by
/// the parameter where the segment enters them (ties: generation, then
/// corner). A cube counts as met when it contains a piece of the segment of
/// positive length; cubes touched at a single point are skipped.
inline Chain whitney_chain(const WhitneyCube& source, const WhitneyDecomposition& d) {
  if (!d.contains(source)) throw std::invalid_argument("source cube is not in the decomposition");
  Chain chain{source, {}};
  if (source == d.central()) {
    chain.cubes.push_back(source);
    return chain;
  }
  const Index start = detail::doubled_center(source.box);
  Index target{};
  for (std::size_t k = 0; k < d.ndim(); ++k) target[k] = d.units();

  struct Hit {
    Rational enter;
    WhitneyCube cube;
  };
  std::vector<Hit> hits;
  for (const auto& gen : d.generations()) {
    for (const auto& q : gen) {
      const auto interval = detail::segment_interval(start, target, q.box);
      if (interval && interval->first < interval->second) hits.push_back({interval->first, q});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.enter != b.enter) return a.enter < b.enter;
    if (a.cube.generation != b.cube.generation) return a.cube.generation < b.cube.generation;
    return a.cube.box.corner < b.cube.box.corner;
  });
  for (const auto& h : hits) chain.cubes.push_back(h.cube);
  return chain;
}

/// Cubes of the decomposition meeting the annulus A = Q' \ Q'', where Q'' is
/// the concentric cube of side L - 2 r0. A cube meets A when its interior is
/// not contained in the closed Q''.
inline std::vector<WhitneyCube> annulus_cubes(const WhitneyDecomposition& d, Rational r0) {
  if (!(r0 > 0) || !(2 * r0 < d.parent_side())) {
    throw std::invalid_argument("r0 must satisfy 0 < 2 r0 < L");
  }
  const Rational inner_lo = r0 / d.parent_side() * d.units();
  const Rational inner_hi = Rational(d.units()) - inner_lo;
  std::vector<WhitneyCube> out;
  for (const auto& q : d.cubes()) {
    bool inside = true;
    for (std::size_t k = 0; k < d.ndim(); ++k) {
      inside = inside && Rational(q.box.corner[k]) >= inner_lo &&
               Rational(q.box.corner[k] + q.box.side) <= inner_hi;
    }
    if (!inside) out.push_back(q);
  }
  return out;
}

/// |box ∩ A| in lattice units^n, exact.
inline Rational annulus_overlap(const WhitneyDecomposition& d, const LatticeBox& b, Rational r0) {
  const Rational inner_lo = r0 / d.parent_side() * d.units();
  const Rational inner_hi = Rational(d.units()) - inner_lo;
  Rational inner(1);
  for (std::size_t k = 0; k < b.ndim; ++k) {
    const Rational lo = std::max(Rational(b.corner[k]), inner_lo);
    const Rational hi = std::min(Rational(b.corner[k] + b.side), inner_hi);
    inner *= hi > lo ? hi - lo : Rational(0);
  }
  return Rational(lattice_volume(b)) - inner;
}

/// |A| in lattice units^n.
inline Rational annulus_measure(const WhitneyDecomposition& d, Rational r0) {
  const Rational inner_side = Rational(d.units()) - 2 * (r0 / d.parent_side() * d.units());
  Rational inner(1);
  Rational outer(1);
  for (std::size_t k = 0; k < d.ndim(); ++k) {
    inner *= inner_side;
    outer *= d.units();
  }
  return outer - inner;
}

struct ChainSweep {
  std::size_t chains = 0;
  std::size_t max_length = 0;
  /// max over sources of length / generation
  Rational length_per_generation{0};
  /// most cubes of one generation inside a single chain
  std::size_t max_same_generation = 0;
  /// smallest |2Q^i ∩ 2Q^(i+1)| / |Q^i| over consecutive pairs; empty when
  /// no chain has two cubes
  std::optional<Rational> min_overlap;
  bool endpoints_ok = true;
};

/// Build the chain of every cube and record the chain statistics.
inline ChainSweep sweep_chains(const WhitneyDecomposition& d) {
  ChainSweep s;
  for (const auto& q : d.cubes()) {
    const Chain c = whitney_chain(q, d);
    ++s.chains;
    s.max_length = std::max(s.max_length, c.length());
    s.length_per_generation =
        std::max(s.length_per_generation, Rational(static_cast<std::int64_t>(c.length()), q.generation));
    s.endpoints_ok = s.endpoints_ok && !c.cubes.empty() && c.cubes.front() == q &&
                     c.cubes.back() == d.central();
    std::vector<std::size_t> per_gen(static_cast<std::size_t>(d.depth()) + 1, 0);
    for (const auto& p : c.cubes) {
      s.max_same_generation = std::max(s.max_same_generation, ++per_gen[static_cast<std::size_t>(p.generation)]);
    }
    for (std::size_t i = 0; i + 1 < c.cubes.size(); ++i) {
      const Rational f = overlap_fraction(c.cubes[i], c.cubes[i + 1]);
      if (!s.min_overlap || f < *s.min_overlap) s.min_overlap = f;
    }
  }
  return s;
}

}  // namespace oscillib
