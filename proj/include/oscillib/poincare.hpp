#pragma once

// Poincare functionals: oscillations on the left, fractional averages and
// maximal-function bounds on the right, and empirical best constants over
// families of cubes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscillib/grid.hpp"
#include "oscillib/maximal.hpp"
#include "oscillib/random.hpp"
#include "oscillib/summed_area.hpp"

namespace oscillib {

enum class PoincareVariant {
  LebesgueAlpha0,        ///< alpha = 0 with (scaled) Lebesgue measure
  MeasureAlphaPositive,  ///< alpha in (0, 1] with an arbitrary measure
};

struct PoincareConfig {
  double alpha = 0.0;
  double q = 1.0;
  PoincareVariant variant = PoincareVariant::LebesgueAlpha0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("q must be >= 1");
    if (variant == PoincareVariant::LebesgueAlpha0 && alpha != 0.0) {
      throw std::invalid_argument("the Lebesgue variant requires alpha = 0");
    }
    if (variant == PoincareVariant::MeasureAlphaPositive && !(alpha > 0.0)) {
      throw std::invalid_argument("the measure variant requires alpha in (0, 1]");
    }
  }

  void validate(const DiscreteMeasure& mu) const {
    validate();
    if (variant == PoincareVariant::LebesgueAlpha0 && !mu.is_uniform()) {
      throw std::invalid_argument("the Lebesgue variant requires a uniform measure");
    }
  }
};

// ---------------------------------------------------------------------------
// Cube families

enum class FamilyKind { All, Dyadic, Random, Fixed, Mixed };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::All: return "all";
    case FamilyKind::Dyadic: return "dyadic";
    case FamilyKind::Random: return "random";
    case FamilyKind::Fixed: return "fixed";
    case FamilyKind::Mixed: return "mixed";
  }
  return "unknown";
}

/// Finite set of cubes standing in for "all cubes". Every member lies in the
/// grid at least `margin` cells away from its boundary.
class CubeFamily {
 public:
  FamilyKind kind() const { return kind_; }
  const std::vector<CubeSpec>& cubes() const { return cubes_; }
  std::size_t size() const { return cubes_.size(); }
  std::int64_t margin() const { return margin_; }
  std::int64_t max_side() const { return max_side_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t random_count() const { return random_count_; }

  /// Every cube with side in `sides` inside the margin.
  static CubeFamily all(const GridGeometry& g, const std::vector<std::int64_t>& sides,
                        std::int64_t margin) {
    CubeFamily f(FamilyKind::All, margin);
    for (auto s : sides) {
      bool fits = true;
      for (std::size_t k = 0; k < g.ndim(); ++k) {
        fits = fits && static_cast<std::int64_t>(g.extent(k)) - margin - s >= margin;
      }
      if (!fits) continue;
      f.max_side_ = std::max(f.max_side_, s);
      Index a{};
      for (std::size_t k = 0; k < g.ndim(); ++k) a[k] = margin;
      while (true) {
        CubeSpec q;
        q.ndim = g.ndim();
        q.anchor = a;
        q.side = s;
        f.cubes_.push_back(q);
        std::size_t k = g.ndim();
        bool done = true;
        while (k > 0) {
          --k;
          if (++a[k] <= static_cast<std::int64_t>(g.extent(k)) - margin - s) {
            done = false;
            break;
          }
          a[k] = margin;
        }
        if (done) break;
      }
    }
    return f;
  }

  /// Cubes of side 2^j <= max_side with anchors at multiples of the side.
  static CubeFamily dyadic(const GridGeometry& g, std::int64_t max_side, std::int64_t margin) {
    CubeFamily f(FamilyKind::Dyadic, margin);
    for (std::int64_t s = 1; s <= max_side; s *= 2) {
      f.max_side_ = s;
      std::vector<std::int64_t> lo(g.ndim()), count(g.ndim());
      bool ok = true;
      for (std::size_t k = 0; k < g.ndim(); ++k) {
        lo[k] = (margin + s - 1) / s;
        const std::int64_t hi = (static_cast<std::int64_t>(g.extent(k)) - margin - s) / s;
        count[k] = hi - lo[k] + 1;
        ok = ok && count[k] > 0 && static_cast<std::int64_t>(g.extent(k)) - margin - s >= 0;
      }
      if (!ok) continue;
      Index j{};
      while (true) {
        CubeSpec q;
        q.ndim = g.ndim();
        q.side = s;
        for (std::size_t k = 0; k < g.ndim(); ++k) q.anchor[k] = (lo[k] + j[k]) * s;
        f.cubes_.push_back(q);
        std::size_t k = g.ndim();
        bool done = true;
        while (k > 0) {
          --k;
          if (++j[k] < count[k]) {
            done = false;
            break;
          }
          j[k] = 0;
        }
        if (done) break;
      }
    }
    return f;
  }

  /// `count` seeded cubes with side uniform in [min_side, max_side].
  static CubeFamily random(const GridGeometry& g, std::uint64_t seed, std::size_t count,
                           std::int64_t min_side, std::int64_t max_side, std::int64_t margin) {
    CubeFamily f(FamilyKind::Random, margin);
    f.seed_ = seed;
    f.random_count_ = count;
    const auto room = static_cast<std::int64_t>(g.min_extent()) - 2 * margin;
    max_side = std::min(max_side, room);
    if (min_side < 1 || max_side < min_side) return f;
    f.max_side_ = max_side;
    CounterRng rng(seed, 0x6375626573ULL);
    for (std::size_t c = 0; c < count; ++c) {
      CubeSpec q;
      q.ndim = g.ndim();
      q.side = rng.between(min_side, max_side);
      for (std::size_t k = 0; k < g.ndim(); ++k) {
        q.anchor[k] = rng.between(margin, static_cast<std::int64_t>(g.extent(k)) - margin - q.side);
      }
      f.cubes_.push_back(q);
    }
    return f;
  }

  static CubeFamily fixed(std::vector<CubeSpec> cubes, std::int64_t margin = 0) {
    CubeFamily f(FamilyKind::Fixed, margin);
    for (const auto& q : cubes) f.max_side_ = std::max(f.max_side_, q.side);
    f.cubes_ = std::move(cubes);
    return f;
  }

  /// Side bound shared by the default families: largest power of two not
  /// exceeding a quarter of the smallest extent.
  static std::int64_t default_side(const GridGeometry& g) {
    std::int64_t s = 1;
    while (2 * s <= static_cast<std::int64_t>(g.min_extent()) / 4) s *= 2;
    return s;
  }

  /// Dyadic cubes with the default side bound, margin equal to that bound.
  static CubeFamily default_dyadic(const GridGeometry& g) {
    const auto s = default_side(g);
    return dyadic(g, s, s);
  }

  /// All dyadic cubes plus `count` seeded random cubes; margin = largest side.
  static CubeFamily default_for(const GridGeometry& g, std::uint64_t seed, std::size_t count = 500) {
    const auto s = default_side(g);
    CubeFamily f = dyadic(g, s, s);
    const CubeFamily r = random(g, seed, count, 1, s, s);
    f.kind_ = FamilyKind::Mixed;
    f.seed_ = seed;
    f.random_count_ = count;
    f.cubes_.insert(f.cubes_.end(), r.cubes_.begin(), r.cubes_.end());
    return f;
  }

  void validate(const GridGeometry& g) const {
    if (cubes_.empty()) throw std::invalid_argument("cube family is empty");
    for (const auto& q : cubes_) {
      if (q.ndim != g.ndim()) throw std::invalid_argument("cube dimension does not match grid");
      for (std::size_t k = 0; k < g.ndim(); ++k) {
        if (q.anchor[k] < margin_ ||
            q.anchor[k] + q.side > static_cast<std::int64_t>(g.extent(k)) - margin_) {
          throw std::invalid_argument("cube family member outside the grid margin");
        }
      }
    }
  }

 private:
  CubeFamily(FamilyKind kind, std::int64_t margin) : kind_(kind), margin_(margin) {}

  FamilyKind kind_;
  std::int64_t margin_ = 0;
  std::int64_t max_side_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t random_count_ = 0;
  std::vector<CubeSpec> cubes_;
};

// ---------------------------------------------------------------------------
// Left-hand sides

namespace detail {

inline void require_inside(const CubeSpec& q, const GridGeometry& g) {
  if (!cube_inside(q, g)) throw std::invalid_argument("cube is not inside the grid");
}

inline void require_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must be >= 1");
}

/// Plain cell mean, accumulated relative to the first cell so that a
/// constant cube has exactly its value as mean.
inline double cell_mean(const GridFunction& u, const CubeSpec& q) {
  const double ref = u.at(q.anchor);
  double acc = 0.0;
  for_each_cell(q, [&](const Index& i) { acc += u.at(i) - ref; });
  return ref + acc / static_cast<double>(cube_cell_count(q));
}

}  // namespace detail

/// (mean over cells of Q of |u - u_Q|^p)^(1/p) with the plain cell mean u_Q.
inline double mean_oscillation_q(const GridFunction& u, const CubeSpec& q, double exponent) {
  detail::require_exponent(exponent);
  detail::require_inside(q, u.geometry());
  const double mean = detail::cell_mean(u, q);
  double acc = 0.0;
  if (exponent == 1.0) {
    for_each_cell(q, [&](const Index& i) { acc += std::fabs(u.at(i) - mean); });
    return acc / static_cast<double>(cube_cell_count(q));
  }
  for_each_cell(q, [&](const Index& i) { acc += std::pow(std::fabs(u.at(i) - mean), exponent); });
  return std::pow(acc / static_cast<double>(cube_cell_count(q)), 1.0 / exponent);
}

/// Weak-L^p norm of 1_Q (u - u_Q) divided by |Q|^(1/p).
///
/// With v the values |u - u_Q| sorted in decreasing order, the distribution
/// function is a step function and the supremum over levels is
/// max_k v_k (k h^n)^(1/p); dividing by |Q|^(1/p) leaves max_k v_k (k/N)^(1/p).
inline double weak_oscillation(const GridFunction& u, const CubeSpec& q, double exponent) {
  detail::require_exponent(exponent);
  detail::require_inside(q, u.geometry());
  const double mean = detail::cell_mean(u, q);
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(cube_cell_count(q)));
  for_each_cell(q, [&](const Index& i) { v.push_back(std::fabs(u.at(i) - mean)); });
  std::sort(v.begin(), v.end(), std::greater<>());
  const double cells = static_cast<double>(v.size());
  double best = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double frac = static_cast<double>(k + 1) / cells;
    best = std::max(best, v[k] * (exponent == 1.0 ? frac : std::pow(frac, 1.0 / exponent)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Right-hand sides

/// mu(Q)/|Q| with the same arithmetic as the measure maximal function.
inline double measure_density(const SummedAreaTable& mass_table, const CubeSpec& q) {
  const auto scale = detail::candidate_scale(SourceKind::Measure, mass_table.geometry(), q.side, 0.0);
  return scale(mass_table.cube_sum(q));
}

/// a(Q) = diam(Q)^alpha mu(Q)/|Q|.
inline double poincare_functional(const SummedAreaTable& mass_table, const CubeSpec& q, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  const double h = mass_table.geometry().cell_width();
  return std::pow(cube_diameter(q, h), alpha) * measure_density(mass_table, q);
}

inline double poincare_functional(const DiscreteMeasure& mu, const CubeSpec& q, double alpha) {
  return poincare_functional(SummedAreaTable::of(mu), q, alpha);
}

/// diam(Q)^alpha * min over cells of Q of M mu.
inline double rhs_maximal_inf(const GridFunction& maximal_of_measure, const CubeSpec& q, double alpha) {
  detail::require_inside(q, maximal_of_measure.geometry());
  double lowest = std::numeric_limits<double>::infinity();
  for_each_cell(q, [&](const Index& i) { lowest = std::min(lowest, maximal_of_measure.at(i)); });
  return std::pow(cube_diameter(q, maximal_of_measure.geometry().cell_width()), alpha) * lowest;
}

/// diam(Q)^alpha * max over cubes Q' containing Q, side <= max_side, of mu(Q')/|Q'|.
inline double rhs_sup_containing(const SummedAreaTable& mass_table, const CubeSpec& q, double alpha,
                                 std::size_t max_side = 0) {
  const GridGeometry& g = mass_table.geometry();
  const auto S = static_cast<std::int64_t>(max_side == 0 ? g.max_extent() : max_side);
  double best = 0.0;
  for (std::int64_t s = q.side; s <= S; ++s) {
    const auto scale = detail::candidate_scale(SourceKind::Measure, g, s, 0.0);
    // Anchors of containing cubes range over [a + side - s, a] per axis.
    CubeSpec anchors;
    anchors.ndim = q.ndim;
    anchors.side = s - q.side + 1;
    for (std::size_t k = 0; k < q.ndim; ++k) anchors.anchor[k] = q.anchor[k] + q.side - s;
    for_each_cell(anchors, [&](const Index& a) {
      CubeSpec outer;
      outer.ndim = q.ndim;
      outer.anchor = a;
      outer.side = s;
      best = std::max(best, scale(mass_table.cube_sum(outer)));
    });
  }
  return std::pow(cube_diameter(q, g.cell_width()), alpha) * best;
}

inline double rhs_sup_containing(const DiscreteMeasure& mu, const CubeSpec& q, double alpha,
                                 std::size_t max_side = 0) {
  return rhs_sup_containing(SummedAreaTable::of(mu), q, alpha, max_side);
}

/// q = n / (n - alpha), the weak-type exponent reached by self-improvement.
inline double fpw_exponent(std::size_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha = 0 is handled by John-Nirenberg, not this exponent");
  }
  if (!(alpha <= 1.0) || alpha >= static_cast<double>(n)) {
    throw std::invalid_argument("alpha must lie in (0, 1] and below n");
  }
  return static_cast<double>(n) / (static_cast<double>(n) - alpha);
}

// ---------------------------------------------------------------------------
// Ratios

enum class RowFlag {
  None,
  ZeroOverZero,  ///< 0/0, reported as ratio 0
  Infinite,      ///< positive/0, excluded from the maximum
  Impossible,    ///< a condition that must never hold (gradient check)
};

inline std::string to_string(RowFlag f) {
  switch (f) {
    case RowFlag::None: return "";
    case RowFlag::ZeroOverZero: return "zero_over_zero";
    case RowFlag::Infinite: return "infinite";
    case RowFlag::Impossible: return "impossible";
  }
  return "unknown";
}

struct RatioRow {
  CubeSpec cube;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  RowFlag flag = RowFlag::None;
};

inline RatioRow make_row(const CubeSpec& cube, double lhs, double rhs,
                         RowFlag on_zero_rhs = RowFlag::Infinite) {
  RatioRow r{cube, lhs, rhs, 0.0, RowFlag::None};
  if (rhs > 0.0) {
    r.ratio = lhs / rhs;
  } else if (lhs == 0.0) {
    r.flag = RowFlag::ZeroOverZero;
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    r.flag = on_zero_rhs;
  }
  return r;
}

struct RatioSummary {
  double max_ratio = 0.0;
  std::optional<CubeSpec> argmax;
  std::size_t infinite = 0;
  std::size_t zero_over_zero = 0;
  std::size_t impossible = 0;
};

inline RatioSummary summarize(const std::vector<RatioRow>& rows) {
  RatioSummary s;
  for (const auto& r : rows) {
    switch (r.flag) {
      case RowFlag::Infinite: ++s.infinite; continue;
      case RowFlag::Impossible: ++s.impossible; continue;
      case RowFlag::ZeroOverZero: ++s.zero_over_zero; break;
      case RowFlag::None: break;
    }
    if (!s.argmax || r.ratio > s.max_ratio) {
      s.max_ratio = r.ratio;
      s.argmax = r.cube;
    }
  }
  return s;
}

enum class RhsKind { AFunctional, MaximalInf, SupContaining };

inline std::string to_string(RhsKind k) {
  switch (k) {
    case RhsKind::AFunctional: return "a-functional";
    case RhsKind::MaximalInf: return "maximal-inf";
    case RhsKind::SupContaining: return "sup-containing";
  }
  return "unknown";
}

struct ConstantReport {
  std::vector<RatioRow> rows;
  RatioSummary summary;
};

/// Empirical best constant for the oscillation of u against the chosen
/// right-hand side over every cube of the family.
inline ConstantReport best_constant(const GridFunction& u, const DiscreteMeasure& mu,
                                    const PoincareConfig& cfg, const CubeFamily& family,
                                    RhsKind rhs, const MaximalConfig& measure_cfg = {}) {
  cfg.validate(mu);
  if (!(u.geometry() == mu.geometry())) throw std::invalid_argument("u and mu grids differ");
  family.validate(u.geometry());
  const auto mass = SummedAreaTable::of(mu);
  std::optional<GridFunction> mmu;
  if (rhs == RhsKind::MaximalInf) mmu = maximal_measure(mu, measure_cfg);

  ConstantReport out;
  out.rows.reserve(family.size());
  for (const auto& q : family.cubes()) {
    const double lhs = mean_oscillation_q(u, q, cfg.q);
    double r = 0.0;
    switch (rhs) {
      case RhsKind::AFunctional: r = poincare_functional(mass, q, cfg.alpha); break;
      case RhsKind::MaximalInf: r = rhs_maximal_inf(*mmu, q, cfg.alpha); break;
      case RhsKind::SupContaining:
        r = rhs_sup_containing(mass, q, cfg.alpha, resolved_max_side(measure_cfg, u.geometry()));
        break;
    }
    out.rows.push_back(make_row(q, lhs, r));
  }
  out.summary = summarize(out.rows);
  return out;
}

}  // namespace oscillib
