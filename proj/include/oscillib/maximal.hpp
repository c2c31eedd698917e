#pragma once

// Discrete Hardy-Littlewood maximal operators on uniform grids.
//
// Every operator is a maximum of candidate values
//
//     scale(s) * cube_sum(|u|, Q)        over an admissible family of cubes Q,
//
// where cube sums come from one SummedAreaTable and scale(s) depends only on
// the side length. The fast paths and the brute-force oracle share that
// candidate arithmetic, so they agree bit for bit; only the enumeration
// strategy differs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "oscillib/grid.hpp"
#include "oscillib/summed_area.hpp"

namespace oscillib {

enum class MaximalVariant { NonCentred, Centred, Fractional, DomainCentred };

inline std::string to_string(MaximalVariant v) {
  switch (v) {
    case MaximalVariant::NonCentred: return "noncentred";
    case MaximalVariant::Centred: return "centred";
    case MaximalVariant::Fractional: return "fractional";
    case MaximalVariant::DomainCentred: return "domain";
  }
  return "unknown";
}

inline MaximalVariant parse_variant(const std::string& s) {
  if (s == "noncentred" || s == "non-centred") return MaximalVariant::NonCentred;
  if (s == "centred" || s == "centered") return MaximalVariant::Centred;
  if (s == "fractional") return MaximalVariant::Fractional;
  if (s == "domain" || s == "domain-centred") return MaximalVariant::DomainCentred;
  throw std::invalid_argument("unknown maximal variant '" + s + "'");
}

struct MaximalConfig {
  MaximalVariant variant = MaximalVariant::NonCentred;
  /// Side-length exponent, used by the fractional variant only.
  double beta = 0.0;
  /// Largest cube side in cells; 0 selects default_max_side().
  std::size_t max_side = 0;
  /// Domain for the domain-centred variant.
  std::optional<DomainMask> mask;
  /// Worker threads for the per-side passes; results do not depend on it.
  unsigned threads = 1;
};

/// Smallest side bound beyond which the output no longer changes.
///
/// A non-centred cube larger than the grid sees no more mass than some cube of
/// side max_extent containing the same cell, so max_extent suffices. A centred
/// cube needs side 2*max_extent - 1 to reach the far corner.
inline std::size_t default_max_side(const GridGeometry& g, MaximalVariant v) {
  const std::size_t e = g.max_extent();
  if (v == MaximalVariant::Centred || v == MaximalVariant::DomainCentred) return 2 * e - 1;
  return e;
}

inline std::size_t resolved_max_side(const MaximalConfig& cfg, const GridGeometry& g) {
  return cfg.max_side == 0 ? default_max_side(g, cfg.variant) : cfg.max_side;
}

inline void validate(const MaximalConfig& cfg, const GridGeometry& g) {
  if (g.ndim() == 0 || g.size() == 0) throw std::invalid_argument("empty grid");
  if (cfg.variant == MaximalVariant::Fractional) {
    if (!(cfg.beta >= 0.0 && cfg.beta <= static_cast<double>(g.ndim()))) {
      throw std::invalid_argument("beta must lie in [0, n]");
    }
  }
  if (cfg.variant == MaximalVariant::DomainCentred) {
    if (!cfg.mask) throw std::invalid_argument("domain variant requires a mask");
    if (!(cfg.mask->geometry() == g)) throw std::invalid_argument("mask geometry does not match grid");
  }
}

enum class SourceKind { Function, Measure };

namespace detail {

/// candidate = sum * numer / denom for every cube of one side length.
struct CandidateScale {
  double numer = 1.0;
  double denom = 1.0;
  double operator()(double sum) const { return sum * numer / denom; }
};

inline CandidateScale candidate_scale(SourceKind kind, const GridGeometry& g, std::int64_t side,
                                      double beta) {
  const double n = static_cast<double>(g.ndim());
  const double len = static_cast<double>(side) * g.cell_width();
  CandidateScale c;
  c.numer = beta == 0.0 ? 1.0 : std::pow(len, beta);
  c.denom = kind == SourceKind::Function ? std::pow(static_cast<double>(side), n) : std::pow(len, n);
  return c;
}

inline double effective_beta(const MaximalConfig& cfg) {
  return cfg.variant == MaximalVariant::Fractional ? cfg.beta : 0.0;
}

inline bool centred_family(MaximalVariant v) {
  return v == MaximalVariant::Centred || v == MaximalVariant::DomainCentred;
}

/// Increment a multi-index over a box of the given extents; false when done.
inline bool advance_index(Index& i, std::span<const std::size_t> ext) {
  for (std::size_t k = ext.size(); k > 0; --k) {
    if (++i[k - 1] < static_cast<std::int64_t>(ext[k - 1])) return true;
    i[k - 1] = 0;
  }
  return false;
}

/// Sliding maximum over windows of `window` consecutive entries of a strided
/// line, using a monotone queue of indices. Writes len - window + 1 outputs.
inline void sliding_window_max_line(const double* in, std::size_t in_stride, std::size_t len,
                                    std::size_t window, double* out, std::size_t out_stride,
                                    std::vector<std::size_t>& queue) {
  queue.resize(len);
  std::size_t head = 0;
  std::size_t tail = 0;
  for (std::size_t j = 0; j < len; ++j) {
    const double v = in[j * in_stride];
    while (tail > head && in[queue[tail - 1] * in_stride] <= v) --tail;
    queue[tail++] = j;
    if (queue[head] + window <= j) ++head;
    if (j + 1 >= window) out[(j + 1 - window) * out_stride] = in[queue[head] * in_stride];
  }
}

/// Windowed maximum along one axis of a row-major box; the axis shrinks by window - 1.
inline std::vector<double> sliding_max_axis(const std::vector<double>& in,
                                            std::vector<std::size_t>& ext, std::size_t axis,
                                            std::size_t window, std::vector<std::size_t>& queue) {
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= ext[k];
  for (std::size_t k = axis + 1; k < ext.size(); ++k) inner *= ext[k];
  const std::size_t len = ext[axis];
  const std::size_t out_len = len - window + 1;
  std::vector<double> out(outer * out_len * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t t = 0; t < inner; ++t) {
      sliding_window_max_line(in.data() + o * len * inner + t, inner, len, window,
                              out.data() + o * out_len * inner + t, inner, queue);
    }
  }
  ext[axis] = out_len;
  return out;
}

/// Non-centred pass for one side: anchor-candidate field, then a window max per axis.
inline void noncentred_side(const SummedAreaTable& table, SourceKind kind, double beta,
                            std::int64_t side, std::vector<double>& result,
                            std::vector<std::size_t>& queue) {
  const GridGeometry& g = table.geometry();
  const std::size_t n = g.ndim();
  const auto scale = candidate_scale(kind, g, side, beta);
  std::vector<std::size_t> ext(n);
  std::size_t count = 1;
  for (std::size_t k = 0; k < n; ++k) {
    ext[k] = g.extent(k) + static_cast<std::size_t>(side) - 1;
    count *= ext[k];
  }
  std::vector<double> field(count);
  Index pos{};
  std::size_t lin = 0;
  do {
    Index anchor{};
    for (std::size_t k = 0; k < n; ++k) anchor[k] = pos[k] - (side - 1);
    field[lin++] = scale(table.sum(anchor, side));
  } while (advance_index(pos, ext));

  for (std::size_t axis = 0; axis < n; ++axis) {
    field = sliding_max_axis(field, ext, axis, static_cast<std::size_t>(side), queue);
  }
  for (std::size_t i = 0; i < result.size(); ++i) result[i] = std::max(result[i], field[i]);
}

inline void centred_side(const SummedAreaTable& table, SourceKind kind, double beta,
                         std::int64_t side, std::vector<double>& result) {
  const GridGeometry& g = table.geometry();
  const std::size_t n = g.ndim();
  const auto scale = candidate_scale(kind, g, side, beta);
  const std::int64_t half = (side - 1) / 2;
  Index pos{};
  std::size_t lin = 0;
  do {
    Index anchor{};
    for (std::size_t k = 0; k < n; ++k) anchor[k] = pos[k] - half;
    result[lin] = std::max(result[lin], scale(table.sum(anchor, side)));
    ++lin;
  } while (advance_index(pos, g.shape()));
}

/// Centred pass restricted to cubes lying in the mask. Admissibility is
/// monotone in the side, so a cell that fails once is retired.
inline void domain_side(const SummedAreaTable& table, const SummedAreaTable& mask_table,
                        const DomainMask& mask, SourceKind kind, std::int64_t side,
                        std::vector<double>& result, std::vector<std::uint8_t>& active) {
  const GridGeometry& g = table.geometry();
  const std::size_t n = g.ndim();
  const auto scale = candidate_scale(kind, g, side, 0.0);
  const std::int64_t half = (side - 1) / 2;
  double full = 1.0;
  for (std::size_t k = 0; k < n; ++k) full *= static_cast<double>(side);
  Index pos{};
  std::size_t lin = 0;
  do {
    if (mask[lin] && active[lin]) {
      Index anchor{};
      bool inside = true;
      for (std::size_t k = 0; k < n; ++k) {
        anchor[k] = pos[k] - half;
        inside = inside && anchor[k] >= 0 && anchor[k] + side <= static_cast<std::int64_t>(g.extent(k));
      }
      if (inside && mask_table.sum(anchor, side) == full) {
        result[lin] = std::max(result[lin], scale(table.sum(anchor, side)));
      } else {
        active[lin] = 0;
      }
    }
    ++lin;
  } while (advance_index(pos, g.shape()));
}

struct SideRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  bool odd_only = false;
};

inline std::vector<std::int64_t> sides_in(const SideRange& r) {
  std::vector<std::int64_t> sides;
  for (std::int64_t s = r.lo; s <= r.hi; ++s) {
    if (!r.odd_only || s % 2 == 1) sides.push_back(s);
  }
  return sides;
}

/// Max over all admissible cubes with side in `range`. Cells without any
/// admissible cube keep -infinity.
inline std::vector<double> maximal_over_sides(const SummedAreaTable& table, SourceKind kind,
                                              const MaximalConfig& cfg, const SideRange& range) {
  const GridGeometry& g = table.geometry();
  const double beta = effective_beta(cfg);
  const auto sides = sides_in(range);
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  if (cfg.variant == MaximalVariant::DomainCentred) {
    // Sequential: the retirement flags carry state from one side to the next.
    std::vector<double> result(g.size(), kNone);
    std::vector<double> mask_values(cfg.mask->cells().begin(), cfg.mask->cells().end());
    const SummedAreaTable mask_table(g, mask_values);
    std::vector<std::uint8_t> active(g.size(), 1);
    for (auto s : sides) domain_side(table, mask_table, *cfg.mask, kind, s, result, active);
    return result;
  }

  const unsigned workers = std::max(
      1u, std::min<unsigned>(cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads,
                             static_cast<unsigned>(std::max<std::size_t>(sides.size(), 1))));
  std::vector<std::vector<double>> partial(workers, std::vector<double>(g.size(), kNone));
  auto work = [&](unsigned w) {
    std::vector<std::size_t> queue;
    // Contiguous chunks of the side list; the merge below is an exact max.
    const std::size_t begin = sides.size() * w / workers;
    const std::size_t end = sides.size() * (w + 1) / workers;
    for (std::size_t j = begin; j < end; ++j) {
      if (centred_family(cfg.variant)) {
        centred_side(table, kind, beta, sides[j], partial[w]);
      } else {
        noncentred_side(table, kind, beta, sides[j], partial[w], queue);
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (unsigned w = 1; w < workers; ++w) {
    for (std::size_t i = 0; i < g.size(); ++i) partial[0][i] = std::max(partial[0][i], partial[w][i]);
  }
  return std::move(partial[0]);
}

inline SideRange full_range(const MaximalConfig& cfg, const GridGeometry& g) {
  return {1, static_cast<std::int64_t>(resolved_max_side(cfg, g)), centred_family(cfg.variant)};
}

inline GridFunction finish(const GridGeometry& g, std::vector<double> values) {
  for (auto& v : values) {
    if (!std::isfinite(v)) v = 0.0;
  }
  return {g, std::move(values)};
}

inline void require_variant(const MaximalConfig& cfg, MaximalVariant expected, const char* op) {
  if (cfg.variant != expected) {
    throw std::invalid_argument(std::string(op) + " called with variant " + to_string(cfg.variant));
  }
}

}  // namespace detail

/// Sliding maximum of every window of `window` consecutive values.
inline std::vector<double> sliding_window_max(std::span<const double> values, std::size_t window) {
  if (window == 0 || window > values.size()) throw std::invalid_argument("bad window size");
  std::vector<double> out(values.size() - window + 1);
  std::vector<std::size_t> queue;
  detail::sliding_window_max_line(values.data(), 1, values.size(), window, out.data(), 1, queue);
  return out;
}

/// Maximal function of |u| for the variant selected in cfg. Non-mask cells of
/// the domain variant hold 0.
inline GridFunction maximal(const GridFunction& u, const MaximalConfig& cfg) {
  validate(cfg, u.geometry());
  const auto table = SummedAreaTable::of_abs(u);
  return detail::finish(u.geometry(), detail::maximal_over_sides(table, SourceKind::Function, cfg,
                                                                 detail::full_range(cfg, u.geometry())));
}

inline GridFunction maximal_noncentred(const GridFunction& u, const MaximalConfig& cfg) {
  detail::require_variant(cfg, MaximalVariant::NonCentred, "maximal_noncentred");
  return maximal(u, cfg);
}

inline GridFunction maximal_centred(const GridFunction& u, const MaximalConfig& cfg) {
  detail::require_variant(cfg, MaximalVariant::Centred, "maximal_centred");
  return maximal(u, cfg);
}

inline GridFunction maximal_fractional(const GridFunction& u, const MaximalConfig& cfg) {
  detail::require_variant(cfg, MaximalVariant::Fractional, "maximal_fractional");
  return maximal(u, cfg);
}

inline GridFunction maximal_domain_centred(const GridFunction& u, const DomainMask& mask,
                                           MaximalConfig cfg) {
  cfg.variant = MaximalVariant::DomainCentred;
  cfg.mask = mask;
  return maximal(u, cfg);
}

/// Value of the domain-restricted operator at one cell; the cell must be in the domain.
inline double maximal_domain_centred_at(const GridFunction& u, const DomainMask& mask,
                                        const MaximalConfig& cfg, const Index& cell) {
  if (!mask.contains(cell)) throw std::invalid_argument("evaluation cell is outside the domain");
  return maximal_domain_centred(u, mask, cfg).at(cell);
}

/// sup over cubes of mu(Q)/|Q| (times (s h)^beta for the fractional variant).
inline GridFunction maximal_measure(const DiscreteMeasure& mu, const MaximalConfig& cfg) {
  validate(cfg, mu.geometry());
  const auto table = SummedAreaTable::of(mu);
  return detail::finish(mu.geometry(), detail::maximal_over_sides(table, SourceKind::Measure, cfg,
                                                                  detail::full_range(cfg, mu.geometry())));
}

struct ScaleSplit {
  GridFunction local;  ///< cubes with side <= r0
  GridFunction far;    ///< cubes with side > r0; 0 where no such cube exists
  bool far_vacuous = false;
};

/// Split the maximal function at side r0: max(local, far) equals maximal(u, cfg).
inline ScaleSplit scale_split_maximal(const GridFunction& u, std::size_t r0_cells,
                                      const MaximalConfig& cfg) {
  validate(cfg, u.geometry());
  const auto S = static_cast<std::int64_t>(resolved_max_side(cfg, u.geometry()));
  if (r0_cells < 1) throw std::invalid_argument("r0 must be at least one cell");
  const auto r0 = static_cast<std::int64_t>(r0_cells);
  const bool odd = detail::centred_family(cfg.variant);
  const auto table = SummedAreaTable::of_abs(u);
  ScaleSplit out;
  out.local = detail::finish(u.geometry(), detail::maximal_over_sides(
                                               table, SourceKind::Function, cfg,
                                               {1, std::min(r0, S), odd}));
  const auto far_sides = detail::sides_in({r0 + 1, S, odd});
  out.far_vacuous = far_sides.empty();
  if (out.far_vacuous) {
    out.far = GridFunction(u.geometry());
  } else {
    out.far = detail::finish(u.geometry(), detail::maximal_over_sides(table, SourceKind::Function,
                                                                      cfg, {r0 + 1, S, odd}));
  }
  return out;
}

namespace detail {

inline constexpr std::size_t kBruteForceCellLimit = 4096;

inline std::vector<double> brute_force(const SummedAreaTable& table, SourceKind kind,
                                       const MaximalConfig& cfg) {
  const GridGeometry& g = table.geometry();
  validate(cfg, g);
  if (g.size() > kBruteForceCellLimit) {
    throw std::invalid_argument("brute force limited to " + std::to_string(kBruteForceCellLimit) +
                                " cells");
  }
  const std::size_t n = g.ndim();
  const double beta = effective_beta(cfg);
  const auto S = static_cast<std::int64_t>(resolved_max_side(cfg, g));
  std::vector<double> result(g.size(), -std::numeric_limits<double>::infinity());

  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const Index cell = g.unravel(lin);
    if (cfg.variant == MaximalVariant::DomainCentred && !(*cfg.mask)[lin]) continue;
    double best = result[lin];
    for (std::int64_t s = 1; s <= S; ++s) {
      const auto scale = candidate_scale(kind, g, s, beta);
      if (centred_family(cfg.variant)) {
        if (s % 2 == 0) continue;
        CubeSpec q;
        q.ndim = n;
        q.side = s;
        for (std::size_t k = 0; k < n; ++k) q.anchor[k] = cell[k] - (s - 1) / 2;
        if (cfg.variant == MaximalVariant::DomainCentred) {
          bool admissible = true;
          for_each_cell(q, [&](const Index& c) { admissible = admissible && cfg.mask->contains(c); });
          if (!admissible) continue;
        }
        best = std::max(best, scale(table.cube_sum(q)));
      } else {
        // Anchors of side-s cubes containing `cell` form a cube of side s.
        CubeSpec anchors;
        anchors.ndim = n;
        anchors.side = s;
        for (std::size_t k = 0; k < n; ++k) anchors.anchor[k] = cell[k] - (s - 1);
        for_each_cell(anchors, [&](const Index& a) {
          CubeSpec q;
          q.ndim = n;
          q.anchor = a;
          q.side = s;
          best = std::max(best, scale(table.cube_sum(q)));
        });
      }
    }
    result[lin] = best;
  }
  return result;
}

}  // namespace detail

/// Literal enumeration of every admissible (anchor, side) pair. Test oracle;
/// grids are limited to 4096 cells.
inline GridFunction brute_force_maximal(const GridFunction& u, const MaximalConfig& cfg) {
  validate(cfg, u.geometry());
  return detail::finish(u.geometry(),
                        detail::brute_force(SummedAreaTable::of_abs(u), SourceKind::Function, cfg));
}

inline GridFunction brute_force_maximal(const DiscreteMeasure& mu, const MaximalConfig& cfg) {
  validate(cfg, mu.geometry());
  return detail::finish(mu.geometry(),
                        detail::brute_force(SummedAreaTable::of(mu), SourceKind::Measure, cfg));
}

}  // namespace oscillib
