#pragma once

// Verification harnesses: each run evaluates one inequality over a cube family
// (or over grid cells) and reports per-row ratios with an empirical constant.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oscillib/grid.hpp"
#include "oscillib/maximal.hpp"
#include "oscillib/poincare.hpp"
#include "oscillib/summed_area.hpp"

namespace oscillib {

struct VerificationReport {
  std::string scenario;
  GridGeometry grid;
  std::vector<RatioRow> rows;
  RatioSummary summary;
  /// False when a guard failed (e.g. the input hypothesis pre-flight).
  bool valid = true;
  bool negative_input = false;
  /// Named scalar outputs in insertion order.
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;

  std::optional<double> metric(const std::string& name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    return std::nullopt;
  }

  bool passed() const { return valid && summary.impossible == 0; }
};

namespace detail {

inline VerificationReport start_report(std::string scenario, const GridFunction& u) {
  VerificationReport r;
  r.scenario = std::move(scenario);
  r.grid = u.geometry();
  r.negative_input = u.has_negative();
  return r;
}

inline void require_same_grid(const GridGeometry& a, const GridGeometry& b) {
  if (!(a == b)) throw std::invalid_argument("function and measure grids differ");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gradients

struct GradientField {
  std::vector<GridFunction> components;
  /// 1 where every forward neighbour exists (and lies in the mask, if any).
  std::vector<std::uint8_t> interior;
};

/// Forward differences (u(i + e_k) - u(i)) / h. Cells on the high boundary
/// (or whose forward neighbours leave the mask) are not interior and hold 0.
inline GradientField finite_difference_gradient(const GridFunction& u,
                                                const DomainMask* mask = nullptr) {
  const GridGeometry& g = u.geometry();
  for (std::size_t k = 0; k < g.ndim(); ++k) {
    if (g.extent(k) < 2) throw std::invalid_argument("gradient needs extent >= 2 on every axis");
  }
  if (mask && !(mask->geometry() == g)) throw std::invalid_argument("mask geometry does not match grid");
  GradientField f;
  f.interior.assign(g.size(), 0);
  std::vector<std::vector<double>> comp(g.ndim(), std::vector<double>(g.size(), 0.0));
  const double h = g.cell_width();
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const Index i = g.unravel(lin);
    if (mask && !(*mask)[lin]) continue;
    bool inside = true;
    for (std::size_t k = 0; k < g.ndim() && inside; ++k) {
      Index j = i;
      ++j[k];
      inside = mask ? mask->contains(j) : g.contains(j);
    }
    if (!inside) continue;
    f.interior[lin] = 1;
    for (std::size_t k = 0; k < g.ndim(); ++k) {
      comp[k][lin] = (u[lin + g.stride(k)] - u[lin]) / h;
    }
  }
  for (auto& c : comp) f.components.emplace_back(g, std::move(c));
  return f;
}

/// Euclidean norm of the discrete gradient; 0 off the interior.
inline GridFunction gradient_magnitude(const GradientField& f) {
  const GridGeometry& g = f.components.front().geometry();
  std::vector<double> m(g.size(), 0.0);
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    if (!f.interior[lin]) continue;
    double s = 0.0;
    for (const auto& c : f.components) s += c[lin] * c[lin];
    m[lin] = std::sqrt(s);
  }
  return {g, std::move(m)};
}

/// Mass |grad_h u|(i) * h^n in each interior cell.
inline DiscreteMeasure gradient_measure(const GridFunction& u, const DomainMask* mask = nullptr) {
  const auto mag = gradient_magnitude(finite_difference_gradient(u, mask));
  const double vol = u.geometry().cell_volume();
  std::vector<double> m(mag.values().begin(), mag.values().end());
  for (auto& x : m) x *= vol;
  return {u.geometry(), std::move(m)};
}

// ---------------------------------------------------------------------------
// Main inequality and its fractional form

namespace detail {

inline VerificationReport oscillation_vs_maximal(std::string scenario, const GridFunction& u,
                                                 const DiscreteMeasure& mu, const PoincareConfig& cfg,
                                                 const CubeFamily& fam, const MaximalConfig& ucfg,
                                                 const MaximalConfig& mucfg) {
  cfg.validate(mu);
  require_same_grid(u.geometry(), mu.geometry());
  fam.validate(u.geometry());
  auto report = start_report(std::move(scenario), u);

  const auto preflight = best_constant(u, mu, cfg, fam, RhsKind::AFunctional);
  const double input_constant = preflight.summary.max_ratio;
  if (preflight.summary.infinite > 0) {
    report.valid = false;
    report.notes.push_back("input fails the hypothesis: " + std::to_string(preflight.summary.infinite) +
                           " cubes with oscillation over a zero right-hand side");
  }

  const auto Mu = maximal(u, ucfg);
  const auto Mmu = maximal_measure(mu, mucfg);
  report.rows.reserve(fam.size());
  for (const auto& q : fam.cubes()) {
    report.rows.push_back(make_row(q, mean_oscillation_q(Mu, q, cfg.q), rhs_maximal_inf(Mmu, q, cfg.alpha)));
  }
  report.summary = summarize(report.rows);
  report.metrics.emplace_back("input_constant", input_constant);
  report.metrics.emplace_back("max_ratio", report.summary.max_ratio);
  report.metrics.emplace_back("ratio_of_constants",
                              input_constant > 0.0 ? report.summary.max_ratio / input_constant : 0.0);
  return report;
}

}  // namespace detail

/// Oscillation of Mu over each cube against diam(Q)^alpha inf_Q M mu. The
/// measure side uses the non-centred operator (fractional with the same beta
/// when `maximal_cfg` is fractional); the exponent on the left is cfg.q.
inline VerificationReport run_theorem_check(const GridFunction& u, const DiscreteMeasure& mu,
                                            const PoincareConfig& cfg, const CubeFamily& fam,
                                            const MaximalConfig& maximal_cfg) {
  if (maximal_cfg.variant == MaximalVariant::DomainCentred) {
    throw std::invalid_argument("the theorem check runs on the full grid");
  }
  MaximalConfig mucfg;
  mucfg.threads = maximal_cfg.threads;
  if (maximal_cfg.variant == MaximalVariant::Fractional) {
    mucfg.variant = MaximalVariant::Fractional;
    mucfg.beta = maximal_cfg.beta;
  }
  return detail::oscillation_vs_maximal("theorem", u, mu, cfg, fam, maximal_cfg, mucfg);
}

inline VerificationReport run_fractional_check(const GridFunction& u, const DiscreteMeasure& mu,
                                               const PoincareConfig& cfg, double beta,
                                               const CubeFamily& fam, unsigned threads = 1) {
  MaximalConfig m;
  m.variant = MaximalVariant::Fractional;
  m.beta = beta;
  m.threads = threads;
  validate(m, u.geometry());
  return detail::oscillation_vs_maximal("fractional", u, mu, cfg, fam, m, m);
}

/// Weak-type oscillation with q = n/(n - alpha) against a(Q).
inline VerificationReport run_fpw_check(const GridFunction& u, const DiscreteMeasure& mu, double alpha,
                                        const CubeFamily& fam) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]; alpha = 0 is not checked here");
  }
  const double q = fpw_exponent(u.geometry().ndim(), alpha);
  detail::require_same_grid(u.geometry(), mu.geometry());
  fam.validate(u.geometry());
  auto report = detail::start_report("fpw", u);
  const auto mass = SummedAreaTable::of(mu);
  report.rows.reserve(fam.size());
  for (const auto& c : fam.cubes()) {
    report.rows.push_back(make_row(c, weak_oscillation(u, c, q), poincare_functional(mass, c, alpha)));
  }
  report.summary = summarize(report.rows);
  report.metrics.emplace_back("exponent", q);
  report.metrics.emplace_back("max_ratio", report.summary.max_ratio);
  return report;
}

// ---------------------------------------------------------------------------
// Gradient domination

/// Bound on the rounding error of a cube sum read from a summed-area table of
/// |u|: 2^n corners, each a recursive sum along every axis.
inline double summation_noise(const GridFunction& u) {
  const GridGeometry& g = u.geometry();
  double mass = 0.0;
  for (double v : u.values()) mass += std::fabs(v);
  double len = 2.0;
  for (std::size_t k = 0; k < g.ndim(); ++k) len += static_cast<double>(g.extent(k));
  return std::ldexp(len * std::numeric_limits<double>::epsilon() * mass, static_cast<int>(g.ndim()) + 1);
}

/// |grad_h Mu|(i) against M|grad_h u|(i) on interior cells.
///
/// Differences of Mu no larger than summation_noise(u) are rounding residue
/// of the cube sums and count as zero. With a domain mask in `cfg` both
/// operators are domain-centred, the interior is taken inside the mask, and
/// the right-hand side is the larger of M|grad_h u| at i and at its forward
/// neighbours (the forward difference spans the edge to each neighbour).
inline VerificationReport run_gradient_check(const GridFunction& u, const MaximalConfig& cfg) {
  validate(cfg, u.geometry());
  if (cfg.variant == MaximalVariant::Fractional) {
    throw std::invalid_argument("the gradient check uses the centred or non-centred operator");
  }
  const DomainMask* mask = cfg.variant == MaximalVariant::DomainCentred ? &*cfg.mask : nullptr;
  auto report = detail::start_report(mask ? "gradient-domain" : "gradient", u);

  const GridGeometry& g = u.geometry();
  const auto grad_u = gradient_magnitude(finite_difference_gradient(u, mask));
  const auto Mu = maximal(u, cfg);
  const auto M_grad = maximal(grad_u, cfg);
  const auto interior = finite_difference_gradient(Mu, mask).interior;
  const double noise = summation_noise(u);
  const double h = g.cell_width();

  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    if (!interior[lin]) continue;
    double sq = 0.0;
    double rhs = M_grad[lin];
    for (std::size_t k = 0; k < g.ndim(); ++k) {
      const std::size_t next = lin + g.stride(k);
      const double d = Mu[next] - Mu[lin];
      if (std::fabs(d) > noise) sq += (d / h) * (d / h);
      if (mask) rhs = std::max(rhs, M_grad[next]);
    }
    CubeSpec cell;
    cell.ndim = g.ndim();
    cell.anchor = g.unravel(lin);
    report.rows.push_back(make_row(cell, std::sqrt(sq), rhs, RowFlag::Impossible));
  }
  report.summary = summarize(report.rows);
  if (report.summary.impossible > 0) {
    report.notes.push_back(std::to_string(report.summary.impossible) +
                           " cells with zero maximal gradient but a nonzero gradient of Mu");
  }
  report.metrics.emplace_back("max_difference_quotient", grad_u.max_value());
  report.metrics.emplace_back("summation_noise", noise);
  report.metrics.emplace_back("max_ratio", report.summary.max_ratio);
  return report;
}

// ---------------------------------------------------------------------------
// BMO and Hoelder seminorms

inline double bmo_norm(const GridFunction& u, const CubeFamily& fam) {
  if (fam.size() == 0) throw std::invalid_argument("cube family is empty");
  double best = 0.0;
  for (const auto& q : fam.cubes()) best = std::max(best, mean_oscillation_q(u, q, 1.0));
  return best;
}

inline double holder_seminorm(const GridFunction& u, const CubeFamily& fam, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (fam.size() == 0) throw std::invalid_argument("cube family is empty");
  const double h = u.geometry().cell_width();
  double best = 0.0;
  for (const auto& q : fam.cubes()) {
    best = std::max(best, mean_oscillation_q(u, q, 1.0) / std::pow(cube_diameter(q, h), alpha));
  }
  return best;
}

namespace detail {

/// Rows compare the oscillation of Mu and u cube by cube; the seminorm ratio
/// is recorded separately because the two maxima need not share a cube.
template <typename Weight>
VerificationReport seminorm_ratio(std::string scenario, const GridFunction& u, const CubeFamily& fam,
                                  const MaximalConfig& cfg, Weight weight) {
  fam.validate(u.geometry());
  auto report = start_report(std::move(scenario), u);
  double norm_u = 0.0;
  std::vector<double> osc_u;
  osc_u.reserve(fam.size());
  for (const auto& q : fam.cubes()) {
    osc_u.push_back(mean_oscillation_q(u, q, 1.0) / weight(q));
    norm_u = std::max(norm_u, osc_u.back());
  }
  if (!(norm_u > 0.0)) throw std::invalid_argument("input seminorm is zero");
  const auto Mu = maximal(u, cfg);
  double norm_Mu = 0.0;
  for (std::size_t c = 0; c < fam.size(); ++c) {
    const auto& q = fam.cubes()[c];
    const double o = mean_oscillation_q(Mu, q, 1.0) / weight(q);
    norm_Mu = std::max(norm_Mu, o);
    report.rows.push_back(make_row(q, o, norm_u));
  }
  report.summary = summarize(report.rows);
  report.metrics.emplace_back("norm_u", norm_u);
  report.metrics.emplace_back("norm_Mu", norm_Mu);
  report.metrics.emplace_back("norm_ratio", norm_Mu / norm_u);
  return report;
}

}  // namespace detail

/// Each row: osc(Mu, Q) against ||u||_BMO; the summary maximum is
/// ||Mu||_BMO / ||u||_BMO over the family.
inline VerificationReport run_bmo_check(const GridFunction& u, const CubeFamily& fam,
                                        const MaximalConfig& cfg) {
  validate(cfg, u.geometry());
  return detail::seminorm_ratio("bmo", u, fam, cfg, [](const CubeSpec&) { return 1.0; });
}

inline VerificationReport run_holder_check(const GridFunction& u, const CubeFamily& fam, double alpha,
                                           const MaximalConfig& cfg) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  validate(cfg, u.geometry());
  const double h = u.geometry().cell_width();
  return detail::seminorm_ratio("holder", u, fam, cfg, [&](const CubeSpec& q) {
    return std::pow(cube_diameter(q, h), alpha);
  });
}

// ---------------------------------------------------------------------------
// Refinement

/// |fine - coarse| / |coarse|; infinite when the coarse value is 0 and the
/// fine one is not.
inline double relative_drift(double coarse, double fine) {
  if (coarse == fine) return 0.0;
  if (coarse == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(fine - coarse) / std::fabs(coarse);
}

struct RefinementPoint {
  std::size_t extent = 0;
  double value = 0.0;
};

struct RefinementSeries {
  std::string scenario;
  std::vector<RefinementPoint> points;

  bool all_finite() const {
    for (const auto& p : points) {
      if (!std::isfinite(p.value)) return false;
    }
    return !points.empty();
  }

  /// Drift between the last two resolutions.
  double final_drift() const {
    if (points.size() < 2) return 0.0;
    return relative_drift(points[points.size() - 2].value, points.back().value);
  }
};

/// Evaluate `fn(extent)` at each extent in order.
template <typename Fn>
RefinementSeries refinement_series(std::string scenario, const std::vector<std::size_t>& extents, Fn&& fn) {
  RefinementSeries s;
  s.scenario = std::move(scenario);
  for (auto e : extents) s.points.push_back({e, static_cast<double>(fn(e))});
  return s;
}

}  // namespace oscillib
