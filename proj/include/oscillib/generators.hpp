#pragma once

// Test functions and domains on uniform grids. Physical coordinates are cell
// centres, (i + 1/2) h.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscillib/grid.hpp"
#include "oscillib/random.hpp"
#include "oscillib/summed_area.hpp"

namespace oscillib {

enum class GeneratorKind { Bump, Cone, Cusp, LogCusp, Step, Disc, Random, Constant, Linear };

inline std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Bump: return "bump";
    case GeneratorKind::Cone: return "cone";
    case GeneratorKind::Cusp: return "cusp";
    case GeneratorKind::LogCusp: return "log-cusp";
    case GeneratorKind::Step: return "step";
    case GeneratorKind::Disc: return "disc";
    case GeneratorKind::Random: return "random";
    case GeneratorKind::Constant: return "constant";
    case GeneratorKind::Linear: return "linear";
  }
  return "unknown";
}

inline GeneratorKind parse_generator(const std::string& s) {
  if (s == "bump") return GeneratorKind::Bump;
  if (s == "cone") return GeneratorKind::Cone;
  if (s == "cusp") return GeneratorKind::Cusp;
  if (s == "log-cusp" || s == "logcusp") return GeneratorKind::LogCusp;
  if (s == "step") return GeneratorKind::Step;
  if (s == "disc" || s == "disc-indicator") return GeneratorKind::Disc;
  if (s == "random" || s == "noise") return GeneratorKind::Random;
  if (s == "constant") return GeneratorKind::Constant;
  if (s == "linear") return GeneratorKind::Linear;
  throw std::invalid_argument("unknown generator '" + s + "'");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Cone;
  std::vector<std::size_t> shape{64, 64};
  /// Cell width; 0 selects 1 / max extent (the unit cube).
  double h = 0.0;
  /// Support radius of bump, cone and disc; unset selects default_radius().
  std::optional<double> radius;
  /// Exponent of the cusp |x - x0|^gamma.
  double gamma = 0.5;
  /// Ceiling T of the truncated log-cusp.
  double truncation = 2.0;
  /// Level of the constant generator, amplitude of the others.
  double value = 1.0;
  std::uint64_t seed = 0;
  /// Physical centre x0; unset selects the centre of cell floor(E/2).
  std::optional<std::vector<double>> center;
  /// Half-width in cells of the box average applied to the disc (0 = none).
  std::size_t mollify = 0;
  /// Jump cell of the step along axis 0; unset selects floor(E/2).
  std::optional<std::size_t> jump;
};

inline GridGeometry generator_geometry(const GeneratorSpec& spec) {
  if (spec.shape.empty()) throw std::invalid_argument("generator shape is empty");
  std::size_t e = 0;
  for (auto x : spec.shape) e = std::max(e, x);
  const double h = spec.h == 0.0 ? 1.0 / static_cast<double>(e) : spec.h;
  return GridGeometry(spec.shape, h);
}

/// Cone: 1 (as on the unit square). Bump and disc: a quarter of the shortest side.
inline double default_radius(const GeneratorSpec& spec) {
  if (spec.kind == GeneratorKind::Cone) return 1.0;
  const GridGeometry g = generator_geometry(spec);
  return 0.25 * static_cast<double>(g.min_extent()) * g.cell_width();
}

inline std::vector<double> generator_center(const GeneratorSpec& spec, const GridGeometry& g) {
  if (spec.center) {
    if (spec.center->size() != g.ndim()) throw std::invalid_argument("centre dimension mismatch");
    return *spec.center;
  }
  std::vector<double> c(g.ndim());
  Index mid{};
  for (std::size_t k = 0; k < g.ndim(); ++k) mid[k] = static_cast<std::int64_t>(g.extent(k) / 2);
  for (std::size_t k = 0; k < g.ndim(); ++k) c[k] = g.cell_center(mid, k);
  return c;
}

/// Centred (2m+1)^n box average with zero extension.
inline GridFunction box_smooth(const GridFunction& u, std::size_t m) {
  if (m == 0) return u;
  const auto table = SummedAreaTable::of(u);
  const GridGeometry& g = u.geometry();
  std::vector<double> out(g.size());
  const auto side = static_cast<std::int64_t>(2 * m + 1);
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    CubeSpec q;
    q.ndim = g.ndim();
    q.side = side;
    q.anchor = g.unravel(lin);
    for (std::size_t k = 0; k < g.ndim(); ++k) q.anchor[k] -= static_cast<std::int64_t>(m);
    out[lin] = cube_average(table, q);
  }
  return {g, std::move(out)};
}

inline GridFunction generate(const GeneratorSpec& spec) {
  const GridGeometry g = generator_geometry(spec);
  const auto x0 = generator_center(spec, g);
  const double r = spec.radius.value_or(default_radius(spec));
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (spec.kind == GeneratorKind::Cusp && !(spec.gamma > 0.0)) {
    throw std::invalid_argument("cusp exponent must be positive");
  }
  if (spec.kind == GeneratorKind::LogCusp && !(spec.truncation > 0.0)) {
    throw std::invalid_argument("log-cusp truncation must be positive");
  }
  if (spec.kind == GeneratorKind::Step) {
    if (spec.jump && *spec.jump >= g.extent(0)) throw std::invalid_argument("step jump outside grid");
  }

  const auto jump = static_cast<std::int64_t>(spec.jump.value_or(g.extent(0) / 2));
  CounterRng rng(spec.seed, 0x6e6f697365ULL);
  std::vector<double> v(g.size());
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const Index i = g.unravel(lin);
    double d2 = 0.0;
    for (std::size_t k = 0; k < g.ndim(); ++k) {
      const double d = g.cell_center(i, k) - x0[k];
      d2 += d * d;
    }
    const double d = std::sqrt(d2);
    double y = 0.0;
    switch (spec.kind) {
      case GeneratorKind::Bump: {
        const double t = d2 / (r * r);
        y = t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
        break;
      }
      case GeneratorKind::Cone: y = std::max(0.0, 1.0 - d / r); break;
      case GeneratorKind::Cusp: y = std::pow(d, spec.gamma); break;
      case GeneratorKind::LogCusp: y = d > 0.0 ? std::min(std::log(1.0 / d), spec.truncation) : spec.truncation; break;
      case GeneratorKind::Step: y = i[0] >= jump ? 1.0 : 0.0; break;
      case GeneratorKind::Disc: y = d < r ? 1.0 : 0.0; break;
      case GeneratorKind::Random: y = rng.uniform(); break;
      case GeneratorKind::Constant: y = 1.0; break;
      case GeneratorKind::Linear: y = g.cell_center(i, 0); break;
    }
    v[lin] = spec.value * y;
  }
  GridFunction u(g, std::move(v));
  if (spec.kind == GeneratorKind::Disc) return box_smooth(u, spec.mollify);
  return u;
}

/// Square of side 15k cells with a corridor k cells wide and 8k long leaving
/// the middle of its right face. Grid shape 15k x 23k.
struct Corridor {
  DomainMask mask;
  std::size_t scale = 1;
  std::size_t square = 15;
  std::size_t corridor_length = 8;

  /// True for cells of the corridor, excluding the square.
  bool in_corridor(const Index& i) const {
    return mask.contains(i) && i[1] >= static_cast<std::int64_t>(square);
  }
};

inline Corridor corridor_domain(std::size_t scale = 1) {
  if (scale < 1) throw std::invalid_argument("corridor scale must be >= 1");
  Corridor c;
  c.scale = scale;
  c.square = 15 * scale;
  c.corridor_length = 8 * scale;
  const GridGeometry g({c.square, c.square + c.corridor_length}, 1.0 / static_cast<double>(c.square));
  std::vector<std::uint8_t> cells(g.size(), 0);
  const auto lo = static_cast<std::int64_t>(7 * scale);
  const auto hi = lo + static_cast<std::int64_t>(scale);
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const Index i = g.unravel(lin);
    const bool in_square = i[1] < static_cast<std::int64_t>(c.square);
    const bool in_corridor = i[0] >= lo && i[0] < hi;
    cells[lin] = (in_square || in_corridor) ? 1 : 0;
  }
  c.mask = DomainMask(g, std::move(cells));
  return c;
}

/// Bump centred in the square of the corridor domain, support radius 6/15 of
/// the square side (strictly inside the square).
inline GridFunction corridor_bump(const Corridor& c) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::Bump;
  spec.shape = c.mask.geometry().shape();
  spec.h = c.mask.geometry().cell_width();
  spec.radius = 0.4;
  spec.center = std::vector<double>{0.5, 0.5};
  auto u = generate(spec);
  for (std::size_t lin = 0; lin < u.size(); ++lin) {
    if (!c.mask[lin]) u.mutable_at(lin) = 0.0;
  }
  return u;
}

}  // namespace oscillib
