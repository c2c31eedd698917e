#pragma once

// CSV and JSON serialization of verification reports and Whitney dumps.
// Floating-point values use the shortest round-trip form, so output bytes
// depend only on the values.

#include <charconv>
#include <cmath>
#include <string>

#include <json.hpp>

#include "oscillib/verify.hpp"
#include "oscillib/whitney.hpp"

namespace oscillib {

inline constexpr const char* kReportSchema = "oscillib.report/1";
inline constexpr const char* kWhitneySchema = "oscillib.whitney/1";

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string format_anchor(const CubeSpec& q) {
  std::string s;
  for (std::size_t k = 0; k < q.ndim; ++k) {
    if (k) s += ';';
    s += std::to_string(q.anchor[k]);
  }
  return s;
}

inline std::string report_csv(const VerificationReport& r) {
  std::string out = "anchor,side,lhs,rhs,ratio,flag\n";
  for (const auto& row : r.rows) {
    out += format_anchor(row.cube);
    out += ',';
    out += std::to_string(row.cube.side);
    out += ',';
    out += format_double(row.lhs);
    out += ',';
    out += format_double(row.rhs);
    out += ',';
    out += format_double(row.ratio);
    out += ',';
    out += to_string(row.flag);
    out += '\n';
  }
  return out;
}

/// Non-finite values become strings so the document stays valid JSON.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline Json cube_json(const CubeSpec& q) {
  Json a = Json::array();
  for (std::size_t k = 0; k < q.ndim; ++k) a.push_back(q.anchor[k]);
  return {{"anchor", a}, {"side", q.side}};
}

inline Json grid_json(const GridGeometry& g) {
  return {{"ndim", g.ndim()}, {"shape", g.shape()}, {"cell_width", g.cell_width()}};
}

/// Summary document; `config` is embedded verbatim.
inline Json report_json(const VerificationReport& r, const Json& config = Json::object()) {
  Json summary = {
      {"rows", r.rows.size()},
      {"max_ratio", json_number(r.summary.max_ratio)},
      {"argmax", r.summary.argmax ? cube_json(*r.summary.argmax) : Json(nullptr)},
      {"infinite", r.summary.infinite},
      {"zero_over_zero", r.summary.zero_over_zero},
      {"impossible", r.summary.impossible},
  };
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = json_number(v);
  return {
      {"schema", kReportSchema},
      {"scenario", r.scenario},
      {"grid", grid_json(r.grid)},
      {"valid", r.valid},
      {"negative_input", r.negative_input},
      {"summary", summary},
      {"metrics", metrics},
      {"notes", r.notes},
      {"config", config},
  };
}

inline Json rational_json(const Rational& x) { return {x.numerator(), x.denominator()}; }

inline Json box_json(const WhitneyDecomposition& d, const LatticeBox& b) {
  Json corner = Json::array();
  for (std::size_t k = 0; k < b.ndim; ++k) corner.push_back(rational_json(d.length(b.corner[k])));
  return {{"corner", corner}, {"side", rational_json(d.length(b.side))}};
}

inline Json whitney_cube_json(const WhitneyDecomposition& d, const WhitneyCube& q) {
  Json j = box_json(d, q.box);
  j["generation"] = q.generation;
  return j;
}

/// Exact dump: every rational is a [numerator, denominator] pair.
inline Json whitney_json(const WhitneyDecomposition& d, const ChainSweep& sweep,
                         const std::vector<WhitneyCube>* annulus, std::optional<Rational> r0,
                         const std::vector<Chain>& chains, const Json& config = Json::object()) {
  Json gens = Json::array();
  for (const auto& g : d.generations()) {
    Json cubes = Json::array();
    for (const auto& q : g) cubes.push_back(whitney_cube_json(d, q));
    gens.push_back(cubes);
  }
  Json residual = Json::array();
  for (const auto& b : d.residual()) residual.push_back(box_json(d, b));
  Json counts = Json::array();
  for (const auto& g : d.generations()) counts.push_back(g.size());

  Json out = {
      {"schema", kWhitneySchema},
      {"ndim", d.ndim()},
      {"depth", d.depth()},
      {"parent_side", rational_json(d.parent_side())},
      {"generation_sizes", counts},
      {"generations", gens},
      {"residual", residual},
  };
  if (annulus) {
    Json a = Json::array();
    for (const auto& q : *annulus) a.push_back(whitney_cube_json(d, q));
    out["annulus"] = {{"r0", rational_json(*r0)}, {"cubes", a}};
  }
  Json cj = Json::array();
  for (const auto& c : chains) {
    Json cubes = Json::array();
    for (const auto& q : c.cubes) cubes.push_back(whitney_cube_json(d, q));
    cj.push_back({{"source", whitney_cube_json(d, c.source)}, {"length", c.length()}, {"cubes", cubes}});
  }
  out["chains"] = cj;
  out["summary"] = {
      {"cubes", d.cubes().size()},
      {"max_chain_length", sweep.max_length},
      {"min_overlap_fraction", sweep.min_overlap ? rational_json(*sweep.min_overlap) : Json(nullptr)},
      {"endpoints_ok", sweep.endpoints_ok},
  };
  out["config"] = config;
  return out;
}

}  // namespace oscillib
