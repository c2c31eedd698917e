#pragma once

// oscillib command line: gen, maximal, verify, whitney.
//
// Settings are resolved in three layers: built-in defaults, then a JSON
// config file (--config), then flags. The resolved settings (minus output
// location and thread count) are embedded in every report.
//
// Exit codes: 0 success, 1 a check raised a violation flag or failed a
// guard, 2 invalid configuration, 3 I/O or parse failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscillib/oscillib.hpp"

namespace oscillib::cli {

enum ExitCode : int { kOk = 0, kFlagged = 1, kConfigError = 2, kIoError = 3 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FieldType { Str, Int, Real, Bool };

struct Field {
  const char* key;
  FieldType type;
  Json fallback;
  const char* help;
};

inline const std::vector<Field>& generator_fields() {
  static const std::vector<Field> f = {
      {"generator", FieldType::Str, "cone", "bump|cone|cusp|log-cusp|step|disc|random|constant|linear"},
      {"ndim", FieldType::Int, 2, "grid dimension"},
      {"extent", FieldType::Int, 64, "cells per axis"},
      {"cell_width", FieldType::Real, 0.0, "cell width h (0: 1/extent)"},
      {"radius", FieldType::Real, nullptr, "support radius of bump/cone/disc"},
      {"gamma", FieldType::Real, 0.5, "cusp exponent"},
      {"truncation", FieldType::Real, 2.0, "log-cusp ceiling T"},
      {"value", FieldType::Real, 1.0, "amplitude"},
      {"mollify", FieldType::Int, 0, "disc box-average half width in cells"},
      {"jump", FieldType::Int, nullptr, "step jump cell along axis 0"},
      {"domain", FieldType::Str, "", "'' or 'corridor' (bump in a square with a corridor)"},
      {"domain_scale", FieldType::Int, 1, "corridor refinement factor"},
  };
  return f;
}

inline const std::vector<Field>& operator_fields() {
  static const std::vector<Field> f = {
      {"variant", FieldType::Str, "noncentred", "noncentred|centred|fractional|domain"},
      {"beta", FieldType::Real, 0.0, "fractional exponent"},
      {"max_side", FieldType::Int, 0, "largest cube side in cells (0: default)"},
      {"mask", FieldType::Str, "", "domain mask file (MPGF, nonzero = inside)"},
  };
  return f;
}

inline std::vector<Field> command_fields(const std::string& cmd) {
  std::vector<Field> f = {{"seed", FieldType::Int, 0, "64-bit seed"}};
  auto append = [&](const std::vector<Field>& more) { f.insert(f.end(), more.begin(), more.end()); };
  if (cmd == "gen") {
    append(generator_fields());
    f.push_back({"gradient_measure", FieldType::Bool, false, "also write the |grad u| measure"});
    f.push_back({"name", FieldType::Str, "u", "output file stem"});
  } else if (cmd == "maximal") {
    f.push_back({"input", FieldType::Str, "", "input MPGF file"});
    append(operator_fields());
    f.push_back({"oracle", FieldType::Bool, false, "use the brute-force enumeration (small grids)"});
    f.push_back({"name", FieldType::Str, "Mu", "output file stem"});
  } else if (cmd == "verify") {
    f.push_back({"scenario", FieldType::Str, "theorem", "theorem|fpw|gradient|bmo|holder|fractional"});
    f.push_back({"input", FieldType::Str, "", "input MPGF file (empty: use the generator)"});
    append(generator_fields());
    f.push_back({"measure", FieldType::Str, "lebesgue", "MPGM file, 'lebesgue' or 'gradient'"});
    f.push_back({"measure_scale", FieldType::Real, 1.0, "factor applied to the measure"});
    append(operator_fields());
    f.push_back({"alpha", FieldType::Real, 0.0, "Poincare exponent"});
    f.push_back({"q", FieldType::Real, 1.0, "oscillation exponent"});
    f.push_back({"family", FieldType::Str, "default", "default|dyadic|all|random"});
    f.push_back({"family_count", FieldType::Int, 500, "random cubes in the family"});
    f.push_back({"family_max_side", FieldType::Int, 0, "largest family side (0: default)"});
    f.push_back({"name", FieldType::Str, "report", "output file stem"});
  } else if (cmd == "whitney") {
    f.push_back({"L", FieldType::Str, "1", "parent side, integer or p/q"});
    f.push_back({"ndim", FieldType::Int, 2, "dimension"});
    f.push_back({"depth", FieldType::Int, 3, "number of generations"});
    f.push_back({"r0", FieldType::Str, "", "annulus half-gap, integer or p/q"});
    f.push_back({"source", FieldType::Str, "", "chains to dump: 'all' or GEN:INDEX"});
    f.push_back({"name", FieldType::Str, "whitney", "output file stem"});
  }
  return f;
}

inline std::string flag_name(const std::string& key) {
  std::string s = key;
  for (auto& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

/// Convert a flag string to the JSON type of its field.
inline Json parse_value(const Field& f, const std::string& text) {
  try {
    std::size_t used = 0;
    switch (f.type) {
      case FieldType::Str: return text;
      case FieldType::Bool: return text == "true" || text == "1";
      case FieldType::Int: {
        if (!text.empty() && text[0] == '-') throw ConfigError("negative value");
        const auto v = std::stoull(text, &used, 0);
        if (used != text.size()) throw ConfigError("trailing characters");
        return v;
      }
      case FieldType::Real: {
        const double v = std::stod(text, &used);
        if (used != text.size()) throw ConfigError("trailing characters");
        return v;
      }
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad value '" + text + "' for " + flag_name(f.key));
}

inline void check_type(const Field& f, const Json& v) {
  if (v.is_null()) return;
  bool ok = false;
  switch (f.type) {
    case FieldType::Str: ok = v.is_string(); break;
    case FieldType::Bool: ok = v.is_boolean(); break;
    case FieldType::Int: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case FieldType::Real: ok = v.is_number(); break;
  }
  if (!ok) throw ConfigError(std::string("config key '") + f.key + "' has the wrong type");
}

/// Command settings after layering; `values` keeps field order.
struct Settings {
  std::string command;
  Json values = Json::object();
  std::filesystem::path out = ".";
  unsigned threads = 1;

  const Json& at(const char* key) const { return values.at(key); }
  std::string str(const char* key) const { return at(key).get<std::string>(); }
  std::uint64_t uint(const char* key) const { return at(key).get<std::uint64_t>(); }
  double real(const char* key) const { return at(key).get<double>(); }
  bool flag(const char* key) const { return at(key).get<bool>(); }
  bool has(const char* key) const { return !at(key).is_null(); }

  /// Resolved settings embedded in reports.
  Json embedded() const {
    Json j = {{"command", command}};
    for (auto it = values.begin(); it != values.end(); ++it) j[it.key()] = it.value();
    return j;
  }
};

inline unsigned default_threads() {
  if (const char* env = std::getenv("OSCILLIB_THREADS")) {
    try {
      const auto v = std::stoul(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline Json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
}

inline Settings layer(const std::string& command, const std::vector<Field>& fields, const Json& file,
                      const std::map<std::string, std::string>& flags,
                      const std::map<std::string, bool>& bool_flags) {
  Settings s;
  s.command = command;
  for (const auto& f : fields) s.values[f.key] = f.fallback;
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      if (it.key() == "command" || it.key() == "out" || it.key() == "threads") continue;
      const auto match = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.key == it.key(); });
      if (match == fields.end()) throw ConfigError("unknown config key '" + it.key() + "' for " + command);
      check_type(*match, it.value());
      s.values[it.key()] = match->type == FieldType::Real && !it.value().is_null()
                               ? Json(it.value().get<double>())
                               : it.value();
    }
    if (file.contains("out")) s.out = file["out"].get<std::string>();
    if (file.contains("threads")) s.threads = file["threads"].get<unsigned>();
  }
  for (const auto& f : fields) {
    if (auto it = flags.find(f.key); it != flags.end()) s.values[f.key] = parse_value(f, it->second);
    if (auto it = bool_flags.find(f.key); it != bool_flags.end()) s.values[f.key] = it->second;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Builders shared by the commands

inline GeneratorSpec generator_spec(const Settings& s) {
  GeneratorSpec g;
  g.kind = parse_generator(s.str("generator"));
  const auto n = s.uint("ndim");
  if (n < 1 || n > kMaxDims) throw ConfigError("ndim must be in [1, 4]");
  const auto e = s.uint("extent");
  if (e < 1) throw ConfigError("extent must be >= 1");
  g.shape.assign(n, e);
  g.h = s.real("cell_width");
  if (g.h < 0.0) throw ConfigError("cell_width must be positive");
  if (s.has("radius")) g.radius = s.real("radius");
  g.gamma = s.real("gamma");
  g.truncation = s.real("truncation");
  g.value = s.real("value");
  g.seed = s.uint("seed");
  g.mollify = s.uint("mollify");
  if (s.has("jump")) g.jump = s.uint("jump");
  return g;
}

struct Input {
  GridFunction u;
  std::optional<DomainMask> mask;
};

inline Input generated_input(const Settings& s) {
  const auto domain = s.str("domain");
  if (domain == "corridor") {
    const auto c = corridor_domain(s.uint("domain_scale"));
    return {corridor_bump(c), c.mask};
  }
  if (!domain.empty()) throw ConfigError("unknown domain '" + domain + "'");
  return {generate(generator_spec(s)), std::nullopt};
}

inline MaximalConfig maximal_config(const Settings& s, const GridGeometry& g,
                                    const std::optional<DomainMask>& generated_mask) {
  MaximalConfig m;
  m.variant = parse_variant(s.str("variant"));
  m.beta = s.real("beta");
  m.max_side = s.uint("max_side");
  m.threads = s.threads;
  const auto mask_path = s.str("mask");
  if (!mask_path.empty()) {
    m.mask = read_mask(mask_path);
  } else if (generated_mask) {
    m.mask = generated_mask;
  }
  if (m.variant != MaximalVariant::DomainCentred) m.mask.reset();
  validate(m, g);
  return m;
}

inline CubeFamily family_for(const Settings& s, const GridGeometry& g) {
  const auto kind = s.str("family");
  const auto seed = s.uint("seed");
  const auto count = s.uint("family_count");
  const auto requested = static_cast<std::int64_t>(s.uint("family_max_side"));
  const auto side = requested > 0 ? requested : CubeFamily::default_side(g);
  CubeFamily f = CubeFamily::fixed({});
  if (kind == "default") {
    f = requested > 0 ? CubeFamily::dyadic(g, side, side) : CubeFamily::default_for(g, seed, count);
    if (requested > 0) {
      const auto r = CubeFamily::random(g, seed, count, 1, side, side);
      std::vector<CubeSpec> all = f.cubes();
      all.insert(all.end(), r.cubes().begin(), r.cubes().end());
      f = CubeFamily::fixed(std::move(all), side);
    }
  } else if (kind == "dyadic") {
    f = CubeFamily::dyadic(g, side, side);
  } else if (kind == "all") {
    std::vector<std::int64_t> sides;
    for (std::int64_t x = 1; x <= side; ++x) sides.push_back(x);
    f = CubeFamily::all(g, sides, side);
  } else if (kind == "random") {
    f = CubeFamily::random(g, seed, count, 1, side, side);
  } else {
    throw ConfigError("unknown family '" + kind + "'");
  }
  if (f.size() == 0) throw ConfigError("cube family is empty for this grid");
  return f;
}

inline Rational parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const auto v = std::stoll(text, &used);
      if (used != text.size()) throw ConfigError("trailing characters");
      return Rational(v);
    }
    const auto num = std::stoll(text.substr(0, slash), &used);
    if (used != slash) throw ConfigError("trailing characters");
    const auto den_text = text.substr(slash + 1);
    const auto den = std::stoll(den_text, &used);
    if (used != den_text.size() || den == 0) throw ConfigError("bad denominator");
    return Rational(num, den);
  } catch (const std::logic_error&) {
    throw ConfigError("bad rational '" + text + "'");
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_gen(const Settings& s, std::ostream& out) {
  const auto input = generated_input(s);
  std::optional<DiscreteMeasure> grad;
  if (s.flag("gradient_measure")) grad = gradient_measure(input.u, input.mask ? &*input.mask : nullptr);
  const auto stem = s.str("name");
  std::filesystem::create_directories(s.out);
  write_grid(s.out / (stem + ".mpgf"), input.u);
  if (grad) write_measure(s.out / (stem + "_grad.mpgm"), *grad);
  if (input.mask) write_mask(s.out / (stem + "_mask.mpgf"), *input.mask);
  out << "wrote " << (s.out / (stem + ".mpgf")).string() << "\n";
  return kOk;
}

inline int cmd_maximal(const Settings& s, std::ostream& out, std::ostream& log) {
  const auto path = s.str("input");
  if (path.empty()) throw ConfigError("maximal needs --input");
  const auto u = read_grid(path);
  const auto cfg = maximal_config(s, u.geometry(), std::nullopt);
  const auto t0 = std::chrono::steady_clock::now();
  const auto Mu = s.flag("oracle") ? brute_force_maximal(u, cfg) : maximal(u, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto range = detail::full_range(cfg, u.geometry());
  log << "maximal: " << to_string(cfg.variant) << ", " << detail::sides_in(range).size()
      << " side lengths, " << secs << " s\n";
  std::filesystem::create_directories(s.out);
  const auto target = s.out / (s.str("name") + ".mpgf");
  write_grid(target, Mu);
  out << "wrote " << target.string() << "\n";
  return kOk;
}

inline int cmd_verify(const Settings& s, std::ostream& out, std::ostream& log) {
  Input input;
  const auto path = s.str("input");
  if (!path.empty()) {
    input.u = read_grid(path);
  } else {
    input = generated_input(s);
  }
  const GridFunction& u = input.u;
  const auto scenario = s.str("scenario");
  const auto mcfg = maximal_config(s, u.geometry(), input.mask);

  auto measure = [&]() -> DiscreteMeasure {
    const auto m = s.str("measure");
    const double scale = s.real("measure_scale");
    if (!(scale > 0.0)) throw ConfigError("measure_scale must be positive");
    DiscreteMeasure base;
    if (m == "lebesgue") {
      base = DiscreteMeasure::lebesgue(u.geometry());
    } else if (m == "gradient") {
      base = gradient_measure(u);
    } else {
      base = read_measure(m);
    }
    if (scale == 1.0) return base;
    std::vector<double> v(base.masses().begin(), base.masses().end());
    for (auto& x : v) x *= scale;
    return {base.geometry(), std::move(v)};
  };
  auto poincare = [&]() {
    PoincareConfig p;
    p.alpha = s.real("alpha");
    p.q = s.real("q");
    p.variant = p.alpha == 0.0 ? PoincareVariant::LebesgueAlpha0 : PoincareVariant::MeasureAlphaPositive;
    p.validate();
    return p;
  };

  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport report;
  if (scenario == "theorem") {
    report = run_theorem_check(u, measure(), poincare(), family_for(s, u.geometry()), mcfg);
  } else if (scenario == "fractional") {
    report = run_fractional_check(u, measure(), poincare(), s.real("beta"), family_for(s, u.geometry()),
                                  s.threads);
  } else if (scenario == "fpw") {
    report = run_fpw_check(u, measure(), s.real("alpha"), family_for(s, u.geometry()));
  } else if (scenario == "gradient") {
    report = run_gradient_check(u, mcfg);
  } else if (scenario == "bmo") {
    report = run_bmo_check(u, family_for(s, u.geometry()), mcfg);
  } else if (scenario == "holder") {
    report = run_holder_check(u, family_for(s, u.geometry()), s.real("alpha"), mcfg);
  } else {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "verify " << scenario << ": " << report.rows.size() << " rows, " << secs << " s\n";

  const std::string csv = report_csv(report);
  const std::string json = report_json(report, s.embedded()).dump(2) + "\n";
  std::filesystem::create_directories(s.out);
  const auto stem = s.str("name");
  write_text(s.out / (stem + ".csv"), csv);
  write_text(s.out / (stem + ".json"), json);
  out << scenario << ": max_ratio=" << format_double(report.summary.max_ratio)
      << " rows=" << report.rows.size() << " infinite=" << report.summary.infinite
      << " impossible=" << report.summary.impossible << (report.valid ? "" : " (invalid input)") << "\n";
  return report.passed() ? kOk : kFlagged;
}

inline int cmd_whitney(const Settings& s, std::ostream& out) {
  const auto L = parse_rational(s.str("L"));
  const auto depth = s.uint("depth");
  if (depth < 1 || depth > 30) throw ConfigError("depth must be in [1, 30]");
  const auto d = whitney_decompose(L, s.uint("ndim"), static_cast<int>(depth));
  std::optional<Rational> r0;
  std::vector<WhitneyCube> annulus;
  if (!s.str("r0").empty()) {
    r0 = parse_rational(s.str("r0"));
    annulus = annulus_cubes(d, *r0);
  }
  std::vector<Chain> chains;
  const auto source = s.str("source");
  if (source == "all") {
    for (const auto& q : d.cubes()) chains.push_back(whitney_chain(q, d));
  } else if (!source.empty()) {
    const auto colon = source.find(':');
    if (colon == std::string::npos) throw ConfigError("source must be 'all' or GEN:INDEX");
    std::size_t gen = 0;
    std::size_t idx = 0;
    try {
      gen = std::stoul(source.substr(0, colon));
      idx = std::stoul(source.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("bad source '" + source + "'");
    }
    if (gen < 1 || gen > d.generations().size() || idx >= d.generations()[gen - 1].size()) {
      throw ConfigError("source cube does not exist");
    }
    chains.push_back(whitney_chain(d.generations()[gen - 1][idx], d));
  }
  const auto sweep = sweep_chains(d);
  const auto doc = whitney_json(d, sweep, r0 ? &annulus : nullptr, r0, chains, s.embedded());
  std::filesystem::create_directories(s.out);
  const auto target = s.out / (s.str("name") + ".json");
  write_text(target, doc.dump(2) + "\n");
  out << "cubes=" << d.cubes().size() << " max_chain_length=" << sweep.max_length << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

/// Parse argv and run one command. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Discrete maximal functions and Poincare inequalities on grids"};
  app.require_subcommand(1);

  struct Slot {
    CLI::App* sub = nullptr;
    std::vector<Field> fields;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> bools;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    std::string out_dir;
    unsigned threads = 0;
  };
  std::map<std::string, Slot> slots;
  for (const char* name : {"gen", "maximal", "verify", "whitney"}) {
    Slot& slot = slots[name];
    slot.fields = command_fields(name);
    slot.sub = app.add_subcommand(name);
    slot.sub->add_option("--config", slot.config, "JSON config file");
    slot.sub->add_option("--out", slot.out_dir, "output directory");
    slot.sub->add_option("--threads", slot.threads, "worker threads (default: OSCILLIB_THREADS or all cores)");
    for (const auto& f : slot.fields) {
      if (f.type == FieldType::Bool) {
        slot.options[f.key] = slot.sub->add_flag(flag_name(f.key), f.help);
      } else {
        slot.options[f.key] = slot.sub->add_option(flag_name(f.key), slot.values[f.key], f.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    for (auto& [name, slot] : slots) {
      if (!slot.sub->parsed()) continue;
      std::map<std::string, std::string> given;
      std::map<std::string, bool> bools;
      for (const auto& f : slot.fields) {
        if (slot.options[f.key]->count() == 0) continue;
        if (f.type == FieldType::Bool) {
          bools[f.key] = true;
        } else {
          given[f.key] = slot.values[f.key];
        }
      }
      const Json file = slot.config.empty() ? Json() : read_config_file(slot.config);
      Settings s = layer(name, slot.fields, file, given, bools);
      if (!file.contains("threads") || slot.threads > 0) {
        s.threads = slot.threads > 0 ? slot.threads : default_threads();
      }
      if (!slot.out_dir.empty()) s.out = slot.out_dir;
      if (name == "gen") return cmd_gen(s, out);
      if (name == "maximal") return cmd_maximal(s, out, err);
      if (name == "verify") return cmd_verify(s, out, err);
      return cmd_whitney(s, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kConfigError;
}

}  // namespace oscillib::cli
