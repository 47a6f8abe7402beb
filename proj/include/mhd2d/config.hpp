#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mhd2d/verify.hpp"

namespace mhd2d {

struct BoundarySource {
  std::optional<std::string> scenario;  // registry id
  std::vector<FourierMode> modes;       // explicit modes
  std::optional<std::string> csv;       // sampled trace file
  bool operator==(const BoundarySource&) const = default;
};

struct InitialSource {
  std::optional<InitialPreset> preset;  // empty: the scenario default, else smooth
  double amplitude = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> checkpoint;
  bool operator==(const InitialSource&) const = default;
};

struct OutputSettings {
  std::string ledger = "ledger.csv";
  int checkpoint_every = 0;  // steps between checkpoints; 0 writes only the final state
  bool strong = false;       // record the strong-solution ledger columns
  bool operator==(const OutputSettings&) const = default;
};

struct ExperimentSelection {
  std::optional<std::string> id;
  std::optional<std::uint64_t> seed;
  std::string calibration = "calibration.txt";
  ParamMap params;
  bool operator==(const ExperimentSelection&) const = default;
};

struct RunConfig {
  SolverConfig solver;
  int diagnostic_modes = 0;  // galerkin.m: Laplacian modes for magnetic diagnostics
  BoundarySource boundary;
  InitialSource initial;
  OutputSettings outputs;
  ExperimentSelection experiment;
  bool operator==(const RunConfig&) const = default;
};

// Every violation found while reading a configuration, not just the first.
struct ConfigError : InputError {
  std::vector<std::string> violations;
  explicit ConfigError(std::vector<std::string> v) : InputError(join(v)), violations(std::move(v)) {}

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& x : v) s += "\n  " + x;
    return s;
  }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

// Environment name for section.key: MHD_SECTION_KEY, upper case.
inline std::string env_name(const std::string& section, const std::string& key) {
  std::string s = "MHD_" + section + "_" + key;
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

namespace config_detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"grid", {"nx", "ny"}},
      {"time", {"dt", "T", "coupling"}},
      {"physics", {"Re", "Rm", "S"}},
      {"galerkin", {"n", "m"}},
      {"boundary", {"scenario", "csv"}},
      {"initial", {"preset", "amplitude", "seed", "checkpoint"}},
      {"tolerances", {"picard", "outer", "picard_max", "outer_max", "compatibility", "div_clean"}},
      {"outputs", {"ledger", "checkpoint_every", "strong"}},
      {"experiment", {"id", "seed", "calibration"}},
  };
  return s;
}

inline const std::regex& mode_key() {
  static const std::regex r("mode[0-9]+");
  return r;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

// Typed reads that record a violation instead of throwing.
class Reader {
 public:
  Reader(std::map<std::string, std::string> values, std::vector<std::string>& errors)
      : values_(std::move(values)), errors_(errors) {}

  std::optional<std::string> text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  template <class T>
  std::optional<T> get(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    T out{};
    if (convert(*v, out)) return out;
    errors_.push_back(key + ": cannot read '" + *v + "' as " + type_name<T>());
    return std::nullopt;
  }

  template <class T>
  void set(const std::string& key, T& target) const {
    if (auto v = get<T>(key)) target = *v;
  }

  void fail(const std::string& key, const std::string& why) const { errors_.push_back(key + ": " + why); }

 private:
  static bool convert(const std::string& s, double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(s, &used);
      return used == s.size() && !std::isnan(out);
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool convert(const std::string& s, int& out) {
    try {
      std::size_t used = 0;
      out = std::stoi(s, &used);
      return used == s.size();
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool convert(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
    try {
      out = std::stoull(s);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool convert(const std::string& s, bool& out) {
    if (s == "true") return out = true, true;
    if (s == "false") return out = false, true;
    return false;
  }
  static bool convert(const std::string& s, std::string& out) {
    out = s;
    return true;
  }
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, std::uint64_t>) return "a non-negative integer";
    if constexpr (std::is_same_v<T, bool>) return "true/false";
    return "text";
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string>& errors_;
};

// "amplitude wavenumber x|y constant|sinusoidal|ramp [rate]"
inline std::optional<FourierMode> parse_mode(const std::string& text, std::string& why) {
  std::istringstream in(text);
  std::vector<std::string> w;
  for (std::string s; in >> s;) w.push_back(s);
  if (w.size() < 4 || w.size() > 5) {
    why = "expected 'amplitude wavenumber x|y envelope [rate]'";
    return std::nullopt;
  }
  FourierMode m;
  try {
    std::size_t used = 0;
    m.amplitude = std::stod(w[0], &used);
    if (used != w[0].size()) throw std::invalid_argument(w[0]);
    m.wavenumber = std::stoi(w[1], &used);
    if (used != w[1].size()) throw std::invalid_argument(w[1]);
  } catch (const std::exception&) {
    why = "amplitude or wavenumber is not numeric";
    return std::nullopt;
  }
  if (m.wavenumber < 0 || m.wavenumber % 2 != 0) {
    why = "wavenumber must be even and non-negative";
    return std::nullopt;
  }
  if (w[2] == "x")
    m.component = 0;
  else if (w[2] == "y")
    m.component = 1;
  else {
    why = "component must be x or y";
    return std::nullopt;
  }
  const std::string& env = w[3];
  if (env == "constant") {
    if (w.size() != 4) {
      why = "a constant envelope takes no rate";
      return std::nullopt;
    }
    m.envelope = {EnvelopeKind::constant, 0.0};
    return m;
  }
  if (env != "sinusoidal" && env != "ramp") {
    why = "envelope must be constant, sinusoidal or ramp";
    return std::nullopt;
  }
  if (w.size() != 5) {
    why = "envelope '" + env + "' needs a rate";
    return std::nullopt;
  }
  try {
    std::size_t used = 0;
    m.envelope.rate = std::stod(w[4], &used);
    if (used != w[4].size() || !(m.envelope.rate > 0.0)) throw std::invalid_argument(w[4]);
  } catch (const std::exception&) {
    why = "envelope rate must be a positive number";
    return std::nullopt;
  }
  m.envelope.kind = env == "ramp" ? EnvelopeKind::ramp : EnvelopeKind::sinusoidal;
  return m;
}

inline std::string mode_text(const FourierMode& m) {
  std::string s = format_double(m.amplitude) + ' ' + std::to_string(m.wavenumber) + ' ' + (m.component ? "y" : "x");
  switch (m.envelope.kind) {
    case EnvelopeKind::constant: return s + " constant";
    case EnvelopeKind::sinusoidal: return s + " sinusoidal " + format_double(m.envelope.rate);
    default: return s + " ramp " + format_double(m.envelope.rate);
  }
}

}  // namespace config_detail

// Reads an INI-style configuration. Precedence: file value, then the
// MHD_SECTION_KEY environment variable, then the documented default.
inline RunConfig parse_config_text(const std::string& text, const EnvLookup& env = process_env) {
  using namespace config_detail;
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }

  std::vector<std::string> errors;
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<std::pair<int, FourierMode>> modes;
  for (const auto& [name, body] : tree) {
    if (!body.data().empty()) {
      errors.push_back(name + ": key outside of any section");
      continue;
    }
    auto known = schema().find(name);
    if (known == schema().end()) {
      errors.push_back(name + ": unknown section");
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string full = name + "." + key;
      const std::string value = trim(node.data());
      if (name == "boundary" && std::regex_match(key, mode_key())) {
        std::string why;
        if (auto m = parse_mode(value, why))
          modes.emplace_back(std::stoi(key.substr(4)), *m);
        else
          errors.push_back(full + ": " + why);
        continue;
      }
      if (name == "experiment" && !known->second.count(key)) {
        sections[name][full] = value;  // experiment parameter, checked below
        continue;
      }
      if (!known->second.count(key)) {
        errors.push_back(full + ": unknown key");
        continue;
      }
      sections[name][full] = value;
    }
  }
  // Environment fills keys the file leaves unset.
  for (const auto& [section, keys] : schema())
    for (const auto& key : keys) {
      const std::string full = section + "." + key;
      if (sections[section].count(full)) continue;
      if (auto v = env(env_name(section, key))) sections[section][full] = trim(*v);
    }

  std::map<std::string, std::string> flat;
  for (const auto& [s, kv] : sections) flat.insert(kv.begin(), kv.end());
  Reader rd(flat, errors);

  RunConfig cfg;
  SolverConfig& sc = cfg.solver;
  if (!rd.has("grid.nx")) rd.fail("grid.nx", "required");
  rd.set("grid.nx", sc.nx);
  sc.ny = sc.nx;
  rd.set("grid.ny", sc.ny);
  if (!rd.has("time.dt")) rd.fail("time.dt", "required");
  if (!rd.has("time.T")) rd.fail("time.T", "required");
  rd.set("time.dt", sc.dt);
  rd.set("time.T", sc.horizon);
  if (auto c = rd.text("time.coupling")) {
    if (*c == "fixed_point")
      sc.coupling = Coupling::fixed_point;
    else if (*c == "single_pass")
      sc.coupling = Coupling::single_pass;
    else
      rd.fail("time.coupling", "expected fixed_point or single_pass");
  }
  rd.set("physics.Re", sc.Re);
  rd.set("physics.Rm", sc.Rm);
  rd.set("physics.S", sc.S);
  if (auto n = rd.text("galerkin.n"); n && *n != "full") {
    if (auto k = rd.get<int>("galerkin.n")) sc.truncation = *k;
  }
  rd.set("galerkin.m", cfg.diagnostic_modes);
  rd.set("tolerances.picard", sc.picard_tol);
  rd.set("tolerances.outer", sc.outer_tol);
  rd.set("tolerances.picard_max", sc.picard_max);
  rd.set("tolerances.outer_max", sc.outer_max);
  rd.set("tolerances.div_clean", sc.div_clean_threshold);
  if (auto c = rd.text("tolerances.compatibility")) {
    if (*c == "reject")
      sc.compatibility = CompatibilityPolicy::reject;
    else if (*c == "project")
      sc.compatibility = CompatibilityPolicy::project;
    else
      rd.fail("tolerances.compatibility", "expected reject or project");
  }

  // Each check names its key so all violations can be listed together.
  auto positive = [&](const char* key, double v) {
    if (rd.has(key) && !(v > 0.0)) rd.fail(key, "must be > 0");
  };
  positive("time.dt", sc.dt);
  positive("time.T", sc.horizon);
  positive("physics.Re", sc.Re);
  positive("physics.Rm", sc.Rm);
  positive("physics.S", sc.S);
  positive("tolerances.picard", sc.picard_tol);
  positive("tolerances.outer", sc.outer_tol);
  if (sc.nx < 4) rd.fail("grid.nx", "must be >= 4");
  if (sc.ny != sc.nx) rd.fail("grid.ny", "must equal grid.nx (uniform boundary spacing)");
  if (sc.dt > 0.0 && sc.horizon > 0.0 && sc.horizon < sc.dt) rd.fail("time.T", "must be >= time.dt");
  if (sc.truncation && *sc.truncation <= 0) rd.fail("galerkin.n", "must be positive or 'full'");
  if (cfg.diagnostic_modes < 0) rd.fail("galerkin.m", "must be >= 0");
  if (sc.picard_max <= 0) rd.fail("tolerances.picard_max", "must be > 0");
  if (sc.outer_max <= 0) rd.fail("tolerances.outer_max", "must be > 0");

  // Boundary source: exactly one of scenario, modes, csv (or none: zero data).
  if (auto s = rd.text("boundary.scenario")) {
    cfg.boundary.scenario = *s;
    try {
      find_scenario(*s);
    } catch (const InputError& e) {
      rd.fail("boundary.scenario", e.what());
    }
  }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& m : modes) cfg.boundary.modes.push_back(m.second);
  if (auto c = rd.text("boundary.csv")) cfg.boundary.csv = *c;
  const int sources = cfg.boundary.scenario.has_value() + !cfg.boundary.modes.empty() + cfg.boundary.csv.has_value();
  if (sources > 1) rd.fail("boundary", "give only one of scenario, mode<k> entries or csv");

  if (auto p = rd.text("initial.preset")) {
    try {
      cfg.initial.preset = parse_initial_preset(*p);
    } catch (const InputError& e) {
      rd.fail("initial.preset", e.what());
    }
  }
  rd.set("initial.amplitude", cfg.initial.amplitude);
  if (auto s = rd.get<std::uint64_t>("initial.seed")) cfg.initial.seed = *s;
  if (auto c = rd.text("initial.checkpoint")) cfg.initial.checkpoint = *c;
  if (cfg.initial.checkpoint && cfg.initial.preset) rd.fail("initial", "give either preset or checkpoint");

  rd.set("outputs.ledger", cfg.outputs.ledger);
  rd.set("outputs.checkpoint_every", cfg.outputs.checkpoint_every);
  rd.set("outputs.strong", cfg.outputs.strong);
  if (cfg.outputs.checkpoint_every < 0) rd.fail("outputs.checkpoint_every", "must be >= 0");

  if (auto id = rd.text("experiment.id")) cfg.experiment.id = *id;
  if (auto s = rd.get<std::uint64_t>("experiment.seed")) cfg.experiment.seed = *s;
  rd.set("experiment.calibration", cfg.experiment.calibration);
  for (const auto& [full, value] : flat) {
    if (full.rfind("experiment.", 0) != 0) continue;
    const std::string key = full.substr(11);
    if (schema().at("experiment").count(key)) continue;
    cfg.experiment.params[key] = value;
  }
  if (!cfg.experiment.params.empty() && !cfg.experiment.id) rd.fail("experiment", "parameters given without an id");
  if (cfg.experiment.id) {
    try {
      const auto& spec = find_experiment(*cfg.experiment.id);
      for (const auto& [k, v] : cfg.experiment.params)
        if (!spec.defaults.count(k)) rd.fail("experiment." + k, "unknown key for experiment '" + spec.id + "'");
    } catch (const InputError& e) {
      rd.fail("experiment.id", e.what());
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path, const EnvLookup& env = process_env) {
  return parse_config_text(read_file(path), env);
}

// Every field written explicitly, so parsing the output reproduces the
// configuration exactly.
inline std::string to_ini(const RunConfig& c) {
  const SolverConfig& s = c.solver;
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  o << "[grid]\n";
  kv("nx", std::to_string(s.nx));
  kv("ny", std::to_string(s.ny));
  o << "\n[time]\n";
  kv("dt", format_double(s.dt));
  kv("T", format_double(s.horizon));
  kv("coupling", s.coupling == Coupling::fixed_point ? "fixed_point" : "single_pass");
  o << "\n[physics]\n";
  kv("Re", format_double(s.Re));
  kv("Rm", format_double(s.Rm));
  kv("S", format_double(s.S));
  o << "\n[galerkin]\n";
  kv("n", s.truncation ? std::to_string(*s.truncation) : "full");
  kv("m", std::to_string(c.diagnostic_modes));
  o << "\n[boundary]\n";
  if (c.boundary.scenario) kv("scenario", *c.boundary.scenario);
  for (std::size_t k = 0; k < c.boundary.modes.size(); ++k)
    kv("mode" + std::to_string(k + 1), config_detail::mode_text(c.boundary.modes[k]));
  if (c.boundary.csv) kv("csv", *c.boundary.csv);
  o << "\n[initial]\n";
  if (c.initial.preset) kv("preset", to_string(*c.initial.preset));
  kv("amplitude", format_double(c.initial.amplitude));
  if (c.initial.seed) kv("seed", std::to_string(*c.initial.seed));
  if (c.initial.checkpoint) kv("checkpoint", *c.initial.checkpoint);
  o << "\n[tolerances]\n";
  kv("picard", format_double(s.picard_tol));
  kv("outer", format_double(s.outer_tol));
  kv("picard_max", std::to_string(s.picard_max));
  kv("outer_max", std::to_string(s.outer_max));
  kv("compatibility", s.compatibility == CompatibilityPolicy::reject ? "reject" : "project");
  kv("div_clean", format_double(s.div_clean_threshold));
  o << "\n[outputs]\n";
  kv("ledger", c.outputs.ledger);
  kv("checkpoint_every", std::to_string(c.outputs.checkpoint_every));
  kv("strong", c.outputs.strong ? "true" : "false");
  o << "\n[experiment]\n";
  if (c.experiment.id) kv("id", *c.experiment.id);
  if (c.experiment.seed) kv("seed", std::to_string(*c.experiment.seed));
  kv("calibration", c.experiment.calibration);
  for (const auto& [k, v] : c.experiment.params) kv(k, v);
  return o.str();
}

// Boundary data described by a configuration, sampled on the run's time
// grid. CSV paths are taken relative to `base`.
inline BoundaryTrace build_trace(const RunConfig& c, const std::filesystem::path& base = {}) {
  const Grid g = c.solver.grid();
  if (c.boundary.csv) {
    std::filesystem::path p(*c.boundary.csv);
    if (p.is_relative()) p = base / p;
    return parse_trace_csv(BoundaryLayout(g), read_file(p));
  }
  BoundaryModel model(c.boundary.modes);
  if (c.boundary.scenario) model = find_scenario(*c.boundary.scenario).boundary;
  return trace_for(model, c.solver);
}

inline InitialPreset initial_preset(const RunConfig& c) {
  if (c.initial.preset) return *c.initial.preset;
  if (c.boundary.scenario) return find_scenario(*c.boundary.scenario).initial;
  return InitialPreset::smooth;
}

}  // namespace mhd2d
