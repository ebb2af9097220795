#pragma once

// Experiment configuration: one JSON object, unknown keys rejected.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blpp/error.hpp"
#include "blpp/initcond.hpp"

namespace blpp {

struct InitialConditionSpec {
  std::string kind = "narrow-wedge";  // narrow-wedge | flat | table | polynomial
  std::string path;                   // table file
  bool extend_linear = false;
  std::vector<double> coefficients;   // polynomial, lowest order first
  PsiTriple psi;

  static InitialConditionSpec named(std::string k) {
    InitialConditionSpec s;
    s.kind = std::move(k);
    return s;
  }

  InitialCondition build() const {
    if (kind == "narrow-wedge") return InitialCondition::narrow_wedge(psi);
    if (kind == "flat") return InitialCondition::flat(psi);
    if (kind == "table") {
      if (path.empty()) throw ConfigError("table initial condition needs 'path'");
      return InitialCondition::load_table(path, extend_linear, psi);
    }
    if (kind == "polynomial") {
      if (coefficients.empty()) throw ConfigError("polynomial initial condition needs 'coefficients'");
      auto coef = coefficients;
      return InitialCondition::expression(
          [coef](double x) -> std::optional<double> {
            double v = 0.0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * x + *it;
            return v;
          },
          "polynomial", psi);
    }
    throw ConfigError("unknown initial condition kind '" + kind + "'");
  }
};

/// Per-identity sample counts for the verification suite.
struct VerifyCounts {
  std::size_t enumeration = 200;
  std::size_t monotonicity = 1000;
  std::size_t superadditivity = 1000;
  std::size_t scaling = 500;
  std::size_t initial = 500;
  std::size_t rewire = 40;
  std::size_t profiles = 100;
};

struct FaultSpec {
  std::size_t line = 1;
  std::size_t index = 1;
  double delta = 1e-3;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t master_seed = 20240601;
  std::vector<long long> n;
  std::optional<std::size_t> samples;
  std::optional<double> resolution;
  std::optional<double> window;       // half-width of the start window
  std::vector<double> R;
  InitialConditionSpec initial;
  bool initial_set = false;
  std::vector<double> epsilons;
  std::vector<double> levels;
  std::optional<double> cutoff;
  std::optional<std::size_t> points_per_side;
  std::optional<bool> continuum_correction;
  std::vector<double> z;
  std::optional<double> r_threshold;
  unsigned threads = 1;
  std::string out = "out";
  bool plots = true;
  double constant_c = 1.0;
  double constant_C = 1.0;
  VerifyCounts verify;
  std::optional<FaultSpec> fault;

  long long single_n(long long fallback) const {
    if (n.empty()) return fallback;
    if (n.size() != 1) throw ConfigError("this experiment takes a single n");
    return n.front();
  }

  void validate() const {
    for (long long v : n)
      if (v < 1) throw ConfigError("n must be >= 1");
    if (samples && *samples < 1) throw ConfigError("samples must be >= 1");
    if (resolution && !(*resolution > 0.0)) throw ConfigError("resolution must be > 0");
    if (window && !(*window > 0.0)) throw ConfigError("window must be > 0");
    for (double e : epsilons)
      if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon values must lie in (0, 1)");
    for (double r : R)
      if (!(r >= 0.0)) throw ConfigError("R values must be >= 0");
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1])) throw ConfigError("levels must increase");
    if (cutoff && !(*cutoff > 0.0)) throw ConfigError("cutoff must be > 0");
    if (points_per_side && *points_per_side < 2) throw ConfigError("points_per_side must be >= 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

namespace detail {

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const std::string& key) {
  if (j.is_array()) return get_as<std::vector<T>>(j, key);
  return {get_as<T>(j, key)};
}

inline std::size_t count(const nlohmann::json& j, const std::string& key) {
  const auto v = get_as<long long>(j, key);
  if (v < 1) throw ConfigError("'" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

inline InitialConditionSpec parse_initial(const nlohmann::json& j) {
  if (j.is_string()) return InitialConditionSpec::named(get_as<std::string>(j, "initial_condition"));
  if (!j.is_object()) throw ConfigError("initial_condition must be a string or an object");
  InitialConditionSpec s;
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") s.kind = get_as<std::string>(v, key);
    else if (key == "path") s.path = get_as<std::string>(v, key);
    else if (key == "extend") {
      const auto e = get_as<std::string>(v, key);
      if (e != "linear" && e != "none") throw ConfigError("extend must be 'linear' or 'none'");
      s.extend_linear = e == "linear";
    } else if (key == "coefficients") s.coefficients = get_as<std::vector<double>>(v, key);
    else if (key == "psi") {
      const auto p = get_as<std::vector<double>>(v, key);
      if (p.size() != 3) throw ConfigError("psi needs three values");
      s.psi = {p[0], p[1], p[2]};
      s.psi.validate();
    } else throw ConfigError("unknown initial_condition key '" + key + "'");
  }
  return s;
}

inline VerifyCounts parse_verify(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("verify must be an object");
  VerifyCounts c;
  for (const auto& [key, v] : j.items()) {
    if (key == "enumeration") c.enumeration = count(v, key);
    else if (key == "monotonicity") c.monotonicity = count(v, key);
    else if (key == "superadditivity") c.superadditivity = count(v, key);
    else if (key == "scaling") c.scaling = count(v, key);
    else if (key == "initial") c.initial = count(v, key);
    else if (key == "rewire") c.rewire = count(v, key);
    else if (key == "profiles") c.profiles = count(v, key);
    else throw ConfigError("unknown verify key '" + key + "'");
  }
  return c;
}

inline FaultSpec parse_fault(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("inject_fault must be an object");
  FaultSpec f;
  for (const auto& [key, v] : j.items()) {
    if (key == "line") f.line = get_as<std::size_t>(v, key);
    else if (key == "index") f.index = get_as<std::size_t>(v, key);
    else if (key == "delta") f.delta = get_as<double>(v, key);
    else throw ConfigError("unknown inject_fault key '" + key + "'");
  }
  return f;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  using detail::get_as;
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") c.experiment = get_as<std::string>(v, key);
    else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(v, key);
    else if (key == "n") c.n = detail::scalar_or_list<long long>(v, key);
    else if (key == "samples") {
      const auto s = get_as<long long>(v, key);
      if (s < 1) throw ConfigError("samples must be >= 1");
      c.samples = static_cast<std::size_t>(s);
    } else if (key == "resolution") c.resolution = get_as<double>(v, key);
    else if (key == "window") c.window = get_as<double>(v, key);
    else if (key == "R") c.R = detail::scalar_or_list<double>(v, key);
    else if (key == "initial_condition") {
      c.initial = detail::parse_initial(v);
      c.initial_set = true;
    } else if (key == "epsilons") c.epsilons = detail::scalar_or_list<double>(v, key);
    else if (key == "levels") c.levels = get_as<std::vector<double>>(v, key);
    else if (key == "cutoff") c.cutoff = get_as<double>(v, key);
    else if (key == "points_per_side") c.points_per_side = detail::count(v, key);
    else if (key == "continuum_correction") c.continuum_correction = get_as<bool>(v, key);
    else if (key == "z") c.z = detail::scalar_or_list<double>(v, key);
    else if (key == "r") c.r_threshold = get_as<double>(v, key);
    else if (key == "threads") c.threads = static_cast<unsigned>(detail::count(v, key));
    else if (key == "out") c.out = get_as<std::string>(v, key);
    else if (key == "plots") c.plots = get_as<bool>(v, key);
    else if (key == "constants") {
      if (!v.is_object()) throw ConfigError("constants must be an object");
      for (const auto& [ck, cv] : v.items()) {
        if (ck == "c") c.constant_c = get_as<double>(cv, ck);
        else if (ck == "C") c.constant_C = get_as<double>(cv, ck);
        else throw ConfigError("unknown constants key '" + ck + "'");
      }
    } else if (key == "verify") c.verify = detail::parse_verify(v);
    else if (key == "inject_fault") c.fault = detail::parse_fault(v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

/// Echo of the effective configuration for manifests.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["master_seed"] = c.master_seed;
  if (!c.n.empty()) j["n"] = c.n;
  if (c.samples) j["samples"] = *c.samples;
  if (c.resolution) j["resolution"] = *c.resolution;
  if (c.window) j["window"] = *c.window;
  if (!c.R.empty()) j["R"] = c.R;
  if (c.initial_set) {
    nlohmann::json ic{{"kind", c.initial.kind}};
    if (!c.initial.path.empty()) ic["path"] = c.initial.path;
    if (c.initial.extend_linear) ic["extend"] = "linear";
    if (!c.initial.coefficients.empty()) ic["coefficients"] = c.initial.coefficients;
    ic["psi"] = {c.initial.psi.psi1, c.initial.psi.psi2, c.initial.psi.psi3};
    j["initial_condition"] = ic;
  }
  if (!c.epsilons.empty()) j["epsilons"] = c.epsilons;
  if (!c.levels.empty()) j["levels"] = c.levels;
  if (c.cutoff) j["cutoff"] = *c.cutoff;
  if (c.points_per_side) j["points_per_side"] = *c.points_per_side;
  if (c.continuum_correction) j["continuum_correction"] = *c.continuum_correction;
  if (!c.z.empty()) j["z"] = c.z;
  if (c.r_threshold) j["r"] = *c.r_threshold;
  j["out"] = c.out;
  j["plots"] = c.plots;
  j["constants"] = {{"c", c.constant_c}, {"C", c.constant_C}};
  return j;
}

}  // namespace blpp
