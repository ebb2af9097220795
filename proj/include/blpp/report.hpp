#pragma once

// Experiment results, manifests and the helpers shared by every runner.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blpp/config.hpp"
#include "blpp/io.hpp"
#include "blpp/stats.hpp"

namespace blpp {

inline constexpr const char* kVersion = "1.0.0";

struct Criterion {
  int id = 0;  // 0 for checks that do not map to a numbered criterion
  std::string label;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::vector<io::Table> tables;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Criterion> criteria;
  std::vector<std::uint64_t> counterexample_seeds;
  double seconds = 0.0;

  bool passed() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return true;
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline nlohmann::json fit_json(const stats::ExponentFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"slope_stderr", f.slope_stderr},
          {"points", f.points}};
}

/// Fit or the reason it could not be made.
struct FitOutcome {
  std::optional<stats::ExponentFit> fit;
  std::string error;

  nlohmann::json json() const {
    if (fit) return fit_json(*fit);
    return {{"error", error}};
  }

  bool within(double lo, double hi, double min_r2 = 0.0) const {
    return fit && fit->slope >= lo && fit->slope <= hi && fit->r_squared >= min_r2;
  }

  std::string describe() const {
    if (!fit) return "no fit (" + error + ")";
    char buf[96];
    std::snprintf(buf, sizeof buf, "slope %.3f, r2 %.3f, %zu levels", fit->slope, fit->r_squared,
                  fit->points);
    return buf;
  }
};

inline FitOutcome try_fit(const stats::TailCurve& c) {
  try {
    return {stats::fit_exponent(c), {}};
  } catch (const EstimationError& e) {
    return {std::nullopt, e.what()};
  }
}

inline io::Table tail_table(const std::string& name, const stats::TailCurve& c,
                            const std::function<double(double)>& reference = {}) {
  io::Table t{name, {"level", "count", "total", "probability", "lo", "hi"}, {}};
  if (reference) t.columns.push_back("reference");
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto w = c.interval(i);
    std::vector<double> row{c.levels[i], static_cast<double>(c.exceed_counts[i]),
                            static_cast<double>(c.total), c.probabilities[i], w.lo, w.hi};
    if (reference) row.push_back(reference(c.levels[i]));
    t.add(std::move(row));
  }
  return t;
}

inline nlohmann::json tail_json(const stats::TailCurve& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto w = c.interval(i);
    rows.push_back({{"level", c.levels[i]}, {"probability", c.probabilities[i]},
                    {"lo", w.lo}, {"hi", w.hi}});
  }
  return rows;
}

inline std::vector<double> linear_levels(double step, int count, double first = 0.0) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(first + step * k);
  return out;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Writes tables, plots, summary.json and manifest.json; returns the manifest.
inline nlohmann::json write_outputs(const ExperimentResult& r, const ExperimentConfig& cfg,
                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  auto emit = [&](const std::string& file, const std::string& content) {
    io::write_file(dir / file, content);
    files.push_back({{"path", file}, {"sha256", io::sha256_hex(content)}, {"bytes", content.size()}});
  };
  for (const auto& t : r.tables) {
    emit(t.name + ".csv", io::to_csv(t));
    if (cfg.plots && t.has("level") && t.has("probability"))
      emit(t.name + ".svg", io::render_svg(t, io::default_plot(t, false)));
    if (cfg.plots && t.has("eps") && t.has("median"))
      emit(t.name + ".svg", io::render_svg(t, io::default_plot(t, true)));
  }
  nlohmann::json summary = r.summary;
  summary["experiment"] = r.name;
  emit("summary.json", summary.dump(2) + "\n");

  nlohmann::json crit = nlohmann::json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"id", c.id}, {"label", c.label}, {"pass", c.pass}, {"detail", c.detail}});
  nlohmann::json manifest{{"artifact", "blpp"},
                          {"version", kVersion},
                          {"experiment", r.name},
                          {"config", to_json(cfg)},
                          {"wall_seconds", r.seconds},
                          {"criteria", crit},
                          {"passed", r.passed()},
                          {"counterexample_seeds", r.counterexample_seeds},
                          {"seed_rule", "derive(master_seed, experiment_id, sample_index)"},
                          {"files", files}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace blpp
