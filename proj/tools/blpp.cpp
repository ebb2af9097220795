#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blpp/config.hpp"
#include "blpp/experiments.hpp"
#include "blpp/io.hpp"
#include "blpp/parallel.hpp"
#include "blpp/report.hpp"
#include "blpp/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

void print_criteria(const blpp::ExperimentResult& r) {
  for (const auto& c : r.criteria) {
    std::string id = c.id > 0 ? "criterion " + std::to_string(c.id) : "check";
    std::cout << (c.pass ? "PASS " : "FAIL ") << id << ": " << c.label << " (" << c.detail << ")\n";
  }
}

int finish(const blpp::ExperimentResult& r, const blpp::ExperimentConfig& cfg,
           const std::filesystem::path& dir) {
  blpp::write_outputs(r, cfg, dir);
  print_criteria(r);
  std::cout << "outputs: " << dir.string() << "\n";
  return r.passed() ? kOk : kFailed;
}

int plot(const std::vector<std::string>& paths, bool loglog) {
  for (const auto& p : paths) {
    const auto table = blpp::io::read_csv(p);
    const auto svg = blpp::io::render_svg(table, blpp::io::default_plot(table, loglog));
    std::filesystem::path out(p);
    out.replace_extension(".svg");
    blpp::io::write_file(out, svg);
    std::cout << out.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaled Brownian last passage percolation: verification and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", blpp::kVersion);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;

  auto* verify = app.add_subcommand("verify", "run the per-sample identity checks");
  verify->add_option("--config", config_path, "JSON config")->required();
  verify->add_option("--threads", threads, "worker threads");
  verify->add_option("--out", out_dir, "output directory");

  std::string name;
  auto* run = app.add_subcommand("run", "run a named experiment");
  run->add_option("experiment", name, "experiment name")->required();
  run->add_option("--config", config_path, "JSON config")->required();
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--out", out_dir, "output directory");

  std::vector<std::string> csvs;
  bool loglog = false;
  auto* plt = app.add_subcommand("plot", "render estimator CSVs to SVG");
  plt->add_option("csv", csvs, "CSV files")->required();
  plt->add_flag("--loglog", loglog, "log2 axes");

  auto* list = app.add_subcommand("list", "list experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*list) {
      for (const auto& [n, _] : blpp::experiments()) std::cout << n << "\n";
      return kOk;
    }
    if (*plt) return plot(csvs, loglog);

    blpp::ExperimentConfig cfg = blpp::load_config(config_path);
    if (threads > 0) cfg.threads = threads;
    const unsigned workers = blpp::resolve_threads(cfg.threads);
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.out) : std::filesystem::path(out_dir);

    if (*verify) {
      cfg.experiment = "verify";
      return finish(blpp::run_verify(cfg, workers), cfg, dir);
    }
    if (!cfg.experiment.empty() && cfg.experiment != name)
      throw blpp::ConfigError("config names experiment '" + cfg.experiment + "' but '" + name +
                              "' was requested");
    cfg.experiment = name;
    return finish(blpp::run_experiment(name, cfg, workers), cfg, dir);
  } catch (const blpp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const blpp::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kUsage;
  } catch (const blpp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
