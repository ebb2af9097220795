// Acceptance runner: one PASS/FAIL line per criterion. Sample counts, sizes
// and tolerances are pinned here; the experiment and verify code holds the
// per-criterion thresholds.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "blpp/experiments.hpp"
#include "blpp/verify.hpp"

namespace {

using blpp::Check;
using blpp::Criterion;
using blpp::ExperimentConfig;
using blpp::ExperimentResult;

constexpr std::uint64_t kSeed = 20240601;

ExperimentConfig base(const std::string& name) {
  ExperimentConfig c;
  c.experiment = name;
  c.master_seed = kSeed;
  c.plots = false;
  return c;
}

Criterion pick(const ExperimentResult& r, int id) {
  for (const auto& c : r.criteria)
    if (c.id == id) return c;
  return {id, r.name, false, "criterion not reported"};
}

Criterion verify_one(int id, Check ch, unsigned threads) {
  ExperimentConfig c = base("verify");  // default counts: 200, 1000, 1000, 500, 500
  return pick(blpp::run_verify(c, threads, {ch}), id);
}

Criterion growth(unsigned threads) {
  ExperimentConfig c = base("growth");
  c.n = {100};
  c.samples = 500;
  c.resolution = 0x1p-10;
  return pick(blpp::run_growth(c, threads), 6);
}

Criterion gue(unsigned threads) {
  ExperimentConfig c = base("gue-oracle");
  c.n = {10};
  c.samples = 2000;
  c.resolution = 0x1p-12;
  return pick(blpp::run_gue_oracle(c, threads), 7);
}

Criterion curvature(unsigned threads) {
  ExperimentConfig c = base("curvature");
  c.n = {100};
  c.samples = 5000;
  return pick(blpp::run_curvature(c, threads), 8);
}

Criterion weight_diff(unsigned threads) {
  ExperimentConfig c = base("weight-diff");
  c.n = {200};
  c.samples = 1000;
  c.epsilons = {0x1p-3, 0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7};
  return pick(blpp::run_weight_diff(c, threads), 9);
}

Criterion modulus(unsigned threads) {
  ExperimentConfig c = base("modulus");
  c.n = {100, 200};
  c.samples = 500;
  c.cutoff = 0x1p-8;
  return pick(blpp::run_modulus(c, threads), 10);
}

Criterion reg_tails(unsigned threads) {
  ExperimentConfig c = base("reg-tails");
  c.n = {100};
  c.samples = 5000;
  c.z = {0.0, 1.0};
  return pick(blpp::run_reg_tails(c, threads), 11);
}

Criterion two_point(unsigned threads) {
  ExperimentConfig c = base("two-point");
  c.n = {100};
  c.samples = 5000;
  c.epsilons = {0x1p-4};
  return pick(blpp::run_two_point(c, threads), 12);
}

Criterion regfluc(unsigned threads) {
  ExperimentConfig c = base("regfluc");
  c.n = {100};
  c.samples = 2000;
  c.R = {1, 2, 3, 4};
  c.initial.kind = "flat";
  c.initial_set = true;
  return pick(blpp::run_regfluc(c, threads), 13);
}

std::vector<std::string> csv_bytes(const ExperimentResult& r) {
  std::vector<std::string> out;
  for (const auto& t : r.tables) out.push_back(blpp::io::to_csv(t));
  return out;
}

Criterion determinism(unsigned) {
  std::string detail;
  bool pass = true;
  auto compare = [&](const std::string& name, ExperimentConfig c) {
    const auto a = csv_bytes(blpp::run_experiment(name, c, 1));
    const auto b = csv_bytes(blpp::run_experiment(name, c, 8));
    const bool same = a == b;
    pass = pass && same;
    detail += (detail.empty() ? "" : "; ") + name + " " + std::to_string(a.size()) + " tables " +
              (same ? "identical" : "differ") + " at 1 vs 8 threads";
  };
  ExperimentConfig g = base("growth");
  g.n = {50};
  g.samples = 40;
  compare("growth", g);
  ExperimentConfig m = base("modulus");
  m.n = {30, 40};
  m.samples = 24;
  compare("modulus", m);
  const auto v1 = csv_bytes(blpp::run_verify(base("verify"), 1, {Check::enumeration}));
  const auto v8 = csv_bytes(blpp::run_verify(base("verify"), 8, {Check::enumeration}));
  pass = pass && v1 == v8;
  detail += std::string("; verify ") + (v1 == v8 ? "identical" : "differ");
  return {14, "CSV bytes independent of thread count", pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> chosen;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--criterion", chosen, "criterion ids (default: all)")->check(CLI::Range(1, 14));
  app.add_option("--threads", threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<Criterion(unsigned)>> table{
      {1, [](unsigned t) { return verify_one(1, Check::enumeration, t); }},
      {2, [](unsigned t) { return verify_one(2, Check::monotonicity, t); }},
      {3, [](unsigned t) { return verify_one(3, Check::superadditivity, t); }},
      {4, [](unsigned t) { return verify_one(4, Check::scaling, t); }},
      {5, [](unsigned t) { return verify_one(5, Check::initial, t); }},
      {6, growth},
      {7, gue},
      {8, curvature},
      {9, weight_diff},
      {10, modulus},
      {11, reg_tails},
      {12, two_point},
      {13, regfluc},
      {14, determinism}};

  std::set<int> ids(chosen.begin(), chosen.end());
  if (ids.empty())
    for (const auto& [id, _] : table) ids.insert(id);

  bool all = true;
  for (int id : ids) {
    Criterion c;
    try {
      c = table.at(id)(blpp::resolve_threads(threads));
    } catch (const std::exception& e) {
      c = {id, "run aborted", false, e.what()};
    }
    all = all && c.pass;
    std::printf("criterion %2d %s: %s (%s)\n", id, c.pass ? "PASS" : "FAIL", c.label.c_str(),
                c.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
