#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "blpp/experiments.hpp"

using namespace blpp;

namespace {

ExperimentConfig tiny(std::vector<long long> n, std::size_t samples) {
  ExperimentConfig c;
  c.n = std::move(n);
  c.samples = samples;
  c.resolution = 0x1p-6;
  c.cutoff = 0x1p-4;
  c.plots = false;
  return c;
}

std::vector<std::string> csvs(const ExperimentResult& r) {
  std::vector<std::string> out;
  for (const auto& t : r.tables) out.push_back(io::to_csv(t));
  return out;
}

}  // namespace

TEST(Registry, KnowsEveryExperiment) {
  for (const char* name : {"growth", "gue-oracle", "curvature", "weight-diff", "modulus", "reg-tails",
                           "two-point", "regfluc", "limit-stability"})
    EXPECT_EQ(experiments().count(name), 1u) << name;
  EXPECT_THROW(run_experiment("nope", ExperimentConfig{}, 1), ConfigError);
}

TEST(Experiments, ThreadCountDoesNotChangeBytes) {
  const std::vector<std::pair<std::string, ExperimentConfig>> runs{
      {"growth", tiny({27}, 6)},      {"gue-oracle", tiny({4}, 20)},  {"curvature", tiny({27}, 4)},
      {"weight-diff", tiny({27}, 4)}, {"modulus", tiny({27, 64}, 3)}, {"reg-tails", tiny({27}, 6)},
      {"two-point", tiny({27}, 6)},   {"regfluc", tiny({27}, 6)},     {"limit-stability", tiny({27, 64}, 6)}};
  for (const auto& [name, cfg] : runs) {
    ExperimentConfig c = cfg;
    if (name == "weight-diff") c.epsilons = {0.25, 0.125, 0.0625};
    if (name == "curvature") c.points_per_side = 3;
    const auto a = csvs(run_experiment(name, c, 1));
    const auto b = csvs(run_experiment(name, c, 4));
    EXPECT_EQ(a, b) << name;
    EXPECT_FALSE(a.empty()) << name;
  }
}

TEST(Experiments, GueSummaryFields) {
  const ExperimentResult r = run_gue_oracle(tiny({4}, 50), 1);
  EXPECT_TRUE(r.summary["cross_oracle"].contains("ks_distance"));
  EXPECT_TRUE(r.summary["cross_oracle"].contains("pass"));
  EXPECT_EQ(r.criteria.front().id, 7);
}

TEST(Experiments, ModulusPercentilesPerN) {
  ExperimentConfig c = tiny({27, 64}, 4);
  c.initial.kind = "flat";
  c.initial_set = true;
  const ExperimentResult r = run_modulus(c, 1);
  const auto& per_n = r.summary["initial_conditions"]["flat"]["per_n"];
  ASSERT_EQ(per_n.size(), 2u);
  EXPECT_TRUE(per_n[0]["percentiles"].contains("p90"));
}

TEST(Experiments, SeedChangesOutput) {
  ExperimentConfig a = tiny({27}, 4), b = tiny({27}, 4);
  b.master_seed = a.master_seed + 1;
  EXPECT_NE(csvs(run_growth(a, 1)), csvs(run_growth(b, 1)));
}

TEST(Experiments, WriteOutputsDigests) {
  ExperimentConfig c = tiny({27}, 6);
  c.plots = true;
  const auto dir = std::filesystem::temp_directory_path() / "blpp_exp_out";
  std::filesystem::remove_all(dir);
  const auto m = write_outputs(run_reg_tails(c, 1), c, dir);
  bool svg = false;
  for (const auto& f : m["files"]) {
    const std::string p = f["path"];
    EXPECT_EQ(io::sha256_hex(io::read_file(dir / p)), f["sha256"]);
    svg = svg || p.ends_with(".svg");
  }
  EXPECT_TRUE(svg);
  EXPECT_EQ(m["config"]["n"], nlohmann::json({27}));
}

TEST(Experiments, RegflucRejectsShortWindow) {
  ExperimentConfig c = tiny({27}, 2);
  c.window = 4.0;
  c.R = {4.0};
  EXPECT_THROW(run_regfluc(c, 1), ConfigError);
}
