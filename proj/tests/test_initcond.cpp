#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "blpp/env.hpp"
#include "blpp/initcond.hpp"
#include "blpp/scaled.hpp"

using namespace blpp;

namespace {

struct Fixture {
  CompatibleTriple tr{27, 0, 27};
  GridSpec grid = required_grid(27, {-3.0, 1.5}, {0.0, 1.0}, 0x1p-4);
  Environment env{17, 28, grid};
};

// sup over rewarded grid starts of Wgt(x -> y) + f(x), by direct evaluation
double oracle(const Fixture& fx, const InitialCondition& f, Interval window, double y) {
  double best = -std::numeric_limits<double>::infinity();
  const auto [lo, hi] = std::pair{snap_scaled(fx.grid, fx.tr.n, 0, window.lo).index,
                                  snap_scaled(fx.grid, fx.tr.n, 0, window.hi).index};
  const std::size_t yj = snap_scaled(fx.grid, fx.tr.n, fx.tr.h2, y).index;
  const auto rewards = f.grid_rewards(fx.grid, fx.tr.n, 0, lo, hi);
  for (std::size_t j = lo; j <= std::min(hi, yj); ++j) {
    if (!std::isfinite(rewards[j - lo])) continue;
    const double x = scaled_coordinate(fx.grid, fx.tr.n, 0, j);
    best = std::max(best, scaled_weight(fx.env, fx.tr, x, y) + rewards[j - lo]);
  }
  return best;
}

}  // namespace

TEST(InitialCondition, KindsAndValues) {
  EXPECT_EQ(InitialCondition::narrow_wedge()(0.0), 0.0);
  EXPECT_FALSE(InitialCondition::narrow_wedge()(0.1).has_value());
  EXPECT_EQ(InitialCondition::flat()(3.0), 0.0);
  const auto t = InitialCondition::table({-1, 0, 1}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(*t(0.5), 0.5);
  EXPECT_FALSE(t(1.5).has_value());
  const auto e = InitialCondition::table({-1, 0, 1}, {0, 1, 0}, true);
  EXPECT_DOUBLE_EQ(*e(2.0), -1.0);
  EXPECT_THROW(InitialCondition::table({0, 0}, {1, 1}), InputError);
  EXPECT_THROW(InitialCondition::flat({0.0, 1.0, 1.0}), ConfigError);
}

TEST(InitialCondition, LoadTable) {
  const auto path = std::filesystem::temp_directory_path() / "blpp_ic_table.txt";
  {
    std::ofstream out(path);
    out << "# x f\n-2 0.5\n0 1   # peak\n\n2 0.5\n";
  }
  const auto f = InitialCondition::load_table(path.string());
  EXPECT_DOUBLE_EQ(*f(1.0), 0.75);
  {
    std::ofstream out(path);
    out << "1 2 3\n";
  }
  EXPECT_THROW(InitialCondition::load_table(path.string()), InputError);
  std::filesystem::remove(path);
  EXPECT_THROW(InitialCondition::load_table("/nonexistent/table"), InputError);
}

TEST(InitialCondition, PsiChecks) {
  const auto steep = InitialCondition::expression([](double x) -> std::optional<double> { return 5 * x; },
                                                  "steep");
  EXPECT_THROW(steep.check_psi({2.0}, {10.0}), PreconditionError);
  const auto low = InitialCondition::flat({1.0, 1.0, 0.5});
  EXPECT_THROW(low.check_psi({0.0}, {-1.0}), PreconditionError);
}

TEST(Rewarded, NarrowWedgeEqualsPointWeight) {
  const Fixture fx;
  const auto p = f_rewarded_profile(fx.env, fx.tr, InitialCondition::narrow_wedge(), {-3, 1.5}, {0.0, 1.0});
  for (std::size_t i = 0; i < p.profile.size(); ++i) {
    EXPECT_EQ(p.profile.weights[i], scaled_weight(fx.env, fx.tr, 0.0, p.profile.ys[i]));
    EXPECT_EQ(p.argmax_x[i], 0.0);
  }
}

TEST(Rewarded, MatchesDirectSupremum) {
  const Fixture fx;
  const auto f = InitialCondition::expression(
      [](double x) -> std::optional<double> { return -0.3 * x * x + 0.2 * x; }, "quadratic");
  const Interval w{-3.0, 1.0};
  const auto p = f_rewarded_profile(fx.env, fx.tr, f, w, {-1.0, 1.0});
  for (std::size_t i = 0; i < p.profile.size(); i += 3)
    EXPECT_NEAR(p.profile.weights[i], oracle(fx, f, w, p.profile.ys[i]), 1e-12);
}

TEST(Rewarded, FlatMatchesDirectSupremumAndArgmax) {
  const Fixture fx;
  const auto f = InitialCondition::flat();
  const Interval w{-3.0, 1.5};
  const RewardedWeight rw = f_rewarded_weight(fx.env, fx.tr, f, 0.5, w);
  EXPECT_NEAR(rw.weight, oracle(fx, f, w, 0.5), 1e-12);
  EXPECT_NEAR(scaled_weight(fx.env, fx.tr, rw.argmax_x, 0.5), rw.weight, 1e-12);
}

TEST(Rewarded, MonotoneAndShiftCovariant) {
  const Fixture fx;
  const auto f = InitialCondition::table({-3, 0, 1.5}, {-1, 0.5, 0});
  const auto g = InitialCondition::table({-3, 0, 1.5}, {-0.5, 0.7, 0.1});
  const Interval w{-3.0, 1.5};
  const auto pf = f_rewarded_profile(fx.env, fx.tr, f, w, {-1.0, 1.0});
  const auto pg = f_rewarded_profile(fx.env, fx.tr, g, w, {-1.0, 1.0});
  const auto ps = f_rewarded_profile(fx.env, fx.tr, f.shifted(0.37), w, {-1.0, 1.0});
  for (std::size_t i = 0; i < pf.profile.size(); ++i) {
    EXPECT_LE(pf.profile.weights[i], pg.profile.weights[i]);
    EXPECT_NEAR(ps.profile.weights[i], pf.profile.weights[i] + 0.37, 1e-12);
    EXPECT_EQ(ps.argmax_x[i], pf.argmax_x[i]);
  }
}

TEST(Rewarded, Errors) {
  const Fixture fx;
  const auto none = InitialCondition::table({1.0, 1.2}, {0, 0});
  EXPECT_THROW(f_rewarded_profile(fx.env, fx.tr, none, {-3, -1}, {0.0, 0.5}), NoRewardError);
  EXPECT_THROW(f_rewarded_profile(fx.env, fx.tr, InitialCondition::narrow_wedge(), {-3, 1.5}, {-2.0, 0.5}),
               PreconditionError);
}

TEST(Events, RegflucFromStarts) {
  EXPECT_TRUE(regfluc_from_starts(-1.5, 2.0, 1.0).outcome);
  EXPECT_FALSE(regfluc_from_starts(-2.5, 0.0, 1.0).outcome);
  EXPECT_FALSE(regfluc_from_starts(0.0, 2.1, 1.0).outcome);
  EXPECT_TRUE(regfluc_from_starts(-5.0, 5.0, 4.0).outcome);
}

TEST(Events, RegflucWindowMustReach) {
  const Fixture fx;
  EXPECT_THROW(regfluc(fx.env, fx.tr, InitialCondition::flat(), 1.0, Interval{-3.0, 3.0}), CoverageError);
}

TEST(Events, EquictyMatchesQuadraticScan) {
  WeightProfile p;
  for (int i = -20; i <= 20; ++i) {
    p.ys.push_back(i / 20.0);
    p.weights.push_back(std::sin(3.0 * i) + 0.1 * i);
  }
  p.snap_errors.assign(p.ys.size(), 0.0);
  const double eps = 0.2;
  double naive = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a; b < p.size(); ++b)
      if (p.ys[b] - p.ys[a] <= eps + 1e-12) naive = std::max(naive, std::abs(p.weights[b] - p.weights[a]));
  const EventReport r = equicty(p, 10.0, eps);
  EXPECT_DOUBLE_EQ(r.value, naive);
  EXPECT_TRUE(r.outcome);
  EXPECT_FALSE(equicty(p, naive, eps).outcome);
}

TEST(Events, Unifbd) {
  WeightProfile p;
  p.ys = {-1, 0, 1};
  p.weights = {0.5, -2.0, 1.0};
  EXPECT_DOUBLE_EQ(unifbd(p, 3.0).value, 2.0);
  EXPECT_FALSE(unifbd(p, 1.5).outcome);
}

TEST(Events, LocalAndPolyRegularityMatchDirect) {
  const Fixture fx;
  const ScanOptions opt{5, {}};
  const EventReport loc = loc_wgt_reg(fx.env, fx.tr, 0.0, 0.25, 0.25, 100.0, opt);
  double hi = -1e300, lo = 1e300;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double u = 0.0625 * a, v = 0.25 + 0.0625 * b;
      const double w = scaled_weight(fx.env, fx.tr, u, v) + parabola(v - u);
      hi = std::max(hi, w);
      lo = std::min(lo, w);
    }
  EXPECT_NEAR(loc.value, hi - lo, 1e-12);
  EXPECT_TRUE(loc.outcome);
  const EventReport poly = poly_wgt_reg(fx.env, fx.tr, {0.0, 0.25}, {0.25, 0.5}, 0.0, opt);
  EXPECT_GT(poly.value, 0.0);
  EXPECT_FALSE(poly.outcome);
}

TEST(Rewire, CrossingPairsKeepTotalWeight) {
  // f matched to line 0 makes every start left of the first jump optimal
  const Fixture fx;
  const auto b0 = fx.env.line_values(0);
  const double c = weight_factor(fx.tr.n);
  const double x0 = snap_scaled(fx.grid, fx.tr.n, 0, 0.0).position;
  std::vector<double> xs, fs;
  for (std::size_t j = 0; j < fx.grid.count; ++j) {
    xs.push_back(scaled_coordinate(fx.grid, fx.tr.n, 0, j));
    fs.push_back(c * (b0[j] - (fx.grid.point(j) - x0)));
  }
  const auto f = InitialCondition::table(xs, fs, false, {1e6, 2.0, 1e6});
  const Interval w{-3.0, 1.5};
  const std::size_t wlo = snap_scaled(fx.grid, fx.tr.n, 0, -3.0).index;
  const std::size_t y1 = snap_scaled(fx.grid, fx.tr.n, fx.tr.h2, 0.5).index;
  const std::size_t y2 = y1 + 3;
  const std::size_t z1 = geodesic(fx.env, {wlo, 0}, {y1, 27}).jumps.front();
  ASSERT_GT(z1, wlo);
  const double u1 = scaled_coordinate(fx.grid, fx.tr.n, 0, wlo);
  const double u2 = scaled_coordinate(fx.grid, fx.tr.n, 0, z1);
  const double v1 = scaled_coordinate(fx.grid, fx.tr.n, fx.tr.h2, y1);
  const double v2 = scaled_coordinate(fx.grid, fx.tr.n, fx.tr.h2, y2);
  const RewireCheck r = verify_crossing_rewire(fx.env, fx.tr, {u1, u2}, {v1, v2}, f, w);
  ASSERT_TRUE(r.applicable);
  EXPECT_LE(r.residual, 1e-9);
}
