#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "blpp/env.hpp"
#include "blpp/lpp.hpp"
#include "blpp/scaled.hpp"

using namespace blpp;

TEST(Triple, FromTimes) {
  const auto tr = CompatibleTriple::from_times(64, 0.25, 0.75);
  EXPECT_EQ(tr.h1, 16);
  EXPECT_EQ(tr.h2, 48);
  EXPECT_DOUBLE_EQ(tr.t12(), 0.5);
  EXPECT_THROW(CompatibleTriple::from_times(10, 0.25, 1.0), PreconditionError);
  EXPECT_THROW(CompatibleTriple::from_times(10, 0.5, 0.5), PreconditionError);
}

TEST(ScalingMap, RoundTrip) {
  for (long long n : {1LL, 8LL, 100LL, 1000LL}) {
    const auto [v1, v2] = inverse_scaling_map(n, 0.37, 0.6);
    const auto [x, t] = scaling_map(n, v1, v2);
    EXPECT_NEAR(x, 0.37, 1e-12);
    EXPECT_NEAR(t, 0.6, 1e-12);
  }
  EXPECT_THROW(scaling_map(0, 1, 1), PreconditionError);
}

TEST(Weight, MatchesDirectFormula) {
  // n = 8: width 8, step 0.5 at resolution 1/16
  const long long n = 8;
  const GridSpec g = required_grid(n, {-1.0, 1.0}, {0.0, 1.0}, 0.0625);
  const Environment env(4, 9, g);
  const double x = 0.25, y = 0.5;  // unscaled 2 and 12
  const std::size_t a = g.snap(2.0).index, b = g.snap(12.0).index;
  const double m = brute_force_max_energy(env, {a, 0}, {b, 8}, 100'000'000);
  // 2^{-1/2} n^{-1/3} (M - 2n - 2 n^{2/3} (y - x))
  const double expect = (m - 16.0 - 8.0 * (y - x)) / (std::numbers::sqrt2 * 2.0);
  EXPECT_NEAR(scaled_weight(env, CompatibleTriple{n, 0, n}, x, y), expect, 1e-12);
}

TEST(Weight, ContinuumCorrectionIsAConstantShift) {
  const long long n = 27;
  const GridSpec g = required_grid(n, {-1.0, 1.0}, {0.0, 1.0}, 0.05);
  const Environment env(4, 28, g);
  const CompatibleTriple tr{n, 0, n};
  const double d = scaled_weight(env, tr, 0.1, 0.3, WeightOptions{true}) - scaled_weight(env, tr, 0.1, 0.3);
  EXPECT_NEAR(d, weight_factor(n) * 27.0 * kGridMaxBias * std::sqrt(2.0 * g.step), 1e-12);
}

TEST(Weight, UndefinedBelowDomain) {
  const long long n = 8;
  const GridSpec g = required_grid(n, {-2.0, 2.0}, {0.0, 1.0}, 0.0625);
  const Environment env(1, 9, g);
  EXPECT_THROW(scaled_weight(env, CompatibleTriple{n, 0, n}, 1.0, -1.0), PreconditionError);
  EXPECT_THROW(scaled_weight(env, CompatibleTriple{n, 0, 9}, 0.0, 0.0), CoverageError);
}

TEST(Profile, ForwardAndBackwardMatchPointwise) {
  const long long n = 64;
  const CompatibleTriple tr{n, 0, n};
  const GridSpec g = required_grid(n, {-1.0, 1.0}, {0.0, 1.0}, 0x1p-6);
  const Environment env(12, tr.lines_needed(), g);
  const WeightProfile f = forward_profile(env, tr, -0.25, {-0.5, 0.5});
  for (std::size_t i = 0; i < f.size(); i += 9)
    EXPECT_EQ(f.weights[i], scaled_weight(env, tr, -0.25, f.ys[i]));
  const WeightProfile b = backward_profile(env, tr, 0.3, {-0.5, 0.5});
  for (std::size_t i = 0; i < b.size(); i += 9)
    EXPECT_NEAR(b.weights[i], scaled_weight(env, tr, b.ys[i], 0.3), 1e-12);
}

TEST(Profile, NormalizeRoundTrip) {
  const long long n = 64;
  const CompatibleTriple tr{n, 16, 48};
  const GridSpec g = required_grid(n, {-1.0, 1.0}, {0.25, 0.75}, 0x1p-5);
  const Environment env(3, tr.lines_needed(), g);
  const WeightProfile p = forward_profile(env, tr, 0.0, {-0.5, 0.5});
  const WeightProfile q = denormalized_profile(normalized_profile(p));
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(q.ys[i], p.ys[i], 1e-12);
    EXPECT_NEAR(q.weights[i], p.weights[i], 1e-12);
  }
  const auto view = parabolic_view(p);
  EXPECT_NEAR(view[0], p.weights[0] + p.ys[0] * p.ys[0] / std::numbers::sqrt2, 1e-15);
}

TEST(Identities, ScalingPrinciple) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CompatibleTriple tr{64, 16, 48};
    const GridSpec g = required_grid(tr.n, {-1.5, 1.5}, {tr.t1(), tr.t2()}, 0x1p-6);
    const Environment env(seed, tr.lines_needed(), g);
    EXPECT_LE(verify_scaling_principle(env, tr, -0.2, 0.4), 1e-9);
  }
}

TEST(Identities, ScalingPrincipleHandOracle) {
  // same unscaled endpoints; weights related through t12^{1/3}
  const CompatibleTriple tr{32, 0, 64};
  const GridSpec g = required_grid(tr.n, {-1.5, 1.5}, {0.0, 2.0}, 0x1p-6);
  const Environment env(5, tr.lines_needed(), g);
  const CompatibleTriple unit{64, 0, 64};
  const double s = std::pow(2.0, -2.0 / 3.0);
  const double lhs = scaled_weight(env, tr, 0.1, 0.2);
  const double rhs = scaled_weight(env, unit, 0.1 * s, 0.2 * s);
  EXPECT_NEAR(lhs, std::cbrt(2.0) * rhs, 1e-9);
}

TEST(Identities, Superadditivity) {
  const CompatibleTriple tr{32, 0, 32};
  const GridSpec g = required_grid(tr.n, {-1.5, 1.5}, {0.0, 1.0}, 0x1p-5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Environment env(seed, tr.lines_needed(), g);
    EXPECT_GE(verify_superadditivity(env, tr, -0.3, 0.4, 0.05, 16), -1e-9);
  }
  const Environment env(1, tr.lines_needed(), g);
  EXPECT_THROW(verify_superadditivity(env, tr, 0.0, 0.1, 0.0, 0), PreconditionError);
}
