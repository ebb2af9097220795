#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "blpp/rng.hpp"
#include "blpp/stats.hpp"

using namespace blpp;
using namespace blpp::stats;

namespace {

std::vector<double> normals(std::uint64_t key, std::size_t n, double shift = 0.0) {
  const rng::NormalStream z(key);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = z[i] + shift;
  return out;
}

// Largest eigenvalue of a real symmetric matrix: Householder reduction to
// tridiagonal form, then bisection on the Sturm sequence count.
double symmetric_top(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a[i][k] * a[i][k];
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a[k + 1][k] > 0) alpha = -alpha;
    std::vector<double> v(n, 0.0);
    v[k + 1] = a[k + 1][k] - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a[i][k];
    double vv = 0.0;
    for (double x : v) vv += x * x;
    if (vv == 0.0) continue;
    // A <- H A H with H = I - 2 v v^T / v^T v
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p[i] += a[i][j] * v[j];
    for (double& x : p) x *= 2.0 / vv;
    double vp = 0.0;
    for (std::size_t i = 0; i < n; ++i) vp += v[i] * p[i];
    const double kcoef = vp / vv;
    for (std::size_t i = 0; i < n; ++i) p[i] -= kcoef * v[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= v[i] * p[j] + p[i] * v[j];
  }
  std::vector<double> d(n), e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i][i];
  for (std::size_t i = 1; i < n; ++i) e[i] = a[i][i - 1];
  auto count_above = [&](double x) {
    std::size_t neg = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      q = d[i] - x - (i > 0 ? e[i] * e[i] / q : 0.0);
      if (q == 0.0) q = 1e-300;
      if (q < 0) ++neg;
    }
    return n - neg;  // eigenvalues greater than x
  };
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    bound = std::max(bound, std::abs(d[i]) + std::abs(e[i]) + (i + 1 < n ? std::abs(e[i + 1]) : 0.0));
  double lo = -bound, hi = bound;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_above(mid) >= 1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Wilson, KnownValues) {
  const Proportion w = wilson(10, 100);
  EXPECT_NEAR(w.lo, 0.05522, 1e-4);
  EXPECT_NEAR(w.hi, 0.17437, 1e-4);
  EXPECT_EQ(wilson(0, 50).lo, 0.0);
  EXPECT_EQ(wilson(50, 50).hi, 1.0);
  EXPECT_THROW(wilson(0, 0), InputError);
}

TEST(Tail, CountsAtOrAbove) {
  const TailCurve c = estimate_tail({1, 2, 2, 3, 5}, {0, 2, 4, 6});
  EXPECT_EQ(c.exceed_counts, (std::vector<std::uint64_t>{5, 4, 1, 0}));
  EXPECT_DOUBLE_EQ(c.probabilities[1], 0.8);
  EXPECT_THROW(estimate_tail({1.0}, {2, 1}), PreconditionError);
  EXPECT_THROW(estimate_tail({}, {1}), InputError);
}

TEST(Fit, RecoversSyntheticExponents) {
  for (double beta : {1.0, 1.5, 2.0, 3.0}) {
    std::vector<double> levels, probs;
    for (int k = 1; k <= 24; ++k) {
      const double s = 0.25 * k;
      levels.push_back(s);
      probs.push_back(std::exp(-0.7 * std::pow(s, beta)));
    }
    const ExponentFit f = fit_exponent(TailCurve::exact(levels, probs, 1'000'000));
    EXPECT_NEAR(f.slope, beta, 1e-9);
    EXPECT_NEAR(f.intercept, std::log(0.7), 1e-9);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  }
}

TEST(Fit, NeedsThreeLevels) {
  const TailCurve c = TailCurve::exact({1, 2, 3}, {0.3, 0.0, 0.0}, 1000);
  EXPECT_THROW(fit_exponent(c), EstimationError);
  EXPECT_THROW(fit_exponent(c, false), EstimationError);
  EXPECT_THROW(holder_fit({{0.1, 1.0}, {0.2, -1.0}, {0.3, 1.0}}), EstimationError);
}

TEST(Fit, HolderSlope) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 3; k <= 7; ++k) pts.emplace_back(std::ldexp(1.0, -k), 2.0 * std::pow(std::ldexp(1.0, -k), 0.5));
  EXPECT_NEAR(holder_fit(pts).slope, 0.5, 1e-12);
}

TEST(Ks, MatchesBruteForce) {
  const auto a = normals(1, 300), b = normals(2, 200, 0.3);
  double brute = 0.0;
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  for (double x : all) {
    const double fa = std::count_if(a.begin(), a.end(), [&](double v) { return v <= x; }) / 300.0;
    const double fb = std::count_if(b.begin(), b.end(), [&](double v) { return v <= x; }) / 200.0;
    brute = std::max(brute, std::abs(fa - fb));
  }
  EXPECT_NEAR(ks_distance(a, b), brute, 1e-15);
  EXPECT_EQ(ks_distance({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_distance({0, 0}, {1, 1}), 1.0);
}

TEST(Ks, NullDistributionIsSmall) {
  EXPECT_LT(ks_distance(normals(3, 10000), normals(4, 10000)), 0.03);
}

TEST(Summary, QuantilesAndMoments) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_NEAR(variance({1, 2, 3, 4}), 5.0 / 3.0, 1e-15);
}

TEST(Modulus, LinearProfile) {
  // W(y) = y: ratio sqrt(gap) / log(1/gap)^{2/3}, largest at the biggest gap
  // not exceeding 1/e, i.e. 376/1024 on a 2^-10 grid
  std::vector<double> ys, ws;
  for (int i = -1024; i <= 1024; ++i) {
    ys.push_back(i / 1024.0);
    ws.push_back(i / 1024.0);
  }
  const double gap = 376.0 / 1024.0;
  const double expect = std::sqrt(gap) / std::pow(std::log(1.0 / gap), 2.0 / 3.0);
  EXPECT_NEAR(modulus_full_scan(ys, ws, 0x1p-6), expect, 1e-12);
  EXPECT_NEAR(modulus_statistic(ys, ws, 0x1p-6), 0.6052, 1e-4);
}

TEST(Modulus, DyadicWithinFactorOfFullScan) {
  const auto noise = normals(5, 2049);
  std::vector<double> ys, ws;
  double w = 0.0;
  for (int i = 0; i <= 2048; ++i) {
    ys.push_back(-1.0 + i / 1024.0);
    w += noise[static_cast<std::size_t>(i)] / 32.0;
    ws.push_back(w);
  }
  const double full = modulus_full_scan(ys, ws, 0x1p-8);
  const double dy = modulus_dyadic(ys, ws, 0x1p-8);
  EXPECT_LE(dy, full + 1e-12);
  EXPECT_GE(dy, full / 4.0);
}

TEST(Modulus, NonincreasingInCutoffAndPreconditions) {
  const auto noise = normals(6, 513);
  std::vector<double> ys, ws;
  double w = 0.0;
  for (int i = 0; i <= 512; ++i) {
    ys.push_back(-1.0 + i / 256.0);
    w += noise[static_cast<std::size_t>(i)] / 16.0;
    ws.push_back(w);
  }
  double prev = 1e300;
  for (double c : {0x1p-7, 0x1p-6, 0x1p-4, 0x1p-2}) {
    const double s = modulus_statistic(ys, ws, c);
    EXPECT_LE(s, prev);
    prev = s;
  }
  EXPECT_THROW(modulus_statistic(ys, ws, 0x1p-9), PreconditionError);
  EXPECT_THROW(modulus_statistic(ys, ws, 0.5), PreconditionError);
  EXPECT_THROW(modulus_statistic({-0.5, 1.0}, {0, 0}, 0.1), CoverageError);
}

TEST(Gue, JacobiMatchesSturmOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const auto h = sample_gue(n, seed);
    // 2n real embedding [[Re, -Im], [Im, Re]] doubles every eigenvalue
    std::vector<std::vector<double>> r(2 * n, std::vector<double>(2 * n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto z = h[i * n + j];
        r[i][j] = r[i + n][j + n] = z.real();
        r[i][j + n] = -z.imag();
        r[i + n][j] = z.imag();
      }
    EXPECT_NEAR(hermitian_top_eigenvalue(h, n), symmetric_top(r), 1e-9) << n;
  }
}

TEST(Gue, DiagonalAndTwoByTwo) {
  using C = std::complex<double>;
  EXPECT_DOUBLE_EQ(hermitian_top_eigenvalue({C(1), C(0), C(0), C(3)}, 2), 3.0);
  // [[0, i], [-i, 0]] has eigenvalues +-1
  EXPECT_NEAR(hermitian_top_eigenvalue({C(0), C(0, 1), C(0, -1), C(0)}, 2), 1.0, 1e-12);
}

TEST(Gue, EntryVariances) {
  double diag = 0.0, off = 0.0;
  const int reps = 4000;
  for (int s = 0; s < reps; ++s) {
    const auto h = sample_gue(3, rng::derive(77, s));
    diag += std::norm(h[0]);
    off += h[1].real() * h[1].real();
    EXPECT_EQ(h[1], std::conj(h[3]));
  }
  EXPECT_NEAR(diag / reps, 1.0, 0.1);
  EXPECT_NEAR(off / reps, 0.5, 0.05);
}

TEST(Gue, OneParticleIsGaussian) {
  std::vector<double> a;
  for (int s = 0; s < 4000; ++s) a.push_back(dyson_top_oracle(1, 4.0, rng::derive(8, s)));
  EXPECT_NEAR(std::sqrt(variance(a)), 2.0, 0.1);
  EXPECT_THROW(dyson_top_oracle(2, 0.0, 1), PreconditionError);
}

TEST(TwoPoint, JointCounts) {
  const std::vector<TwoPointSample> s{{3.0, 0.5}, {3.0, 2.0}, {1.0, 0.1}};
  const TailCurve c = two_point_tail(s, {2.0, 4.0});
  EXPECT_EQ(c.exceed_counts, (std::vector<std::uint64_t>{1, 0}));
}

TEST(Constants, Validation) {
  EXPECT_NO_THROW(TailConstants::from(1.0, 1.0));
  EXPECT_THROW(TailConstants::from(-1.0, 1.0), ConfigError);
  EXPECT_THROW((TailConstants{1.0, 1.0, 0.3}.validate()), ConfigError);
}
