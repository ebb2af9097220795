#pragma once

// Estimators and reference samplers: tail curves with Wilson intervals,
// decay-exponent fits, the modulus statistic, two-sample KS distance and
// the GUE top eigenvalue.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "blpp/error.hpp"
#include "blpp/rng.hpp"

namespace blpp::stats {

inline constexpr double kWilsonZ = 1.959963984540054;

struct Proportion {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline Proportion wilson(std::uint64_t k, std::uint64_t n, double z = kWilsonZ) {
  if (n == 0) throw InputError("wilson: empty sample");
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(k) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {p, std::max(0.0, std::min(center - half, p)), std::min(1.0, std::max(center + half, p))};
}

/// P(X >= level) at each level.
struct TailCurve {
  std::vector<double> levels;
  std::vector<std::uint64_t> exceed_counts;
  std::uint64_t total = 0;
  std::vector<double> probabilities;

  /// A curve with known probabilities; counts are rounded from them.
  static TailCurve exact(std::vector<double> levels, std::vector<double> probabilities,
                         std::uint64_t total) {
    if (levels.size() != probabilities.size()) throw InputError("tail curve: size mismatch");
    TailCurve c;
    c.levels = std::move(levels);
    c.probabilities = std::move(probabilities);
    c.total = total;
    for (double p : c.probabilities)
      c.exceed_counts.push_back(static_cast<std::uint64_t>(std::llround(p * static_cast<double>(total))));
    return c;
  }

  std::size_t size() const { return levels.size(); }
  Proportion interval(std::size_t i) const { return wilson(exceed_counts[i], total); }
};

inline TailCurve estimate_tail(std::vector<double> samples, const std::vector<double>& levels) {
  if (samples.empty()) throw InputError("estimate_tail: no samples");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw PreconditionError("estimate_tail: levels must be sorted");
  std::sort(samples.begin(), samples.end());
  TailCurve c;
  c.levels = levels;
  c.total = samples.size();
  for (double s : levels) {
    const auto first = std::lower_bound(samples.begin(), samples.end(), s);
    const auto k = static_cast<std::uint64_t>(samples.end() - first);
    c.exceed_counts.push_back(k);
    c.probabilities.push_back(static_cast<double>(k) / static_cast<double>(c.total));
  }
  return c;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

inline ExponentFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  if (m < 3 || ys.size() != m) throw EstimationError("need at least three usable points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("fit abscissae are all equal");
  ExponentFit f;
  f.points = m;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    sse += e * e;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  f.slope_stderr = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return f;
}

struct FitOptions {
  bool drop_zero = true;
  /// Keep only levels with 5/N <= p <= 1/2.
  bool reliable_band = true;
};

/// Slope of log(-log p) against log(level): the beta in p ~ exp(-a s^beta).
inline ExponentFit fit_exponent(const TailCurve& curve, FitOptions opt = {}) {
  std::vector<double> xs, ys;
  const double floor_p = 5.0 / static_cast<double>(curve.total);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double s = curve.levels[i];
    const double p = curve.probabilities[i];
    if (!(s > 0.0)) continue;
    if (p == 0.0) {
      if (!opt.drop_zero) throw EstimationError("zero exceedance at level " + std::to_string(s));
      continue;
    }
    if (!(p < 1.0)) continue;
    if (opt.reliable_band && (p < floor_p || p > 0.5)) continue;
    xs.push_back(std::log(s));
    ys.push_back(std::log(-std::log(p)));
  }
  if (xs.size() < 3)
    throw EstimationError("only " + std::to_string(xs.size()) + " usable tail levels");
  return linear_fit(xs, ys);
}

inline ExponentFit fit_exponent(const TailCurve& curve, bool drop_zero) {
  return fit_exponent(curve, FitOptions{drop_zero, true});
}

/// Slope of log(value) against log(eps).
inline ExponentFit holder_fit(const std::vector<std::pair<double, double>>& medians) {
  std::vector<double> xs, ys;
  for (const auto& [eps, v] : medians) {
    if (!(eps > 0.0) || !(v > 0.0)) throw EstimationError("holder_fit: values must be positive");
    xs.push_back(std::log(eps));
    ys.push_back(std::log(v));
  }
  return linear_fit(xs, ys);
}

inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InputError("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw InputError("mean: empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw InputError("variance: need two samples");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// ---------------------------------------------------------------------------
// Modulus statistic

inline double modulus_ratio(double gap, double diff) {
  return std::abs(diff) / (std::sqrt(gap) * std::pow(std::log(1.0 / gap), 2.0 / 3.0));
}

namespace detail {

inline std::pair<std::size_t, std::size_t> unit_span(const std::vector<double>& ys) {
  if (ys.size() < 2 || !std::is_sorted(ys.begin(), ys.end()))
    throw PreconditionError("modulus: profile must be sorted with at least two points");
  constexpr double slack = 1e-9;
  if (ys.front() > -1.0 + slack || ys.back() < 1.0 - slack)
    throw CoverageError("modulus: profile must cover [-1, 1]");
  const auto lo = static_cast<std::size_t>(
      std::lower_bound(ys.begin(), ys.end(), -1.0 - slack) - ys.begin());
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(ys.begin(), ys.end(), 1.0 + slack) - ys.begin()) - 1;
  return {lo, hi};
}

inline void check_cutoff(const std::vector<double>& ys, std::size_t lo, std::size_t hi,
                         double cutoff) {
  double res = 0.0;
  for (std::size_t i = lo; i < hi; ++i) res = std::max(res, ys[i + 1] - ys[i]);
  if (!(cutoff >= 2.0 * res * (1.0 - 1e-9)))
    throw PreconditionError("modulus: cutoff must be at least twice the grid resolution");
  if (!(cutoff < std::exp(-1.0))) throw PreconditionError("modulus: cutoff must be below 1/e");
}

}  // namespace detail

/// Exact supremum over every grid pair y < z in [-1, 1], cutoff < z - y <= 1/e.
inline double modulus_full_scan(const std::vector<double>& ys, const std::vector<double>& ws,
                                double cutoff) {
  const auto [lo, hi] = detail::unit_span(ys);
  detail::check_cutoff(ys, lo, hi, cutoff);
  const double top = std::exp(-1.0);
  double best = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    for (std::size_t j = i + 1; j <= hi; ++j) {
      const double gap = ys[j] - ys[i];
      if (gap <= cutoff) continue;
      if (gap > top) break;
      best = std::max(best, modulus_ratio(gap, ws[j] - ws[i]));
    }
  }
  return best;
}

/// Pairs at dyadic separations 2^{-k} (cutoff < 2^{-k} <= 1/e) anchored at
/// every grid point.
inline double modulus_dyadic(const std::vector<double>& ys, const std::vector<double>& ws,
                             double cutoff) {
  const auto [lo, hi] = detail::unit_span(ys);
  detail::check_cutoff(ys, lo, hi, cutoff);
  const double top = std::exp(-1.0);
  double best = 0.0;
  for (int k = 1;; ++k) {
    const double target = std::ldexp(1.0, -k);
    if (target > top) continue;
    if (!(target > cutoff)) break;
    std::size_t j = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
      j = std::max(j, i + 1);
      // nearest grid point to ys[i] + target
      while (j < hi && ys[j + 1] - ys[i] <= target) ++j;
      std::size_t pick = j;
      if (j < hi && std::abs(ys[j + 1] - ys[i] - target) < std::abs(ys[j] - ys[i] - target))
        pick = j + 1;
      if (pick > hi) break;
      const double gap = ys[pick] - ys[i];
      if (gap <= cutoff || gap > top) continue;
      if (std::abs(gap - target) > 0.5 * target) break;
      best = std::max(best, modulus_ratio(gap, ws[pick] - ws[i]));
    }
  }
  return best;
}

inline constexpr std::size_t kFullScanLimit = 4096;

/// S_n: exact for grids of at most 4096 points on [-1, 1], dyadic otherwise.
inline double modulus_statistic(const std::vector<double>& ys, const std::vector<double>& ws,
                                double cutoff) {
  const auto [lo, hi] = detail::unit_span(ys);
  if (hi - lo + 1 <= kFullScanLimit) return modulus_full_scan(ys, ws, cutoff);
  return modulus_dyadic(ys, ws, cutoff);
}

// ---------------------------------------------------------------------------
// GUE

/// Largest eigenvalue of a Hermitian matrix (row-major, n x n) by cyclic
/// complex Jacobi rotations.
inline double hermitian_top_eigenvalue(std::vector<std::complex<double>> a, std::size_t n,
                                       double tol = 1e-10, int max_sweeps = 100) {
  using C = std::complex<double>;
  auto at = [&](std::size_t i, std::size_t j) -> C& { return a[i * n + j]; };
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(at(i, j));
    return std::sqrt(s);
  };
  int sweep = 0;
  while (off_norm() >= tol) {
    if (sweep++ >= max_sweeps) throw NumericError("Jacobi did not converge in 100 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const C apq = at(p, q);
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const C phase = apq / r;  // e^{i phi}
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
        const C jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const C akp = at(k, p), akq = at(k, q);
          at(k, p) = akp * jpp + akq * jqp;
          at(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const C apk = at(p, k), aqk = at(q, k);
          at(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          at(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        at(p, q) = at(q, p) = 0.0;
        at(p, p) = at(p, p).real();
        at(q, q) = at(q, q).real();
      }
    }
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, at(i, i).real());
  return top;
}

/// Diagonal N(0, 1); off-diagonal real and imaginary parts N(0, 1/2).
inline std::vector<std::complex<double>> sample_gue(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("GUE size must be >= 1");
  const rng::NormalStream z(seed);
  std::vector<std::complex<double>> a(n * n);
  std::uint64_t next = 0;
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = z[next++];
  const double h = std::sqrt(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double re = h * z[next++];
      const double im = h * z[next++];
      a[i * n + j] = {re, im};
      a[j * n + i] = {re, -im};
    }
  }
  return a;
}

inline double sample_gue_top_eigenvalue(std::size_t n, std::uint64_t seed) {
  return hermitian_top_eigenvalue(sample_gue(n, seed), n);
}

/// Top particle at time t of Dyson Brownian motion with n_particles particles.
inline double dyson_top_oracle(std::size_t n_particles, double t, std::uint64_t seed) {
  if (!(t > 0.0)) throw PreconditionError("dyson_top_oracle: t must be positive");
  return std::sqrt(t) * sample_gue_top_eigenvalue(n_particles, seed);
}

// ---------------------------------------------------------------------------
// Two-point tail

/// One sample: the normalized increment |A(x + eps) - A(x)| / eps^{1/2} of
/// the parabolically adjusted profile A, and sup |A| over the +-2 window.
struct TwoPointSample {
  double increment = 0.0;
  double window_sup = 0.0;
};

/// P(increment >= K and window_sup <= K / 4) at each K.
inline TailCurve two_point_tail(const std::vector<TwoPointSample>& samples,
                                const std::vector<double>& k_levels) {
  if (samples.empty()) throw InputError("two_point_tail: no samples");
  if (!std::is_sorted(k_levels.begin(), k_levels.end()))
    throw PreconditionError("two_point_tail: levels must be sorted");
  TailCurve c;
  c.levels = k_levels;
  c.total = samples.size();
  for (double K : k_levels) {
    std::uint64_t k = 0;
    for (const auto& s : samples)
      if (s.increment >= K && s.window_sup <= K / 4.0) ++k;
    c.exceed_counts.push_back(k);
    c.probabilities.push_back(static_cast<double>(k) / static_cast<double>(c.total));
  }
  return c;
}

/// Overlay constants of unknown value; curves drawn with them show shape only.
struct TailConstants {
  double c = 1.0;
  double C = 1.0;
  double c1 = 0.125;

  static TailConstants from(double c, double C) {
    TailConstants t{c, C, std::min(std::pow(2.0, -2.5) * c, 0.125)};
    t.validate();
    return t;
  }

  void validate() const {
    if (!(c > 0.0 && C > 0.0 && c1 > 0.0)) throw ConfigError("constants must be positive");
    if (std::abs(c1 - std::min(std::pow(2.0, -2.5) * c, 0.125)) > 1e-12)
      throw ConfigError("c1 must equal min(2^{-5/2} c, 1/8)");
  }
};

}  // namespace blpp::stats
