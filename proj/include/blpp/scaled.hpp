#pragma once

// Scaled coordinates. A point (x, t) at scale n sits at unscaled position
// n t + 2 n^{2/3} x on line n t, and
//   Wgt = 2^{-1/2} n^{-1/3} (M1 - 2 n t12 - 2 n^{2/3} (y - x)).
// Endpoints are snapped to the grid first; the snapped positions are used in
// the centering as well, so exact identities survive discretization.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "blpp/env.hpp"
#include "blpp/error.hpp"
#include "blpp/lpp.hpp"

namespace blpp {

/// -zeta(1/2) / sqrt(2 pi): expected gap between the maximum of a Brownian
/// motion sampled with unit spacing and its continuum maximum, per sqrt(step).
inline constexpr double kGridMaxBias = 0.5825971579390106;

/// (n, t1, t2) with n t1 and n t2 integral; stored as the two line indices.
struct CompatibleTriple {
  long long n = 1;
  long long h1 = 0;  // n t1
  long long h2 = 1;  // n t2

  static CompatibleTriple from_times(long long n, double t1, double t2) {
    const auto to_line = [n](double t) {
      const double v = static_cast<double>(n) * t;
      const double r = std::round(v);
      if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)))
        throw PreconditionError("n t = " + std::to_string(v) + " is not an integer");
      return static_cast<long long>(r);
    };
    CompatibleTriple out{n, to_line(t1), to_line(t2)};
    out.validate();
    return out;
  }

  void validate() const {
    if (n < 1) throw PreconditionError("triple: n must be >= 1");
    if (h1 >= h2) throw PreconditionError("triple: need t1 < t2");
    if (h1 < 0) throw PreconditionError("triple: heights must be nonnegative line indices");
  }

  double t1() const { return static_cast<double>(h1) / static_cast<double>(n); }
  double t2() const { return static_cast<double>(h2) / static_cast<double>(n); }
  double t12() const { return static_cast<double>(h2 - h1) / static_cast<double>(n); }
  long long span() const { return h2 - h1; }
  std::size_t lines_needed() const { return static_cast<std::size_t>(h2) + 1; }

  friend bool operator==(const CompatibleTriple&, const CompatibleTriple&) = default;
};

struct ScaledPoint {
  double x = 0.0;
  double t = 0.0;
};

/// R_n(v1, v2) = (2^{-1} n^{-2/3} (v1 - v2), v2 / n).
inline std::pair<double, double> scaling_map(long long n, double v1, double v2) {
  if (n < 1) throw PreconditionError("scaling_map: n must be >= 1");
  const double nd = static_cast<double>(n);
  return {0.5 * (v1 - v2) / pow_two_thirds(nd), v2 / nd};
}

inline std::pair<double, double> inverse_scaling_map(long long n, double x, double t) {
  if (n < 1) throw PreconditionError("inverse_scaling_map: n must be >= 1");
  const double nd = static_cast<double>(n);
  const double v2 = nd * t;
  return {v2 + 2.0 * pow_two_thirds(nd) * x, v2};
}

inline double weight_factor(long long n) {
  return 1.0 / (std::numbers::sqrt2 * std::cbrt(static_cast<double>(n)));
}

inline double parabola(double z) { return z * z / std::numbers::sqrt2; }

struct WeightOptions {
  /// Add the expected grid-maximum deficit span * kGridMaxBias * sqrt(2 step)
  /// to M1 before centering.
  bool continuum_correction = false;
};

inline double continuum_offset(long long span, double step) {
  return static_cast<double>(span) * kGridMaxBias * std::sqrt(2.0 * step);
}

/// Snapped unscaled endpoint of scaled x at line h.
struct ScaledSnap {
  std::size_t index = 0;
  double position = 0.0;  // grid point, unscaled
  double error = 0.0;     // scaled units
};

inline ScaledSnap snap_scaled(const GridSpec& grid, long long n, long long h, double x) {
  const double width = 2.0 * pow_two_thirds(static_cast<double>(n));
  const double u = static_cast<double>(h) + width * x;
  const Snap s = grid.snap(u);
  return {s.index, grid.point(s.index), s.error / width};
}

/// Scaled coordinate of grid index j at line h.
inline double scaled_coordinate(const GridSpec& grid, long long n, long long h, std::size_t j) {
  const double width = 2.0 * pow_two_thirds(static_cast<double>(n));
  return (grid.point(j) - static_cast<double>(h)) / width;
}

namespace detail {

inline double center(const CompatibleTriple& tr, double m, double xg, double yg, double step,
                     const WeightOptions& opt) {
  const double corr = opt.continuum_correction ? continuum_offset(tr.span(), step) : 0.0;
  return weight_factor(tr.n) *
         ((m + corr - static_cast<double>(tr.span())) - (yg - xg));
}

inline void check_lines(std::size_t lines, const CompatibleTriple& tr) {
  tr.validate();
  if (tr.lines_needed() > lines)
    throw CoverageError("environment has " + std::to_string(lines) + " lines, need " +
                        std::to_string(tr.lines_needed()));
}

}  // namespace detail

struct WeightResult {
  double value = 0.0;
  double x_snap_error = 0.0;
  double y_snap_error = 0.0;
};

template <LineSource S>
WeightResult evaluate_weight(const S& env, const CompatibleTriple& tr, double x, double y,
                             const WeightOptions& opt = {}, DpProbe* probe = nullptr) {
  detail::check_lines(env.lines(), tr);
  const GridSpec& g = env.grid();
  const ScaledSnap a = snap_scaled(g, tr.n, tr.h1, x);
  const ScaledSnap b = snap_scaled(g, tr.n, tr.h2, y);
  if (b.index < a.index)
    throw PreconditionError("weight undefined: y below x - n^{1/3} t12 / 2 after snapping");
  const double m = max_energy(env, {a.index, static_cast<std::size_t>(tr.h1)},
                              {b.index, static_cast<std::size_t>(tr.h2)}, probe);
  return {detail::center(tr, m, a.position, b.position, g.step, opt), a.error, b.error};
}

template <LineSource S>
double scaled_weight(const S& env, const CompatibleTriple& tr, double x, double y,
                     const WeightOptions& opt = {}) {
  return evaluate_weight(env, tr, x, y, opt).value;
}

template <LineSource S>
double scaled_weight(const S& env, const CompatibleTriple& tr, ScaledPoint from, ScaledPoint to,
                     const WeightOptions& opt = {}) {
  if (std::abs(from.t - tr.t1()) > 1e-12 || std::abs(to.t - tr.t2()) > 1e-12)
    throw PreconditionError("endpoint heights do not match the triple");
  return scaled_weight(env, tr, from.x, to.x, opt);
}

enum class Direction { forward, backward, rewarded };

/// Sampled weight function of one coordinate with the other end fixed at
/// `base`. For rewarded profiles the base is the reference point 0.
struct WeightProfile {
  CompatibleTriple triple;
  double base = 0.0;
  Direction direction = Direction::forward;
  bool normalized = false;
  std::vector<double> ys;
  std::vector<double> weights;
  std::vector<double> snap_errors;

  std::size_t size() const { return ys.size(); }
};

namespace detail {

/// Grid indices whose coordinate at line h falls in the scaled range.
inline std::pair<std::size_t, std::size_t> index_range(const GridSpec& g, long long n, long long h,
                                                       Interval range) {
  if (range.lo > range.hi) throw PreconditionError("empty coordinate range");
  const ScaledSnap lo = snap_scaled(g, n, h, range.lo);
  const ScaledSnap hi = snap_scaled(g, n, h, range.hi);
  return {lo.index, hi.index};
}

}  // namespace detail

/// y -> Wgt((x, t1) -> (y, t2)) at every grid y in y_range, from one sweep.
template <LineSource S>
WeightProfile forward_profile(const S& env, const CompatibleTriple& tr, double x, Interval y_range,
                              const WeightOptions& opt = {}, DpProbe* probe = nullptr) {
  detail::check_lines(env.lines(), tr);
  const GridSpec& g = env.grid();
  const ScaledSnap a = snap_scaled(g, tr.n, tr.h1, x);
  auto [lo, hi] = detail::index_range(g, tr.n, tr.h2, y_range);
  if (hi < a.index) throw PreconditionError("forward profile: every y is below the domain");
  lo = std::max(lo, a.index);
  const EnergyProfile e =
      max_energy_profile(env, {a.index, static_cast<std::size_t>(tr.h1)},
                         static_cast<std::size_t>(tr.h2), hi, probe);
  WeightProfile out{tr, x, Direction::forward, false, {}, {}, {}};
  for (std::size_t j = lo; j <= hi; ++j) {
    out.ys.push_back(scaled_coordinate(g, tr.n, tr.h2, j));
    out.weights.push_back(
        detail::center(tr, e.values[j - e.first_index], a.position, g.point(j), g.step, opt));
    out.snap_errors.push_back(0.0);
  }
  return out;
}

/// x -> Wgt((x, t1) -> (y, t2)) at every grid x in x_range, computed as a
/// forward sweep on the point-reflected environment.
template <LineSource S>
WeightProfile backward_profile(const S& env, const CompatibleTriple& tr, double y,
                               Interval x_range, const WeightOptions& opt = {}) {
  detail::check_lines(env.lines(), tr);
  const GridSpec& g = env.grid();
  const ScaledSnap b = snap_scaled(g, tr.n, tr.h2, y);
  auto [lo, hi] = detail::index_range(g, tr.n, tr.h1, x_range);
  if (lo > b.index) throw PreconditionError("backward profile: every x is above the domain");
  hi = std::min(hi, b.index);

  const Reflected<S> r(env);
  const std::size_t top = env.lines() - 1;
  const LinePoint start{r.mirror_index(b.index), top - static_cast<std::size_t>(tr.h2)};
  const EnergyProfile e = max_energy_profile(r, start, top - static_cast<std::size_t>(tr.h1),
                                             r.mirror_index(lo));
  WeightProfile out{tr, y, Direction::backward, false, {}, {}, {}};
  for (std::size_t j = lo; j <= hi; ++j) {
    const double m = e.values[r.mirror_index(j) - e.first_index];
    out.ys.push_back(scaled_coordinate(g, tr.n, tr.h1, j));
    out.weights.push_back(detail::center(tr, m, g.point(j), b.position, g.step, opt));
    out.snap_errors.push_back(0.0);
  }
  return out;
}

/// z = (y - base) t12^{-2/3}, value w t12^{-1/3}.
inline WeightProfile normalized_profile(const WeightProfile& p) {
  if (p.normalized) return p;
  const double t12 = p.triple.t12();
  const double space = std::pow(t12, -2.0 / 3.0);
  const double value = std::pow(t12, -1.0 / 3.0);
  WeightProfile out = p;
  out.normalized = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.ys[i] = (p.ys[i] - p.base) * space;
    out.weights[i] = p.weights[i] * value;
    out.snap_errors[i] = p.snap_errors[i] * space;
  }
  return out;
}

inline WeightProfile denormalized_profile(const WeightProfile& p) {
  if (!p.normalized) return p;
  const double t12 = p.triple.t12();
  const double space = std::pow(t12, 2.0 / 3.0);
  const double value = std::pow(t12, 1.0 / 3.0);
  WeightProfile out = p;
  out.normalized = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.ys[i] = p.base + p.ys[i] * space;
    out.weights[i] = p.weights[i] * value;
    out.snap_errors[i] = p.snap_errors[i] * space;
  }
  return out;
}

/// Weights plus Q of the displacement from the base (for normalized
/// profiles the coordinate already is the displacement).
inline std::vector<double> parabolic_view(const WeightProfile& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = p.normalized ? p.ys[i] : p.ys[i] - p.base;
    out[i] = p.weights[i] + parabola(z);
  }
  return out;
}

/// (Wgt(x2 -> y2) + Q(y2 - x2)) - (Wgt(x1 -> y1) + Q(y1 - x1)).
template <LineSource S>
double parabolic_delta(const S& env, const CompatibleTriple& tr, std::pair<double, double> xs,
                       std::pair<double, double> ys, const WeightOptions& opt = {}) {
  const double hi = scaled_weight(env, tr, xs.second, ys.second, opt) + parabola(ys.second - xs.second);
  const double lo = scaled_weight(env, tr, xs.first, ys.first, opt) + parabola(ys.first - xs.first);
  return hi - lo;
}

/// |Wgt_n - t12^{1/3} Wgt_{n t12}| for the same unscaled endpoints, where the
/// right side uses heights kappa = t1 / t12 and kappa + 1.
template <LineSource S>
double verify_scaling_principle(const S& env, const CompatibleTriple& tr, double x, double y,
                                const WeightOptions& opt = {}) {
  const double lhs = scaled_weight(env, tr, x, y, opt);
  const CompatibleTriple unit{tr.span(), tr.h1, tr.h2};
  const double t12 = tr.t12();
  const double space = std::pow(t12, -2.0 / 3.0);
  const double rhs = scaled_weight(env, unit, x * space, y * space, opt);
  return std::abs(lhs - std::cbrt(t12) * rhs);
}

/// Wgt(x -> y) - Wgt(x -> z at line h_mid) - Wgt(z at h_mid -> y).
template <LineSource S>
double verify_superadditivity(const S& env, const CompatibleTriple& tr, double x, double y,
                              double z, long long h_mid, const WeightOptions& opt = {}) {
  if (h_mid <= tr.h1 || h_mid >= tr.h2)
    throw PreconditionError("superadditivity: intermediate height must lie strictly inside");
  const CompatibleTriple lower{tr.n, tr.h1, h_mid};
  const CompatibleTriple upper{tr.n, h_mid, tr.h2};
  const GridSpec& g = env.grid();
  const auto xs = snap_scaled(g, tr.n, tr.h1, x).index;
  const auto zs = snap_scaled(g, tr.n, h_mid, z).index;
  const auto ys = snap_scaled(g, tr.n, tr.h2, y).index;
  if (zs < xs || ys < zs) throw PreconditionError("superadditivity: a weight is undefined");
  return scaled_weight(env, tr, x, y, opt) -
         (scaled_weight(env, lower, x, z, opt) + scaled_weight(env, upper, z, y, opt));
}

}  // namespace blpp
