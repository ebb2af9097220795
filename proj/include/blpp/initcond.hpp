#pragma once

// Line-to-point weights rewarded by an initial condition f,
//   W_f(y) = sup_x ( Wgt((x, t1) -> (y, t2)) + f(x) ),
// and the regularity events built on them.
//
// W_f is computed by one forward sweep started from a whole row: with
// g(X) = (X - X0) + f(x) / c the first line holds
//   max_{s <= t} (g(s) - B(h1, s)) + B(h1, t)
// and then W_f(y) = c ((M_g - n t12) - (Y - X0)), X0 the snapped origin.

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "blpp/env.hpp"
#include "blpp/error.hpp"
#include "blpp/lpp.hpp"
#include "blpp/scaled.hpp"

namespace blpp {

struct PsiTriple {
  double psi1 = 1.0;
  double psi2 = 1.0;
  double psi3 = 1.0;

  void validate() const {
    if (!(psi1 > 0.0 && psi2 > 0.0 && psi3 > 0.0))
      throw ConfigError("psi values must be positive");
  }
};

class InitialCondition {
 public:
  enum class Kind { narrow_wedge, flat, table, expression };
  /// nullopt marks an unrewarded point (f = -infinity there).
  using Fn = std::function<std::optional<double>(double)>;

  static InitialCondition narrow_wedge(PsiTriple psi = {}) {
    return InitialCondition(Kind::narrow_wedge, nullptr, "narrow-wedge", psi);
  }

  static InitialCondition flat(PsiTriple psi = {}) {
    return InitialCondition(Kind::flat, [](double) -> std::optional<double> { return 0.0; },
                            "flat", psi);
  }

  /// Piecewise-linear through (xs[i], fs[i]); outside the table either
  /// unrewarded or continued along the end segments.
  static InitialCondition table(std::vector<double> xs, std::vector<double> fs,
                                bool extend_linear = false, PsiTriple psi = {}) {
    if (xs.size() != fs.size() || xs.size() < 2)
      throw InputError("table needs at least two (x, f) rows");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(fs[i])) throw InputError("table values must be finite");
      if (i > 0 && !(xs[i] > xs[i - 1])) throw InputError("table abscissae must increase");
    }
    auto fn = [xs = std::move(xs), fs = std::move(fs), extend_linear](double x) -> std::optional<double> {
      const std::size_t m = xs.size();
      if (x < xs.front() || x > xs.back()) {
        if (!extend_linear) return std::nullopt;
        const std::size_t i = x < xs.front() ? 0 : m - 2;
        return fs[i] + (fs[i + 1] - fs[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]);
      }
      const auto it = std::upper_bound(xs.begin(), xs.end(), x);
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), m - 1) - 1;
      return fs[i] + (fs[i + 1] - fs[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]);
    };
    return InitialCondition(Kind::table, std::move(fn), "table", psi);
  }

  /// Two whitespace-separated numeric columns; '#' starts a comment.
  static InitialCondition load_table(const std::string& path, bool extend_linear = false,
                                     PsiTriple psi = {}) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open table " + path);
    std::vector<double> xs, fs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream row(line);
      double x = 0.0, f = 0.0;
      if (!(row >> x)) continue;
      std::string rest;
      if (!(row >> f) || (row >> rest))
        throw InputError(path + ":" + std::to_string(lineno) + ": expected two numbers");
      xs.push_back(x);
      fs.push_back(f);
    }
    return table(std::move(xs), std::move(fs), extend_linear, psi);
  }

  static InitialCondition expression(Fn fn, std::string label, PsiTriple psi = {}) {
    if (!fn) throw ConfigError("expression initial condition needs a callable");
    return InitialCondition(Kind::expression, std::move(fn), std::move(label), psi);
  }

  Kind kind() const { return kind_; }
  const PsiTriple& psi() const { return psi_; }
  const std::string& label() const { return label_; }

  std::optional<double> operator()(double x) const {
    if (kind_ == Kind::narrow_wedge) return x == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    return fn_(x);
  }

  /// f + a.
  InitialCondition shifted(double a) const {
    if (kind_ == Kind::narrow_wedge) {
      Fn fn = [a](double x) -> std::optional<double> {
        return x == 0.0 ? std::optional<double>(a) : std::nullopt;
      };
      InitialCondition out(Kind::expression, std::move(fn), label_ + "+shift", psi_);
      out.wedge_shift_ = a;
      return out;
    }
    Fn base = fn_;
    Fn fn = [base, a](double x) -> std::optional<double> {
      const auto v = base(x);
      return v ? std::optional<double>(*v + a) : std::nullopt;
    };
    return InitialCondition(kind_ == Kind::flat ? Kind::expression : kind_, std::move(fn),
                            label_ + "+shift", psi_);
  }

  /// Rewards on grid indices [lo, hi] at line h; -inf where unrewarded.
  /// A narrow wedge rewards only the grid point nearest to x = 0.
  std::vector<double> grid_rewards(const GridSpec& g, long long n, long long h, std::size_t lo,
                                   std::size_t hi) const {
    std::vector<double> out(hi - lo + 1, -std::numeric_limits<double>::infinity());
    const bool wedge = kind_ == Kind::narrow_wedge || wedge_shift_.has_value();
    if (wedge) {
      const std::size_t j = snap_scaled(g, n, h, 0.0).index;
      if (j >= lo && j <= hi) out[j - lo] = wedge_shift_.value_or(0.0);
      return out;
    }
    for (std::size_t j = lo; j <= hi; ++j) {
      const auto v = fn_(scaled_coordinate(g, n, h, j));
      if (v) {
        if (std::isnan(*v)) throw NumericError("initial condition returned NaN");
        out[j - lo] = *v;
      }
    }
    return out;
  }

  /// Membership checks restricted to the given points:
  /// f(x) <= psi1 (1 + |x|) everywhere, and sup over [-psi2, psi2] of f > -psi3.
  void check_psi(const std::vector<double>& xs, const std::vector<double>& fs) const {
    psi_.validate();
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(fs[i])) continue;
      if (fs[i] > psi_.psi1 * (1.0 + std::abs(xs[i])))
        throw PreconditionError("initial condition exceeds psi1 (1 + |x|) at x = " +
                                std::to_string(xs[i]));
      if (std::abs(xs[i]) <= psi_.psi2) {
        any = true;
        best = std::max(best, fs[i]);
      }
    }
    if (any && !(best > -psi_.psi3))
      throw PreconditionError("initial condition is below -psi3 on [-psi2, psi2]");
  }

 private:
  InitialCondition(Kind kind, Fn fn, std::string label, PsiTriple psi)
      : kind_(kind), fn_(std::move(fn)), label_(std::move(label)), psi_(psi) {
    psi_.validate();
  }

  Kind kind_;
  Fn fn_;
  std::string label_;
  PsiTriple psi_;
  std::optional<double> wedge_shift_;
};

struct RewardedProfile {
  WeightProfile profile;          // direction == rewarded, base 0
  std::vector<double> argmax_x;   // leftmost maximizing start
  std::vector<char> boundary_hit;  // maximizer on the window edge
  Interval window;
};

struct RewardedWeight {
  double weight = 0.0;
  double argmax_x = 0.0;
  bool boundary_hit = false;
};

/// W_f(y) for every grid y in y_range, starts restricted to grid x in window.
template <LineSource S>
RewardedProfile f_rewarded_profile(const S& env, const CompatibleTriple& tr,
                                   const InitialCondition& f, Interval window, Interval y_range,
                                   const WeightOptions& opt = {}) {
  detail::check_lines(env.lines(), tr);
  const GridSpec& g = env.grid();
  auto [ylo, yhi] = detail::index_range(g, tr.n, tr.h2, y_range);
  // starts right of the last end point are unreachable; the grid need not hold them
  const double reach = scaled_coordinate(g, tr.n, tr.h1, yhi);
  const bool clipped = window.hi > reach;
  const auto [wlo, whi] =
      detail::index_range(g, tr.n, tr.h1, {window.lo, clipped ? std::max(window.lo, reach) : window.hi});

  std::vector<double> reward = f.grid_rewards(g, tr.n, tr.h1, wlo, whi);
  {
    std::vector<double> xs;
    for (std::size_t j = wlo; j <= whi; ++j) xs.push_back(scaled_coordinate(g, tr.n, tr.h1, j));
    f.check_psi(xs, reward);
  }
  std::size_t first_rewarded = whi + 1;
  for (std::size_t j = wlo; j <= whi; ++j) {
    if (std::isfinite(reward[j - wlo])) {
      first_rewarded = j;
      break;
    }
  }
  if (first_rewarded > whi) throw NoRewardError("initial condition is unrewarded on the window");
  if (ylo < first_rewarded)
    throw PreconditionError("rewarded profile: y below every rewarded start");

  const double c = weight_factor(tr.n);
  const double x0 = snap_scaled(g, tr.n, tr.h1, 0.0).position;
  const std::size_t first = wlo;
  const std::size_t width = yhi - first + 1;

  std::vector<double> scratch;
  std::vector<double> row(width);
  std::vector<std::size_t> origin(width);
  {
    const auto b = env.line(static_cast<std::size_t>(tr.h1), scratch);
    double best = detail::kUnreached;
    std::size_t best_at = first_rewarded;
    for (std::size_t t = 0; t < width; ++t) {
      const std::size_t j = first + t;
      if (j <= whi && std::isfinite(reward[t])) {
        const double gj = (g.point(j) - x0) + reward[t] / c;
        const double cand = gj - b[j];
        if (cand > best) {
          best = cand;
          best_at = j;
        }
      }
      row[t] = best + b[j];
      origin[t] = best_at;
    }
  }
  for (long long k = tr.h1 + 1; k <= tr.h2; ++k) {
    const auto b = env.line(static_cast<std::size_t>(k), scratch);
    detail::advance_row(b, first, row, &origin, nullptr);
  }

  RewardedProfile out;
  out.window = window;
  out.profile.triple = tr;
  out.profile.base = 0.0;
  out.profile.direction = Direction::rewarded;
  for (std::size_t j = ylo; j <= yhi; ++j) {
    const double m = row[j - first];
    out.profile.ys.push_back(scaled_coordinate(g, tr.n, tr.h2, j));
    out.profile.weights.push_back(detail::center(tr, m, x0, g.point(j), g.step, opt));
    out.profile.snap_errors.push_back(0.0);
    const std::size_t o = origin[j - first];
    out.argmax_x.push_back(scaled_coordinate(g, tr.n, tr.h1, o));
    out.boundary_hit.push_back(static_cast<char>(o == wlo || (o == whi && !clipped)));
  }
  return out;
}

template <LineSource S>
RewardedWeight f_rewarded_weight(const S& env, const CompatibleTriple& tr,
                                 const InitialCondition& f, double y, Interval window,
                                 const WeightOptions& opt = {}) {
  const RewardedProfile p = f_rewarded_profile(env, tr, f, window, {y, y}, opt);
  return {p.profile.weights.back(), p.argmax_x.back(), p.boundary_hit.back() != 0};
}

/// Outcome of rewiring two crossing rewarded polymers.
struct RewireCheck {
  bool applicable = false;
  double residual = 0.0;         // |original pair - rewired pair|
  double quadrangle_slack = 0.0;  // W(x1->y1) + W(x2->y2) - W(x2->y1) - W(x1->y2)
};

/// With x1 < x2 and y1 < y2: if x2 is an optimal start for y1 and x1 is an
/// optimal start for y2 (a crossing), the rewired pairs x1 -> y1 and
/// x2 -> y2 carry the same total rewarded weight.
template <LineSource S>
RewireCheck verify_crossing_rewire(const S& env, const CompatibleTriple& tr,
                                   std::pair<double, double> starts, std::pair<double, double> ends,
                                   const InitialCondition& f, Interval window,
                                   double tie_tolerance = 1e-9) {
  const auto [x1, x2] = starts;
  const auto [y1, y2] = ends;
  const GridSpec& g = env.grid();
  if (snap_scaled(g, tr.n, tr.h1, x1).index >= snap_scaled(g, tr.n, tr.h1, x2).index ||
      snap_scaled(g, tr.n, tr.h2, y1).index >= snap_scaled(g, tr.n, tr.h2, y2).index)
    return {};
  const auto f1 = f(x1);
  const auto f2 = f(x2);
  if (!f1 || !f2) return {};
  const auto xs2 = snap_scaled(g, tr.n, tr.h1, x2).index;
  const auto ys1 = snap_scaled(g, tr.n, tr.h2, y1).index;
  if (xs2 > ys1) return {};

  const RewardedWeight best1 = f_rewarded_weight(env, tr, f, y1, window);
  const RewardedWeight best2 = f_rewarded_weight(env, tr, f, y2, window);
  const double w21 = scaled_weight(env, tr, x2, y1) + *f2;
  const double w12 = scaled_weight(env, tr, x1, y2) + *f1;
  if (std::abs(w21 - best1.weight) > tie_tolerance || std::abs(w12 - best2.weight) > tie_tolerance)
    return {};
  const double w11 = scaled_weight(env, tr, x1, y1) + *f1;
  const double w22 = scaled_weight(env, tr, x2, y2) + *f2;
  RewireCheck out;
  out.applicable = true;
  out.residual = std::abs((w21 + w12) - (w11 + w22));
  out.quadrangle_slack = (w11 + w22) - (w21 + w12);
  return out;
}

struct EventReport {
  std::string event;
  bool outcome = false;
  double value = 0.0;  // the quantity compared against the threshold
  double x = 0.0;      // where it was attained
  double y = 0.0;
};

/// Decides RegFluc(R) from the leftmost optimal starts of the rewarded
/// polymers ending at -1 and 1.
inline EventReport regfluc_from_starts(double start_left, double start_right, double R) {
  EventReport r{"regfluc", false, 0.0, start_left, start_right};
  const bool left_ok = start_left >= -(R + 1.0);
  const bool right_ok = start_right <= R + 1.0;
  r.outcome = left_ok && right_ok;
  r.value = std::max(-(R + 1.0) - start_left, start_right - (R + 1.0));
  return r;
}

/// Polymers to (-1, t2) start at or right of -(R+1), polymers to (1, t2)
/// at or left of R+1. The window must reach [-(R+3), R+3].
template <LineSource S>
EventReport regfluc(const S& env, const CompatibleTriple& tr, const InitialCondition& f, double R,
                    std::optional<Interval> window = std::nullopt, const WeightOptions& opt = {}) {
  const Interval w = window.value_or(Interval{-(R + 3.0), R + 3.0});
  if (w.lo > -(R + 3.0) || w.hi < R + 3.0)
    throw CoverageError("regfluc window must contain [-(R+3), R+3]");
  const RewardedProfile left = f_rewarded_profile(env, tr, f, w, {-1.0, -1.0}, opt);
  const RewardedProfile right = f_rewarded_profile(env, tr, f, w, {1.0, 1.0}, opt);
  return regfluc_from_starts(left.argmax_x.back(), right.argmax_x.back(), R);
}

struct ScanOptions {
  /// Number of evenly spaced sample points per side; 0 scans every grid point.
  std::size_t points_per_side = 0;
  WeightOptions weight;
};

namespace detail {

inline std::vector<double> scan_points(const GridSpec& g, long long n, long long h, Interval iv,
                                       std::size_t per_side) {
  std::vector<double> out;
  if (per_side == 0) {
    const auto [lo, hi] = index_range(g, n, h, iv);
    for (std::size_t j = lo; j <= hi; ++j) out.push_back(scaled_coordinate(g, n, h, j));
    return out;
  }
  if (per_side == 1) return {iv.lo};
  for (std::size_t i = 0; i < per_side; ++i)
    out.push_back(iv.lo + iv.width() * static_cast<double>(i) / static_cast<double>(per_side - 1));
  return out;
}

/// Adjusted weights a(u, v) on the rectangle, one forward sweep per start.
template <LineSource S, class Visit>
void scan_rectangle(const S& env, const CompatibleTriple& tr, Interval xi, Interval yi,
                    const ScanOptions& opt, Visit&& visit) {
  const GridSpec& g = env.grid();
  const auto us = scan_points(g, tr.n, tr.h1, xi, opt.points_per_side);
  const auto vs = scan_points(g, tr.n, tr.h2, yi, opt.points_per_side);
  for (double u : us) {
    const WeightProfile p = forward_profile(env, tr, u, yi, opt.weight);
    for (double v : vs) {
      const std::size_t jv = snap_scaled(g, tr.n, tr.h2, v).index;
      const std::size_t j0 = snap_scaled(g, tr.n, tr.h2, p.ys.front()).index;
      if (jv < j0) throw PreconditionError("rectangle point below the weight domain");
      visit(u, p.ys[jv - j0], p.weights[jv - j0]);
    }
  }
}

}  // namespace detail

/// |t12^{-1/3} Wgt(u -> v) + 2^{-1/2} t12^{-4/3} (v - u)^2| <= r on the rectangle.
template <LineSource S>
EventReport poly_wgt_reg(const S& env, const CompatibleTriple& tr, Interval x_interval,
                         Interval y_interval, double r, const ScanOptions& opt = {}) {
  const double t12 = tr.t12();
  const double a = std::pow(t12, -1.0 / 3.0);
  const double b = std::pow(t12, -4.0 / 3.0) / std::numbers::sqrt2;
  EventReport rep{"poly_wgt_reg", true, -1.0, 0.0, 0.0};
  detail::scan_rectangle(env, tr, x_interval, y_interval, opt, [&](double u, double v, double w) {
    const double d = v - u;
    const double val = std::abs(a * w + b * d * d);
    if (val > rep.value) rep = {"poly_wgt_reg", true, val, u, v};
  });
  rep.outcome = rep.value <= r;
  return rep;
}

/// sup over u, u' in [x, x+eps] and v, v' in [y, y+eps] of the parabolically
/// adjusted weight difference, compared against r eps^{1/2}.
template <LineSource S>
EventReport loc_wgt_reg(const S& env, const CompatibleTriple& tr, double x, double y, double eps,
                        double r, const ScanOptions& opt = {}) {
  if (!(eps > 0.0)) throw PreconditionError("loc_wgt_reg: eps must be positive");
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double hx = x, hy = y;
  detail::scan_rectangle(env, tr, {x, x + eps}, {y, y + eps}, opt,
                         [&](double u, double v, double w) {
                           const double adj = w + parabola(v - u);
                           if (adj > hi) {
                             hi = adj;
                             hx = u;
                             hy = v;
                           }
                           lo = std::min(lo, adj);
                         });
  const double value = hi - lo;
  return {"loc_wgt_reg", value <= r * std::sqrt(eps), value, hx, hy};
}

/// Largest |W(z) - W(y)| over y, z in [-1, 1] with |z - y| <= eps. When eps
/// exceeds the domain this is the full oscillation.
inline EventReport equicty(const WeightProfile& p, double rho, double eps) {
  if (p.size() != p.weights.size()) throw PreconditionError("equicty: malformed profile");
  std::deque<std::size_t> mx, mn;
  double best = 0.0, at = 0.0;
  std::size_t left = 0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.ys[i] >= -1.0 - 1e-12 && p.ys[i] <= 1.0 + 1e-12) idx.push_back(i);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t i = idx[r];
    while (!mx.empty() && p.weights[idx[mx.back()]] <= p.weights[i]) mx.pop_back();
    mx.push_back(r);
    while (!mn.empty() && p.weights[idx[mn.back()]] >= p.weights[i]) mn.pop_back();
    mn.push_back(r);
    while (p.ys[i] - p.ys[idx[left]] > eps + 1e-12) ++left;
    while (mx.front() < left) mx.pop_front();
    while (mn.front() < left) mn.pop_front();
    const double osc = p.weights[idx[mx.front()]] - p.weights[idx[mn.front()]];
    if (osc > best) {
      best = osc;
      at = p.ys[i];
    }
  }
  return {"equicty", best < rho, best, at, 0.0};
}

inline EventReport unifbd(const WeightProfile& p, double K) {
  double best = 0.0, at = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p.weights[i]) > best) {
      best = std::abs(p.weights[i]);
      at = p.ys[i];
    }
  }
  return {"unifbd", best <= K, best, at, 0.0};
}

}  // namespace blpp
