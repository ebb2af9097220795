#pragma once

// Per-sample exact identities. Every check runs on freshly seeded instances
// and records the seed of any violation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "blpp/config.hpp"
#include "blpp/env.hpp"
#include "blpp/initcond.hpp"
#include "blpp/lpp.hpp"
#include "blpp/parallel.hpp"
#include "blpp/report.hpp"
#include "blpp/rng.hpp"
#include "blpp/scaled.hpp"

namespace blpp {

enum class Check { enumeration, monotonicity, superadditivity, scaling, initial, rewire, profiles };

inline const std::vector<Check>& all_checks() {
  static const std::vector<Check> v{Check::enumeration, Check::monotonicity, Check::superadditivity,
                                    Check::scaling,     Check::initial,      Check::rewire,
                                    Check::profiles};
  return v;
}

namespace detail {

/// Small deterministic draws for instance shapes.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits() { return rng::derive(seed_, 0xD1CE, next_++); }
  double unit() { return rng::open_unit(bits()); }
  std::size_t below(std::size_t m) { return static_cast<std::size_t>(bits() % m); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

struct CaseResult {
  double worst = 0.0;  // largest violation measure seen
  bool ok = true;
  bool skipped = false;  // the random draw did not set up the identity
  std::string note;
};

struct CheckSummary {
  std::size_t cases = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
  std::vector<std::uint64_t> bad_seeds;
  std::string note;
};

template <class Fn>
CheckSummary run_cases(std::size_t count, std::uint64_t master, std::uint64_t id, unsigned threads,
                       Fn&& one) {
  const auto results = parallel_map(count, threads, [&](std::size_t i) {
    const std::uint64_t seed = rng::derive(master, id, i);
    return std::pair{seed, one(seed)};
  });
  CheckSummary s;
  s.cases = count;
  for (const auto& [seed, r] : results) {
    s.worst = std::max(s.worst, r.worst);
    if (r.skipped) ++s.skipped;
    if (!r.ok) {
      s.bad_seeds.push_back(seed);
      if (s.note.empty()) s.note = r.note;
    }
  }
  return s;
}

inline CaseResult enumeration_case(std::uint64_t seed, const std::optional<FaultSpec>& fault) {
  Draws d(seed);
  const std::size_t lines = 1 + d.below(4);
  const std::size_t span = 1 + d.below(10);
  const std::size_t count = span + 1 + d.below(4);
  const GridSpec g{-0.5 * d.unit(), d.uniform(0.05, 1.0), count};
  const Environment env(seed, lines, g);
  const std::size_t i0 = d.below(lines);
  const std::size_t j0 = i0 + d.below(lines - i0);
  const std::size_t x = d.below(count - span + 1);
  const LinePoint a{x, i0}, b{x + span - 1, j0};

  DpProbe probe;
  if (fault) probe.fault = DpFault{fault->line, fault->index, fault->delta};
  const double dp = max_energy(env, a, b, &probe);
  const double brute = brute_force_max_energy(env, a, b);
  const Staircase geo = geodesic(env, a, b);
  const double geo_e = energy(env, geo);
  CaseResult r;
  r.worst = std::abs(dp - brute);
  const double ops_cap = 3.0 * static_cast<double>((j0 - i0 + 1) * span);
  r.ok = r.worst <= 1e-10 && std::abs(geo_e - dp) <= 1e-9 && static_cast<double>(probe.ops) <= ops_cap;
  if (!r.ok) r.note = "dp " + io::format_number(dp) + " vs enumeration " + io::format_number(brute);
  return r;
}

inline CaseResult monotonicity_case(std::uint64_t seed) {
  Draws d(seed);
  constexpr std::size_t kLines = 22;
  const std::size_t count = 40 + d.below(160);
  const Environment env(seed, kLines, GridSpec{0.0, d.uniform(0.01, 0.2), count});
  const std::size_t z1 = d.below(count / 2);
  const std::size_t z2 = z1 + d.below(count - z1);
  std::vector<double> at(kLines);
  sweep_rows(env, {z1, 0}, kLines - 1, z2,
             [&](std::size_t k, std::span<const double> row) { at[k] = row.back(); });
  CaseResult r;
  for (std::size_t m = 1; m <= 20; ++m) {
    const double drop = at[m] - at[m + 1];
    r.worst = std::max(r.worst, drop);
    if (drop > 1e-12) {
      r.ok = false;
      r.note = "M over lines 0.." + std::to_string(m) + " exceeds the next";
    }
  }
  return r;
}

inline CaseResult superadditivity_case(std::uint64_t seed) {
  Draws d(seed);
  const long long n = 2 * static_cast<long long>(1 + d.below(16));
  const CompatibleTriple tr{n, 0, n};
  const Environment env(seed, tr.lines_needed(), required_grid(n, {-2.0, 2.0}, {0.0, 1.0}, 0x1p-6));
  const long long mid = 1 + static_cast<long long>(d.below(static_cast<std::size_t>(n - 1)));
  const double x = d.uniform(-1.0, 0.5);
  const double y = d.uniform(x, 1.0);
  const double t = static_cast<double>(mid) / static_cast<double>(n);
  const double nd = static_cast<double>(n);
  const double width = 2.0 * pow_two_thirds(nd);
  // z is drawn between the unscaled endpoints so both halves are defined
  const double X = width * x;
  const double Y = nd + width * y;
  const double Zu = X + (Y - X) * d.unit();  // unscaled, between X and Y
  const double z = (Zu - nd * t) / width;
  // snapping is monotone, so the snapped z stays between the snapped ends
  const double slack = verify_superadditivity(env, tr, x, y, z, mid);
  CaseResult r;
  r.worst = std::max(0.0, -slack);
  r.ok = slack >= -1e-9;
  if (!r.ok) r.note = "slack " + io::format_number(slack);
  return r;
}

inline CaseResult scaling_case(std::uint64_t seed, bool halve) {
  Draws d(seed);
  // t12 = 1/2: n even, heights n/4 .. 3n/4; t12 = 2: heights 0 .. 2n
  const CompatibleTriple tr = halve ? CompatibleTriple{64, 16, 48} : CompatibleTriple{32, 0, 64};
  // weight defined for y >= x - n^{1/3} t12 / 2, which is x - 1 at t12 = 1/2
  const double x = d.uniform(-1.0, 1.0);
  const double y = d.uniform(std::max(-1.0, x - 0.75), 1.0);
  const GridSpec g = required_grid(tr.n, {-1.5, 1.5}, {tr.t1(), tr.t2()}, 0x1p-6);
  const Environment env(seed, tr.lines_needed(), g);
  CaseResult r;
  r.worst = verify_scaling_principle(env, tr, x, y);
  r.ok = r.worst <= 1e-9;
  if (!r.ok) r.note = "residual " + io::format_number(r.worst);
  return r;
}

inline CaseResult initial_case(std::uint64_t seed) {
  Draws d(seed);
  const long long n = 8 + static_cast<long long>(d.below(40));
  const CompatibleTriple tr{n, 0, n};
  const Interval window{-2.0, 2.0};
  const Environment env(seed, tr.lines_needed(), required_grid(n, {-2.0, 2.0}, {0.0, 1.0}, 0x1p-7));
  CaseResult r;
  auto fail = [&](const std::string& what, double v) {
    r.ok = false;
    r.worst = std::max(r.worst, v);
    if (r.note.empty()) r.note = what;
  };

  // narrow wedge: bit-exact reduction to the point-to-point weight
  const RewardedProfile nw = f_rewarded_profile(env, tr, InitialCondition::narrow_wedge(), window,
                                                {-1.0, 1.0});
  for (std::size_t i = 0; i < nw.profile.size(); i += 7) {
    const double pt = scaled_weight(env, tr, 0.0, nw.profile.ys[i]);
    if (pt != nw.profile.weights[i] || nw.argmax_x[i] != 0.0)
      fail("narrow wedge differs from point weight", std::abs(pt - nw.profile.weights[i]));
  }

  // monotone in f: f <= g pointwise
  std::vector<double> xs, fs, gs;
  for (int k = 0; k <= 16; ++k) {
    xs.push_back(-2.0 + 0.25 * k);
    fs.push_back(d.uniform(-0.8, 0.8));
    gs.push_back(fs.back() + d.uniform(0.0, 0.5));
  }
  const PsiTriple psi{4.0, 2.0, 4.0};
  const auto f = InitialCondition::table(xs, fs, false, psi);
  const auto g = InitialCondition::table(xs, gs, false, psi);
  const RewardedProfile pf = f_rewarded_profile(env, tr, f, window, {-1.0, 1.0});
  const RewardedProfile pg = f_rewarded_profile(env, tr, g, window, {-1.0, 1.0});
  for (std::size_t i = 0; i < pf.profile.size(); ++i) {
    if (pf.profile.weights[i] > pg.profile.weights[i])
      fail("f <= g but W_f > W_g", pf.profile.weights[i] - pg.profile.weights[i]);
  }

  // shift covariance
  const double a = d.uniform(-0.5, 0.5);
  const RewardedProfile ps = f_rewarded_profile(env, tr, f.shifted(a), window, {-1.0, 1.0});
  for (std::size_t i = 0; i < pf.profile.size(); ++i) {
    const double dev = std::abs(ps.profile.weights[i] - pf.profile.weights[i] - a);
    r.worst = std::max(r.worst, dev);
    if (dev > 1e-12) fail("shift moved the weight by more than the constant", dev);
    if (ps.argmax_x[i] != pf.argmax_x[i]) fail("shift moved the maximizer", 0.0);
  }
  return r;
}

/// Reward matched to line h1 so that every start left of the first jump is
/// optimal; crossing rewarded polymers then exist by construction.
inline CaseResult rewire_case(std::uint64_t seed) {
  Draws d(seed);
  const long long n = 8 + static_cast<long long>(d.below(16));
  const CompatibleTriple tr{n, 0, n};
  const Interval window{-1.0, 1.0};
  const GridSpec grid = required_grid(n, {-1.0, 1.0}, {0.0, 1.0}, 0x1p-5);
  const Environment env(seed, tr.lines_needed(), grid);
  const double c = weight_factor(n);
  const auto [wlo, whi] = detail::index_range(grid, n, 0, window);
  const double x0 = snap_scaled(grid, n, 0, 0.0).position;
  const auto b0 = env.line_values(0);
  std::vector<double> xs, fs;
  for (std::size_t j = wlo; j <= whi; ++j) {
    xs.push_back(scaled_coordinate(grid, n, 0, j));
    fs.push_back(c * (b0[j] - (grid.point(j) - x0)));
  }
  const auto f = InitialCondition::table(xs, fs, false, PsiTriple{1e6, 2.0, 1e6});

  const double y1 = d.uniform(-0.8, 0.2);
  const double y2 = y1 + d.uniform(0.05, 0.6);
  const auto g1 = geodesic(env, {wlo, 0}, {snap_scaled(grid, n, n, y1).index, static_cast<std::size_t>(n)});
  const auto g2 = geodesic(env, {wlo, 0}, {snap_scaled(grid, n, n, y2).index, static_cast<std::size_t>(n)});
  const std::size_t z = std::min(g1.jumps.front(), g2.jumps.front());
  CaseResult r;
  if (z < wlo + 1) {  // no room for two distinct optimal starts
    r.skipped = true;
    return r;
  }
  const std::size_t i1 = wlo + d.below(z - wlo);
  const std::size_t i2 = i1 + 1 + d.below(z - i1);
  const RewireCheck rc = verify_crossing_rewire(
      env, tr, {xs[i1 - wlo], xs[i2 - wlo]}, {y1, y2}, f, window);
  if (!rc.applicable) {
    r.ok = false;
    r.note = "constructed crossing not detected";
    return r;
  }
  r.worst = rc.residual;
  r.ok = rc.residual <= 1e-9;
  if (!r.ok) r.note = "rewired weights differ by " + io::format_number(rc.residual);
  // point-to-point quadrangle inequality on independent endpoints
  // a2 - e1 < 0.95 keeps every pairing inside the domain (n^{1/3} / 2 >= 1)
  const double a1 = d.uniform(-0.5, 0.0), a2 = a1 + d.uniform(0.01, 0.45);
  const double e1 = d.uniform(-0.5, 0.0), e2 = e1 + d.uniform(0.01, 0.45);
  const double q = (scaled_weight(env, tr, a1, e1) + scaled_weight(env, tr, a2, e2)) -
                   (scaled_weight(env, tr, a2, e1) + scaled_weight(env, tr, a1, e2));
  if (q < -1e-9) {
    r.ok = false;
    r.worst = std::max(r.worst, -q);
    r.note = "quadrangle inequality violated by " + io::format_number(-q);
  }
  return r;
}

inline CaseResult profiles_case(std::uint64_t seed) {
  Draws d(seed);
  const long long n = 4 + static_cast<long long>(d.below(60));
  const CompatibleTriple tr{n, 0, n};
  const Environment env(seed, tr.lines_needed(), required_grid(n, {-1.5, 1.5}, {0.0, 1.0}, 0x1p-7));
  const double base = d.uniform(-0.5, 0.5);
  const WeightProfile fwd = forward_profile(env, tr, base, {-1.0, 1.0});
  const WeightProfile bwd = backward_profile(env, tr, base, {-1.0, 1.0});
  CaseResult r;
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    if (fwd.weights[i] != scaled_weight(env, tr, base, fwd.ys[i])) {
      r.ok = false;
      r.note = "forward profile differs from point weight";
    }
  }
  for (std::size_t i = 0; i < bwd.size(); ++i) {
    const double dev = std::abs(bwd.weights[i] - scaled_weight(env, tr, bwd.ys[i], base));
    r.worst = std::max(r.worst, dev);
    if (dev > 1e-12) {
      r.ok = false;
      r.note = "backward profile differs from point weight by " + io::format_number(dev);
    }
  }
  return r;
}

}  // namespace detail

inline const char* check_name(Check c) {
  switch (c) {
    case Check::enumeration: return "enumeration";
    case Check::monotonicity: return "monotonicity";
    case Check::superadditivity: return "superadditivity";
    case Check::scaling: return "scaling";
    case Check::initial: return "initial";
    case Check::rewire: return "rewire";
    case Check::profiles: return "profiles";
  }
  return "?";
}

/// Runs the selected identity checks; criteria ids follow the acceptance list.
inline ExperimentResult run_verify(const ExperimentConfig& cfg, unsigned threads,
                                   const std::vector<Check>& which = all_checks()) {
  ExperimentResult out;
  out.name = "verify";
  const Stopwatch total;
  const VerifyCounts counts = [&] {
    VerifyCounts c = cfg.verify;
    if (cfg.samples) {
      c.enumeration = c.monotonicity = c.superadditivity = c.scaling = c.initial = c.rewire =
          c.profiles = *cfg.samples;
    }
    return c;
  }();
  io::Table table{"verify", {"check", "cases", "worst", "violations"}, {}};
  auto record = [&](int id, Check ch, const std::string& label, const detail::CheckSummary& s,
                    double seconds, double budget) {
    Criterion c{id, label, s.bad_seeds.empty(), {}};
    c.detail = std::to_string(s.cases) + " cases";
    if (s.skipped) c.detail += " (" + std::to_string(s.skipped) + " skipped)";
    c.detail += ", worst " + io::format_number(s.worst) + ", " + std::to_string(s.bad_seeds.size()) +
                " violations, " + fmt("%.2fs", seconds);
    if (budget > 0.0 && seconds >= budget) {
      c.pass = false;
      c.detail += " (over " + fmt("%.0fs", budget) + " budget)";
    }
    if (!s.note.empty()) c.detail += "; first: " + s.note;
    out.criteria.push_back(c);
    out.counterexample_seeds.insert(out.counterexample_seeds.end(), s.bad_seeds.begin(),
                                    s.bad_seeds.end());
    table.add({static_cast<double>(static_cast<int>(ch)), static_cast<double>(s.cases), s.worst,
               static_cast<double>(s.bad_seeds.size())});
    out.summary[check_name(ch)] = {{"cases", s.cases},
                                   {"skipped", s.skipped},
                                   {"worst", s.worst},
                                   {"violations", s.bad_seeds.size()},
                                   {"counterexample_seeds", s.bad_seeds}};
  };
  const std::uint64_t m = cfg.master_seed;
  for (Check ch : which) {
    const Stopwatch sw;
    switch (ch) {
      case Check::enumeration: {
        const auto s = detail::run_cases(counts.enumeration, m, 101, threads, [&](std::uint64_t seed) {
          return detail::enumeration_case(seed, cfg.fault);
        });
        record(1, ch, "DP equals exhaustive enumeration", s, sw.seconds(), 5.0);
        break;
      }
      case Check::monotonicity: {
        const auto s = detail::run_cases(counts.monotonicity, m, 102, threads, detail::monotonicity_case);
        record(2, ch, "energy nondecreasing in the number of lines", s, sw.seconds(), 0.0);
        break;
      }
      case Check::superadditivity: {
        const auto s = detail::run_cases(counts.superadditivity, m, 103, threads, detail::superadditivity_case);
        record(3, ch, "weights are superadditive across an intermediate height", s, sw.seconds(), 0.0);
        break;
      }
      case Check::scaling: {
        auto a = detail::run_cases(counts.scaling, m, 104, threads,
                                   [](std::uint64_t s) { return detail::scaling_case(s, true); });
        const auto b = detail::run_cases(counts.scaling, m, 105, threads,
                                         [](std::uint64_t s) { return detail::scaling_case(s, false); });
        a.cases += b.cases;
        a.worst = std::max(a.worst, b.worst);
        a.bad_seeds.insert(a.bad_seeds.end(), b.bad_seeds.begin(), b.bad_seeds.end());
        if (a.note.empty()) a.note = b.note;
        record(4, ch, "scaling principle at t12 = 1/2 and 2", a, sw.seconds(), 0.0);
        break;
      }
      case Check::initial: {
        const auto s = detail::run_cases(counts.initial, m, 106, threads, detail::initial_case);
        record(5, ch, "narrow-wedge reduction, monotonicity and shift covariance in f", s, sw.seconds(), 0.0);
        break;
      }
      case Check::rewire: {
        const auto s = detail::run_cases(counts.rewire, m, 107, threads, detail::rewire_case);
        record(0, ch, "rewiring crossing rewarded polymers preserves total weight", s, sw.seconds(), 0.0);
        break;
      }
      case Check::profiles: {
        const auto s = detail::run_cases(counts.profiles, m, 108, threads, detail::profiles_case);
        record(0, ch, "profiles agree with pointwise weights", s, sw.seconds(), 0.0);
        break;
      }
    }
  }
  out.tables.push_back(std::move(table));
  out.seconds = total.seconds();
  return out;
}

}  // namespace blpp
