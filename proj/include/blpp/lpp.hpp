#pragma once

// Unscaled Brownian last passage percolation on a grid.
//
// For a start (x, i) the maximal energy to (t, k) obeys
//   M(i, t) = B(i, t) - B(i, x)
//   M(k, t) = max_{x <= s <= t} (M(k-1, s) - B(k, s)) + B(k, t)
// which is a running prefix max per line. Only the previous row and the
// current Brownian line are resident.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blpp/env.hpp"
#include "blpp/error.hpp"

namespace blpp {

/// A grid point on a given line: (grid index, line index).
struct LinePoint {
  std::size_t index = 0;
  std::size_t line = 0;

  friend bool operator==(const LinePoint&, const LinePoint&) = default;
};

/// Monotone path from start to end; jumps[m] is the grid index where the path
/// moves from line start.line + m to start.line + m + 1.
struct Staircase {
  LinePoint start;
  LinePoint end;
  std::vector<std::size_t> jumps;

  void validate() const {
    if (start.line > end.line) throw PreconditionError("staircase: start line above end line");
    if (start.index > end.index) throw PreconditionError("staircase: start right of end");
    if (jumps.size() != end.line - start.line)
      throw PreconditionError("staircase: expected one jump per line change");
    std::size_t prev = start.index;
    for (std::size_t z : jumps) {
      if (z < prev || z > end.index)
        throw PreconditionError("staircase: jumps must be nondecreasing within [x, y]");
      prev = z;
    }
  }

  std::vector<double> positions(const GridSpec& grid) const {
    std::vector<double> out;
    out.reserve(jumps.size());
    for (std::size_t z : jumps) out.push_back(grid.point(z));
    return out;
  }
};

struct DpFault {
  std::size_t line = 0;
  std::size_t index = 0;
  double delta = 0.0;
};

/// Instrumentation for the DP: an op counter and an optional injected fault.
struct DpProbe {
  std::uint64_t ops = 0;
  std::optional<DpFault> fault;
};

namespace detail {

inline constexpr double kUnreached = -std::numeric_limits<double>::infinity();

inline void check_endpoints(std::size_t lines, const GridSpec& grid, LinePoint start,
                            LinePoint end) {
  if (start.line > end.line) throw PreconditionError("end line below start line");
  if (end.line >= lines) throw PreconditionError("line index out of range");
  if (start.index > end.index) throw PreconditionError("end left of start");
  if (end.index >= grid.count) throw PreconditionError("grid index out of range");
}

inline void apply_fault(DpProbe* probe, std::size_t line, std::size_t first,
                        std::vector<double>& row) {
  if (probe == nullptr || !probe->fault) return;
  const DpFault& f = *probe->fault;
  if (f.line == line && f.index >= first && f.index - first < row.size()) {
    row[f.index - first] += f.delta;
  }
}

/// Advance `row` (holding M(k-1, .) on grid indices [first, first + row.size()))
/// to M(k, .). When `origin` is non-null it is carried along with the argmax.
/// When `argmax` is non-null the maximizing s of each prefix is written there.
inline void advance_row(std::span<const double> b, std::size_t first, std::vector<double>& row,
                        std::vector<std::size_t>* origin, std::uint32_t* argmax) {
  double best = kUnreached;
  std::size_t best_origin = 0;
  std::uint32_t best_at = 0;
  const std::size_t m = row.size();
  for (std::size_t t = 0; t < m; ++t) {
    const double bt = b[first + t];
    const double cand = row[t] - bt;
    if (cand > best) {
      best = cand;
      best_at = static_cast<std::uint32_t>(t);
      if (origin) best_origin = (*origin)[t];
    }
    row[t] = best + bt;
    if (origin) (*origin)[t] = best_origin;
    if (argmax) argmax[t] = best_at;
  }
}

}  // namespace detail

/// Row-by-row sweep from a point start. Calls visit(line, row) for every line
/// from start.line to last_line; row[t] = M1 from start to (first + t, line).
template <LineSource S, class Visit>
void sweep_rows(const S& env, LinePoint start, std::size_t last_line, std::size_t last_index,
                Visit&& visit, DpProbe* probe = nullptr) {
  detail::check_endpoints(env.lines(), env.grid(), start, {last_index, last_line});
  const std::size_t first = start.index;
  const std::size_t width = last_index - first + 1;
  std::vector<double> scratch;
  std::vector<double> row(width);
  {
    const auto b = env.line(start.line, scratch);
    const double bx = b[first];
    for (std::size_t t = 0; t < width; ++t) row[t] = b[first + t] - bx;
    if (probe) probe->ops += 3 * width;
    detail::apply_fault(probe, start.line, first, row);
    visit(start.line, std::span<const double>(row));
  }
  for (std::size_t k = start.line + 1; k <= last_line; ++k) {
    const auto b = env.line(k, scratch);
    detail::advance_row(b, first, row, nullptr, nullptr);
    if (probe) probe->ops += 3 * width;
    detail::apply_fault(probe, k, first, row);
    visit(k, std::span<const double>(row));
  }
}

/// M1 from `start` to (t, j) for every grid index t in [start.index, last_index],
/// in a single pass.
struct EnergyProfile {
  std::size_t first_index = 0;
  std::vector<double> values;
};

template <LineSource S>
EnergyProfile max_energy_profile(const S& env, LinePoint start, std::size_t j,
                                 std::size_t last_index, DpProbe* probe = nullptr) {
  EnergyProfile out{start.index, {}};
  sweep_rows(
      env, start, j, last_index,
      [&](std::size_t k, std::span<const double> row) {
        if (k == j) out.values.assign(row.begin(), row.end());
      },
      probe);
  return out;
}

template <LineSource S>
double max_energy(const S& env, LinePoint start, LinePoint end, DpProbe* probe = nullptr) {
  return max_energy_profile(env, start, end.line, end.index, probe).values.back();
}

/// Energy of a staircase, summed line by line in ascending order with
/// Neumaier compensation.
template <LineSource S>
double energy(const S& env, const Staircase& s) {
  s.validate();
  detail::check_endpoints(env.lines(), env.grid(), s.start, s.end);
  double sum = 0.0;
  double comp = 0.0;
  auto add = [&](double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  };
  std::vector<double> scratch;
  std::size_t from = s.start.index;
  for (std::size_t k = s.start.line; k <= s.end.line; ++k) {
    const std::size_t m = k - s.start.line;
    const std::size_t to = (k == s.end.line) ? s.end.index : s.jumps[m];
    const auto b = env.line(k, scratch);
    add(b[to]);
    add(-b[from]);
    from = to;
  }
  return sum + comp;
}

/// Energy-maximizing staircase. Among maximizers the componentwise (hence
/// lexicographically) smallest jump list is returned.
template <LineSource S>
Staircase geodesic(const S& env, LinePoint start, LinePoint end) {
  detail::check_endpoints(env.lines(), env.grid(), start, end);
  const std::size_t first = start.index;
  const std::size_t width = end.index - first + 1;
  const std::size_t steps = end.line - start.line;
  std::vector<std::uint32_t> argmax(steps * width);
  std::vector<double> scratch;
  std::vector<double> row(width);
  {
    const auto b = env.line(start.line, scratch);
    for (std::size_t t = 0; t < width; ++t) row[t] = b[first + t] - b[first];
  }
  for (std::size_t m = 0; m < steps; ++m) {
    const auto b = env.line(start.line + m + 1, scratch);
    detail::advance_row(b, first, row, nullptr, argmax.data() + m * width);
  }
  Staircase out{start, end, std::vector<std::size_t>(steps)};
  std::size_t at = width - 1;
  for (std::size_t m = steps; m-- > 0;) {
    at = argmax[m * width + at];
    out.jumps[m] = first + at;
  }
  return out;
}

/// Copy of line k from any line source.
template <LineSource S>
std::vector<double> env_line_copy(const S& env, std::size_t k) {
  std::vector<double> scratch;
  const auto v = env.line(k, scratch);
  return {v.begin(), v.end()};
}

/// Number of nondecreasing lists of `length` values drawn from `points` grid
/// points, i.e. C(points + length - 1, length); saturates at `cap + 1`.
inline std::uint64_t count_monotone_lists(std::uint64_t points, std::uint64_t length,
                                          std::uint64_t cap) {
  // C(a, b) built incrementally; every partial product is itself a binomial.
  const std::uint64_t a = points + length - 1;
  std::uint64_t b = std::min(length, points - 1);
  long double c = 1.0L;
  for (std::uint64_t r = 1; r <= b; ++r) {
    c = c * static_cast<long double>(a - b + r) / static_cast<long double>(r);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(c)));
}

/// Exhaustive maximum over all grid-aligned monotone jump lists.
template <LineSource S>
double brute_force_max_energy(const S& env, LinePoint start, LinePoint end,
                              std::uint64_t max_lists = 10'000'000) {
  detail::check_endpoints(env.lines(), env.grid(), start, end);
  const std::size_t steps = end.line - start.line;
  const std::size_t points = end.index - start.index + 1;
  if (count_monotone_lists(points, steps, max_lists) > max_lists) {
    throw CapacityError("brute force: more than " + std::to_string(max_lists) + " jump lists");
  }
  std::vector<std::vector<double>> b;
  for (std::size_t k = start.line; k <= end.line; ++k) b.push_back(env_line_copy(env, k));

  double best = -std::numeric_limits<double>::infinity();
  // Depth m chooses the jump off line start.line + m; `acc` holds the energy
  // collected on lines below.
  auto rec = [&](auto&& self, std::size_t m, std::size_t from, double acc) -> void {
    if (m == steps) {
      best = std::max(best, acc + (b[m][end.index] - b[m][from]));
      return;
    }
    for (std::size_t z = from; z <= end.index; ++z) {
      self(self, m + 1, z, acc + (b[m][z] - b[m][from]));
    }
  };
  rec(rec, 0, start.index, 0.0);
  return best;
}

}  // namespace blpp
