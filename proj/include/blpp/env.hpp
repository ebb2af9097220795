#pragma once

// Discretized Brownian environment B(k, origin + j*step), one independent
// two-sided Brownian motion per integer line k, anchored at B(k, origin) = 0.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blpp/error.hpp"
#include "blpp/rng.hpp"

namespace blpp {

/// n^{2/3}, computed so that perfect cubes come out exact.
inline double pow_two_thirds(double n) { return std::cbrt(n * n); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
};

struct Snap {
  std::size_t index = 0;
  double error = 0.0;  // snapped point minus requested point, unscaled units
};

struct GridSpec {
  double origin = 0.0;
  double step = 1.0;
  std::size_t count = 2;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("grid step must be positive");
    if (count < 2) throw ConfigError("grid needs at least two points");
    if (!std::isfinite(origin)) throw ConfigError("grid origin must be finite");
  }

  double point(std::size_t j) const { return origin + static_cast<double>(j) * step; }
  double last() const { return point(count - 1); }

  bool covers(double u) const {
    return u >= origin - 0.5 * step && u <= last() + 0.5 * step;
  }

  /// Nearest grid point; throws CoverageError outside [origin, last] +- step/2.
  Snap snap(double u) const {
    if (!covers(u)) {
      throw CoverageError("point " + std::to_string(u) + " outside grid [" + std::to_string(origin) +
                          ", " + std::to_string(last()) + "]");
    }
    const double r = std::round((u - origin) / step);
    const auto j = static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(count - 1)));
    return {j, point(j) - u};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Anything the DP kernels can read Brownian lines from.
template <class S>
concept LineSource = requires(const S& s, std::size_t k, std::vector<double>& scratch) {
  { s.lines() } -> std::convertible_to<std::size_t>;
  { s.grid() } -> std::convertible_to<const GridSpec&>;
  { s.line(k, scratch) } -> std::convertible_to<std::span<const double>>;
};

enum class Storage { materialized, streamed };

class Environment {
 public:
  Environment(std::uint64_t master_seed, std::size_t lines, GridSpec grid,
              Storage storage = Storage::materialized)
      : seed_(master_seed), lines_(lines), grid_(grid), storage_(storage) {
    grid_.validate();
    if (lines_ < 1) throw ConfigError("environment needs at least one line");
    if (storage_ == Storage::materialized) {
      values_.resize(lines_ * grid_.count);
      for (std::size_t k = 0; k < lines_; ++k) {
        generate(k, std::span<double>(values_.data() + k * grid_.count, grid_.count));
      }
    }
  }

  std::size_t lines() const { return lines_; }
  const GridSpec& grid() const { return grid_; }
  std::uint64_t master_seed() const { return seed_; }
  Storage storage() const { return storage_; }

  /// Line k as a view: into the materialized table, or regenerated into scratch.
  std::span<const double> line(std::size_t k, std::vector<double>& scratch) const {
    check_line(k);
    if (storage_ == Storage::materialized) {
      return {values_.data() + k * grid_.count, grid_.count};
    }
    scratch.resize(grid_.count);
    generate(k, scratch);
    return scratch;
  }

  std::vector<double> line_values(std::size_t k) const {
    std::vector<double> scratch;
    const auto view = line(k, scratch);
    return {view.begin(), view.end()};
  }

  /// Per-line key; lines can be regenerated independently and in any order.
  std::uint64_t line_key(std::size_t k) const { return rng::derive(seed_, k); }

 private:
  void check_line(std::size_t k) const {
    if (k >= lines_) {
      throw IndexError("line " + std::to_string(k) + " out of range (lines=" +
                       std::to_string(lines_) + ")");
    }
  }

  void generate(std::size_t k, std::span<double> out) const {
    const rng::NormalStream stream(line_key(k));
    const double sd = std::sqrt(grid_.step);
    out[0] = 0.0;
    constexpr std::size_t kChunk = 512;
    double buf[kChunk];
    std::size_t done = 0;
    const std::size_t increments = grid_.count - 1;
    while (done < increments) {
      const std::size_t m = std::min(kChunk, increments - done);
      stream.fill(done, m, buf);
      for (std::size_t i = 0; i < m; ++i) out[done + i + 1] = out[done + i] + sd * buf[i];
      done += m;
    }
  }

  std::uint64_t seed_;
  std::size_t lines_;
  GridSpec grid_;
  Storage storage_;
  std::vector<double> values_;
};

inline Environment sample_environment(std::uint64_t master_seed, std::size_t lines,
                                      const GridSpec& grid,
                                      Storage storage = Storage::materialized) {
  return Environment(master_seed, lines, grid, storage);
}

inline std::vector<double> line_values(const Environment& env, std::size_t k) {
  return env.line_values(k);
}

/// Explicit per-line values on a grid; used for constructed instances.
class TableEnvironment {
 public:
  TableEnvironment(GridSpec grid, std::vector<std::vector<double>> values)
      : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.empty()) throw ConfigError("table environment needs at least one line");
    for (const auto& v : values_) {
      if (v.size() != grid_.count) throw ConfigError("table line length does not match grid");
    }
  }

  explicit TableEnvironment(const Environment& env) : grid_(env.grid()) {
    for (std::size_t k = 0; k < env.lines(); ++k) values_.push_back(env.line_values(k));
  }

  std::size_t lines() const { return values_.size(); }
  const GridSpec& grid() const { return grid_; }

  std::span<const double> line(std::size_t k, std::vector<double>&) const {
    if (k >= values_.size()) throw IndexError("line out of range");
    return values_[k];
  }

  double& at(std::size_t k, std::size_t j) { return values_.at(k).at(j); }
  double at(std::size_t k, std::size_t j) const { return values_.at(k).at(j); }

 private:
  GridSpec grid_;
  std::vector<std::vector<double>> values_;
};

/// Point-reflected view: line k reads original line (lines-1-k), read right
/// to left and negated. Forward DP on this view computes backward quantities.
template <LineSource S>
class Reflected {
 public:
  explicit Reflected(const S& base) : base_(&base) {
    const GridSpec& g = base.grid();
    grid_ = {-g.last(), g.step, g.count};
  }

  std::size_t lines() const { return base_->lines(); }
  const GridSpec& grid() const { return grid_; }

  std::span<const double> line(std::size_t k, std::vector<double>& scratch) const {
    std::vector<double> tmp;
    const auto src = base_->line(base_->lines() - 1 - k, tmp);
    scratch.resize(src.size());
    const std::size_t m = src.size();
    for (std::size_t j = 0; j < m; ++j) scratch[j] = -src[m - 1 - j];
    return scratch;
  }

  std::size_t mirror_index(std::size_t j) const { return grid_.count - 1 - j; }
  std::size_t mirror_line(std::size_t k) const { return base_->lines() - 1 - k; }

 private:
  const S* base_;
  GridSpec grid_;
};

/// Grid covering every unscaled endpoint n*t + 2 n^{2/3} x over the given
/// scaled ranges, with adjacent points `scaled_resolution` apart in x.
/// The origin is a multiple of the step so that 0 is a grid point.
inline GridSpec required_grid(long long n, Interval scaled_x, Interval t_range,
                              double scaled_resolution) {
  if (n < 1) throw PreconditionError("required_grid: n must be >= 1");
  if (scaled_x.lo > scaled_x.hi || t_range.lo > t_range.hi)
    throw PreconditionError("required_grid: empty range");
  if (!(scaled_resolution > 0.0)) throw PreconditionError("required_grid: resolution must be > 0");
  const double nd = static_cast<double>(n);
  const double width = 2.0 * pow_two_thirds(nd);
  const double step = width * scaled_resolution;
  const double lo = nd * t_range.lo + width * scaled_x.lo;
  const double hi = nd * t_range.hi + width * scaled_x.hi;
  // Small slack so exact multiples do not round to the wrong side.
  const double first = std::floor(lo / step + 1e-9);
  const double last = std::ceil(hi / step - 1e-9);
  const auto count = static_cast<std::size_t>(last - first) + 1;
  return {first * step, step, std::max<std::size_t>(count, 2)};
}

}  // namespace blpp
