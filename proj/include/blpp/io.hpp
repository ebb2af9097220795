#pragma once

// CSV tables, standalone SVG plots and file digests.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "blpp/error.hpp"

namespace blpp::io {

/// Fixed-column numeric table; one CSV file per estimator.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size())
      throw PreconditionError("table " + name + ": row has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& c) const {
    const auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw InputError("table " + name + " has no column '" + c + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  bool has(const std::string& c) const {
    return std::find(columns.begin(), columns.end(), c) != columns.end();
  }

  std::vector<double> values(const std::string& c) const {
    const std::size_t k = column(c);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
  }
};

/// Shortest round-trip decimal: 17 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw InputError(where + ": '" + s + "' is not a number");
  return v;
}

}  // namespace detail

inline Table parse_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  Table t;
  t.name = name;
  if (!std::getline(in, line) || line.empty()) throw InputError(name + ": missing header row");
  if (line.back() == '\r') line.pop_back();
  t.columns = detail::split(line);
  for (const auto& c : t.columns)
    if (c.empty()) throw InputError(name + ": empty column name");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != t.columns.size())
      throw InputError(where + ": expected " + std::to_string(t.columns.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(detail::parse_number(c, where));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.stem().string());
}

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::string y_column;
  std::string lo_column;         // optional error bar bounds
  std::string hi_column;
  std::string reference_column;  // optional dashed overlay, shape only
  bool log_log = false;
};

/// Picks columns for the tables this tool writes: tail curves
/// (level, probability, lo, hi) and scale fits (eps, median).
inline PlotSpec default_plot(const Table& t, bool log_log) {
  PlotSpec p;
  p.title = t.name;
  p.log_log = log_log;
  if (t.has("level") && t.has("probability")) {
    p.x_column = "level";
    p.y_column = "probability";
    if (t.has("lo") && t.has("hi")) {
      p.lo_column = "lo";
      p.hi_column = "hi";
    }
    if (t.has("reference")) p.reference_column = "reference";
    return p;
  }
  if (t.has("eps") && t.has("median")) {
    p.x_column = "eps";
    p.y_column = "median";
    return p;
  }
  if (t.columns.size() < 2) throw InputError(t.name + ": need at least two columns to plot");
  p.x_column = t.columns[0];
  p.y_column = t.columns[1];
  return p;
}

namespace detail {

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log2 = false;
  std::vector<double> ticks;
  std::vector<std::string> labels;

  double map(double v) const {
    const double a = log2 ? std::log2(v) : v;
    return (a - lo) / (hi - lo);
  }
};

inline Axis make_axis(const std::vector<double>& vals, bool log2) {
  Axis ax;
  ax.log2 = log2;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : vals) {
    if (!std::isfinite(v) || (log2 && !(v > 0.0))) continue;
    const double a = log2 ? std::log2(v) : v;
    mn = std::min(mn, a);
    mx = std::max(mx, a);
  }
  if (!std::isfinite(mn)) {
    mn = 0.0;
    mx = 1.0;
  }
  if (log2) {
    ax.lo = std::floor(mn);
    ax.hi = std::ceil(mx);
    if (ax.hi <= ax.lo) ax.hi = ax.lo + 1.0;
    for (double e = ax.lo; e <= ax.hi + 1e-9; e += 1.0) {
      ax.ticks.push_back(e);
      const int k = static_cast<int>(e);
      ax.labels.push_back(k >= 0 ? std::to_string(1LL << std::min(k, 62)) : "2^" + std::to_string(k));
    }
    return ax;
  }
  if (mx <= mn) {
    mn -= 0.5;
    mx += 0.5;
  }
  const double raw = (mx - mn) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  ax.lo = std::floor(mn / step) * step;
  ax.hi = std::ceil(mx / step) * step;
  for (double t = ax.lo; t <= ax.hi + 0.5 * step; t += step) {
    const double clean = std::abs(t) < 1e-12 * step ? 0.0 : t;
    ax.ticks.push_back(clean);
    ax.labels.push_back(tick_label(clean));
  }
  return ax;
}

}  // namespace detail

inline std::string render_svg(const Table& t, const PlotSpec& spec) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  std::vector<double> xs, ys, lo, hi, ref;
  if (!t.rows.empty()) {
    xs = t.values(spec.x_column);
    ys = t.values(spec.y_column);
    if (!spec.lo_column.empty()) lo = t.values(spec.lo_column);
    if (!spec.hi_column.empty()) hi = t.values(spec.hi_column);
    if (!spec.reference_column.empty()) ref = t.values(spec.reference_column);
  }
  std::vector<double> yall = ys;
  yall.insert(yall.end(), lo.begin(), lo.end());
  yall.insert(yall.end(), hi.begin(), hi.end());
  yall.insert(yall.end(), ref.begin(), ref.end());
  const detail::Axis ax = detail::make_axis(xs, spec.log_log);
  const detail::Axis ay = detail::make_axis(yall, spec.log_log);
  auto px = [&](double v) { return L + pw * ax.map(v); };
  auto py = [&](double v) { return T + ph * (1.0 - ay.map(v)); };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_log || (x > 0.0 && y > 0.0));
  };

  using detail::fixed;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << fixed(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" << detail::escape(spec.title) << "</text>\n";
  s << "<g stroke=\"black\" fill=\"none\">\n";
  s << "<line x1=\"" << fixed(L) << "\" y1=\"" << fixed(T + ph) << "\" x2=\"" << fixed(L + pw)
    << "\" y2=\"" << fixed(T + ph) << "\"/>\n";
  s << "<line x1=\"" << fixed(L) << "\" y1=\"" << fixed(T) << "\" x2=\"" << fixed(L) << "\" y2=\""
    << fixed(T + ph) << "\"/>\n";
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < ax.ticks.size(); ++i) {
    const double x = L + pw * (ax.ticks[i] - ax.lo) / (ax.hi - ax.lo);
    s << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(T + ph) << "\" x2=\"" << fixed(x)
      << "\" y2=\"" << fixed(T + ph + 5) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(T + ph + 18) << "\" text-anchor=\"middle\">"
      << detail::escape(ax.labels[i]) << "</text>\n";
  }
  for (std::size_t i = 0; i < ay.ticks.size(); ++i) {
    const double y = T + ph * (1.0 - (ay.ticks[i] - ay.lo) / (ay.hi - ay.lo));
    s << "<line x1=\"" << fixed(L - 5) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(L)
      << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fixed(L - 8) << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">"
      << detail::escape(ay.labels[i]) << "</text>\n";
  }
  s << "<text x=\"" << fixed(L + pw / 2) << "\" y=\"" << fixed(H - 10)
    << "\" text-anchor=\"middle\">" << detail::escape(spec.x_column) << "</text>\n";
  s << "<text x=\"16\" y=\"" << fixed(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fixed(T + ph / 2) << ")\">" << detail::escape(spec.y_column) << "</text>\n";
  s << "</g>\n";

  if (!ref.empty()) {
    s << "<polyline fill=\"none\" stroke=\"gray\" stroke-dasharray=\"5,4\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], ref[i])) continue;
      s << (first ? "" : " ") << fixed(px(xs[i])) << ',' << fixed(py(ref[i]));
      first = false;
    }
    s << "\"/>\n<text x=\"" << fixed(L + pw - 4) << "\" y=\"" << fixed(T + 12)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"gray\">"
         "reference (shape only)</text>\n";
  }
  if (!lo.empty() && !hi.empty()) {
    s << "<g stroke=\"steelblue\">\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], lo[i]) || !usable(xs[i], hi[i])) continue;
      const double x = px(xs[i]);
      s << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(py(lo[i])) << "\" x2=\"" << fixed(x)
        << "\" y2=\"" << fixed(py(hi[i])) << "\"/>\n";
    }
    s << "</g>\n";
  }
  s << "<g fill=\"steelblue\">\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!usable(xs[i], ys[i])) continue;
    s << "<circle cx=\"" << fixed(px(xs[i])) << "\" cy=\"" << fixed(py(ys[i])) << "\" r=\"3\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace blpp::io
