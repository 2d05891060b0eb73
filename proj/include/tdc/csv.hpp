#ifndef TDC_CSV_HPP
#define TDC_CSV_HPP

// Two-column numeric CSV input for the estimators.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tdc/error.hpp"
#include "tdc/types.hpp"

namespace tdc {

/// Column selector: zero-based index or header name.
using CsvColumn = std::variant<std::size_t, std::string>;

enum class CsvHeader { detect, present, absent };

struct CsvOptions {
  CsvColumn x = std::size_t{0};
  CsvColumn y = std::size_t{1};
  CsvHeader header = CsvHeader::detect;
  char delimiter = ',';
  /// Replace each column by its log differences ln(p_t / p_{t-1}).
  bool log_returns = false;
};

struct PairDataset {
  std::vector<Point> points;
  std::string x_name = "x";
  std::string y_name = "y";
  std::string source;

  std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::size_t resolve_column(const CsvColumn& c, const std::vector<std::string>& header, bool has_header) {
  if (const auto* idx = std::get_if<std::size_t>(&c)) return *idx;
  const auto& name = std::get<std::string>(c);
  if (!has_header) throw data_error("column '" + name + "' requested by name but the file has no header row");
  for (std::size_t k = 0; k < header.size(); ++k)
    if (trim(header[k]) == name) return k;
  throw data_error("column '" + name + "' not found in header");
}

inline std::vector<double> log_differences(const std::vector<double>& p, const std::string& column) {
  std::vector<double> out;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!(p[k] > 0.0)) throw data_error("log returns need positive prices; column " + column + " row " + std::to_string(k + 1));
  for (std::size_t k = 1; k < p.size(); ++k) out.push_back(std::log(p[k] / p[k - 1]));
  return out;
}

}  // namespace detail

/// Reads two aligned numeric columns. Blank lines are skipped; rows are
/// numbered from 1 (the header, when present, is row 1) in error messages.
inline PairDataset read_pairs(std::istream& in, const CsvOptions& opt = {}, std::string source = "<input>") {
  PairDataset ds;
  ds.source = std::move(source);
  std::string line;
  std::size_t row = 0;
  bool first = true;
  std::size_t cx = 0;
  std::size_t cy = 0;
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line, opt.delimiter);
    if (first) {
      first = false;
      bool header = opt.header == CsvHeader::present;
      if (opt.header == CsvHeader::detect) {
        const bool named = std::holds_alternative<std::string>(opt.x) || std::holds_alternative<std::string>(opt.y);
        bool numeric = true;
        for (const auto& f : fields) numeric = numeric && detail::parse_double(f).has_value();
        header = named || !numeric;
      }
      cx = detail::resolve_column(opt.x, fields, header);
      cy = detail::resolve_column(opt.y, fields, header);
      if (header) {
        if (cx >= fields.size() || cy >= fields.size())
          throw data_error("row " + std::to_string(row) + ": header has " + std::to_string(fields.size()) +
                           " columns, column " + std::to_string(std::max(cx, cy)) + " requested");
        ds.x_name = std::string(detail::trim(fields[cx]));
        ds.y_name = std::string(detail::trim(fields[cy]));
        continue;
      }
      ds.x_name = "column " + std::to_string(cx);
      ds.y_name = "column " + std::to_string(cy);
    }
    if (cx >= fields.size() || cy >= fields.size())
      throw data_error("row " + std::to_string(row) + ": " + std::to_string(fields.size()) + " columns, column " +
                       std::to_string(std::max(cx, cy)) + " requested");
    const auto x = detail::parse_double(fields[cx]);
    const auto y = detail::parse_double(fields[cy]);
    for (const auto& [v, c] : {std::pair{x, cx}, std::pair{y, cy}}) {
      if (!v)
        throw data_error("row " + std::to_string(row) + ": non-numeric value '" +
                         std::string(detail::trim(fields[c])) + "' in column " + std::to_string(c));
      if (!std::isfinite(*v))
        throw data_error("row " + std::to_string(row) + ": non-finite value in column " + std::to_string(c));
    }
    xs.push_back(*x);
    ys.push_back(*y);
  }
  if (opt.log_returns) {
    xs = detail::log_differences(xs, ds.x_name);
    ys = detail::log_differences(ys, ds.y_name);
  }
  ds.points.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) ds.points.push_back({xs[k], ys[k]});
  return ds;
}

inline PairDataset read_pairs_file(const std::string& path, const CsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  return read_pairs(in, opt, path);
}

/// Writes a header row and the pairs at round-trip precision.
inline void write_pairs(std::ostream& out, const PairDataset& ds, char delimiter = ',') {
  out << ds.x_name << delimiter << ds.y_name << '\n';
  char buf[64];
  for (const auto& p : ds.points) {
    std::snprintf(buf, sizeof buf, "%.17g%c%.17g\n", p.x, delimiter, p.y);
    out << buf;
  }
}

}  // namespace tdc

#endif  // TDC_CSV_HPP
