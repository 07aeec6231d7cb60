// Copyright 2026 The skewent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File formats used by the command-line tool.
//
// Distribution spec (JSON):
//   { "family": "cfusn", "mu": "mu.csv", "Sigma": "sigma.csv", "Delta": [[0.5], [0.3]] }
// Each parameter is a number, an inline array (vector) or array of arrays
// (matrix, row major), or a string naming a CSV file relative to the JSON
// file. Families and their keys:
//   normal, lognormal        mu, sigma | sigma2
//   sn, lsn                  mu, sigma | sigma2, alpha
//   lsn (multivariate)       mu, Sigma, alpha
//   mvnormal                 mu, Sigma
//   cfusn, lcfusn            Delta, and optionally mu, Sigma (default 0, I)
// plus an optional "partition": n1 used by mutual information.
//
// CSV matrices: comma separated numbers, one row per line. Blank lines and
// lines starting with '#' are skipped; a first line whose first field starts
// with a letter is taken as a header.

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skewent/distributions.hpp"
#include "skewent/error.hpp"
#include "skewent/information.hpp"
#include "skewent/numerics.hpp"
#include "skewent/version.hpp"

namespace skewent::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline Error parse_error(const std::string& source, std::size_t line, const std::string& what) {
  return Error(ErrorKind::Parse, source + ":" + std::to_string(line) + ": " + what);
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, path.string() + ":0: cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline Matrix parse_csv_matrix(std::string_view text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool first_content = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (first_content) {
      first_content = false;
      const char c = line.front();
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
        if (!(line.starts_with("inf") || line.starts_with("nan"))) continue;  // header
      }
    }
    std::vector<double> row;
    std::size_t col = 0;
    while (true) {
      const auto comma = line.find(',');
      const auto field = line.substr(0, comma);
      ++col;
      const auto v = parse_double(field);
      if (!v) throw parse_error(source, line_no, "column " + std::to_string(col) + ": '" + std::string(trim(field)) +
                                                     "' is not a number");
      row.push_back(*v);
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw parse_error(source, line_no, "expected " + std::to_string(rows.front().size()) + " columns, found " +
                                             std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(source, line_no, "no numeric rows");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

inline Matrix read_csv_matrix(const fs::path& path) { return parse_csv_matrix(read_text(path), path.string()); }

/// 17 significant digits: enough for every double to round-trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<std::string, double, std::uint64_t>;

/// Comma-separated output with a header row and LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) {
    columns_ = names.size();
    write_line(names);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw Error(ErrorKind::DimensionMismatch, "CSV row does not match the header");
    std::vector<std::string> text;
    text.reserve(cells.size());
    for (const auto& c : cells)
      text.push_back(std::visit(Overloaded{[](const std::string& s) { return s; },
                                           [](double d) { return format_double(d); },
                                           [](std::uint64_t u) { return std::to_string(u); }},
                                c));
    write_line(text);
  }

 private:
  void write_line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_ = 0;
};

// ---------------------------------------------------------------------------
// Grids

/// "start:stop:step" (inclusive of stop up to rounding) or "a,b,c".
/// Points that land within 1e-9 steps of zero are snapped to exactly 0.
inline std::vector<double> parse_grid(std::string_view text, const std::string& what = "grid") {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::string_view rest = text;
    while (true) {
      const auto colon = rest.find(':');
      const auto v = parse_double(rest.substr(0, colon));
      if (!v) throw Error(ErrorKind::Parse, what + ": '" + std::string(text) + "' is not start:stop:step");
      parts.push_back(*v);
      if (colon == std::string_view::npos) break;
      rest = rest.substr(colon + 1);
    }
    if (parts.size() != 3) throw Error(ErrorKind::Parse, what + ": expected start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!(step > 0.0) || stop < start)
      throw Error(ErrorKind::Parse, what + ": need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw Error(ErrorKind::Parse, what + ": more than 10^6 points");
    for (std::size_t i = 0; i < count; ++i) {
      double v = start + static_cast<double>(i) * step;
      if (std::abs(v) < 1e-9 * step) v = 0.0;
      out.push_back(v);
    }
    return out;
  }
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto v = parse_double(rest.substr(0, comma));
    if (!v) throw Error(ErrorKind::Parse, what + ": '" + std::string(text) + "' is not a number list");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distribution specs

struct LoadedSpec {
  std::string source;
  std::string family;
  DistributionSpec dist;
  /// Set for "lsn": the multivariate log-skew-normal form.
  std::optional<LsnSpec> lsn;
  std::optional<std::size_t> partition;
};

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

/// Line of the first occurrence of "key" in the JSON text (1 if absent).
inline std::size_t line_of_key(std::string_view text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string_view::npos ? 1 : line_of_offset(text, pos);
}

class SpecReader {
 public:
  SpecReader(std::string_view text, fs::path base, std::string source)
      : text_(text), base_(std::move(base)), source_(std::move(source)) {
    try {
      doc_ = json::parse(text_);
    } catch (const json::parse_error& e) {
      throw parse_error(source_, line_of_offset(text_, e.byte == 0 ? 0 : e.byte - 1), "invalid JSON: " + strip(e.what()));
    }
    if (!doc_.is_object()) throw parse_error(source_, 1, "top level must be a JSON object");
  }

  [[nodiscard]] const json& doc() const { return doc_; }
  [[nodiscard]] const std::string& source() const { return source_; }

  [[nodiscard]] std::size_t line(const std::string& key) const { return line_of_key(text_, key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw parse_error(source_, line(key), what);
  }

  [[nodiscard]] bool has(const std::string& key) const { return doc_.contains(key); }

  void allow_only(std::initializer_list<std::string> keys) const {
    for (const auto& [k, v] : doc_.items()) {
      bool known = k == "family" || k == "partition";
      for (const auto& a : keys) known = known || a == k;
      if (!known) fail(k, "unknown key '" + k + "' for family '" + doc_.value("family", "") + "'");
    }
  }

  [[nodiscard]] Matrix matrix(const std::string& key) const {
    if (!has(key)) fail("family", "missing key '" + key + "'");
    const json& v = doc_.at(key);
    if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
    if (v.is_string()) {
      const fs::path p = base_ / v.get<std::string>();
      return read_csv_matrix(p);
    }
    if (v.is_array() && !v.empty()) {
      if (v.front().is_array()) {
        const auto rows = v.size();
        const auto cols = v.front().size();
        Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
          if (!v[i].is_array() || v[i].size() != cols) fail(key, "'" + key + "' rows must have equal length");
          for (std::size_t j = 0; j < cols; ++j) {
            if (!v[i][j].is_number()) fail(key, "'" + key + "' entries must be numbers");
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
          }
        }
        return out;
      }
      Matrix out(static_cast<Eigen::Index>(v.size()), 1);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(key, "'" + key + "' entries must be numbers");
        out(static_cast<Eigen::Index>(i), 0) = v[i].get<double>();
      }
      return out;
    }
    fail(key, "'" + key + "' must be a number, an array or a CSV path");
  }

  [[nodiscard]] double scalar(const std::string& key) const {
    const Matrix m = matrix(key);
    if (m.size() != 1) fail(key, "'" + key + "' must be a single number");
    return m(0, 0);
  }

  [[nodiscard]] Vector vector(const std::string& key) const {
    const Matrix m = matrix(key);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    fail(key, "'" + key + "' must be a vector (one row or one column)");
  }

  /// Scale from "sigma" or "sigma2" (variance).
  [[nodiscard]] double sigma() const {
    if (has("sigma") && has("sigma2")) fail("sigma2", "give either 'sigma' or 'sigma2', not both");
    if (has("sigma2")) {
      const double v = scalar("sigma2");
      if (!(v > 0.0)) fail("sigma2", "'sigma2' must be positive");
      return std::sqrt(v);
    }
    return scalar("sigma");
  }

  /// Runs `build`, prefixing any library error with the line of `key`.
  template <class F>
  auto at(const std::string& key, F&& build) const {
    try {
      return build();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Parse) throw;
      throw Error(e.kind(), source_ + ":" + std::to_string(line(key)) + ": " + e.message());
    }
  }

 private:
  static std::string strip(const std::string& what) {
    const auto pos = what.find("]: ");
    return pos == std::string::npos ? what : what.substr(pos + 3);
  }

  std::string_view text_;
  fs::path base_;
  std::string source_;
  json doc_;
};

}  // namespace detail

/// Parses a spec document; CSV paths resolve against `base`.
inline LoadedSpec parse_spec(std::string_view text, const fs::path& base, const std::string& source,
                             const MvnOptions& cdf_options = {}) {
  detail::SpecReader r(text, base, source);
  if (!r.has("family") || !r.doc().at("family").is_string()) r.fail("family", "missing string key 'family'");
  LoadedSpec out{source, r.doc().at("family").get<std::string>(), Normal{}, std::nullopt, std::nullopt};
  const std::string& f = out.family;

  if (r.has("partition")) {
    const json& p = r.doc().at("partition");
    if (!p.is_number_integer() || p.get<long long>() < 1) r.fail("partition", "'partition' must be a positive integer");
    out.partition = p.get<std::size_t>();
  }

  if (f == "normal" || f == "lognormal") {
    r.allow_only({"mu", "sigma", "sigma2"});
    const double mu = r.scalar("mu");
    const double sigma = r.sigma();
    out.dist = r.at(r.has("sigma2") ? "sigma2" : "sigma", [&]() -> DistributionSpec {
      if (f == "normal") return make_normal(mu, sigma);
      return make_lognormal(mu, sigma);
    });
  } else if (f == "sn" || (f == "lsn" && !r.has("Sigma"))) {
    r.allow_only({"mu", "sigma", "sigma2", "alpha"});
    const double mu = r.scalar("mu");
    const double sigma = r.sigma();
    const double alpha = r.scalar("alpha");
    out.dist = r.at(r.has("sigma2") ? "sigma2" : "sigma", [&]() -> DistributionSpec {
      if (f == "sn") return make_skew_normal(mu, sigma, alpha);
      return make_log_skew_normal(mu, sigma, alpha);
    });
    if (f == "lsn")
      out.lsn = LsnSpec::create(make_vector({mu}), Matrix::Constant(1, 1, sigma * sigma), make_vector({alpha}));
  } else if (f == "lsn") {
    r.allow_only({"mu", "Sigma", "alpha"});
    const Vector mu = r.vector("mu");
    const Matrix sigma = r.matrix("Sigma");
    const Vector alpha = r.vector("alpha");
    out.lsn = r.at("Sigma", [&] { return LsnSpec::create(mu, sigma, alpha); });
    out.dist = out.lsn->as_lcfusn();
  } else if (f == "mvnormal") {
    r.allow_only({"mu", "Sigma"});
    const Vector mu = r.vector("mu");
    const Matrix sigma = r.matrix("Sigma");
    out.dist = r.at("Sigma", [&] { return MvNormal{LocationScale::create(mu, sigma)}; });
  } else if (f == "cfusn" || f == "lcfusn") {
    r.allow_only({"mu", "Sigma", "Delta"});
    const Matrix delta = r.matrix("Delta");
    const auto n = delta.rows();
    const Vector mu = r.has("mu") ? r.vector("mu") : Vector::Zero(n);
    const Matrix sigma = r.has("Sigma") ? r.matrix("Sigma") : Matrix::Identity(n, n);
    const auto skew = r.at("Delta", [&] { return SkewnessMatrix::create(delta, cdf_options); });
    const auto ls = r.at(r.has("Sigma") ? "Sigma" : "Delta", [&] {
      if (static_cast<std::size_t>(mu.size()) != skew.rows())
        throw Error(ErrorKind::DimensionMismatch, "mu has " + std::to_string(mu.size()) + " entries but Delta has " +
                                                      std::to_string(skew.rows()) + " rows");
      return LocationScale::create(mu, sigma);
    });
    if (f == "cfusn")
      out.dist = Cfusn{ls, skew};
    else
      out.dist = Lcfusn{ls, skew};
  } else {
    r.fail("family", "unknown family '" + f + "' (expected normal, lognormal, sn, lsn, mvnormal, cfusn, lcfusn)");
  }
  return out;
}

inline LoadedSpec load_spec(const fs::path& path, const MvnOptions& cdf_options = {}) {
  return parse_spec(read_text(path), path.parent_path(), path.string(), cdf_options);
}

// ---------------------------------------------------------------------------
// Run manifest

/// Everything needed to regenerate a result file: the full argument list,
/// the seed and sample count, the spec paths, tool version and wall time.
struct RunManifest {
  std::string command;
  std::vector<std::string> spec_files;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  std::string tool_version = kVersion;
  std::string timestamp;
  std::string output;
  std::vector<std::string> args;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const RunManifest& m) {
  return json{{"command", m.command},   {"spec_files", m.spec_files}, {"seed", m.seed},
              {"n_samples", m.n_samples}, {"tool_version", m.tool_version}, {"timestamp", m.timestamp},
              {"output", m.output},     {"args", m.args}};
}

inline RunManifest manifest_from_json(const json& j, const std::string& source) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.spec_files = j.at("spec_files").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_samples = j.at("n_samples").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.output = j.at("output").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, source + ":1: malformed manifest: " + e.what());
  }
}

inline void write_manifest(const RunManifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, path.string() + ":0: cannot write manifest");
  out << to_json(m).dump(2) << '\n';
}

inline RunManifest read_manifest(const fs::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(detail::line_of_offset(text, e.byte)) +
                                      ": invalid JSON");
  }
  return manifest_from_json(j, path.string());
}

}  // namespace skewent::io
