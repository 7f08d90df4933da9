/*
 * Copyright (c) 2026, the sclopt authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sclopt/core.hpp"
#include "sclopt/oracles.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sclopt {

/// Malformed input; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Rows of (0-based index, value) pairs with strictly increasing indices.
struct SparseDataset {
  using Row = std::vector<std::pair<Index, double>>;
  std::vector<Row> rows;
  std::vector<double> labels;
  Index feature_count = 0;

  std::size_t size() const noexcept { return rows.size(); }
  bool operator==(const SparseDataset&) const = default;

  /// N x max(feature_count, min_features) sparse matrix.
  SparseMatrix to_matrix(Index min_features = 0) const {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t j = 0; j < rows.size(); ++j)
      for (const auto& [i, v] : rows[j]) trip.emplace_back(static_cast<Index>(j), i, v);
    SparseMatrix W(static_cast<Index>(rows.size()), std::max(feature_count, min_features));
    W.setFromTriplets(trip.begin(), trip.end());
    W.makeCompressed();
    return W;
  }

  bool is_binary() const {
    return std::all_of(labels.begin(), labels.end(), [](double y) { return y == 1.0 || y == -1.0; });
  }
};

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/**
 * Parses "label idx:val idx:val ..." lines. Indices are 1-based in the text.
 * '#' starts a comment; blank lines are ignored. When every label is 0 or 1
 * and some label is 0, labels are mapped to -1/+1.
 */
inline SparseDataset parse_libsvm(std::istream& in) {
  SparseDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);

    std::size_t pos = 0;
    auto next_token = [&](std::size_t& col) -> std::string_view {
      while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
      const std::size_t start = pos;
      while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t') ++pos;
      col = start + 1;
      return text.substr(start, pos - start);
    };

    std::size_t col = 0;
    const std::string_view label_tok = next_token(col);
    if (label_tok.empty()) continue;
    double label = 0.0;
    if (!detail::parse_double(label_tok, label))
      throw ParseError("bad label '" + std::string(label_tok) + "'", line_no, col);

    SparseDataset::Row row;
    for (;;) {
      const std::string_view tok = next_token(col);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected index:value", line_no, col);
      long long idx = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto [ip, iec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (idx_tok.empty() || iec != std::errc() || ip != idx_tok.data() + idx_tok.size())
        throw ParseError("bad feature index '" + std::string(idx_tok) + "'", line_no, col);
      if (idx < 1) throw ParseError("feature indices start at 1", line_no, col);
      double val = 0.0;
      if (!detail::parse_double(tok.substr(colon + 1), val))
        throw ParseError("bad feature value '" + std::string(tok.substr(colon + 1)) + "'", line_no, col + colon + 1);
      const Index zero_based = static_cast<Index>(idx - 1);
      if (!row.empty() && zero_based <= row.back().first)
        throw ParseError("feature indices must be strictly increasing", line_no, col);
      row.emplace_back(zero_based, val);
      ds.feature_count = std::max(ds.feature_count, zero_based + 1);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }

  const bool zero_one = std::all_of(ds.labels.begin(), ds.labels.end(), [](double y) { return y == 0.0 || y == 1.0; });
  const bool has_zero = std::any_of(ds.labels.begin(), ds.labels.end(), [](double y) { return y == 0.0; });
  if (zero_one && has_zero)
    for (double& y : ds.labels) y = (y == 0.0) ? -1.0 : 1.0;
  return ds;
}

inline SparseDataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

inline SparseDataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  return parse_libsvm(in);
}

/// Shortest round-trip text for every number; labels +1 are written as "+1".
inline std::string serialize_libsvm(const SparseDataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.rows.size(); ++j) {
    const double y = ds.labels[j];
    out += (y == 1.0) ? std::string("+1") : detail::format_double(y);
    for (const auto& [i, v] : ds.rows[j]) {
      out += ' ';
      out += std::to_string(i + 1);
      out += ':';
      out += detail::format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline LogisticData to_logistic_data(const SparseDataset& ds, bool include_bias = false, Index min_features = 0) {
  if (!ds.is_binary()) throw InvalidArgument("dataset labels are not binary");
  LogisticData d;
  d.samples = ds.to_matrix(min_features);
  d.labels = Eigen::Map<const Vector>(ds.labels.data(), static_cast<Index>(ds.labels.size()));
  d.include_bias = include_bias;
  return d;
}

/// Distinct labels in increasing order; the largest becomes the reference class.
inline MultinomialData to_multinomial_data(const SparseDataset& ds, Index min_features = 0) {
  const std::set<double> classes(ds.labels.begin(), ds.labels.end());
  if (classes.size() < 2) throw InvalidArgument("dataset needs at least two classes");
  const std::vector<double> ordered(classes.begin(), classes.end());
  MultinomialData d;
  d.samples = ds.to_matrix(min_features);
  d.labels = Matrix::Zero(static_cast<Index>(ds.size()), static_cast<Index>(ordered.size() - 1));
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto c = std::lower_bound(ordered.begin(), ordered.end(), ds.labels[j]) - ordered.begin();
    if (c + 1 < static_cast<long>(ordered.size())) d.labels(static_cast<Index>(j), c) = 1.0;
  }
  return d;
}

}  // namespace sclopt
