#pragma once

// Tabular binary-labeled data: CSV loading, [-1,1] feature scaling,
// synthetic Gaussian generation, and stratified splitting. Labels are
// always {-1,+1} with the positive class being the minority by convention.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imbcal/common.hpp"

namespace imbcal {

struct Dataset {
  std::vector<std::vector<double>> features;  // row-major, rectangular
  std::vector<int> labels;                    // -1 or +1, one per row
  std::vector<std::string> feature_names;

  std::size_t rows() const { return features.size(); }
  std::size_t dims() const { return features.empty() ? feature_names.size() : features[0].size(); }

  std::size_t count(int label) const {
    std::size_t n = 0;
    for (int y : labels)
      if (y == label) ++n;
    return n;
  }
};

struct ScaleParams {
  std::vector<double> min;
  std::vector<double> max;
};

struct SyntheticSpec {
  std::vector<double> mu;   // class means are -mu (label -1) and +mu (label +1)
  std::size_t n_neg = 1;
  std::size_t n_pos = 1;
  std::uint64_t seed = 0;
};

struct SplitSpec {
  std::size_t train_neg = 0;
  std::size_t train_pos = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

inline bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

// Loads a CSV with a header row. Rows with any empty cell are dropped
// (count reported through dropped_rows); the row whose label-column value
// equals positive_label maps to +1, all other label values to -1.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& positive_label,
                        const std::vector<std::string>& drop_columns = {},
                        std::size_t* dropped_rows = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::size_t label_idx = header.size();
  std::set<std::size_t> skip;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) label_idx = j;
    for (const auto& dc : drop_columns)
      if (header[j] == dc) skip.insert(j);
  }
  if (label_idx == header.size()) throw DataError("missing label column: " + label_column);
  skip.insert(label_idx);

  Dataset d;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (!skip.count(j)) d.feature_names.push_back(header[j]);

  std::size_t dropped = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    bool missing = false;
    for (const auto& c : cells)
      if (c.empty()) missing = true;
    if (missing) {
      ++dropped;
      continue;
    }
    std::vector<double> row;
    row.reserve(d.feature_names.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (skip.count(j)) continue;
      double v;
      if (!detail::parse_double(cells[j], v))
        throw DataError("row " + std::to_string(lineno) + ", column '" + header[j] +
                        "': non-numeric value '" + cells[j] + "'");
      row.push_back(v);
    }
    d.features.push_back(std::move(row));
    d.labels.push_back(cells[label_idx] == positive_label ? 1 : -1);
  }
  if (dropped_rows) *dropped_rows = dropped;
  if (d.rows() == 0) throw DataError("no usable rows in " + path);
  if (d.count(1) == 0 || d.count(-1) == 0)
    throw DataError("only one class present in " + path);
  return d;
}

inline ScaleParams fit_scale(const Dataset& d) {
  if (d.rows() == 0) throw std::invalid_argument("fit_scale: empty dataset");
  const std::size_t dim = d.dims();
  ScaleParams p;
  p.min.assign(dim, HUGE_VAL);
  p.max.assign(dim, -HUGE_VAL);
  for (const auto& row : d.features)
    for (std::size_t j = 0; j < dim; ++j) {
      p.min[j] = std::min(p.min[j], row[j]);
      p.max[j] = std::max(p.max[j], row[j]);
    }
  return p;
}

// Affine map per feature: fitting-set min -> -1, max -> +1. Constant
// features map to 0. Unseen values may land outside [-1,1].
inline Dataset apply_scale(Dataset d, const ScaleParams& p) {
  const std::size_t dim = d.dims();
  if (p.min.size() != dim || p.max.size() != dim)
    throw std::invalid_argument("apply_scale: dimension mismatch");
  for (auto& row : d.features)
    for (std::size_t j = 0; j < dim; ++j) {
      const double range = p.max[j] - p.min[j];
      row[j] = range == 0.0 ? 0.0 : -1.0 + 2.0 * (row[j] - p.min[j]) / range;
    }
  return d;
}

// Draws n_neg rows from Normal(-mu, I) then n_pos rows from Normal(+mu, I),
// feature-by-feature within each row. Deterministic per seed (per build).
inline Dataset gen_gaussian(const SyntheticSpec& s) {
  if (s.n_neg < 1 || s.n_pos < 1)
    throw std::invalid_argument("gen_gaussian: class counts must be >= 1");
  if (s.mu.empty()) throw std::invalid_argument("gen_gaussian: mu must be non-empty");
  Rng rng(s.seed);
  Dataset d;
  const std::size_t dim = s.mu.size();
  for (std::size_t j = 0; j < dim; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  d.features.reserve(s.n_neg + s.n_pos);
  d.labels.reserve(s.n_neg + s.n_pos);
  for (std::size_t i = 0; i < s.n_neg + s.n_pos; ++i) {
    const bool pos = i >= s.n_neg;
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j)
      row[j] = rng.normal() + (pos ? s.mu[j] : -s.mu[j]);
    d.features.push_back(std::move(row));
    d.labels.push_back(pos ? 1 : -1);
  }
  return d;
}

// Per-class sampling without replacement; the remainder of each class goes
// to the test set. Row order in each output: negatives then positives.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitSpec& s) {
  std::vector<std::size_t> neg_idx, pos_idx;
  for (std::size_t i = 0; i < d.rows(); ++i)
    (d.labels[i] == 1 ? pos_idx : neg_idx).push_back(i);
  if (s.train_neg > neg_idx.size())
    throw DataError("stratified_split: requested " + std::to_string(s.train_neg) +
                    " negatives, only " + std::to_string(neg_idx.size()) + " available");
  if (s.train_pos > pos_idx.size())
    throw DataError("stratified_split: requested " + std::to_string(s.train_pos) +
                    " positives, only " + std::to_string(pos_idx.size()) + " available");

  Rng rng(s.seed);
  rng.shuffle(neg_idx);
  rng.shuffle(pos_idx);

  Dataset train, test;
  train.feature_names = test.feature_names = d.feature_names;
  // Two passes per class keep each output grouped negatives-then-positives.
  auto emit = [&](bool to_train) {
    for (int cls = 0; cls < 2; ++cls) {
      const auto& idx = cls == 0 ? neg_idx : pos_idx;
      const std::size_t take = cls == 0 ? s.train_neg : s.train_pos;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if ((k < take) != to_train) continue;
        Dataset& dst = to_train ? train : test;
        dst.features.push_back(d.features[idx[k]]);
        dst.labels.push_back(d.labels[idx[k]]);
      }
    }
  };
  emit(true);
  emit(false);
  return {train, test};
}

}  // namespace imbcal
