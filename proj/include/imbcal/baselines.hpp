#pragma once

// Reference rebalancing methods: SMOTE oversampling, empirical cost-scan
// thresholding, and Bayes-minimum-risk decisions over (Platt-calibrated)
// probabilities. Balanced sample weights live in models.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "imbcal/common.hpp"
#include "imbcal/dataset.hpp"

namespace imbcal {

struct CostPair {
  double cost_fp = 1.0;
  double cost_fn = 1.0;
};

struct PlattParams {
  double slope = 1.0;
  double intercept = 0.0;

  double probability(double score) const {
    return 1.0 / (1.0 + std::exp(-(slope * score + intercept)));
  }
};

// Oversample the minority class to parity by interpolating each base point
// toward one of its k nearest minority neighbors. Base points are visited
// round-robin in dataset order; the neighbor and the interpolation factor
// come from the seeded generator.
inline Dataset smote(const Dataset& train, std::size_t k, std::uint64_t seed) {
  const std::size_t n_pos = train.count(1);
  const std::size_t n_neg = train.count(-1);
  const int minority = n_pos <= n_neg ? 1 : -1;
  const std::size_t n_min = std::min(n_pos, n_neg);
  const std::size_t n_maj = std::max(n_pos, n_neg);
  if (n_min < 2) throw DataError("smote: minority class needs >= 2 samples");
  if (k < 1) throw std::invalid_argument("smote: k must be >= 1");
  k = std::min(k, n_min - 1);

  std::vector<std::size_t> min_idx;
  for (std::size_t i = 0; i < train.rows(); ++i)
    if (train.labels[i] == minority) min_idx.push_back(i);

  // k nearest minority neighbors of each minority point (ties -> lower index).
  std::vector<std::vector<std::size_t>> neighbors(min_idx.size());
  for (std::size_t a = 0; a < min_idx.size(); ++a) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t b = 0; b < min_idx.size(); ++b) {
      if (a == b) continue;
      double d2 = 0.0;
      const auto& xa = train.features[min_idx[a]];
      const auto& xb = train.features[min_idx[b]];
      for (std::size_t f = 0; f < xa.size(); ++f) {
        const double diff = xa[f] - xb[f];
        d2 += diff * diff;
      }
      dist.push_back({d2, b});
    }
    std::sort(dist.begin(), dist.end());
    for (std::size_t j = 0; j < k; ++j) neighbors[a].push_back(dist[j].second);
  }

  Dataset out = train;
  Rng rng(seed);
  for (std::size_t t = 0; t < n_maj - n_min; ++t) {
    const std::size_t a = t % min_idx.size();
    const std::size_t b = neighbors[a][rng.uniform_int(k)];
    const double lambda = rng.uniform();
    const auto& xa = train.features[min_idx[a]];
    const auto& xb = train.features[min_idx[b]];
    std::vector<double> row(xa.size());
    for (std::size_t f = 0; f < xa.size(); ++f) row[f] = xa[f] + lambda * (xb[f] - xa[f]);
    out.features.push_back(std::move(row));
    out.labels.push_back(minority);
  }
  return out;
}

// Scan candidate thresholds (midpoints of sorted unique scores plus
// below-min/above-max sentinels) and return the one minimizing the
// empirical cost; ties break toward the larger threshold.
inline double threshold_search(const std::vector<double>& scores,
                               const std::vector<int>& labels, const CostPair& costs) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("threshold_search: size mismatch");
  if (!(costs.cost_fp > 0.0) || !(costs.cost_fn > 0.0))
    throw std::invalid_argument("threshold_search: costs must be > 0");
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("threshold_search: both classes required");

  std::vector<double> uniq = scores;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<double> cands;
  cands.push_back(uniq.front() - 1.0);
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cands.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  cands.push_back(uniq.back() + 1.0);

  double best_t = cands.front();
  double best_cost = HUGE_VAL;
  for (double t : cands) {
    double cost = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const int pred = scores[i] >= t ? 1 : -1;
      if (pred == 1 && labels[i] == -1) cost += costs.cost_fp;
      if (pred == -1 && labels[i] == 1) cost += costs.cost_fn;
    }
    if (cost < best_cost || (cost == best_cost && t > best_t)) {
      best_cost = cost;
      best_t = t;
    }
  }
  return best_t;
}

// 1-D logistic regression of labels on scores, fit by damped Newton steps.
inline PlattParams platt_fit(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("platt_fit: size mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("platt_fit: both classes required");
  const double lo = *std::min_element(scores.begin(), scores.end());
  const double hi = *std::max_element(scores.begin(), scores.end());
  if (lo == hi) throw DataError("platt_fit: degenerate fit (all scores identical)");

  double a = 0.0, c = 0.0;  // slope, intercept
  const double ridge = 1e-10;
  for (int iter = 0; iter < 100; ++iter) {
    double g_a = 0.0, g_c = 0.0, h_aa = ridge, h_ac = 0.0, h_cc = ridge;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double s = scores[i];
      const double p = 1.0 / (1.0 + std::exp(-(a * s + c)));
      const double target = labels[i] == 1 ? 1.0 : 0.0;
      const double r = p - target;
      const double w = std::max(p * (1.0 - p), 1e-12);
      g_a += r * s;
      g_c += r;
      h_aa += w * s * s;
      h_ac += w * s;
      h_cc += w;
    }
    const double det = h_aa * h_cc - h_ac * h_ac;
    const double da = (h_cc * g_a - h_ac * g_c) / det;
    const double dc = (h_aa * g_c - h_ac * g_a) / det;
    a -= da;
    c -= dc;
    if (!std::isfinite(a) || !std::isfinite(c))
      throw DataError("platt_fit: fit diverged");
    if (std::abs(da) < 1e-12 && std::abs(dc) < 1e-12) break;
  }
  return {a, c};
}

// +1 iff the expected cost of predicting positive is no larger, i.e.
// p >= cost_fp / (cost_fp + cost_fn); the boundary goes to +1.
inline int bmr_decide(double p, const CostPair& costs) {
  if (!(costs.cost_fp > 0.0) || !(costs.cost_fn > 0.0))
    throw std::invalid_argument("bmr_decide: costs must be > 0");
  return p * costs.cost_fn >= (1.0 - p) * costs.cost_fp ? 1 : -1;
}

inline CostPair imbalance_costs(const std::vector<int>& labels) {
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw DataError("imbalance_costs: both classes required");
  return {1.0, static_cast<double>(n_neg) / static_cast<double>(n_pos)};
}

}  // namespace imbcal
