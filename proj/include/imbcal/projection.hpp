#pragma once

// Per-class statistics of training scores in the projected (1-D score)
// space, with slack-exclusion support. Class 1 is the negative/majority
// class, class 2 the positive/minority class; orientation flips scores so
// class 1's mean sits left of class 2's.

#include <cstddef>
#include <vector>

#include "imbcal/common.hpp"
#include "imbcal/models.hpp"

namespace imbcal {

struct ProjectedSample {
  double score = 0.0;  // s(x) = <phi(x), w>, bias excluded
  int label = 0;       // -1 or +1
  bool excluded = false;
};

struct ClassStats {
  std::size_t n_included = 0;  // N_i
  double proj_mean = 0.0;      // oriented
  double support = 0.0;        // R-bar-hat_i = max |score - mean| over included
};

struct ProjectionStats {
  ClassStats class1;  // label -1
  ClassStats class2;  // label +1
  double d_hat = 0.0;
  int orientation = 1;  // sign applied to raw scores
};

template <class M>
inline std::vector<ProjectedSample> project(const M& model, const Dataset& d) {
  std::vector<ProjectedSample> out;
  const std::vector<double> s = score(model, d.features);
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], d.labels[i], false});
  return out;
}

inline std::vector<ProjectedSample> project(const Model& model, const Dataset& d) {
  std::vector<ProjectedSample> out;
  const std::vector<double> s = model_score(model, d.features);
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], d.labels[i], false});
  return out;
}

inline ProjectionStats compute_stats(const std::vector<ProjectedSample>& samples) {
  double sum1 = 0.0, sum2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  for (const auto& s : samples) {
    if (s.excluded) continue;
    if (s.label == 1) {
      sum2 += s.score;
      ++n2;
    } else {
      sum1 += s.score;
      ++n1;
    }
  }
  if (n1 < 2 || n2 < 2)
    throw DataError("compute_stats: each class needs >= 2 included samples");
  const double mean1_raw = sum1 / static_cast<double>(n1);
  const double mean2_raw = sum2 / static_cast<double>(n2);

  double sup1 = 0.0, sup2 = 0.0;
  for (const auto& s : samples) {
    if (s.excluded) continue;
    if (s.label == 1)
      sup2 = std::max(sup2, std::abs(s.score - mean2_raw));
    else
      sup1 = std::max(sup1, std::abs(s.score - mean1_raw));
  }

  ProjectionStats st;
  st.orientation = mean1_raw <= mean2_raw ? 1 : -1;
  const double o = static_cast<double>(st.orientation);
  st.class1 = {n1, o * mean1_raw, sup1};
  st.class2 = {n2, o * mean2_raw, sup2};
  st.d_hat = st.class2.proj_mean - st.class1.proj_mean;
  return st;
}

// Greedy slack ranking for one class: repeatedly mark the included sample
// farthest from the current included-set mean (ties -> lowest index),
// recompute the mean, and repeat until only 2 samples remain. Returns
// global sample indices in exclusion order.
inline std::vector<std::size_t> exclusion_order(const std::vector<ProjectedSample>& samples,
                                                int class_label) {
  if (class_label != 1 && class_label != -1)
    throw std::invalid_argument("exclusion_order: class label must be -1 or +1");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].label == class_label && !samples[i].excluded) pool.push_back(i);

  std::vector<std::size_t> order;
  while (pool.size() > 2) {
    double mean = 0.0;
    for (std::size_t i : pool) mean += samples[i].score;
    mean /= static_cast<double>(pool.size());
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const double dist = std::abs(samples[pool[k]].score - mean);
      if (dist > best) {
        best = dist;
        pick = k;
      }
    }
    order.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return order;
}

}  // namespace imbcal
