#pragma once

// Binary-classification metrics over {-1,+1} labels. The positive class
// (+1) is the minority class everywhere in this library.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace imbcal {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

inline Confusion confusion(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("metrics: truth/pred size mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1 && truth[i] != -1)
      throw std::invalid_argument("metrics: labels must be -1 or +1");
    if (pred[i] != 1 && pred[i] != -1)
      throw std::invalid_argument("metrics: predictions must be -1 or +1");
    if (truth[i] == 1)
      (pred[i] == 1 ? c.tp : c.fn)++;
    else
      (pred[i] == -1 ? c.tn : c.fp)++;
  }
  return c;
}

// 0/0 ratios evaluate to 0 by convention.
inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline void require_nonempty(const Confusion& c) {
  if (c.total() == 0) throw std::invalid_argument("metrics: empty confusion");
}

inline double accuracy(const Confusion& c) {
  require_nonempty(c);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

inline double true_positive_rate(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

inline double true_negative_rate(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp));
}

inline double precision(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
}

inline double g_mean(const Confusion& c) {
  require_nonempty(c);
  return std::sqrt(true_positive_rate(c) * true_negative_rate(c));
}

inline double f_measure(const Confusion& c) {
  require_nonempty(c);
  const double p = precision(c);
  const double r = true_positive_rate(c);
  return safe_ratio(2.0 * p * r, p + r);
}

struct MetricReport {
  double accuracy = 0.0;
  double g_mean = 0.0;
  double f_measure = 0.0;
};

inline MetricReport evaluate_predictions(const std::vector<int>& truth,
                                         const std::vector<int>& pred) {
  const Confusion c = confusion(truth, pred);
  return {accuracy(c), g_mean(c), f_measure(c)};
}

}  // namespace imbcal
