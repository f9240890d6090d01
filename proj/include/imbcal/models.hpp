#pragma once

// Score-producing binary classifiers f(x) = sgn(<phi(x), w> + b), trained by
// deterministic full-batch (sub)gradient descent from zero initialization.
// score() deliberately excludes the bias: the calibrator owns the threshold.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "imbcal/dataset.hpp"
#include "imbcal/metrics.hpp"

namespace imbcal {

struct LinearModel {
  std::vector<double> w;
  double b = 0.0;
};

struct KernelModel {
  std::vector<std::vector<double>> support_points;
  std::vector<double> dual_coefs;  // alpha_i * y_i folded in
  double gamma = 1.0;
  double b = 0.0;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double reg_strength = 1e-4;
  std::uint64_t seed = 0;
  std::vector<double> sample_weights;  // empty = unweighted
};

inline int sign_ge0(double v) { return v >= 0.0 ? 1 : -1; }

namespace detail {

inline void check_trainable(const Dataset& d, const TrainConfig& cfg) {
  if (d.count(1) == 0 || d.count(-1) == 0)
    throw std::invalid_argument("train: both classes must be present");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.reg_strength < 0.0) throw std::invalid_argument("train: reg_strength must be >= 0");
  if (!cfg.sample_weights.empty() && cfg.sample_weights.size() != d.rows())
    throw std::invalid_argument("train: sample_weights length mismatch");
  for (double w : cfg.sample_weights)
    if (w < 0.0) throw std::invalid_argument("train: sample_weights must be >= 0");
}

inline double weight_of(const TrainConfig& cfg, std::size_t i) {
  return cfg.sample_weights.empty() ? 1.0 : cfg.sample_weights[i];
}

inline double total_weight(const TrainConfig& cfg, std::size_t n) {
  if (cfg.sample_weights.empty()) return static_cast<double>(n);
  double s = 0.0;
  for (double w : cfg.sample_weights) s += w;
  if (s <= 0.0) throw std::invalid_argument("train: total sample weight must be > 0");
  return s;
}

inline bool all_finite(const std::vector<double>& v, double extra) {
  if (!std::isfinite(extra)) return false;
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

// L2-regularized (weighted) logistic loss, full-batch gradient descent with
// a fixed step. Gradients are normalized by the total sample weight so that
// duplicating a point and doubling its weight are equivalent.
inline LinearModel train_logreg(const Dataset& train, const TrainConfig& cfg) {
  detail::check_trainable(train, cfg);
  const std::size_t n = train.rows();
  const std::size_t dim = train.dims();
  const double wsum = detail::total_weight(cfg, n);

  LinearModel m;
  m.w.assign(dim, 0.0);
  std::vector<double> grad(dim);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = m.b;
      for (std::size_t j = 0; j < dim; ++j) z += m.w[j] * train.features[i][j];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double target = train.labels[i] == 1 ? 1.0 : 0.0;
      const double g = detail::weight_of(cfg, i) * (p - target);
      for (std::size_t j = 0; j < dim; ++j) grad[j] += g * train.features[i][j];
      grad_b += g;
    }
    for (std::size_t j = 0; j < dim; ++j)
      m.w[j] -= cfg.learning_rate * (grad[j] / wsum + cfg.reg_strength * m.w[j]);
    m.b -= cfg.learning_rate * grad_b / wsum;
    if (!detail::all_finite(m.w, m.b))
      throw std::runtime_error("train_logreg: diverged (non-finite parameters); lower the learning rate");
  }
  return m;
}

// (Weighted) hinge loss with L2 regularization; subgradient steps with 1/t
// step-size decay.
inline LinearModel train_linear_svm(const Dataset& train, const TrainConfig& cfg) {
  detail::check_trainable(train, cfg);
  const std::size_t n = train.rows();
  const std::size_t dim = train.dims();
  const double wsum = detail::total_weight(cfg, n);

  LinearModel m;
  m.w.assign(dim, 0.0);
  std::vector<double> grad(dim);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double step = cfg.learning_rate / static_cast<double>(epoch);
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = m.b;
      for (std::size_t j = 0; j < dim; ++j) z += m.w[j] * train.features[i][j];
      const double y = static_cast<double>(train.labels[i]);
      if (y * z < 1.0) {
        const double g = -detail::weight_of(cfg, i) * y;
        for (std::size_t j = 0; j < dim; ++j) grad[j] += g * train.features[i][j];
        grad_b += g;
      }
    }
    for (std::size_t j = 0; j < dim; ++j)
      m.w[j] -= step * (grad[j] / wsum + cfg.reg_strength * m.w[j]);
    m.b -= step * grad_b / wsum;
    if (!detail::all_finite(m.w, m.b))
      throw std::runtime_error("train_linear_svm: diverged (non-finite parameters); lower the learning rate");
  }
  return m;
}

// Kernelized subgradient training: per epoch, shrink all dual coefficients
// by (1 - step*reg) and bump the coefficient of every margin violator.
inline KernelModel train_rbf_svm(const Dataset& train, const TrainConfig& cfg, double gamma) {
  detail::check_trainable(train, cfg);
  if (!(gamma > 0.0)) throw std::invalid_argument("train_rbf_svm: gamma must be > 0");
  const std::size_t n = train.rows();
  const double wsum = detail::total_weight(cfg, n);

  // Precompute the kernel matrix once; desk-scale n keeps this small.
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t f = 0; f < train.dims(); ++f) {
        const double diff = train.features[i][f] - train.features[j][f];
        d2 += diff * diff;
      }
      K[i][j] = K[j][i] = std::exp(-gamma * d2);
    }

  std::vector<double> beta(n, 0.0);
  double b = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double step = cfg.learning_rate / static_cast<double>(epoch);
    std::vector<double> f(n, b);
    for (std::size_t j = 0; j < n; ++j) {
      if (beta[j] == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) f[i] += beta[j] * K[j][i];
    }
    const double shrink = 1.0 - step * cfg.reg_strength;
    for (double& bj : beta) bj *= shrink;
    double bump_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = static_cast<double>(train.labels[i]);
      if (y * f[i] < 1.0) {
        const double g = step * detail::weight_of(cfg, i) * y / wsum;
        beta[i] += g;
        bump_b += g;
      }
    }
    b += bump_b;
    if (!detail::all_finite(beta, b))
      throw std::runtime_error("train_rbf_svm: diverged (non-finite dual coefficients)");
  }

  KernelModel m;
  m.support_points = train.features;
  m.dual_coefs = std::move(beta);
  m.gamma = gamma;
  m.b = b;
  return m;
}

// Projected scores s(x) = <phi(x), w>, bias excluded.
inline std::vector<double> score(const LinearModel& m,
                                 const std::vector<std::vector<double>>& X) {
  std::vector<double> s;
  s.reserve(X.size());
  for (const auto& x : X) {
    if (x.size() != m.w.size()) throw std::invalid_argument("score: dimension mismatch");
    double z = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) z += m.w[j] * x[j];
    s.push_back(z);
  }
  return s;
}

inline std::vector<double> score(const KernelModel& m,
                                 const std::vector<std::vector<double>>& X) {
  if (m.support_points.empty()) throw std::invalid_argument("score: empty kernel model");
  std::vector<double> s;
  s.reserve(X.size());
  for (const auto& x : X) {
    if (x.size() != m.support_points[0].size())
      throw std::invalid_argument("score: dimension mismatch");
    double z = 0.0;
    for (std::size_t j = 0; j < m.support_points.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t f = 0; f < x.size(); ++f) {
        const double diff = m.support_points[j][f] - x[f];
        d2 += diff * diff;
      }
      z += m.dual_coefs[j] * std::exp(-m.gamma * d2);
    }
    s.push_back(z);
  }
  return s;
}

template <class M>
inline std::vector<int> predict(const M& m, const std::vector<std::vector<double>>& X) {
  std::vector<int> out;
  const std::vector<double> s = score(m, X);
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(sign_ge0(s[i] + m.b));
  return out;
}

inline std::vector<double> balanced_sample_weights(const std::vector<int>& labels) {
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("balanced_sample_weights: both classes required");
  const double n = static_cast<double>(labels.size());
  const double w_pos = n / (2.0 * static_cast<double>(n_pos));
  const double w_neg = n / (2.0 * static_cast<double>(n_neg));
  std::vector<double> w;
  w.reserve(labels.size());
  for (int y : labels) w.push_back(y == 1 ? w_pos : w_neg);
  return w;
}

// ---------------------------------------------------------------------------
// Cross-validated grid search
// ---------------------------------------------------------------------------

enum class ModelKind { Logreg, LinearSvm, RbfSvm };
enum class MetricKind { Accuracy, GMean, F1 };

struct GridPoint {
  TrainConfig cfg;
  double gamma = 1.0;  // used only by ModelKind::RbfSvm
};

struct CvResult {
  GridPoint best;
  std::size_t best_index = 0;
  double mean_metric = 0.0;
};

inline double metric_value(MetricKind kind, const Confusion& c) {
  switch (kind) {
    case MetricKind::Accuracy: return accuracy(c);
    case MetricKind::GMean: return g_mean(c);
    case MetricKind::F1: return f_measure(c);
  }
  throw std::invalid_argument("metric_value: unknown metric");
}

// Round-robin per class, in dataset order: deterministic stratified folds.
inline std::vector<std::size_t> fold_assignments(const std::vector<int>& labels,
                                                 std::size_t folds) {
  if (folds < 2) throw std::invalid_argument("fold_assignments: folds must be >= 2");
  std::vector<std::size_t> fold(labels.size());
  std::size_t next_pos = 0, next_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t& counter = labels[i] == 1 ? next_pos : next_neg;
    fold[i] = counter % folds;
    ++counter;
  }
  if (next_pos < folds || next_neg < folds)
    throw std::invalid_argument("fold_assignments: a class has fewer samples than folds");
  return fold;
}

inline CvResult grid_search_cv(const Dataset& train, ModelKind kind,
                               const std::vector<GridPoint>& grid, std::size_t folds,
                               MetricKind metric) {
  if (grid.empty()) throw std::invalid_argument("grid_search_cv: empty grid");
  const std::vector<std::size_t> fold = fold_assignments(train.labels, folds);

  CvResult best;
  best.mean_metric = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      Dataset tr, va;
      tr.feature_names = va.feature_names = train.feature_names;
      TrainConfig cfg = grid[g].cfg;
      std::vector<double> weights;
      for (std::size_t i = 0; i < train.rows(); ++i) {
        Dataset& dst = fold[i] == f ? va : tr;
        dst.features.push_back(train.features[i]);
        dst.labels.push_back(train.labels[i]);
        if (!cfg.sample_weights.empty() && fold[i] != f)
          weights.push_back(cfg.sample_weights[i]);
      }
      cfg.sample_weights = std::move(weights);
      std::vector<int> pred;
      switch (kind) {
        case ModelKind::Logreg: pred = predict(train_logreg(tr, cfg), va.features); break;
        case ModelKind::LinearSvm: pred = predict(train_linear_svm(tr, cfg), va.features); break;
        case ModelKind::RbfSvm:
          pred = predict(train_rbf_svm(tr, cfg, grid[g].gamma), va.features);
          break;
      }
      sum += metric_value(metric, confusion(va.labels, pred));
    }
    const double mean = sum / static_cast<double>(folds);
    if (mean > best.mean_metric) {
      best.mean_metric = mean;
      best.best = grid[g];
      best.best_index = g;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Serialization: versioned flat text, one header line then numbers.
// ---------------------------------------------------------------------------

using Model = std::variant<LinearModel, KernelModel>;

inline std::vector<double> model_score(const Model& m, const std::vector<std::vector<double>>& X) {
  return std::visit([&](const auto& inner) { return score(inner, X); }, m);
}

inline double model_bias(const Model& m) {
  return std::visit([](const auto& inner) { return inner.b; }, m);
}

inline std::vector<int> model_predict(const Model& m, const std::vector<std::vector<double>>& X) {
  return std::visit([&](const auto& inner) { return predict(inner, X); }, m);
}

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << std::setprecision(17);
  if (const auto* lin = std::get_if<LinearModel>(&m)) {
    out << "imbcal-model-v1 linear " << lin->w.size() << "\n";
    for (double w : lin->w) out << w << " ";
    out << "\n" << lin->b << "\n";
  } else {
    const auto& k = std::get<KernelModel>(m);
    out << "imbcal-model-v1 rbf " << k.support_points.size() << " "
        << (k.support_points.empty() ? 0 : k.support_points[0].size()) << "\n";
    out << k.gamma << "\n";
    for (const auto& row : k.support_points) {
      for (double v : row) out << v << " ";
      out << "\n";
    }
    for (double c : k.dual_coefs) out << c << " ";
    out << "\n" << k.b << "\n";
  }
  if (!out) throw DataError("failed writing model file: " + path);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string magic, kind;
  if (!(in >> magic >> kind) || magic != "imbcal-model-v1")
    throw DataError("not an imbcal model file: " + path);
  if (kind == "linear") {
    std::size_t dim;
    if (!(in >> dim)) throw DataError("malformed model header: " + path);
    LinearModel m;
    m.w.resize(dim);
    for (double& w : m.w)
      if (!(in >> w)) throw DataError("truncated model file: " + path);
    if (!(in >> m.b)) throw DataError("truncated model file: " + path);
    return m;
  }
  if (kind == "rbf") {
    std::size_t count, dim;
    if (!(in >> count >> dim)) throw DataError("malformed model header: " + path);
    KernelModel m;
    if (!(in >> m.gamma)) throw DataError("truncated model file: " + path);
    m.support_points.assign(count, std::vector<double>(dim));
    for (auto& row : m.support_points)
      for (double& v : row)
        if (!(in >> v)) throw DataError("truncated model file: " + path);
    m.dual_coefs.resize(count);
    for (double& c : m.dual_coefs)
      if (!(in >> c)) throw DataError("truncated model file: " + path);
    if (!(in >> m.b)) throw DataError("truncated model file: " + path);
    return m;
  }
  throw DataError("unknown model kind '" + kind + "' in " + path);
}

}  // namespace imbcal
