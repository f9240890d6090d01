#pragma once

// Experiment orchestration: train a baseline classifier, apply each
// rebalancing method, evaluate everything on the identical test split over
// seeded repeats, and aggregate mean +/- std tables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "imbcal/baselines.hpp"
#include "imbcal/calibrate.hpp"
#include "imbcal/common.hpp"
#include "imbcal/dataset.hpp"
#include "imbcal/metrics.hpp"
#include "imbcal/models.hpp"
#include "imbcal/projection.hpp"

namespace imbcal {

enum class DataSource { Synthetic, Csv };
enum class TableFormat { Markdown, Csv };

inline constexpr std::size_t kBudgetDefault = static_cast<std::size_t>(-1);

struct ExperimentConfig {
  DataSource source = DataSource::Synthetic;
  // synthetic source
  std::vector<double> mu = {1.0, 1.0};
  std::size_t test_neg = 1000;
  std::size_t test_pos = 1000;
  // csv source (train counts below; the remainder of each class is the test set)
  std::string csv_path;
  std::string label_col;
  std::string positive_label;
  std::vector<std::string> drop_cols;
  bool scale = false;  // fit [-1,1] scaling on train, apply to train and test
  // shared
  std::size_t train_neg = 1000;
  std::size_t train_pos = 10;
  // model
  ModelKind model = ModelKind::Logreg;
  TrainConfig train_cfg;
  double gamma = 1.0;
  // optional cross-validated grid (cross product of the lists; empty = off)
  std::vector<double> grid_lr;
  std::vector<double> grid_reg;
  std::vector<double> grid_gamma;
  std::size_t cv_folds = 5;
  MetricKind cv_metric = MetricKind::GMean;
  // protocol
  std::vector<std::string> methods = {"baseline", "smote",       "bw",
                                      "thresh",   "bmr",         "ours-binary",
                                      "ours-continuous"};
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;
  double alpha = 1.0;
  bool budget_full = false;
  std::size_t budget = kBudgetDefault;  // default = min(train size, 100)
  std::size_t smote_k = 5;
  // output
  TableFormat format = TableFormat::Markdown;
  std::string out_path;  // empty = stdout
};

struct MethodResult {
  std::string method;
  MetricReport mean;
  MetricReport stddev;  // population convention (divide by repeats)
  std::vector<MetricReport> per_repeat;
};

struct ExperimentReport {
  std::vector<MethodResult> methods;
  std::size_t repeats = 0;
  std::size_t infeasible_count = 0;          // "ours" repeats that fell back to baseline
  std::vector<std::uint64_t> test_hashes;    // one per repeat
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> k = {"baseline", "smote",       "bw",
                                             "thresh",   "bmr",         "ours-binary",
                                             "ours-continuous"};
  return k;
}

namespace detail {

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t hash_dataset(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int y : d.labels) h = hash_mix(h, static_cast<std::uint64_t>(y + 2));
  for (const auto& row : d.features)
    for (double v : row) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      h = hash_mix(h, bits);
    }
  return h;
}

inline Model train_model(const Dataset& train, ModelKind kind, const TrainConfig& cfg,
                         double gamma) {
  switch (kind) {
    case ModelKind::Logreg: return train_logreg(train, cfg);
    case ModelKind::LinearSvm: return train_linear_svm(train, cfg);
    case ModelKind::RbfSvm: return train_rbf_svm(train, cfg, gamma);
  }
  throw std::invalid_argument("train_model: unknown model kind");
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1) throw std::invalid_argument("experiment: repeats must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("experiment: method list is empty");
  for (const auto& m : cfg.methods) {
    bool ok = false;
    for (const auto& k : known_methods()) ok = ok || m == k;
    if (!ok) throw std::invalid_argument("experiment: unknown method '" + m + "'");
  }
  if (cfg.source == DataSource::Csv && cfg.csv_path.empty())
    throw std::invalid_argument("experiment: csv source requires csv_path");
  if (cfg.source == DataSource::Csv && cfg.label_col.empty())
    throw std::invalid_argument("experiment: csv source requires label_col");
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  Dataset full;
  if (cfg.source == DataSource::Csv)
    full = load_csv(cfg.csv_path, cfg.label_col, cfg.positive_label, cfg.drop_cols);

  auto make_split = [&](std::size_t repeat) -> std::pair<Dataset, Dataset> {
    const std::uint64_t seed = cfg.base_seed + repeat;
    std::pair<Dataset, Dataset> split;
    if (cfg.source == DataSource::Synthetic) {
      split.first = gen_gaussian({cfg.mu, cfg.train_neg, cfg.train_pos, derive_seed(seed, 0)});
      split.second = gen_gaussian({cfg.mu, cfg.test_neg, cfg.test_pos, derive_seed(seed, 1)});
    } else {
      split = stratified_split(full, {cfg.train_neg, cfg.train_pos, derive_seed(seed, 0)});
    }
    if (cfg.scale) {
      const ScaleParams p = fit_scale(split.first);
      split.first = apply_scale(std::move(split.first), p);
      split.second = apply_scale(std::move(split.second), p);
    }
    return split;
  };

  // Hyperparameter grid, cross-validated once on the first repeat's training
  // split and reused across repeats.
  TrainConfig base_cfg = cfg.train_cfg;
  double gamma = cfg.gamma;
  if (!cfg.grid_lr.empty() || !cfg.grid_reg.empty() || !cfg.grid_gamma.empty()) {
    const std::vector<double> lrs = cfg.grid_lr.empty()
                                        ? std::vector<double>{cfg.train_cfg.learning_rate}
                                        : cfg.grid_lr;
    const std::vector<double> regs = cfg.grid_reg.empty()
                                         ? std::vector<double>{cfg.train_cfg.reg_strength}
                                         : cfg.grid_reg;
    const std::vector<double> gammas =
        cfg.grid_gamma.empty() ? std::vector<double>{cfg.gamma} : cfg.grid_gamma;
    std::vector<GridPoint> grid;
    for (double lr : lrs)
      for (double reg : regs)
        for (double gm : gammas) {
          GridPoint p;
          p.cfg = cfg.train_cfg;
          p.cfg.learning_rate = lr;
          p.cfg.reg_strength = reg;
          p.gamma = gm;
          grid.push_back(p);
        }
    const Dataset cv_train = make_split(0).first;
    const CvResult cv = grid_search_cv(cv_train, cfg.model, grid, cfg.cv_folds, cfg.cv_metric);
    base_cfg = cv.best.cfg;
    gamma = cv.best.gamma;
  }

  ExperimentReport report;
  report.repeats = cfg.repeats;
  report.methods.reserve(cfg.methods.size());
  for (const auto& m : cfg.methods) {
    MethodResult r;
    r.method = m;
    report.methods.push_back(r);
  }

  for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
    try {
      const std::uint64_t seed = cfg.base_seed + repeat;
      auto [train, test] = make_split(repeat);
      report.test_hashes.push_back(detail::hash_dataset(test));

      const Model model = detail::train_model(train, cfg.model, base_cfg, gamma);
      const std::vector<double> s_train = model_score(model, train.features);
      const std::vector<double> s_test = model_score(model, test.features);
      const double bias = model_bias(model);

      std::vector<int> baseline_pred;
      baseline_pred.reserve(s_test.size());
      for (double s : s_test) baseline_pred.push_back(sign_ge0(s + bias));

      const std::size_t budget =
          cfg.budget_full ? train.rows()
                          : (cfg.budget == kBudgetDefault
                                 ? std::min<std::size_t>(train.rows(), 100)
                                 : cfg.budget);

      for (auto& mr : report.methods) {
        std::vector<int> pred;
        if (mr.method == "baseline") {
          pred = baseline_pred;
        } else if (mr.method == "smote") {
          const Dataset balanced = smote(train, cfg.smote_k, derive_seed(seed, 2));
          pred = model_predict(detail::train_model(balanced, cfg.model, base_cfg, gamma),
                               test.features);
        } else if (mr.method == "bw") {
          TrainConfig weighted = base_cfg;
          weighted.sample_weights = balanced_sample_weights(train.labels);
          pred = model_predict(detail::train_model(train, cfg.model, weighted, gamma),
                               test.features);
        } else if (mr.method == "thresh") {
          const double t = threshold_search(s_train, train.labels, imbalance_costs(train.labels));
          pred.reserve(s_test.size());
          for (double s : s_test) pred.push_back(s >= t ? 1 : -1);
        } else if (mr.method == "bmr") {
          const CostPair costs = imbalance_costs(train.labels);
          pred.reserve(s_test.size());
          if (cfg.model == ModelKind::Logreg) {
            for (double s : s_test)
              pred.push_back(bmr_decide(1.0 / (1.0 + std::exp(-(s + bias))), costs));
          } else {
            std::vector<double> decisions = s_train;
            for (double& d : decisions) d += bias;
            const PlattParams platt = platt_fit(decisions, train.labels);
            for (double s : s_test) pred.push_back(bmr_decide(platt.probability(s + bias), costs));
          }
        } else {  // ours-binary / ours-continuous
          SlackConfig sc;
          sc.mode = mr.method == "ours-binary" ? SlackMode::Binary : SlackMode::Continuous;
          sc.alpha = cfg.alpha;
          sc.budget = budget;
          const CalibrationResult res = calibrate(project(model, train), sc);
          if (res.feasible) {
            pred = predict_calibrated(s_test, res);
          } else {
            ++report.infeasible_count;
            pred = baseline_pred;
          }
        }
        mr.per_repeat.push_back(evaluate_predictions(test.labels, pred));
      }
    } catch (const DataError& e) {
      throw DataError("repeat " + std::to_string(repeat) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("repeat " + std::to_string(repeat) + ": " + e.what());
    }
  }

  const double n = static_cast<double>(cfg.repeats);
  for (auto& mr : report.methods) {
    for (const auto& rep : mr.per_repeat) {
      mr.mean.accuracy += rep.accuracy / n;
      mr.mean.g_mean += rep.g_mean / n;
      mr.mean.f_measure += rep.f_measure / n;
    }
    for (const auto& rep : mr.per_repeat) {
      const double da = rep.accuracy - mr.mean.accuracy;
      const double dg = rep.g_mean - mr.mean.g_mean;
      const double df = rep.f_measure - mr.mean.f_measure;
      mr.stddev.accuracy += da * da / n;
      mr.stddev.g_mean += dg * dg / n;
      mr.stddev.f_measure += df * df / n;
    }
    mr.stddev.accuracy = std::sqrt(mr.stddev.accuracy);
    mr.stddev.g_mean = std::sqrt(mr.stddev.g_mean);
    mr.stddev.f_measure = std::sqrt(mr.stddev.f_measure);
  }
  return report;
}

// Markdown: presentation table, "mean ± std" to 3 decimals. CSV: machine
// readable, separate full-precision mean/std columns (round-trips exactly).
inline std::string emit_table(const ExperimentReport& r, TableFormat format) {
  if (r.methods.empty()) throw std::invalid_argument("emit_table: empty report");
  std::ostringstream out;
  if (format == TableFormat::Markdown) {
    out << "| Method | Accuracy | G-Mean | F1 |\n";
    out << "|---|---|---|---|\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& m : r.methods) {
      out << "| " << m.method << " | " << m.mean.accuracy << " ± " << m.stddev.accuracy
          << " | " << m.mean.g_mean << " ± " << m.stddev.g_mean << " | " << m.mean.f_measure
          << " ± " << m.stddev.f_measure << " |\n";
    }
  } else {
    out << "method,accuracy_mean,accuracy_std,gmean_mean,gmean_std,f1_mean,f1_std\n";
    out << std::setprecision(17);
    for (const auto& m : r.methods) {
      out << m.method << "," << m.mean.accuracy << "," << m.stddev.accuracy << ","
          << m.mean.g_mean << "," << m.stddev.g_mean << "," << m.mean.f_measure << ","
          << m.stddev.f_measure << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Flat key = value config files
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

namespace detail {

inline double parse_double_str(const std::string& key, const std::string& v) {
  double out;
  if (!parse_double(v, out))
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

inline std::size_t parse_size_str(const std::string& key, const std::string& v) {
  const double d = parse_double_str(key, v);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d)))
    throw std::invalid_argument("config key '" + key + "': expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

inline bool parse_bool_str(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false");
}

inline std::vector<std::string> parse_list_str(const std::string& v) {
  std::vector<std::string> items;
  for (const std::string& cell : split_csv_line(v))
    if (!cell.empty()) items.push_back(cell);
  return items;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : parse_list_str(v)) out.push_back(parse_double_str(key, item));
  return out;
}

}  // namespace detail

// Builds an ExperimentConfig from merged key=value settings (file first,
// command-line overrides already applied by the caller). Unknown keys are
// usage errors.
inline ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "data") {
      if (value == "synthetic")
        cfg.source = DataSource::Synthetic;
      else if (value == "csv")
        cfg.source = DataSource::Csv;
      else
        throw std::invalid_argument("config key 'data': expected synthetic or csv");
    } else if (key == "mu") {
      cfg.mu = detail::parse_double_list(key, value);
      if (cfg.mu.empty()) throw std::invalid_argument("config key 'mu': empty list");
    } else if (key == "train_neg") {
      cfg.train_neg = detail::parse_size_str(key, value);
    } else if (key == "train_pos") {
      cfg.train_pos = detail::parse_size_str(key, value);
    } else if (key == "test_neg") {
      cfg.test_neg = detail::parse_size_str(key, value);
    } else if (key == "test_pos") {
      cfg.test_pos = detail::parse_size_str(key, value);
    } else if (key == "csv_path") {
      cfg.csv_path = value;
    } else if (key == "label_col") {
      cfg.label_col = value;
    } else if (key == "positive_label") {
      cfg.positive_label = value;
    } else if (key == "drop_cols") {
      cfg.drop_cols = detail::parse_list_str(value);
    } else if (key == "scale") {
      cfg.scale = detail::parse_bool_str(key, value);
    } else if (key == "model") {
      if (value == "logreg")
        cfg.model = ModelKind::Logreg;
      else if (value == "linear_svm")
        cfg.model = ModelKind::LinearSvm;
      else if (value == "rbf_svm")
        cfg.model = ModelKind::RbfSvm;
      else
        throw std::invalid_argument("config key 'model': expected logreg, linear_svm or rbf_svm");
    } else if (key == "lr") {
      cfg.train_cfg.learning_rate = detail::parse_double_str(key, value);
    } else if (key == "epochs") {
      cfg.train_cfg.epochs = detail::parse_size_str(key, value);
    } else if (key == "reg") {
      cfg.train_cfg.reg_strength = detail::parse_double_str(key, value);
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_double_str(key, value);
    } else if (key == "grid_lr") {
      cfg.grid_lr = detail::parse_double_list(key, value);
    } else if (key == "grid_reg") {
      cfg.grid_reg = detail::parse_double_list(key, value);
    } else if (key == "grid_gamma") {
      cfg.grid_gamma = detail::parse_double_list(key, value);
    } else if (key == "cv_folds") {
      cfg.cv_folds = detail::parse_size_str(key, value);
    } else if (key == "cv_metric") {
      if (value == "accuracy")
        cfg.cv_metric = MetricKind::Accuracy;
      else if (value == "gmean")
        cfg.cv_metric = MetricKind::GMean;
      else if (value == "f1")
        cfg.cv_metric = MetricKind::F1;
      else
        throw std::invalid_argument("config key 'cv_metric': expected accuracy, gmean or f1");
    } else if (key == "methods") {
      cfg.methods = detail::parse_list_str(value);
    } else if (key == "repeats") {
      cfg.repeats = detail::parse_size_str(key, value);
    } else if (key == "seed") {
      cfg.base_seed = static_cast<std::uint64_t>(detail::parse_size_str(key, value));
    } else if (key == "alpha") {
      cfg.alpha = detail::parse_double_str(key, value);
    } else if (key == "budget") {
      if (value == "full") {
        cfg.budget_full = true;
      } else {
        cfg.budget = detail::parse_size_str(key, value);
      }
    } else if (key == "smote_k") {
      cfg.smote_k = detail::parse_size_str(key, value);
    } else if (key == "format") {
      if (value == "markdown")
        cfg.format = TableFormat::Markdown;
      else if (value == "csv")
        cfg.format = TableFormat::Csv;
      else
        throw std::invalid_argument("config key 'format': expected markdown or csv");
    } else if (key == "out") {
      cfg.out_path = value;
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace imbcal
