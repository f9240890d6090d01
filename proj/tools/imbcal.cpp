// Command-line front end: synth | train | calibrate | experiment | evaluate.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible
// calibration (calibrate subcommand only).

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imbcal/baselines.hpp"
#include "imbcal/calibrate.hpp"
#include "imbcal/dataset.hpp"
#include "imbcal/harness.hpp"
#include "imbcal/metrics.hpp"
#include "imbcal/models.hpp"
#include "imbcal/projection.hpp"

namespace {

std::vector<double> parse_mu(const std::string& text) {
  const std::vector<double> mu = imbcal::detail::parse_double_list("mu", text);
  if (mu.empty()) throw std::invalid_argument("--mu: expected a comma-separated list");
  return mu;
}

imbcal::ModelKind parse_model_kind(const std::string& text) {
  if (text == "logreg") return imbcal::ModelKind::Logreg;
  if (text == "linear_svm") return imbcal::ModelKind::LinearSvm;
  if (text == "rbf_svm") return imbcal::ModelKind::RbfSvm;
  throw std::invalid_argument("--model: expected logreg, linear_svm or rbf_svm");
}

struct CsvArgs {
  std::string path;
  std::string label_col;
  std::string positive_label;
  std::string drop_cols;

  imbcal::Dataset load() const {
    std::size_t dropped = 0;
    const imbcal::Dataset d = imbcal::load_csv(
        path, label_col, positive_label, imbcal::detail::parse_list_str(drop_cols), &dropped);
    if (dropped > 0)
      std::cerr << "note: dropped " << dropped << " row(s) with missing cells\n";
    return d;
  }
};

void add_csv_options(CLI::App* cmd, CsvArgs& args) {
  cmd->add_option("--data", args.path, "input CSV path")->required();
  cmd->add_option("--label-col", args.label_col, "name of the label column")->required();
  cmd->add_option("--positive-label", args.positive_label,
                  "label value mapped to +1 (the minority class)")
      ->required();
  cmd->add_option("--drop-cols", args.drop_cols, "comma-separated columns to drop");
}

int cmd_synth(const std::string& mu_text, std::size_t n_neg, std::size_t n_pos,
              std::uint64_t seed, const std::string& out_path) {
  imbcal::SyntheticSpec spec;
  spec.mu = parse_mu(mu_text);
  spec.n_neg = n_neg;
  spec.n_pos = n_pos;
  spec.seed = seed;
  const imbcal::Dataset d = imbcal::gen_gaussian(spec);

  std::ofstream out(out_path);
  if (!out) throw imbcal::DataError("cannot write: " + out_path);
  out << std::setprecision(17);
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) out << d.feature_names[j] << ",";
  out << "label\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.features[i]) out << v << ",";
    out << d.labels[i] << "\n";
  }
  if (!out) throw imbcal::DataError("failed writing: " + out_path);
  std::cout << "wrote " << d.rows() << " rows (" << d.count(-1) << " negative, " << d.count(1)
            << " positive) to " << out_path << "\n";
  return 0;
}

int cmd_train(const CsvArgs& csv, const std::string& model_kind, double lr, std::size_t epochs,
              double reg, double gamma, bool balanced, const std::string& out_path) {
  const imbcal::Dataset d = csv.load();
  imbcal::TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.reg_strength = reg;
  if (balanced) cfg.sample_weights = imbcal::balanced_sample_weights(d.labels);

  const imbcal::ModelKind kind = parse_model_kind(model_kind);
  imbcal::Model model = imbcal::detail::train_model(d, kind, cfg, gamma);

  const std::vector<int> pred = imbcal::model_predict(model, d.features);
  const imbcal::MetricReport train_metrics = imbcal::evaluate_predictions(d.labels, pred);
  imbcal::save_model(model, out_path);
  std::cout << std::setprecision(6) << "trained " << model_kind << " on " << d.rows()
            << " rows; train accuracy " << train_metrics.accuracy << ", g-mean "
            << train_metrics.g_mean << "; model written to " << out_path << "\n";
  return 0;
}

std::size_t resolve_budget(const std::string& budget_text, std::size_t n_samples) {
  if (budget_text == "full") return n_samples;
  if (budget_text.empty()) return std::min<std::size_t>(n_samples, 100);
  const std::size_t b = imbcal::detail::parse_size_str("--budget", budget_text);
  return b;
}

int cmd_calibrate(const CsvArgs& csv, const std::string& model_path, double alpha,
                  const std::string& budget_text, const std::string& mode_text,
                  const std::string& curve_path, const std::string& out_model_path) {
  const imbcal::Model model = imbcal::load_model(model_path);
  const imbcal::Dataset d = csv.load();

  imbcal::SlackConfig cfg;
  cfg.alpha = alpha;
  cfg.budget = resolve_budget(budget_text, d.rows());
  if (mode_text == "binary")
    cfg.mode = imbcal::SlackMode::Binary;
  else if (mode_text == "continuous")
    cfg.mode = imbcal::SlackMode::Continuous;
  else
    throw std::invalid_argument("--mode: expected binary or continuous");

  const imbcal::CalibrationResult res = imbcal::calibrate(imbcal::project(model, d), cfg);

  if (!curve_path.empty()) {
    std::ofstream curve(curve_path);
    if (!curve) throw imbcal::DataError("cannot write: " + curve_path);
    curve << std::setprecision(17)
          << "m,m1,m2,feasible,conf_loss,penalty,total,delta1,delta2\n";
    for (const auto& e : res.sweep) {
      curve << e.m << "," << e.m1 << "," << e.m2 << "," << (e.feasible ? 1 : 0) << ",";
      if (e.feasible)
        curve << e.conf_loss << "," << e.penalty << "," << e.total << "," << e.deltas.delta1
              << "," << e.deltas.delta2;
      else
        curve << ",,,,";
      curve << "\n";
    }
  }

  std::cout << std::setprecision(17);
  std::cout << "feasible = " << (res.feasible ? "true" : "false") << "\n";
  if (!res.feasible) {
    std::cout << "advisory = " << res.advisory << "\n";
    return 3;
  }
  std::cout << "delta1 = " << res.deltas.delta1 << "\n"
            << "delta2 = " << res.deltas.delta2 << "\n"
            << "threshold = " << res.threshold << "\n"
            << "bias_out = " << res.bias_out << "\n"
            << "orientation = " << res.orientation << "\n"
            << "best_budget = " << res.best_budget << "\n"
            << "excluded = " << res.excluded.size() << "\n"
            << "loss = " << res.loss << "\n";

  if (!out_model_path.empty()) {
    // Fold the orientation into the weights and replace the bias so that
    // sgn(s + b) applies the calibrated rule directly.
    imbcal::Model recal = model;
    const double o = static_cast<double>(res.orientation);
    if (auto* lin = std::get_if<imbcal::LinearModel>(&recal)) {
      for (double& w : lin->w) w *= o;
      lin->b = res.bias_out;
    } else {
      auto& k = std::get<imbcal::KernelModel>(recal);
      for (double& c : k.dual_coefs) c *= o;
      k.b = res.bias_out;
    }
    imbcal::save_model(recal, out_model_path);
    std::cout << "recalibrated model written to " << out_model_path << "\n";
  }
  return 0;
}

int cmd_evaluate(const CsvArgs& csv, const std::string& model_path, bool has_threshold,
                 double threshold, int orientation) {
  const imbcal::Model model = imbcal::load_model(model_path);
  const imbcal::Dataset d = csv.load();
  const std::vector<double> s = imbcal::model_score(model, d.features);

  std::vector<int> pred;
  pred.reserve(s.size());
  if (has_threshold) {
    if (orientation != 1 && orientation != -1)
      throw std::invalid_argument("--orientation: expected 1 or -1");
    for (double v : s) pred.push_back(orientation * v >= threshold ? 1 : -1);
  } else {
    const double b = imbcal::model_bias(model);
    for (double v : s) pred.push_back(imbcal::sign_ge0(v + b));
  }

  const imbcal::Confusion c = imbcal::confusion(d.labels, pred);
  std::cout << "tp = " << c.tp << "\nfp = " << c.fp << "\ntn = " << c.tn << "\nfn = " << c.fn
            << "\n"
            << std::setprecision(6) << "accuracy = " << imbcal::accuracy(c) << "\n"
            << "gmean = " << imbcal::g_mean(c) << "\n"
            << "f1 = " << imbcal::f_measure(c) << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path,
                   const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = imbcal::parse_config_file(config_path);
  for (const auto& [k, v] : overrides) kv[k] = v;

  const imbcal::ExperimentConfig cfg = imbcal::config_from_map(kv);
  const imbcal::ExperimentReport report = imbcal::run_experiment(cfg);
  const std::string table = imbcal::emit_table(report, cfg.format);

  if (cfg.out_path.empty()) {
    std::cout << table;
  } else {
    std::ofstream out(cfg.out_path);
    if (!out) throw imbcal::DataError("cannot write: " + cfg.out_path);
    out << table;
    std::cout << "report written to " << cfg.out_path << "\n";
  }
  bool has_ours = false;
  for (const auto& m : cfg.methods) has_ours = has_ours || m.rfind("ours", 0) == 0;
  if (has_ours)
    std::cerr << "infeasible calibrations (fell back to baseline): " << report.infeasible_count
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bias recalibration for imbalanced binary classifiers"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic Gaussian dataset CSV");
  std::string mu_text = "1,1";
  std::size_t n_neg = 1000, n_pos = 10;
  std::uint64_t seed = 0;
  std::string synth_out;
  synth->add_option("--mu", mu_text, "class mean vector; classes are N(-mu,I) and N(+mu,I)");
  synth->add_option("--n-neg", n_neg, "negative (majority) sample count");
  synth->add_option("--n-pos", n_pos, "positive (minority) sample count");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // train
  auto* train = app.add_subcommand("train", "fit a classifier and serialize it");
  CsvArgs train_csv;
  add_csv_options(train, train_csv);
  std::string model_kind = "logreg";
  double lr = 0.1, reg = 1e-4, gamma = 1.0;
  std::size_t epochs = 500;
  bool balanced = false;
  std::string train_out;
  train->add_option("--model", model_kind, "logreg | linear_svm | rbf_svm");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--epochs", epochs, "full-batch epochs");
  train->add_option("--reg", reg, "L2 regularization strength");
  train->add_option("--gamma", gamma, "RBF kernel width (rbf_svm only)");
  train->add_flag("--balanced", balanced, "use class-balanced sample weights");
  train->add_option("--out", train_out, "output model path")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "recalibrate a serialized model's bias on a CSV (Algorithm 1)");
  CsvArgs cal_csv;
  std::string cal_model, cal_budget, cal_mode = "binary", cal_curve, cal_out_model;
  double alpha = 1.0;
  cal->add_option("--model", cal_model, "serialized model path")->required();
  add_csv_options(cal, cal_csv);
  cal->add_option("--alpha", alpha, "slack penalty weight");
  cal->add_option("--budget", cal_budget, "slack budget: an integer or 'full' (default min(N,100))");
  cal->add_option("--mode", cal_mode, "binary | continuous slack variables");
  cal->add_option("--curve", cal_curve, "write the per-budget loss curve CSV here");
  cal->add_option("--out-model", cal_out_model, "write a recalibrated model here");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "metrics for a model (+ optional threshold) on a CSV");
  CsvArgs eval_csv;
  std::string eval_model;
  double eval_threshold = 0.0;
  int eval_orientation = 1;
  eval->add_option("--model", eval_model, "serialized model path")->required();
  add_csv_options(eval, eval_csv);
  CLI::Option* thr_opt =
      eval->add_option("--threshold", eval_threshold,
                       "decide +1 iff orientation*score >= threshold (default: sgn(score + b))");
  eval->add_option("--orientation", eval_orientation, "orientation sign for --threshold (1 or -1)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run the full repeat protocol from a config file");
  std::string exp_config;
  exp->add_option("--config", exp_config, "flat key = value config file");
  std::map<std::string, std::string> override_values;
  const std::vector<std::pair<std::string, std::string>> override_flags = {
      {"data", "synthetic | csv"},
      {"mu", "synthetic mean vector"},
      {"train-neg", "training negatives per repeat"},
      {"train-pos", "training positives per repeat"},
      {"test-neg", "synthetic test negatives"},
      {"test-pos", "synthetic test positives"},
      {"csv-path", "CSV source path"},
      {"label-col", "CSV label column"},
      {"positive-label", "CSV positive label value"},
      {"drop-cols", "CSV columns to drop"},
      {"scale", "scale features to [-1,1] fit on train"},
      {"model", "logreg | linear_svm | rbf_svm"},
      {"lr", "learning rate"},
      {"epochs", "training epochs"},
      {"reg", "L2 regularization"},
      {"gamma", "RBF kernel width"},
      {"grid-lr", "CV grid over learning rates"},
      {"grid-reg", "CV grid over regularization"},
      {"grid-gamma", "CV grid over gamma"},
      {"cv-folds", "cross-validation folds"},
      {"cv-metric", "accuracy | gmean | f1"},
      {"methods", "comma-separated method list"},
      {"repeats", "number of repeats"},
      {"seed", "base seed (repeat r uses seed + r)"},
      {"alpha", "slack penalty weight"},
      {"budget", "slack budget: integer or 'full'"},
      {"smote-k", "SMOTE neighbor count"},
      {"format", "markdown | csv"},
      {"out", "write the table here instead of stdout"},
  };
  std::map<std::string, std::string> override_buffers;
  for (const auto& [flag, help] : override_flags) override_buffers[flag] = "";
  for (const auto& [flag, help] : override_flags) {
    std::string key = flag;
    for (char& ch : key)
      if (ch == '-') ch = '_';
    exp->add_option("--" + flag, override_buffers[flag], help + " (overrides config key '" + key + "')");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(synth))
      return cmd_synth(mu_text, n_neg, n_pos, seed, synth_out);
    if (app.got_subcommand(train))
      return cmd_train(train_csv, model_kind, lr, epochs, reg, gamma, balanced, train_out);
    if (app.got_subcommand(cal))
      return cmd_calibrate(cal_csv, cal_model, alpha, cal_budget, cal_mode, cal_curve,
                           cal_out_model);
    if (app.got_subcommand(eval))
      return cmd_evaluate(eval_csv, eval_model, thr_opt->count() > 0, eval_threshold,
                          eval_orientation);
    if (app.got_subcommand(exp)) {
      for (const auto& [flag, help] : override_flags) {
        if (exp->get_option("--" + flag)->count() > 0) {
          std::string key = flag;
          for (char& ch : key)
            if (ch == '-') ch = '_';
          override_values[key] = override_buffers[flag];
        }
      }
      return cmd_experiment(exp_config, override_values);
    }
    throw std::invalid_argument("no subcommand selected");
  } catch (const imbcal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
