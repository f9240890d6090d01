#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "imbcal/harness.hpp"

using namespace imbcal;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.mu = {1.0, 1.0};
  cfg.train_neg = 40;
  cfg.train_pos = 12;
  cfg.test_neg = 60;
  cfg.test_pos = 60;
  cfg.train_cfg.epochs = 80;
  cfg.repeats = 2;
  cfg.base_seed = 5;
  return cfg;
}

bool reports_equal(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.methods.size() != b.methods.size() || a.test_hashes != b.test_hashes ||
      a.infeasible_count != b.infeasible_count)
    return false;
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    const MethodResult& x = a.methods[i];
    const MethodResult& y = b.methods[i];
    if (x.method != y.method) return false;
    if (x.mean.accuracy != y.mean.accuracy || x.mean.g_mean != y.mean.g_mean ||
        x.mean.f_measure != y.mean.f_measure)
      return false;
    if (x.stddev.accuracy != y.stddev.accuracy || x.stddev.g_mean != y.stddev.g_mean ||
        x.stddev.f_measure != y.stddev.f_measure)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parse_config_file reads flat key=value text") {
  const std::string path = write_temp("imbcal_ok.cfg",
                                      "# comment\n"
                                      "\n"
                                      "data = synthetic\n"
                                      "mu = 1.0, 1.0\n"
                                      "  repeats=3\n"
                                      "out = results.md\n");
  const auto kv = parse_config_file(path);
  REQUIRE(kv.size() == 4);
  REQUIRE(kv.at("data") == "synthetic");
  REQUIRE(kv.at("mu") == "1.0, 1.0");
  REQUIRE(kv.at("repeats") == "3");
  REQUIRE(kv.at("out") == "results.md");
}

TEST_CASE("parse_config_file rejects malformed lines and missing files") {
  REQUIRE_THROWS_AS(parse_config_file("/nonexistent/imbcal.cfg"), DataError);
  const std::string bad = write_temp("imbcal_bad.cfg", "data synthetic\n");
  REQUIRE_THROWS_AS(parse_config_file(bad), std::invalid_argument);
  const std::string nokey = write_temp("imbcal_nokey.cfg", "= 5\n");
  REQUIRE_THROWS_AS(parse_config_file(nokey), std::invalid_argument);
}

TEST_CASE("config_from_map populates the full schema") {
  const std::map<std::string, std::string> kv = {
      {"data", "synthetic"}, {"mu", "1.5,0.5"},     {"train_neg", "200"},
      {"train_pos", "20"},   {"test_neg", "300"},   {"test_pos", "300"},
      {"model", "rbf_svm"},  {"lr", "0.25"},        {"epochs", "120"},
      {"reg", "0.001"},      {"gamma", "2.5"},      {"cv_folds", "4"},
      {"cv_metric", "f1"},   {"methods", "baseline,ours-binary"},
      {"repeats", "7"},      {"seed", "99"},        {"alpha", "0.5"},
      {"budget", "25"},      {"smote_k", "3"},      {"format", "csv"},
      {"out", "table.csv"},  {"grid_lr", "0.1,0.5"}};
  const ExperimentConfig cfg = config_from_map(kv);
  REQUIRE(cfg.source == DataSource::Synthetic);
  REQUIRE(cfg.mu == std::vector<double>{1.5, 0.5});
  REQUIRE(cfg.train_neg == 200);
  REQUIRE(cfg.train_pos == 20);
  REQUIRE(cfg.model == ModelKind::RbfSvm);
  REQUIRE(cfg.train_cfg.learning_rate == 0.25);
  REQUIRE(cfg.train_cfg.epochs == 120);
  REQUIRE(cfg.train_cfg.reg_strength == 0.001);
  REQUIRE(cfg.gamma == 2.5);
  REQUIRE(cfg.cv_folds == 4);
  REQUIRE(cfg.cv_metric == MetricKind::F1);
  REQUIRE(cfg.methods == std::vector<std::string>{"baseline", "ours-binary"});
  REQUIRE(cfg.repeats == 7);
  REQUIRE(cfg.base_seed == 99);
  REQUIRE(cfg.alpha == 0.5);
  REQUIRE_FALSE(cfg.budget_full);
  REQUIRE(cfg.budget == 25);
  REQUIRE(cfg.smote_k == 3);
  REQUIRE(cfg.format == TableFormat::Csv);
  REQUIRE(cfg.out_path == "table.csv");
  REQUIRE(cfg.grid_lr == std::vector<double>{0.1, 0.5});
}

TEST_CASE("config_from_map handles budget=full and rejects bad input") {
  REQUIRE(config_from_map({{"budget", "full"}}).budget_full);
  REQUIRE(config_from_map({{"budget", "full"}}).budget == kBudgetDefault);
  REQUIRE_THROWS_AS(config_from_map({{"nonsense", "1"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"model", "forest"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"repeats", "0"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"repeats", "-3"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"lr", "fast"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"methods", "baseline,magic"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_map({{"data", "csv"}}), std::invalid_argument);
}

TEST_CASE("run_experiment with one method and one repeat has zero spread") {
  ExperimentConfig cfg = small_config();
  cfg.methods = {"baseline"};
  cfg.repeats = 1;
  const ExperimentReport r = run_experiment(cfg);
  REQUIRE(r.methods.size() == 1);
  REQUIRE(r.repeats == 1);
  REQUIRE(r.methods[0].per_repeat.size() == 1);
  REQUIRE(r.methods[0].stddev.accuracy == 0.0);
  REQUIRE(r.methods[0].stddev.g_mean == 0.0);
  REQUIRE(r.methods[0].stddev.f_measure == 0.0);
  REQUIRE(r.methods[0].mean.accuracy == r.methods[0].per_repeat[0].accuracy);
  REQUIRE(r.test_hashes.size() == 1);
}

TEST_CASE("run_experiment is deterministic and bounded by per-repeat extremes") {
  const ExperimentConfig cfg = small_config();
  const ExperimentReport a = run_experiment(cfg);
  const ExperimentReport b = run_experiment(cfg);
  REQUIRE(reports_equal(a, b));

  REQUIRE(a.methods.size() == 7);
  REQUIRE(a.test_hashes.size() == 2);
  REQUIRE(a.test_hashes[0] != a.test_hashes[1]);  // different repeat seeds

  for (const MethodResult& m : a.methods) {
    double lo = 1.0, hi = 0.0;
    for (const MetricReport& rep : m.per_repeat) {
      REQUIRE(rep.accuracy >= 0.0);
      REQUIRE(rep.accuracy <= 1.0);
      REQUIRE(rep.g_mean >= 0.0);
      REQUIRE(rep.g_mean <= 1.0);
      REQUIRE(rep.f_measure >= 0.0);
      REQUIRE(rep.f_measure <= 1.0);
      lo = std::min(lo, rep.g_mean);
      hi = std::max(hi, rep.g_mean);
    }
    REQUIRE(m.mean.g_mean >= lo - 1e-12);
    REQUIRE(m.mean.g_mean <= hi + 1e-12);
  }
}

TEST_CASE("changing the base seed changes the sampled data") {
  ExperimentConfig cfg = small_config();
  cfg.methods = {"baseline"};
  ExperimentConfig other = cfg;
  other.base_seed = cfg.base_seed + 1000;
  const ExperimentReport a = run_experiment(cfg);
  const ExperimentReport b = run_experiment(other);
  REQUIRE(a.test_hashes != b.test_hashes);
}

TEST_CASE("infeasible calibration falls back to the baseline metrics") {
  ExperimentConfig cfg;
  cfg.mu = {0.0, 0.0};  // identical class distributions: no separating gap
  cfg.train_neg = 25;
  cfg.train_pos = 10;
  cfg.test_neg = 40;
  cfg.test_pos = 40;
  cfg.train_cfg.epochs = 60;
  cfg.methods = {"baseline", "ours-binary"};
  cfg.repeats = 2;
  cfg.budget = 4;
  const ExperimentReport r = run_experiment(cfg);
  REQUIRE(r.infeasible_count == 2);
  for (std::size_t rep = 0; rep < 2; ++rep) {
    REQUIRE(r.methods[1].per_repeat[rep].accuracy == r.methods[0].per_repeat[rep].accuracy);
    REQUIRE(r.methods[1].per_repeat[rep].g_mean == r.methods[0].per_repeat[rep].g_mean);
    REQUIRE(r.methods[1].per_repeat[rep].f_measure == r.methods[0].per_repeat[rep].f_measure);
  }
}

TEST_CASE("repeat-level failures are annotated with the repeat index") {
  ExperimentConfig cfg = small_config();
  cfg.train_pos = 1;  // smote needs two minority samples
  cfg.methods = {"baseline", "smote"};
  REQUIRE_THROWS_WITH(run_experiment(cfg), ContainsSubstring("repeat 0"));
}

TEST_CASE("run_experiment consumes csv sources with optional scaling") {
  std::ostringstream csv;
  csv << "f1,f2,label\n";
  for (int i = 0; i < 12; ++i) csv << 0.1 * i << "," << 1.0 - 0.05 * i << ",neg\n";
  for (int i = 0; i < 8; ++i) csv << 2.0 + 0.1 * i << "," << 0.5 + 0.05 * i << ",pos\n";
  const std::string path = write_temp("imbcal_exp.csv", csv.str());

  ExperimentConfig cfg;
  cfg.source = DataSource::Csv;
  cfg.csv_path = path;
  cfg.label_col = "label";
  cfg.positive_label = "pos";
  cfg.scale = true;
  cfg.train_neg = 8;
  cfg.train_pos = 5;
  cfg.train_cfg.epochs = 60;
  cfg.methods = {"baseline", "thresh"};
  cfg.repeats = 2;
  const ExperimentReport a = run_experiment(cfg);
  const ExperimentReport b = run_experiment(cfg);
  REQUIRE(reports_equal(a, b));
  REQUIRE(a.methods[0].per_repeat.size() == 2);
}

TEST_CASE("emit_table renders the markdown presentation format") {
  ExperimentReport r;
  r.repeats = 2;
  MethodResult m;
  m.method = "baseline";
  m.mean = {0.875, 0.5, 0.25};
  m.stddev = {0.1, 0.2, 0.3};
  r.methods.push_back(m);

  const std::string text = emit_table(r, TableFormat::Markdown);
  std::istringstream lines(text);
  std::string header, divider, row;
  std::getline(lines, header);
  std::getline(lines, divider);
  std::getline(lines, row);
  REQUIRE(header == "| Method | Accuracy | G-Mean | F1 |");
  REQUIRE(divider == "|---|---|---|---|");
  REQUIRE(row == "| baseline | 0.875 ± 0.100 | 0.500 ± 0.200 | 0.250 ± 0.300 |");
}

TEST_CASE("emit_table csv round-trips at full precision") {
  ExperimentReport r;
  r.repeats = 3;
  MethodResult m;
  m.method = "ours-binary";
  m.mean = {0.6780000000000001, 1.0 / 3.0, 0.9142857142857144};
  m.stddev = {0.010000000000000002, 2.0 / 7.0, 1e-17};
  r.methods.push_back(m);

  const std::string text = emit_table(r, TableFormat::Csv);
  std::istringstream lines(text);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  REQUIRE(header == "method,accuracy_mean,accuracy_std,gmean_mean,gmean_std,f1_mean,f1_std");

  std::vector<std::string> cells = detail::split_csv_line(row);
  REQUIRE(cells.size() == 7);
  REQUIRE(cells[0] == "ours-binary");
  REQUIRE(std::stod(cells[1]) == m.mean.accuracy);
  REQUIRE(std::stod(cells[2]) == m.stddev.accuracy);
  REQUIRE(std::stod(cells[3]) == m.mean.g_mean);
  REQUIRE(std::stod(cells[4]) == m.stddev.g_mean);
  REQUIRE(std::stod(cells[5]) == m.mean.f_measure);
  REQUIRE(std::stod(cells[6]) == m.stddev.f_measure);

  ExperimentReport empty;
  REQUIRE_THROWS_AS(emit_table(empty, TableFormat::Csv), std::invalid_argument);
}
