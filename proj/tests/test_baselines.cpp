#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "imbcal/baselines.hpp"

using namespace imbcal;
using Catch::Matchers::WithinAbs;

namespace {

Dataset two_minority() {
  Dataset d;
  d.feature_names = {"x", "y"};
  d.features = {{5.0, 5.0}, {6.0, 5.0}, {5.0, 6.0}, {6.0, 6.0}, {4.0, 4.0}, {7.0, 7.0},
                {0.0, 0.0}, {1.0, 1.0}};
  d.labels = {-1, -1, -1, -1, -1, -1, 1, 1};
  return d;
}

Dataset square_minority() {
  Dataset d;
  d.feature_names = {"x", "y"};
  for (int i = 0; i < 10; ++i)
    d.features.push_back({10.0 + 0.1 * static_cast<double>(i), 10.0});
  d.labels.assign(10, -1);
  d.features.push_back({0.0, 0.0});
  d.features.push_back({2.0, 0.0});
  d.features.push_back({0.0, 2.0});
  d.features.push_back({2.0, 2.0});
  d.labels.insert(d.labels.end(), 4, 1);
  return d;
}

double segment_residual(const std::vector<double>& p, const std::vector<double>& a,
                        const std::vector<double>& b) {
  double dd = 0.0, dp = 0.0;
  for (std::size_t f = 0; f < p.size(); ++f) {
    const double d = b[f] - a[f];
    dd += d * d;
    dp += (p[f] - a[f]) * d;
  }
  const double lambda = dd == 0.0 ? 0.0 : std::clamp(dp / dd, 0.0, 1.0);
  double r2 = 0.0;
  for (std::size_t f = 0; f < p.size(); ++f) {
    const double e = p[f] - (a[f] + lambda * (b[f] - a[f]));
    r2 += e * e;
  }
  return std::sqrt(r2);
}

}  // namespace

TEST_CASE("smote balances the classes and keeps originals verbatim") {
  const Dataset train = two_minority();
  const Dataset out = smote(train, 5, 42);  // k clamps to n_min - 1 = 1
  REQUIRE(out.count(1) == out.count(-1));
  REQUIRE(out.rows() == 12);
  REQUIRE(out.feature_names == train.feature_names);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    REQUIRE(out.features[i] == train.features[i]);
    REQUIRE(out.labels[i] == train.labels[i]);
  }
}

TEST_CASE("smote interpolates strictly between minority points") {
  const Dataset out = smote(two_minority(), 1, 7);
  // the only minority pair is (0,0)-(1,1): synthetics lie on the diagonal
  for (std::size_t i = 8; i < out.rows(); ++i) {
    REQUIRE(out.labels[i] == 1);
    REQUIRE_THAT(out.features[i][0], WithinAbs(out.features[i][1], 1e-12));
    REQUIRE(out.features[i][0] >= 0.0);
    REQUIRE(out.features[i][0] <= 1.0);
  }
}

TEST_CASE("smote synthetics are convex combinations of minority pairs") {
  const Dataset train = square_minority();
  const Dataset out = smote(train, 3, 123);
  REQUIRE(out.count(1) == 10);
  std::vector<std::vector<double>> minority;
  for (std::size_t i = 0; i < train.rows(); ++i)
    if (train.labels[i] == 1) minority.push_back(train.features[i]);

  for (std::size_t i = train.rows(); i < out.rows(); ++i) {
    REQUIRE(out.labels[i] == 1);
    double best = HUGE_VAL;
    for (std::size_t a = 0; a < minority.size(); ++a)
      for (std::size_t b = a + 1; b < minority.size(); ++b)
        best = std::min(best, segment_residual(out.features[i], minority[a], minority[b]));
    REQUIRE(best <= 1e-9);
  }
}

TEST_CASE("smote oversamples whichever class is smaller") {
  Dataset d = two_minority();
  for (int& y : d.labels) y = -y;  // now -1 is the minority
  const Dataset out = smote(d, 1, 9);
  REQUIRE(out.count(1) == out.count(-1));
  for (std::size_t i = d.rows(); i < out.rows(); ++i) REQUIRE(out.labels[i] == -1);
}

TEST_CASE("smote is deterministic per seed") {
  const Dataset train = square_minority();
  const Dataset a = smote(train, 3, 11);
  const Dataset b = smote(train, 3, 11);
  const Dataset c = smote(train, 3, 12);
  REQUIRE(a.features == b.features);
  REQUIRE(a.features != c.features);
}

TEST_CASE("smote validates inputs") {
  Dataset d;
  d.feature_names = {"x"};
  d.features = {{0.0}, {1.0}, {2.0}};
  d.labels = {-1, -1, 1};
  REQUIRE_THROWS_AS(smote(d, 1, 0), DataError);  // minority of size 1
  REQUIRE_THROWS_AS(smote(two_minority(), 0, 0), std::invalid_argument);
}

TEST_CASE("threshold_search puts the cut in the separating gap") {
  const std::vector<double> scores = {0.0, 1.0, 10.0, 11.0};
  const std::vector<int> labels = {-1, -1, 1, 1};
  REQUIRE(threshold_search(scores, labels, {1.0, 1.0}) == 5.5);
}

TEST_CASE("threshold_search breaks cost ties toward the larger threshold") {
  // inverted labels: cost 1 at both sentinels, cost 2 in the middle
  const std::vector<double> scores = {0.0, 1.0};
  const std::vector<int> labels = {1, -1};
  REQUIRE(threshold_search(scores, labels, {1.0, 1.0}) == 2.0);
}

TEST_CASE("threshold_search is symmetric under equal costs") {
  const std::vector<double> scores = {-2.0, -1.0, 1.0, 2.0};
  const std::vector<int> labels = {-1, -1, 1, 1};
  REQUIRE(threshold_search(scores, labels, {1.0, 1.0}) == 0.0);
}

TEST_CASE("raising the false-negative cost pulls the threshold toward the majority") {
  const std::vector<double> scores = {0, 1, 2, 3, 4, 5, 6, 7, 8, 4.5};
  const std::vector<int> labels = {-1, -1, -1, -1, -1, -1, -1, -1, -1, 1};
  const double equal_t = threshold_search(scores, labels, {1.0, 1.0});
  const double skewed_t = threshold_search(scores, labels, {1.0, 9.0});
  REQUIRE(equal_t == 9.0);  // cheapest to predict all-negative
  REQUIRE(skewed_t == 4.25);
  REQUIRE(skewed_t < equal_t);
}

TEST_CASE("threshold_search decisions survive strictly increasing transforms") {
  const std::vector<double> scores = {0, 1, 2, 3, 4, 5, 6, 7, 8, 4.5};
  const std::vector<int> labels = {-1, -1, -1, -1, -1, -1, -1, -1, -1, 1};
  std::vector<double> transformed;
  for (double s : scores) transformed.push_back(std::exp(0.5 * s));

  for (const CostPair costs : {CostPair{1.0, 1.0}, CostPair{1.0, 9.0}}) {
    const double t = threshold_search(scores, labels, costs);
    const double tt = threshold_search(transformed, labels, costs);
    for (std::size_t i = 0; i < scores.size(); ++i)
      REQUIRE((scores[i] >= t) == (transformed[i] >= tt));
  }
}

TEST_CASE("threshold_search validates inputs") {
  REQUIRE_THROWS_AS(threshold_search({0.0, 1.0}, {1, 1}, {1.0, 1.0}), DataError);
  REQUIRE_THROWS_AS(threshold_search({0.0}, {1, -1}, {1.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(threshold_search({0.0, 1.0}, {1, -1}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("platt_fit satisfies the logistic stationarity conditions") {
  const std::vector<double> scores = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  const std::vector<int> labels = {-1, -1, 1, -1, 1, 1};
  const PlattParams p = platt_fit(scores, labels);
  REQUIRE(p.slope > 0.0);

  double g0 = 0.0, g1 = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double r = p.probability(scores[i]) - (labels[i] == 1 ? 1.0 : 0.0);
    g0 += r;
    g1 += r * scores[i];
  }
  REQUIRE_THAT(g0, WithinAbs(0.0, 1e-6));
  REQUIRE_THAT(g1, WithinAbs(0.0, 1e-6));

  for (double s : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
    REQUIRE(p.probability(s) > 0.0);
    REQUIRE(p.probability(s) < 1.0);
  }
  REQUIRE(p.probability(-1.0) < p.probability(1.0));
}

TEST_CASE("platt_fit validates inputs") {
  REQUIRE_THROWS_AS(platt_fit({1.0, 1.0}, {-1, 1}), DataError);   // degenerate
  REQUIRE_THROWS_AS(platt_fit({0.0, 1.0}, {1, 1}), DataError);    // one class
  REQUIRE_THROWS_AS(platt_fit({0.0}, {1, -1}), std::invalid_argument);
}

TEST_CASE("bmr_decide thresholds the probability at cost_fp/(cost_fp+cost_fn)") {
  REQUIRE(bmr_decide(0.5, {1.0, 1.0}) == 1);  // inclusive boundary
  REQUIRE(bmr_decide(0.4999, {1.0, 1.0}) == -1);
  REQUIRE(bmr_decide(0.6, {1.0, 1.0}) == 1);

  REQUIRE(bmr_decide(0.1, {1.0, 9.0}) == 1);
  REQUIRE(bmr_decide(0.0999, {1.0, 9.0}) == -1);

  for (double p : {0.01, 0.0999, 0.1, 0.11, 0.5, 0.99})
    REQUIRE(bmr_decide(p, {1.0, 9.0}) == bmr_decide(p, {2.0, 18.0}));

  REQUIRE_THROWS_AS(bmr_decide(0.5, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("imbalance_costs are inversely proportional to class frequency") {
  std::vector<int> labels(1000, -1);
  labels.insert(labels.end(), 10, 1);
  const CostPair c = imbalance_costs(labels);
  REQUIRE(c.cost_fp == 1.0);
  REQUIRE(c.cost_fn == 100.0);

  const CostPair balanced = imbalance_costs({1, -1, 1, -1});
  REQUIRE(balanced.cost_fn == 1.0);

  REQUIRE_THROWS_AS(imbalance_costs({1, 1}), DataError);
}

TEST_CASE("bmr with imbalance costs thresholds at the positive prevalence") {
  std::vector<int> labels(90, -1);
  labels.insert(labels.end(), 10, 1);
  const CostPair c = imbalance_costs(labels);
  for (double p : {0.05, 0.0999, 0.1, 0.11, 0.5, 0.9})
    REQUIRE(bmr_decide(p, c) == (p >= 0.1 ? 1 : -1));
}
