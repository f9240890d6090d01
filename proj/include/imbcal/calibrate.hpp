#pragma once

// Confidence-bound calibration: couple the per-class confidence levels
// through the non-overlap equality constraint, minimize the resulting 1-D
// loss in delta_1, and sweep slack budgets to handle overlapping classes.
// The output is a new decision threshold in the oriented projected space.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "imbcal/bounds.hpp"
#include "imbcal/projection.hpp"

namespace imbcal {

struct DeltaPair {
  double delta1 = 1.0;
  double delta2 = 1.0;
};

enum class SlackMode { Binary, Continuous };

struct SlackConfig {
  SlackMode mode = SlackMode::Binary;
  double alpha = 1.0;
  std::size_t budget = 100;  // k in Algorithm 1
};

struct SweepEntry {
  std::size_t m = 0;   // requested total exclusions
  std::size_t m1 = 0;  // effective class-1 exclusions (after caps)
  std::size_t m2 = 0;
  bool feasible = false;
  double conf_loss = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // L_sv
  DeltaPair deltas;
};

struct CalibrationResult {
  DeltaPair deltas;
  double threshold = 0.0;  // t' in oriented score space
  double bias_out = 0.0;   // -t', for the sgn(oriented score + b) form
  std::size_t best_budget = 0;
  std::vector<std::size_t> excluded;  // global sample indices at m*
  double loss = 0.0;                  // L_sv at m*
  bool feasible = false;
  int orientation = 1;
  ProjectionStats stats;  // statistics at m* (oriented)
  std::vector<SweepEntry> sweep;
  std::string advisory;
};

inline constexpr double kDeltaFloor = 1e-12;

// Eq. 6 objective over both classes.
inline double loss(const DeltaPair& d, std::size_t n1, std::size_t n2) {
  const double t1 = (1.0 - d.delta1) / static_cast<double>(n1 + 1) + d.delta1;
  const double t2 = (1.0 - d.delta2) / static_cast<double>(n2 + 1) + d.delta2;
  return t1 + t2;
}

namespace detail {

// B and u = B*sqrt(N2)/R2 for the Eq. 8 elimination of delta_2.
struct Coupling {
  double b = 0.0;
  double u = 0.0;
};

inline Coupling coupling(double delta1, const ProjectionStats& st) {
  const double r1 = st.class1.support;
  const double r2 = st.class2.support;
  const double bound1 =
      mean_deviation_bound({r1, st.class1.n_included, delta1});
  Coupling c;
  c.b = st.d_hat - r1 - bound1 - r2;
  c.u = r2 == 0.0 ? (c.b >= 0.0 ? HUGE_VAL : -HUGE_VAL)
                  : c.b * std::sqrt(static_cast<double>(st.class2.n_included)) / r2;
  return c;
}

}  // namespace detail

// Solve the non-overlap equality for delta_2 given delta_1. The closed form
// comes from squaring, which fabricates a root when the slack space is
// negative; the u >= 2 guard rejects exactly those cases. A zero class-2
// support makes any delta_2 valid, so the loss-minimal 1 is returned.
inline std::optional<double> delta2_from_delta1(double delta1, const ProjectionStats& st) {
  if (!(delta1 > 0.0) || delta1 > 1.0)
    throw std::invalid_argument("delta2_from_delta1: delta1 must be in (0,1]");
  const detail::Coupling c = detail::coupling(delta1, st);
  if (st.class2.support == 0.0) return c.b >= 0.0 ? std::optional<double>(1.0) : std::nullopt;
  if (c.u < 2.0) return std::nullopt;
  // the exp underflows to 0 for very separable classes; keep delta_2 in (0,1]
  return std::max(kDeltaFloor, std::exp(-0.5 * (c.u - 2.0) * (c.u - 2.0)));
}

// Analytic dL/d(delta_1) along the constraint, by the chain rule through
// Eq. 8. Note the paper's printed gradient differs (see docs); this form is
// the one that matches finite differences.
inline double loss_gradient(double delta1, const ProjectionStats& st) {
  if (!(delta1 > 0.0) || delta1 >= 1.0)
    throw std::invalid_argument("loss_gradient: delta1 must be in (0,1)");
  const detail::Coupling c = detail::coupling(delta1, st);
  if (st.class2.support == 0.0 || c.u < 2.0)
    throw std::invalid_argument("loss_gradient: infeasible delta1");
  const double n1 = static_cast<double>(st.class1.n_included);
  const double n2 = static_cast<double>(st.class2.n_included);
  const double r1 = st.class1.support;
  const double r2 = st.class2.support;
  const double um2 = c.u - 2.0;
  const double dd2 = -um2 * (std::sqrt(n2) * r1) / (r2 * std::sqrt(n1) * delta1) *
                     std::pow(2.0 * std::log(1.0 / delta1), -0.5) *
                     std::exp(-0.5 * um2 * um2);
  return n1 / (n1 + 1.0) + dd2 * n2 / (n2 + 1.0);
}

// Eq. 12 location in oriented score space. Calibrated rule: predict +1 iff
// oriented score >= t'.
inline double threshold_from_delta(double delta1_opt, const ProjectionStats& st) {
  if (!(delta1_opt > 0.0) || delta1_opt > 1.0)
    throw std::invalid_argument("threshold_from_delta: delta1 must be in (0,1]");
  return st.class1.proj_mean +
         support_upper_bound(st.class1.support,
                             {st.class1.support, st.class1.n_included, delta1_opt});
}

struct OptimResult {
  DeltaPair deltas;
  double loss = 0.0;
};

namespace detail {

struct Probe {
  double x = 0.0;
  double f = HUGE_VAL;
};

template <class F>
inline Probe golden_min(F f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  Probe best = f1 <= f2 ? Probe{x1, f1} : Probe{x2, f2};
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
      if (f1 < best.f) best = {x1, f1};
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
      if (f2 < best.f) best = {x2, f2};
    }
  }
  return best;
}

inline std::vector<double> delta_grid() {
  std::vector<double> g;
  g.reserve(400);
  for (int i = 0; i < 200; ++i)
    g.push_back(1e-9 * std::pow(1e9, static_cast<double>(i) / 199.0));
  for (int i = 0; i < 200; ++i)
    g.push_back(1e-3 + (1.0 - 1e-3) * static_cast<double>(i) / 199.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace detail

// Minimize loss(delta_1, delta_2(delta_1)) over delta_1 in (0,1]:
// deterministic grid, then golden-section refinement around the best grid
// point and around the feasibility edge (the objective can carry a second
// local minimum where the constraint first becomes satisfiable).
inline std::optional<OptimResult> optimize_deltas(const ProjectionStats& st) {
  const std::size_t n1 = st.class1.n_included;
  const std::size_t n2 = st.class2.n_included;
  auto objective = [&](double delta1) -> double {
    const double d1 = std::min(1.0, std::max(kDeltaFloor, delta1));
    const std::optional<double> d2 = delta2_from_delta1(d1, st);
    if (!d2) return HUGE_VAL;
    return loss({d1, *d2}, n1, n2);
  };

  static const std::vector<double> grid = detail::delta_grid();
  std::size_t best_i = grid.size();
  std::size_t first_feasible = grid.size();
  double best_f = HUGE_VAL;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = objective(grid[i]);
    if (f < HUGE_VAL && first_feasible == grid.size()) first_feasible = i;
    if (f < best_f) {
      best_f = f;
      best_i = i;
    }
  }
  if (best_i == grid.size()) return std::nullopt;

  detail::Probe best{grid[best_i], best_f};
  auto refine = [&](std::size_t i) {
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[std::min(i + 1, grid.size() - 1)];
    const detail::Probe p = detail::golden_min(objective, a, b, 1e-10);
    if (p.f < best.f) best = p;
  };
  refine(best_i);
  refine(first_feasible);

  const double d1 = std::min(1.0, std::max(kDeltaFloor, best.x));
  const std::optional<double> d2 = delta2_from_delta1(d1, st);
  if (!d2) return std::nullopt;  // unreachable: best came from a feasible probe
  return OptimResult{{d1, *d2}, best.f};
}

// Eq. 13 penalty over the currently excluded samples. Continuous mode
// measures each excluded sample's distance from its class's included-sample
// mean; distances are orientation-invariant.
inline double slack_penalty(const std::vector<ProjectedSample>& samples,
                            const ProjectionStats& st, const SlackConfig& cfg) {
  if (cfg.alpha < 0.0) throw std::invalid_argument("slack_penalty: alpha must be >= 0");
  if (cfg.mode == SlackMode::Binary) {
    std::size_t count = 0;
    for (const auto& s : samples)
      if (s.excluded) ++count;
    return cfg.alpha * static_cast<double>(count);
  }
  const double o = static_cast<double>(st.orientation);
  double total = 0.0;
  for (const auto& s : samples) {
    if (!s.excluded) continue;
    const double mean = s.label == 1 ? st.class2.proj_mean : st.class1.proj_mean;
    total += std::abs(o * s.score - mean);
  }
  return cfg.alpha * total;
}

// Algorithm 1: sweep the slack budget m = 0..k, allocating exclusions to
// classes in proportion to class size, and keep the feasible m with the
// lowest slack-adjusted loss (ties -> smallest m).
inline CalibrationResult calibrate(const std::vector<ProjectedSample>& samples,
                                   const SlackConfig& cfg) {
  std::size_t n1 = 0, n2 = 0;
  for (const auto& s : samples) (s.label == 1 ? n2 : n1)++;
  if (n1 < 2 || n2 < 2) throw DataError("calibrate: each class needs >= 2 samples");
  if (cfg.budget > samples.size())
    throw std::invalid_argument("calibrate: budget exceeds sample count");

  const std::vector<std::size_t> order1 = exclusion_order(samples, -1);
  const std::vector<std::size_t> order2 = exclusion_order(samples, 1);
  const double total = static_cast<double>(n1 + n2);

  CalibrationResult result;
  std::vector<ProjectedSample> work = samples;
  double best_total = HUGE_VAL;
  for (std::size_t m = 0; m <= cfg.budget; ++m) {
    std::size_t m1 = static_cast<std::size_t>(
        std::llround(static_cast<double>(m) * static_cast<double>(n1) / total));
    std::size_t m2 = m - std::min(m, m1);
    m1 = std::min({m1, m, n1 - 2, order1.size()});
    m2 = std::min({m2, n2 - 2, order2.size()});

    for (auto& s : work) s.excluded = false;
    for (std::size_t i = 0; i < m1; ++i) work[order1[i]].excluded = true;
    for (std::size_t i = 0; i < m2; ++i) work[order2[i]].excluded = true;

    const ProjectionStats st = compute_stats(work);
    const std::optional<OptimResult> opt = optimize_deltas(st);

    SweepEntry entry;
    entry.m = m;
    entry.m1 = m1;
    entry.m2 = m2;
    entry.feasible = opt.has_value();
    if (opt) {
      entry.conf_loss = opt->loss;
      entry.penalty = slack_penalty(work, st, cfg);
      entry.total = entry.conf_loss + entry.penalty;
      entry.deltas = opt->deltas;
      if (entry.total < best_total) {
        best_total = entry.total;
        result.feasible = true;
        result.deltas = opt->deltas;
        result.best_budget = m;
        result.loss = entry.total;
        result.stats = st;
        result.orientation = st.orientation;
        result.excluded.clear();
        for (std::size_t i = 0; i < work.size(); ++i)
          if (work[i].excluded) result.excluded.push_back(i);
      }
    }
    result.sweep.push_back(entry);
  }

  if (!result.feasible) {
    result.advisory =
        "no feasible slack budget; cost-sensitive retraining of the classifier is recommended";
    return result;
  }
  result.threshold = threshold_from_delta(result.deltas.delta1, result.stats);
  result.bias_out = -result.threshold;
  return result;
}

// Calibrated decision rule over raw scores.
inline std::vector<int> predict_calibrated(const std::vector<double>& scores,
                                           const CalibrationResult& r) {
  if (!r.feasible) throw std::invalid_argument("predict_calibrated: infeasible calibration");
  std::vector<int> out;
  out.reserve(scores.size());
  const double o = static_cast<double>(r.orientation);
  for (double s : scores) out.push_back(o * s >= r.threshold ? 1 : -1);
  return out;
}

}  // namespace imbcal
