#pragma once

// Concentration-bound arithmetic for the projected score space. Everything
// here is a scalar formula around the deviation bound
//   (R / sqrt(N)) * (2 + sqrt(2 ln(1/delta)))
// plus a Monte-Carlo check of the rank-ordering probability 1/(N+1) that
// motivates using it.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "imbcal/common.hpp"

namespace imbcal {

struct BoundInputs {
  double radius = 0.0;   // support radius (or its empirical stand-in)
  std::size_t n = 1;     // sample count
  double delta = 1.0;    // confidence level in (0, 1]
};

inline void validate(const BoundInputs& in) {
  if (!(in.delta > 0.0) || in.delta > 1.0)
    throw std::invalid_argument("bounds: delta must be in (0,1]");
  if (in.n < 1) throw std::invalid_argument("bounds: n must be >= 1");
  if (in.radius < 0.0) throw std::invalid_argument("bounds: radius must be >= 0");
}

// Deviation of an empirical mean from its expectation that holds with
// probability at least 1 - delta.
inline double mean_deviation_bound(const BoundInputs& in) {
  validate(in);
  return (in.radius / std::sqrt(static_cast<double>(in.n))) *
         (2.0 + std::sqrt(2.0 * std::log(1.0 / in.delta)));
}

// Interval for the distance of a point from the true mean, given its
// distance d_bar from the empirical mean. The lower end may be negative;
// it is reported as computed.
inline std::pair<double, double> distance_interval(double d_bar, const BoundInputs& in) {
  if (d_bar < 0.0) throw std::invalid_argument("bounds: d_bar must be >= 0");
  const double dev = mean_deviation_bound(in);
  return {d_bar - dev, d_bar + dev};
}

// Distance a test point must exceed for the ordering event whose probability
// is at most 1/(N+1): the training-set maximum plus twice the mean bound.
inline double novel_point_threshold(double d_bar_max, const BoundInputs& in) {
  if (d_bar_max < 0.0) throw std::invalid_argument("bounds: d_bar_max must be >= 0");
  return d_bar_max + 2.0 * mean_deviation_bound(in);
}

// Inflated class support: empirical support plus its own deviation bound
// (the empirical value stands in for the unknown true radius).
inline double support_upper_bound(double r_bar, const BoundInputs& in) {
  if (r_bar < 0.0) throw std::invalid_argument("bounds: r_bar must be >= 0");
  BoundInputs plug{r_bar, in.n, in.delta};
  return r_bar + mean_deviation_bound(plug);
}

enum class Variates { Uniform, Gaussian };

// Fraction of trials in which the (N+1)-th i.i.d. draw exceeds the maximum
// of the first N. For a continuous distribution this converges to 1/(N+1)
// regardless of the distribution chosen.
inline double ordering_probability_mc(std::size_t n, std::size_t trials, std::uint64_t seed,
                                      Variates variates = Variates::Uniform) {
  if (n < 1) throw std::invalid_argument("bounds: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("bounds: trials must be >= 1");
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double max_train = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = variates == Variates::Uniform ? rng.uniform() : rng.normal();
      if (x > max_train) max_train = x;
    }
    const double test = variates == Variates::Uniform ? rng.uniform() : rng.normal();
    if (test > max_train) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace imbcal
