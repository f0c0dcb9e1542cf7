#pragma once

// Closed-form results for classical ARQ (constant error probability p, no
// retransmission state): threshold policies and their costs.

#include "aoi/policy.hpp"

namespace aoi::arq {

struct ArqInstance {
  double p;
  double c_max;

  ArqInstance(double p, double c_max);
};

struct ThresholdCandidates {
  double continuous;  // non-integer minimiser of the Lagrangian cost
  int lower;
  int upper;
};

/// floor/ceil of (sqrt(2 eta (1-p) + p) - p) / (1-p), clamped to >= 1.
ThresholdCandidates threshold_candidates(double p, double eta);

/// Transmissions per slot of threshold Delta: 1 / (Delta (1-p) + p).
double cost_of_threshold(double p, double delta);

/// Average age of threshold Delta.
double aoi_of_threshold(double p, double delta);

/// Average Lagrangian cost, computed from the stationary law of the age.
double lagrangian_cost(double p, double delta, double eta);

/// Stationary probability of age `age` under threshold `delta`.
double stationary_prob(double p, int delta, int age);

/// Expected slots between fresh deliveries: Delta + p / (1 - p).
double cycle_length(double p, double delta);

/// Randomized threshold meeting the budget with equality.
///
/// Thresholds delta1 = floor(delta_cmax) and delta2 = ceil(delta_cmax). At
/// age delta1 the source transmits with probability mu_star. Since delta1 is
/// visited at most once between deliveries, this equals redrawing the
/// threshold at every delivery; the cycle length is then linear in mu and
/// mu_star = delta2 - delta_cmax puts the cost exactly at c_max.
struct RandomizedThreshold {
  double delta_cmax;
  int delta1;
  int delta2;
  double mu_star;
  double cost;
  double aoi;

  ThresholdArq rule() const { return {delta1, delta2, mu_star}; }
  Policy policy() const { return Policy(rule()); }
};

RandomizedThreshold optimal_policy(const ArqInstance& inst);

}  // namespace aoi::arq
