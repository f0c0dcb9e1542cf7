#include "aoi/arq.hpp"

#include <algorithm>
#include <cmath>

#include "aoi/errors.hpp"

namespace aoi::arq {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("ARQ error probability must lie in [0,1)");
}

void check_threshold(double delta) {
  if (!(delta >= 1.0)) throw InvalidArgument("threshold must be at least 1");
}

}  // namespace

ArqInstance::ArqInstance(double p_, double c_max_) : p(p_), c_max(c_max_) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("ARQ error probability must lie in (0,1)");
  if (!(c_max > 0.0 && c_max <= 1.0)) throw InvalidArgument("c_max must lie in (0,1]");
}

ThresholdCandidates threshold_candidates(double p, double eta) {
  check_p(p);
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  const double x = (std::sqrt(2.0 * eta * (1.0 - p) + p) - p) / (1.0 - p);
  return {x, std::max(1, static_cast<int>(std::floor(x))), std::max(1, static_cast<int>(std::ceil(x)))};
}

double cost_of_threshold(double p, double delta) {
  check_p(p);
  check_threshold(delta);
  return 1.0 / (delta * (1.0 - p) + p);
}

double aoi_of_threshold(double p, double delta) {
  check_p(p);
  check_threshold(delta);
  const double k = delta * (1.0 - p) + p;
  return (k * k + p) / (2.0 * (1.0 - p) * k) + 0.5;
}

double cycle_length(double p, double delta) {
  check_p(p);
  check_threshold(delta);
  return delta + p / (1.0 - p);
}

double lagrangian_cost(double p, double delta, double eta) {
  check_p(p);
  check_threshold(delta);
  const double q = 1.0 - p;
  const double p1 = 1.0 / cycle_length(p, delta);
  return p1 * ((delta - 1.0) * delta / 2.0 + (eta + delta) / q + p / (q * q));
}

double stationary_prob(double p, int delta, int age) {
  check_p(p);
  check_threshold(delta);
  if (age < 1) throw InvalidArgument("age must be at least 1");
  const double p1 = 1.0 / cycle_length(p, delta);
  return age <= delta ? p1 : std::pow(p, age - delta) * p1;
}

RandomizedThreshold optimal_policy(const ArqInstance& inst) {
  const double p = inst.p;
  const double target = (1.0 / inst.c_max - p) / (1.0 - p);
  RandomizedThreshold out{};
  const double nearest = std::round(target);
  if (std::abs(target - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    out.delta_cmax = nearest;
    out.delta1 = out.delta2 = static_cast<int>(nearest);
    out.mu_star = 1.0;
    out.cost = cost_of_threshold(p, nearest);
    out.aoi = aoi_of_threshold(p, nearest);
    return out;
  }
  out.delta_cmax = target;
  out.delta1 = static_cast<int>(std::floor(target));
  out.delta2 = out.delta1 + 1;
  out.mu_star = out.delta2 - target;
  // Renewal-reward: mix cycle lengths and per-cycle age sums.
  const double l1 = cycle_length(p, out.delta1);
  const double l2 = cycle_length(p, out.delta2);
  const double w1 = out.mu_star * l1;
  const double w2 = (1.0 - out.mu_star) * l2;
  out.aoi = (w1 * aoi_of_threshold(p, out.delta1) + w2 * aoi_of_threshold(p, out.delta2)) / (w1 + w2);
  out.cost = 1.0 / ((1.0 - p) * (out.mu_star * l1 + (1.0 - out.mu_star) * l2));
  return out;
}

}  // namespace aoi::arq
