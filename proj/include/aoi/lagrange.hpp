#pragma once

// Lagrange multiplier search and construction of the budget-meeting mixture
// of two eta-optimal deterministic policies.

#include <iosfwd>
#include <span>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/rvi.hpp"

namespace aoi {

struct EtaSearchConfig {
  double eta0 = 1.0;
  // alpha_m = step_scale / (m + 1); 0 picks |L*| at eta0.
  double step_scale = 0.0;
  double stop_tol = 1e-9;  // |C_eta - C_max| accepted as an exact hit
  double xi = 0.2;
  int max_steps = 200;
};

/// RVI at one multiplier plus exact evaluation of its greedy policy.
struct EtaPoint {
  double eta = 0.0;
  double gain = 0.0;  // L*_eta
  EvalResult eval;    // C_eta, J_eta of the greedy policy
  DeterministicTable policy;
};

EtaPoint evaluate_eta(const ChannelModel& model, const Truncation& trunc, double eta,
                      const SolverConfig& solver = {});

struct EtaSearchResult {
  double eta_star = 0.0;
  double eta_below = 0.0;  // largest probed eta with C_eta > C_max
  double eta_above = 0.0;  // smallest probed eta with C_eta <= C_max
  bool exact = false;      // C_{eta_star} hit C_max within stop_tol
  std::vector<SearchStep> trace;
};

/// Stochastic-approximation updates eta <- eta + alpha_m (C_eta - C_max),
/// kept inside the current bracket, until C_eta hits C_max or the bracket
/// [eta_below, eta_above] is at most 2 xi wide (then eta* is its midpoint).
/// Throws SearchFailure with the trace after max_steps.
EtaSearchResult search_eta_star(const ChannelModel& model, const Truncation& trunc, double c_max,
                                const EtaSearchConfig& cfg = {}, const SolverConfig& solver = {});

/// (c_max - c_high) / (c_low - c_high): the weight on the costlier policy
/// that makes the *average of the two averages* equal c_max. Returns 1 when
/// the costs coincide; throws BracketError unless c_high <= c_max <= c_low.
double mixture_weight(double c_low, double c_high, double c_max);

/// Weight on `low` for a mixture redrawn at every visit to (1,0): the
/// long-run cost is a ratio of cycle averages, so the weight differs from
/// mixture_weight unless both policies have the same mean cycle length.
double renewal_mixture_weight(const EvalResult& low, const EvalResult& high, double c_max);

struct ConstrainedSolution {
  double eta_star = 0.0;
  double xi = 0.0;  // perturbation actually used
  DeterministicTable policy_low;   // optimal for eta* - xi, C >= C_max
  DeterministicTable policy_high;  // optimal for eta* + xi, C <= C_max
  EvalResult eval_low;
  EvalResult eval_high;
  std::size_t differing_states = 0;
  double mu = 1.0;  // probability of following policy_low
  Policy mixed;
  double achieved_cost = 0.0;
  double achieved_aoi = 0.0;
  EtaSearchResult search;
};

/// Full pipeline: eta* search, the eta* +/- xi pair (xi doubled up to 8x
/// until the pair brackets C_max), then a single-state randomization if the
/// pair differs in one state, otherwise a mixture redrawn at (1,0). The
/// weight is set so the exact long-run cost equals C_max. C_max = 1 returns
/// the unconstrained policy.
ConstrainedSolution solve_constrained(const ChannelModel& model, const Truncation& trunc, double c_max,
                                      const EtaSearchConfig& cfg = {}, const SolverConfig& solver = {});

void write_search_trace_csv(std::ostream& os, std::span<const SearchStep> trace);

}  // namespace aoi
