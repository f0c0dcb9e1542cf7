#pragma once

// Relative value iteration for the eta-relaxed average-cost problem.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/policy.hpp"

namespace aoi {

using QRow = std::array<double, kNumActions>;  // +inf marks inadmissible actions

struct SolverConfig {
  double epsilon = 1e-8;        // sup-norm threshold on T h - gain - h
  long max_iters = 1'000'000;
  State reference = kRenewalState;
  bool allow_idle = true;       // false: C_max = 1 mode, actions {new, retransmit}
  // h <- h + damping (T h - gain - h): aperiodicity transform (a self-loop of
  // weight 1 - damping on every state). Same fixed point; undamped RVI can
  // cycle forever on periodic policies.
  double damping = 0.9;
  std::vector<double> initial_h;  // warm start; empty means h = 0
};

struct SolverOutput {
  Truncation trunc;
  std::vector<State> states;
  std::vector<double> h;      // differential cost, h(reference) = 0
  std::vector<QRow> q;        // stage cost + E[h(next)] from the previous iterate
  double gain = 0.0;          // L*_eta estimate
  DeterministicTable policy;  // greedy w.r.t. q
  long iterations = 0;
  double residual = 0.0;      // final sup-norm change of h
  bool allow_idle = true;

  double h_at(State s) const { return h[state_index(trunc, s)]; }
  double q_at(State s, Action a) const { return q[state_index(trunc, s)][index_of(a)]; }
};

/// Synchronous RVI sweeps until |h_{n+1} - h_n| <= epsilon. Throws
/// IterationLimitError (carrying the last residual) after max_iters sweeps.
SolverOutput solve(const ChannelModel& model, const Truncation& trunc, double eta,
                   const SolverConfig& cfg = {});

/// eta = 0 with Idle removed.
SolverOutput solve_unconstrained(const ChannelModel& model, const Truncation& trunc,
                                 SolverConfig cfg = {});

/// sup_s |min_a(c(s,a) + E h(next)) - gain - h(s)| over the output's action set.
double bellman_residual(const SolverOutput& out, const ChannelModel& model, const Truncation& trunc,
                        double eta);

/// Per-state argmin with ties broken Idle < NewUpdate < Retransmit.
Action argmin_action(const QRow& row);
DeterministicTable greedy_policy(const Truncation& trunc, std::span<const QRow> q);

/// If the table only uses Idle/NewUpdate on r = 0 states and switches from
/// Idle to NewUpdate exactly once along the age, returns that age; else 0.
int threshold_of(const DeterministicTable& policy);

/// CSV dumps: one row per state, one column per action.
void write_values_csv(std::ostream& os, const SolverOutput& out);
void write_policy_csv(std::ostream& os, const DeterministicTable& policy);

}  // namespace aoi
