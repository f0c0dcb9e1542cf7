#pragma once

// Average-cost SARSA with Boltzmann exploration. The agent never reads the
// channel's error profile; it sees only states, its own actions and costs.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "aoi/rvi.hpp"
#include "aoi/sim.hpp"

namespace aoi {

using ActionMask = std::array<bool, kNumActions>;

/// pi(a) proportional to exp(-(Q(a) - min Q) / tau) over admissible actions.
ActionDist softmax_probs(const QRow& q, const ActionMask& allowed, double tau);

struct LearnerConfig {
  Truncation trunc{100, 0};
  double tau = 1.0;
  double tau_decay = 1.0;  // tau_n = max(tau_min, tau * tau_decay^(n-1))
  double tau_min = 0.0;
  std::function<double(long long)> learning_rate;  // empty: 1 / sqrt(n)
  double eta = 0.0;
  bool eta_adapt = false;
  double c_max = 1.0;
  double eta_step = 1.0;  // eta <- max(0, eta + eta_step / sqrt(n) * (C_hat - C_max))
  bool allow_idle = true;
  long long horizon = 10000;
  std::uint64_t seed = 1;
  long long record_every = 100;
};

struct LearnerState {
  Truncation trunc;
  std::vector<QRow> q;
  std::vector<ActionMask> allowed;
  double gain = 0.0;  // running average of the Lagrangian stage cost
  double eta = 0.0;
  long long n = 0;
  double empirical_cost = 0.0;  // running average of 1[a != idle]
  double aoi_sum = 0.0;         // sum of true (unclamped) ages
  // On-policy successor action drawn for the TD target, taken next slot.
  std::optional<std::pair<State, Action>> pending;

  double mean_aoi() const { return n > 0 ? aoi_sum / static_cast<double>(n) : 0.0; }
  double max_abs_q() const;
};

LearnerState make_learner(const ChannelModel& model, const LearnerConfig& cfg);

/// One slot of the learner against `env`.
void step(LearnerState& ls, SlotEnvironment& env, const LearnerConfig& cfg, Rng& rng);

DeterministicTable greedy_policy(const LearnerState& ls);

struct TimelinePoint {
  long long n = 0;
  double mean_aoi = 0.0;
  double mean_cost = 0.0;
  double eta = 0.0;
  double gain = 0.0;
};

struct TrainResult {
  LearnerState state;
  std::vector<TimelinePoint> timeline;
};

/// `horizon` steps from (1,0) against the simulated channel. Records a
/// timeline point every record_every slots and at the end.
TrainResult train(const ChannelModel& model, const LearnerConfig& cfg, std::uint64_t stream = 0);

/// Across-replication moments of the timeline, aligned by step count.
struct TimelineStats {
  long long n = 0;
  double mean_aoi = 0.0;
  double var_aoi = 0.0;
  double mean_cost = 0.0;
  double var_cost = 0.0;
  double mean_eta = 0.0;
};

std::vector<TimelineStats> train_replications(const ChannelModel& model, const LearnerConfig& cfg,
                                              int replications, unsigned workers = 0);

void write_timeline_csv(std::ostream& os, std::span<const TimelinePoint> timeline);
void write_timeline_stats_csv(std::ostream& os, std::span<const TimelineStats> timeline);
void write_q_csv(std::ostream& os, const LearnerState& ls);

}  // namespace aoi
