#pragma once

// Slotted simulation of the source -> channel -> destination loop with
// instantaneous ACK/NACK feedback. Ages are never truncated here.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/policy.hpp"

namespace aoi {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream index).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double uniform01(Rng& rng);

struct SlotRecord {
  long long t = 0;
  State before;
  Action action = Action::Idle;
  std::optional<bool> success;  // empty for Idle
  State after;
};

struct RunResult {
  double avg_aoi = 0.0;
  double avg_cost = 0.0;
  long long horizon = 0;
  std::vector<SlotRecord> trace;
};

/// Per-replication time averages plus their across-replication moments
/// (sample variance, n - 1 denominator).
struct RunStats {
  std::vector<double> aoi;
  std::vector<double> cost;
  double mean_aoi = 0.0;
  double var_aoi = 0.0;
  double mean_cost = 0.0;
  double var_cost = 0.0;

  static RunStats from(std::vector<double> aoi, std::vector<double> cost);
  double se_aoi() const;
  double se_cost() const;
};

/// Retransmit needs a failed packet (r >= 1) and either r < r_max or a
/// certain success at r.
bool admissible(const ChannelModel& model, State s, Action a);

/// One-slot dynamics. `success` is ignored for Idle.
State next_state(const ChannelModel& model, State s, Action a, bool success);

struct SlotOutcome {
  State next;
  std::optional<bool> success;
};

class SlotEnvironment {
 public:
  virtual ~SlotEnvironment() = default;
  virtual State state() const = 0;
  virtual SlotOutcome step(Action a) = 0;
};

/// i.i.d. channel: an attempt with r prior failures errs iff U < g(r).
class ChannelEnvironment final : public SlotEnvironment {
 public:
  ChannelEnvironment(const ChannelModel& model, Rng& rng, State start = kRenewalState)
      : model_(model), rng_(rng), state_(start) {}

  State state() const override { return state_; }
  SlotOutcome step(Action a) override;

 private:
  const ChannelModel& model_;
  Rng& rng_;
  State state_;
};

/// Executes a Policy slot by slot; keeps the active component of a mixture
/// and redraws it whenever the state is (1,0).
class PolicyRunner {
 public:
  explicit PolicyRunner(const Policy& policy) : policy_(policy) {}
  Action act(State s, long long t, Rng& rng);

 private:
  const Policy& policy_;
  bool use_first_ = true;
};

/// Throws ProtocolViolation if the policy picks an inadmissible action.
RunResult run(const Policy& policy, const ChannelModel& model, long long horizon, std::uint64_t seed,
              bool keep_trace = false, std::uint64_t stream = 0);

/// Fresh update every ceil(1/c_max) slots, no feedback.
Policy baseline_periodic(double c_max);
int baseline_period(double c_max);

void write_trace_csv(std::ostream& os, std::span<const SlotRecord> trace);

/// Stats rows: policy,p0,lambda,r_max,c_max,mean_aoi,var_aoi,mean_cost.
struct StatsRow {
  std::string policy;
  ChannelModel model;
  double c_max = 1.0;
  RunStats stats;
};

inline constexpr const char* kStatsSchema = "stats/v1";
void write_stats_csv(std::ostream& os, std::span<const StatsRow> rows);

}  // namespace aoi
