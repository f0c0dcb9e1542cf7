#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi {

/// Probabilities indexed by Action.
using ActionDist = std::array<double, kNumActions>;

ActionDist point_mass(Action a);

/// One action per truncated state, row-major order. Untruncated states are
/// looked up through clamp().
struct DeterministicTable {
  Truncation trunc;
  std::vector<Action> actions;

  Action at(State s) const { return actions[state_index(trunc, clamp(trunc, s))]; }
  /// Number of truncated states where the two tables disagree.
  friend std::size_t count_differences(const DeterministicTable& a, const DeterministicTable& b);
  friend bool operator==(const DeterministicTable&, const DeterministicTable&) = default;
};

struct RandomizedTable {
  Truncation trunc;
  std::vector<ActionDist> dists;

  const ActionDist& at(State s) const { return dists[state_index(trunc, clamp(trunc, s))]; }
};

/// ARQ threshold rule on the age: transmit a fresh update when delta >= upper,
/// idle below lower, and at delta == lower < upper transmit with probability mu.
/// A deterministic threshold has lower == upper.
struct ThresholdArq {
  int lower = 1;
  int upper = 1;
  double mu = 1.0;

  static ThresholdArq deterministic(int threshold) { return {threshold, threshold, 1.0}; }
};

/// Two deterministic policies; the active one is redrawn (first with
/// probability mu) every time the renewal state (1,0) is entered.
struct MixtureAtRenewal {
  DeterministicTable first;
  DeterministicTable second;
  double mu = 1.0;
};

/// Open-loop baseline: a fresh update on every slot t with t = 1 (mod period),
/// ignoring feedback.
struct PeriodicBaseline {
  int period = 1;
};

enum class PolicyKind { DeterministicTable, RandomizedTable, ThresholdArq, MixtureAtRenewal, Periodic };

std::string_view kind_name(PolicyKind kind);

class Policy {
 public:
  using Variant =
      std::variant<DeterministicTable, RandomizedTable, ThresholdArq, MixtureAtRenewal, PeriodicBaseline>;

  /// Transmit a fresh update every slot.
  Policy() : rep_(ThresholdArq{}) {}
  Policy(DeterministicTable t);
  Policy(RandomizedTable t);
  Policy(ThresholdArq t);
  Policy(MixtureAtRenewal m);
  Policy(PeriodicBaseline b);

  PolicyKind kind() const { return static_cast<PolicyKind>(rep_.index()); }
  const Variant& variant() const { return rep_; }

  /// Stationary, Markov in the state (everything except mixtures and the
  /// open-loop baseline).
  bool stationary() const;

  /// Action distribution in state s; only for stationary kinds.
  ActionDist distribution(State s) const;

  template <class T>
  const T& as() const { return std::get<T>(rep_); }

 private:
  Variant rep_;
};

Policy always_new_update(const Truncation& trunc);

}  // namespace aoi
