#pragma once

// State/action space, channel error profile and transition law of the
// age-of-information scheduling problem with ARQ/HARQ feedback.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

/// (age, retransmission count). The age is the number of slots since the
/// freshest decoded update was generated; r counts failed attempts of the
/// packet currently held by the source.
struct State {
  int delta = 1;
  int r = 0;

  friend constexpr auto operator<=>(const State&, const State&) = default;
};

std::ostream& operator<<(std::ostream& os, const State& s);

inline constexpr State kRenewalState{1, 0};

enum class Action : std::uint8_t { Idle = 0, NewUpdate = 1, Retransmit = 2 };

inline constexpr int kNumActions = 3;
inline constexpr std::array<Action, kNumActions> kAllActions{
    Action::Idle, Action::NewUpdate, Action::Retransmit};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

/// Single-letter code used in tables: i, n, x.
char action_code(Action a);
std::string_view action_name(Action a);
Action parse_action(std::string_view text);

std::ostream& operator<<(std::ostream& os, Action a);

inline constexpr int kUnboundedRetransmissions = std::numeric_limits<int>::max();

/// Decoding error profile g(r) = p0 * lambda^r.
///
/// lambda = 1 with r_max = 0 is classical ARQ. If g underflows to zero for
/// some r, r_max is capped at the smallest such r: the attempt with r prior
/// failures then succeeds with certainty.
class ChannelModel {
 public:
  ChannelModel(double p0, double lambda, int r_max = kUnboundedRetransmissions);

  static ChannelModel arq(double p) { return ChannelModel(p, 1.0, 0); }

  double p0() const { return p0_; }
  double lambda() const { return lambda_; }
  int r_max() const { return r_max_; }
  bool bounded() const { return r_max_ != kUnboundedRetransmissions; }
  bool is_arq() const { return r_max_ == 0; }

  /// g(r). Throws InadmissibleError for r outside [0, r_max].
  double error_prob(int r) const;

  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;

 private:
  double p0_;
  double lambda_;
  int r_max_;
};

double error_prob(const ChannelModel& model, int r);

/// Finite approximation used by solvers: ages are clamped at n_max and
/// retransmission is forbidden once r reaches r_max.
struct Truncation {
  int n_max = 2;
  int r_max = 0;

  Truncation() = default;
  Truncation(int n_max, int r_max);

  /// Largest retransmission cap the model supports below n_max.
  static Truncation fit(const ChannelModel& model, int n_max);

  friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Number of admissible states, and the row-major (age, then r) index.
std::size_t state_count(const Truncation& trunc);
bool admissible(const Truncation& trunc, State s);
std::size_t state_index(const Truncation& trunc, State s);

/// All (delta, r) with 1 <= delta <= n_max and r < min(delta, r_max + 1),
/// ordered by delta then r.
std::vector<State> enumerate_states(const Truncation& trunc);

/// Maps an untruncated state onto the truncated grid.
State clamp(const Truncation& trunc, State s);

struct TransitionEntry {
  State next;
  double prob = 0.0;

  friend bool operator==(const TransitionEntry&, const TransitionEntry&) = default;
};

/// Support of one (state, action) row; at most two outcomes.
class Successors {
 public:
  void push(State next, double prob) { entries_[size_++] = {next, prob}; }
  std::size_t size() const { return size_; }
  const TransitionEntry* begin() const { return entries_.data(); }
  const TransitionEntry* end() const { return entries_.data() + size_; }
  const TransitionEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::array<TransitionEntry, 2> entries_{};
  std::size_t size_ = 0;
};

/// The truncated AoI MDP: channel plus truncation, with the admissible
/// state set precomputed.
class Mdp {
 public:
  Mdp(ChannelModel model, Truncation trunc);

  const ChannelModel& model() const { return model_; }
  const Truncation& truncation() const { return trunc_; }

  std::size_t size() const { return states_.size(); }
  const std::vector<State>& states() const { return states_; }
  std::size_t index(State s) const { return state_index(trunc_, s); }
  bool contains(State s) const { return aoi::admissible(trunc_, s); }

  bool admissible(State s, Action a) const;

  /// Transition law; failed-attempt ages are clamped at n_max.
  Successors successors(State s, Action a) const;

 private:
  ChannelModel model_;
  Truncation trunc_;
  std::vector<State> states_;
};

std::vector<TransitionEntry> transitions(State s, Action a, const ChannelModel& model,
                                         const Truncation& trunc);

/// Lagrangian stage cost: age plus eta per transmission.
constexpr double stage_cost(State s, Action a, double eta) {
  return static_cast<double>(s.delta) + (a == Action::Idle ? 0.0 : eta);
}

}  // namespace aoi
