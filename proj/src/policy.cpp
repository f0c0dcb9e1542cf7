#include "aoi/policy.hpp"

#include <cmath>

#include "aoi/errors.hpp"

namespace aoi {

ActionDist point_mass(Action a) {
  ActionDist d{};
  d[index_of(a)] = 1.0;
  return d;
}

std::size_t count_differences(const DeterministicTable& a, const DeterministicTable& b) {
  if (!(a.trunc == b.trunc)) throw InvalidArgument("policy tables use different truncations");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.actions.size(); ++i) n += a.actions[i] != b.actions[i];
  return n;
}

std::string_view kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::DeterministicTable: return "deterministic";
    case PolicyKind::RandomizedTable: return "randomized";
    case PolicyKind::ThresholdArq: return "threshold";
    case PolicyKind::MixtureAtRenewal: return "mixture";
    case PolicyKind::Periodic: return "periodic";
  }
  return "?";
}

namespace {

void check_dist(const ActionDist& d) {
  double sum = 0.0;
  for (double p : d) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("action probabilities must lie in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("action probabilities must sum to 1");
}

void check_table(const Truncation& trunc, std::size_t n) {
  if (n != state_count(trunc)) throw InvalidArgument("policy table size does not match its truncation");
}

}  // namespace

Policy::Policy(DeterministicTable t) : rep_(std::move(t)) {
  const auto& tab = std::get<DeterministicTable>(rep_);
  check_table(tab.trunc, tab.actions.size());
}

Policy::Policy(RandomizedTable t) : rep_(std::move(t)) {
  const auto& tab = std::get<RandomizedTable>(rep_);
  check_table(tab.trunc, tab.dists.size());
  for (const auto& d : tab.dists) check_dist(d);
}

Policy::Policy(ThresholdArq t) : rep_(t) {
  if (t.lower < 1 || t.upper < t.lower || t.upper > t.lower + 1)
    throw InvalidArgument("threshold policy requires 1 <= lower <= upper <= lower + 1");
  if (!(t.mu >= 0.0 && t.mu <= 1.0)) throw InvalidArgument("threshold randomization must lie in [0,1]");
}

Policy::Policy(MixtureAtRenewal m) : rep_(std::move(m)) {
  const auto& mix = std::get<MixtureAtRenewal>(rep_);
  check_table(mix.first.trunc, mix.first.actions.size());
  check_table(mix.second.trunc, mix.second.actions.size());
  if (!(mix.mu >= 0.0 && mix.mu <= 1.0)) throw InvalidArgument("mixture weight must lie in [0,1]");
}

Policy::Policy(PeriodicBaseline b) : rep_(b) {
  if (b.period < 1) throw InvalidArgument("baseline period must be positive");
}

bool Policy::stationary() const {
  const PolicyKind k = kind();
  return k != PolicyKind::MixtureAtRenewal && k != PolicyKind::Periodic;
}

ActionDist Policy::distribution(State s) const {
  switch (kind()) {
    case PolicyKind::DeterministicTable:
      return point_mass(std::get<DeterministicTable>(rep_).at(s));
    case PolicyKind::RandomizedTable:
      return std::get<RandomizedTable>(rep_).at(s);
    case PolicyKind::ThresholdArq: {
      const auto& t = std::get<ThresholdArq>(rep_);
      if (t.lower < t.upper && s.delta == t.lower) return {1.0 - t.mu, t.mu, 0.0};
      return point_mass(s.delta >= t.upper ? Action::NewUpdate : Action::Idle);
    }
    default:
      throw InvalidArgument("policy kind has no state-only action distribution");
  }
}

Policy always_new_update(const Truncation& trunc) {
  return DeterministicTable{trunc, std::vector<Action>(state_count(trunc), Action::NewUpdate)};
}

}  // namespace aoi
