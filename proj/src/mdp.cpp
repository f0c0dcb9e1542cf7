#include "aoi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "aoi/errors.hpp"

namespace aoi {

std::ostream& operator<<(std::ostream& os, const State& s) {
  return os << '(' << s.delta << ',' << s.r << ')';
}

char action_code(Action a) {
  switch (a) {
    case Action::Idle: return 'i';
    case Action::NewUpdate: return 'n';
    case Action::Retransmit: return 'x';
  }
  return '?';
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Idle: return "idle";
    case Action::NewUpdate: return "new";
    case Action::Retransmit: return "retransmit";
  }
  return "?";
}

Action parse_action(std::string_view text) {
  if (text == "i" || text == "idle") return Action::Idle;
  if (text == "n" || text == "new") return Action::NewUpdate;
  if (text == "x" || text == "retransmit") return Action::Retransmit;
  throw InvalidArgument("unknown action '" + std::string(text) + "'");
}

std::ostream& operator<<(std::ostream& os, Action a) { return os << action_name(a); }

namespace {

// Smallest r with p0 * lambda^r == 0 in double arithmetic, or -1 if none.
int first_zero_error(double p0, double lambda) {
  if (p0 == 0.0) return 0;
  if (lambda >= 1.0) return -1;
  const double estimate = std::log(std::numeric_limits<double>::denorm_min() / p0) / std::log(lambda);
  int r = std::max(0, static_cast<int>(estimate) - 4);
  while (p0 * std::pow(lambda, r) > 0.0) ++r;
  while (r > 0 && p0 * std::pow(lambda, r - 1) == 0.0) --r;
  return r;
}

}  // namespace

ChannelModel::ChannelModel(double p0, double lambda, int r_max)
    : p0_(p0), lambda_(lambda), r_max_(r_max) {
  // p0 = 0 is the error-free channel; it is kept for degenerate checks.
  if (!(p0 >= 0.0 && p0 < 1.0)) throw InvalidArgument("p0 must lie in [0,1)");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in (0,1]");
  if (r_max < 0) throw InvalidArgument("r_max must be non-negative");
  const int zero_at = first_zero_error(p0, lambda);
  if (zero_at >= 0 && zero_at < r_max_) r_max_ = zero_at;
}

double ChannelModel::error_prob(int r) const {
  if (r < 0 || r > r_max_) {
    std::ostringstream msg;
    msg << "error probability queried at r=" << r << " outside [0," << r_max_ << "]";
    throw InadmissibleError(msg.str());
  }
  if (lambda_ == 1.0) return p0_;
  return p0_ * std::pow(lambda_, r);
}

double error_prob(const ChannelModel& model, int r) { return model.error_prob(r); }

Truncation::Truncation(int n_max_, int r_max_) : n_max(n_max_), r_max(r_max_) {
  if (n_max < 2) throw InvalidArgument("truncation n_max must be at least 2");
  if (r_max < 0 || r_max >= n_max) throw InvalidArgument("truncation requires 0 <= r_max < n_max");
}

Truncation Truncation::fit(const ChannelModel& model, int n_max) {
  return Truncation(n_max, std::min(model.r_max(), n_max - 1));
}

namespace {

// Number of states with age strictly below delta.
std::size_t states_before(const Truncation& trunc, int delta) {
  const std::size_t width = static_cast<std::size_t>(trunc.r_max) + 1;
  const std::size_t d = static_cast<std::size_t>(delta - 1);  // ages 1..delta-1
  if (d <= width) return d * (d + 1) / 2;
  return width * (width + 1) / 2 + (d - width) * width;
}

}  // namespace

std::size_t state_count(const Truncation& trunc) { return states_before(trunc, trunc.n_max + 1); }

bool admissible(const Truncation& trunc, State s) {
  return s.delta >= 1 && s.delta <= trunc.n_max && s.r >= 0 && s.r < s.delta && s.r <= trunc.r_max;
}

std::size_t state_index(const Truncation& trunc, State s) {
  if (!admissible(trunc, s)) {
    std::ostringstream msg;
    msg << "state " << s << " outside the truncated state set";
    throw InadmissibleError(msg.str());
  }
  return states_before(trunc, s.delta) + static_cast<std::size_t>(s.r);
}

std::vector<State> enumerate_states(const Truncation& trunc) {
  std::vector<State> out;
  out.reserve(state_count(trunc));
  for (int d = 1; d <= trunc.n_max; ++d) {
    const int r_end = std::min(d, trunc.r_max + 1);
    for (int r = 0; r < r_end; ++r) out.push_back({d, r});
  }
  return out;
}

State clamp(const Truncation& trunc, State s) {
  return {std::min(s.delta, trunc.n_max), std::min(s.r, trunc.r_max)};
}

Mdp::Mdp(ChannelModel model, Truncation trunc)
    : model_(model), trunc_(trunc), states_(enumerate_states(trunc)) {
  if (trunc_.r_max > model_.r_max())
    throw InvalidArgument("truncation r_max exceeds the channel's retransmission limit");
}

bool Mdp::admissible(State s, Action a) const {
  if (!contains(s)) return false;
  if (a != Action::Retransmit) return true;
  if (s.r == 0) return false;
  if (s.r < trunc_.r_max) return true;
  // At the cap only a certain success keeps the chain inside the state set.
  return s.r == model_.r_max() && model_.error_prob(s.r) == 0.0;
}

Successors Mdp::successors(State s, Action a) const {
  if (!admissible(s, a)) {
    std::ostringstream msg;
    msg << "action " << a << " is inadmissible in state " << s;
    throw InadmissibleError(msg.str());
  }
  const int aged = std::min(s.delta + 1, trunc_.n_max);
  Successors out;
  switch (a) {
    case Action::Idle:
      out.push({aged, 0}, 1.0);
      break;
    case Action::NewUpdate: {
      const double g = model_.error_prob(0);
      // With no retransmissions allowed a failed packet is simply dropped.
      if (g > 0.0) out.push({aged, std::min(1, trunc_.r_max)}, g);
      out.push({1, 0}, 1.0 - g);
      break;
    }
    case Action::Retransmit: {
      const double g = model_.error_prob(s.r);
      if (g > 0.0) out.push({aged, s.r + 1}, g);
      out.push({s.r + 1, 0}, 1.0 - g);
      break;
    }
  }
  return out;
}

std::vector<TransitionEntry> transitions(State s, Action a, const ChannelModel& model,
                                         const Truncation& trunc) {
  const Mdp mdp(model, trunc);
  const Successors succ = mdp.successors(s, a);
  return {succ.begin(), succ.end()};
}

}  // namespace aoi
