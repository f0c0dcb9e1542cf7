#include "aoi/sim.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "aoi/errors.hpp"

namespace aoi {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RunStats RunStats::from(std::vector<double> aoi, std::vector<double> cost) {
  RunStats s;
  s.aoi = std::move(aoi);
  s.cost = std::move(cost);
  auto moments = [](const std::vector<double>& x, double& mean, double& var) {
    const double n = static_cast<double>(x.size());
    mean = x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  };
  moments(s.aoi, s.mean_aoi, s.var_aoi);
  moments(s.cost, s.mean_cost, s.var_cost);
  return s;
}

double RunStats::se_aoi() const { return aoi.empty() ? 0.0 : std::sqrt(var_aoi / aoi.size()); }
double RunStats::se_cost() const { return cost.empty() ? 0.0 : std::sqrt(var_cost / cost.size()); }

bool admissible(const ChannelModel& model, State s, Action a) {
  if (s.delta < 1 || s.r < 0 || s.r >= s.delta || s.r > model.r_max()) return false;
  if (a != Action::Retransmit) return true;
  if (s.r == 0) return false;
  return s.r < model.r_max() || model.error_prob(s.r) == 0.0;
}

State next_state(const ChannelModel& model, State s, Action a, bool success) {
  switch (a) {
    case Action::Idle:
      return {s.delta + 1, 0};
    case Action::NewUpdate:
      return success ? State{1, 0} : State{s.delta + 1, std::min(1, model.r_max())};
    case Action::Retransmit:
      return success ? State{s.r + 1, 0} : State{s.delta + 1, s.r + 1};
  }
  return s;
}

SlotOutcome ChannelEnvironment::step(Action a) {
  SlotOutcome out;
  if (a == Action::Idle) {
    state_ = next_state(model_, state_, a, false);
  } else {
    const int attempt = a == Action::NewUpdate ? 0 : state_.r;
    const bool ok = !(uniform01(rng_) < model_.error_prob(attempt));
    out.success = ok;
    state_ = next_state(model_, state_, a, ok);
  }
  out.next = state_;
  return out;
}

namespace {

Action sample(const ActionDist& d, Rng& rng) {
  // Skip the draw for point masses so deterministic tables consume no randomness.
  for (Action a : kAllActions)
    if (d[index_of(a)] == 1.0) return a;
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Action a : kAllActions) {
    acc += d[index_of(a)];
    if (u < acc) return a;
  }
  for (int k = kNumActions - 1; k >= 0; --k)
    if (d[k] > 0.0) return static_cast<Action>(k);
  return Action::Idle;
}

}  // namespace

Action PolicyRunner::act(State s, long long t, Rng& rng) {
  switch (policy_.kind()) {
    case PolicyKind::Periodic: {
      const int period = policy_.as<PeriodicBaseline>().period;
      return (t - 1) % period == 0 ? Action::NewUpdate : Action::Idle;
    }
    case PolicyKind::MixtureAtRenewal: {
      const auto& mix = policy_.as<MixtureAtRenewal>();
      if (s == kRenewalState) use_first_ = uniform01(rng) < mix.mu;
      return use_first_ ? mix.first.at(s) : mix.second.at(s);
    }
    default:
      return sample(policy_.distribution(s), rng);
  }
}

RunResult run(const Policy& policy, const ChannelModel& model, long long horizon, std::uint64_t seed,
              bool keep_trace, std::uint64_t stream) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least one slot");
  Rng rng = make_rng(seed, stream);
  ChannelEnvironment env(model, rng);
  PolicyRunner runner(policy);
  RunResult out;
  out.horizon = horizon;
  if (keep_trace) out.trace.reserve(static_cast<std::size_t>(horizon));
  double age_sum = 0.0;
  long long transmissions = 0;
  for (long long t = 1; t <= horizon; ++t) {
    const State before = env.state();
    const Action a = runner.act(before, t, rng);
    if (!admissible(model, before, a)) {
      std::ostringstream msg;
      msg << "policy chose " << a << " in state " << before << " at slot " << t;
      throw ProtocolViolation(msg.str(), t);
    }
    age_sum += before.delta;
    transmissions += a != Action::Idle;
    const SlotOutcome o = env.step(a);
    if (keep_trace) out.trace.push_back({t, before, a, o.success, o.next});
  }
  out.avg_aoi = age_sum / static_cast<double>(horizon);
  out.avg_cost = static_cast<double>(transmissions) / static_cast<double>(horizon);
  return out;
}

int baseline_period(double c_max) {
  if (!(c_max > 0.0 && c_max <= 1.0)) throw InvalidArgument("c_max must lie in (0,1]");
  return static_cast<int>(std::ceil(1.0 / c_max - 1e-9));
}

Policy baseline_periodic(double c_max) { return PeriodicBaseline{baseline_period(c_max)}; }

void write_trace_csv(std::ostream& os, std::span<const SlotRecord> trace) {
  os << "t,delta,r,action,success\n";
  for (const auto& rec : trace) {
    os << rec.t << ',' << rec.before.delta << ',' << rec.before.r << ',' << action_code(rec.action) << ',';
    if (rec.success) os << (*rec.success ? 1 : 0);
    os << '\n';
  }
}

void write_stats_csv(std::ostream& os, std::span<const StatsRow> rows) {
  os << "# schema: " << kStatsSchema << '\n';
  os << "policy,p0,lambda,r_max,c_max,mean_aoi,var_aoi,mean_cost\n";
  const auto prec = os.precision(12);
  for (const auto& row : rows) {
    os << row.policy << ',' << row.model.p0() << ',' << row.model.lambda() << ',';
    if (row.model.bounded()) os << row.model.r_max();
    else os << "inf";
    os << ',' << row.c_max << ',' << row.stats.mean_aoi << ',' << row.stats.var_aoi << ','
       << row.stats.mean_cost << '\n';
  }
  os.precision(prec);
}

}  // namespace aoi
