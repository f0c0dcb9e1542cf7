#include "aoi/sarsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"

namespace aoi {

ActionDist softmax_probs(const QRow& q, const ActionMask& allowed, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("softmax temperature must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kNumActions; ++k)
    if (allowed[k]) best = std::min(best, q[k]);
  if (best == std::numeric_limits<double>::infinity()) throw InvalidArgument("no admissible action");
  ActionDist d{};
  double total = 0.0;
  for (int k = 0; k < kNumActions; ++k) {
    if (!allowed[k]) continue;
    d[k] = std::exp(-(q[k] - best) / tau);
    total += d[k];
  }
  for (double& v : d) v /= total;
  return d;
}

double LearnerState::max_abs_q() const {
  double m = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (int k = 0; k < kNumActions; ++k)
      if (allowed[i][k]) m = std::max(m, std::abs(q[i][k]));
  return m;
}

LearnerState make_learner(const ChannelModel& model, const LearnerConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw InvalidArgument("softmax temperature must be positive");
  const Mdp mdp(model, cfg.trunc);
  LearnerState ls;
  ls.trunc = cfg.trunc;
  ls.eta = cfg.eta;
  ls.q.assign(mdp.size(), QRow{0.0, 0.0, 0.0});
  ls.allowed.resize(mdp.size());
  for (std::size_t i = 0; i < mdp.size(); ++i)
    for (Action a : kAllActions)
      ls.allowed[i][index_of(a)] =
          mdp.admissible(mdp.states()[i], a) && (cfg.allow_idle || a != Action::Idle);
  return ls;
}

namespace {

Action draw(const ActionDist& d, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last = 0;
  for (int k = 0; k < kNumActions; ++k) {
    if (d[k] <= 0.0) continue;
    last = k;
    acc += d[k];
    if (u < acc) return static_cast<Action>(k);
  }
  return static_cast<Action>(last);
}

double temperature(const LearnerConfig& cfg, long long n) {
  if (cfg.tau_decay == 1.0) return cfg.tau;
  return std::max(cfg.tau_min, cfg.tau * std::pow(cfg.tau_decay, static_cast<double>(n - 1)));
}

}  // namespace

void step(LearnerState& ls, SlotEnvironment& env, const LearnerConfig& cfg, Rng& rng) {
  ls.n += 1;
  const double n = static_cast<double>(ls.n);
  const double tau = temperature(cfg, ls.n);

  const State true_state = env.state();
  const State s = clamp(ls.trunc, true_state);
  const std::size_t i = state_index(ls.trunc, s);
  Action a;
  if (ls.pending && ls.pending->first == s) a = ls.pending->second;
  else a = draw(softmax_probs(ls.q[i], ls.allowed[i], tau), rng);

  const SlotOutcome outcome = env.step(a);
  const bool sent = a != Action::Idle;
  const double cost = stage_cost(s, a, ls.eta);

  const State s_next = clamp(ls.trunc, outcome.next);
  const std::size_t j = state_index(ls.trunc, s_next);
  const Action a_next = draw(softmax_probs(ls.q[j], ls.allowed[j], tau), rng);

  const double alpha = cfg.learning_rate ? cfg.learning_rate(ls.n) : 1.0 / std::sqrt(n);
  double& qsa = ls.q[i][index_of(a)];
  qsa += alpha * (cost - ls.gain + ls.q[j][index_of(a_next)] - qsa);
  ls.gain += (cost - ls.gain) / n;

  ls.empirical_cost += ((sent ? 1.0 : 0.0) - ls.empirical_cost) / n;
  ls.aoi_sum += true_state.delta;
  if (cfg.eta_adapt) ls.eta = std::max(0.0, ls.eta + cfg.eta_step / std::sqrt(n) * (ls.empirical_cost - cfg.c_max));
  ls.pending = std::make_pair(s_next, a_next);
}

DeterministicTable greedy_policy(const LearnerState& ls) {
  std::vector<QRow> masked = ls.q;
  for (std::size_t i = 0; i < masked.size(); ++i)
    for (int k = 0; k < kNumActions; ++k)
      if (!ls.allowed[i][k]) masked[i][k] = std::numeric_limits<double>::infinity();
  return greedy_policy(ls.trunc, masked);
}

TrainResult train(const ChannelModel& model, const LearnerConfig& cfg, std::uint64_t stream) {
  if (cfg.horizon < 0) throw InvalidArgument("horizon must be non-negative");
  if (cfg.record_every < 1) throw InvalidArgument("record_every must be positive");
  TrainResult res{make_learner(model, cfg), {}};
  Rng rng = make_rng(cfg.seed, stream);
  ChannelEnvironment env(model, rng);
  LearnerState& ls = res.state;
  for (long long t = 1; t <= cfg.horizon; ++t) {
    step(ls, env, cfg, rng);
    if (t % cfg.record_every == 0 || t == cfg.horizon)
      res.timeline.push_back({ls.n, ls.mean_aoi(), ls.empirical_cost, ls.eta, ls.gain});
  }
  return res;
}

std::vector<TimelineStats> train_replications(const ChannelModel& model, const LearnerConfig& cfg,
                                              int replications, unsigned workers) {
  if (replications < 1) throw InvalidArgument("need at least one replication");
  std::vector<std::vector<TimelinePoint>> runs(static_cast<std::size_t>(replications));
  parallel_for(runs.size(), workers, [&](std::size_t k) { runs[k] = train(model, cfg, k).timeline; });
  std::vector<TimelineStats> out(runs.front().size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    std::vector<double> aoi, cost;
    double eta = 0.0;
    for (const auto& r : runs) {
      aoi.push_back(r[t].mean_aoi);
      cost.push_back(r[t].mean_cost);
      eta += r[t].eta;
    }
    const RunStats s = RunStats::from(std::move(aoi), std::move(cost));
    out[t] = {runs.front()[t].n, s.mean_aoi, s.var_aoi, s.mean_cost, s.var_cost, eta / replications};
  }
  return out;
}

void write_timeline_csv(std::ostream& os, std::span<const TimelinePoint> timeline) {
  os << "n,mean_aoi,mean_cost,eta,gain\n";
  const auto prec = os.precision(12);
  for (const auto& p : timeline)
    os << p.n << ',' << p.mean_aoi << ',' << p.mean_cost << ',' << p.eta << ',' << p.gain << '\n';
  os.precision(prec);
}

void write_timeline_stats_csv(std::ostream& os, std::span<const TimelineStats> timeline) {
  os << "n,mean_aoi,var_aoi,mean_cost,var_cost,mean_eta\n";
  const auto prec = os.precision(12);
  for (const auto& p : timeline)
    os << p.n << ',' << p.mean_aoi << ',' << p.var_aoi << ',' << p.mean_cost << ',' << p.var_cost << ','
       << p.mean_eta << '\n';
  os.precision(prec);
}

void write_q_csv(std::ostream& os, const LearnerState& ls) {
  os << "delta,r,q_idle,q_new,q_retransmit\n";
  const auto states = enumerate_states(ls.trunc);
  const auto prec = os.precision(12);
  for (std::size_t i = 0; i < states.size(); ++i) {
    os << states[i].delta << ',' << states[i].r;
    for (int k = 0; k < kNumActions; ++k) {
      os << ',';
      if (ls.allowed[i][k]) os << ls.q[i][k];
    }
    os << '\n';
  }
  os.precision(prec);
}

}  // namespace aoi
