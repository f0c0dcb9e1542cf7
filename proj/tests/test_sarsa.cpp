#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aoi/errors.hpp"
#include "aoi/sarsa.hpp"

using namespace aoi;

namespace {

// Every action succeeds; records what it was asked to do.
class CleanEnv final : public SlotEnvironment {
 public:
  State state() const override { return s_; }
  SlotOutcome step(Action a) override {
    last = a;
    SlotOutcome o;
    if (a == Action::Idle) {
      s_ = {s_.delta + 1, 0};
    } else {
      o.success = true;
      s_ = a == Action::NewUpdate ? State{1, 0} : State{s_.r + 1, 0};
    }
    o.next = s_;
    return o;
  }
  Action last = Action::Idle;

 private:
  State s_ = kRenewalState;
};

}  // namespace

TEST_SUITE("sarsa") {

TEST_CASE("softmax probabilities") {
  const ActionMask all{true, true, true};
  const ActionDist u = softmax_probs({2.0, 2.0, 2.0}, all, 1.0);
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));

  const double tau = 0.7;
  const ActionDist two = softmax_probs({0.0, std::log(2.0) * tau, 99.0}, {true, true, false}, tau);
  CHECK(two[0] == doctest::Approx(2.0 / 3.0));
  CHECK(two[1] == doctest::Approx(1.0 / 3.0));
  CHECK(two[2] == 0.0);

  const ActionDist hot = softmax_probs({1.0, 2.0, 3.0}, all, 1e6);
  for (double v : hot) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  const ActionDist cold = softmax_probs({1.0, 2.0, 3.0}, all, 1e-3);
  CHECK(cold[0] == doctest::Approx(1.0));

  // Large values do not overflow thanks to the row-minimum shift.
  const ActionDist big = softmax_probs({1e6, 1e6 + 1.0, 0.0}, {true, true, false}, 1.0);
  CHECK(big[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));

  CHECK_THROWS_AS(softmax_probs({0, 0, 0}, all, 0.0), InvalidArgument);
  CHECK_THROWS_AS(softmax_probs({0, 0, 0}, {false, false, false}, 1.0), InvalidArgument);
}

TEST_CASE("admissible masks follow the truncated MDP") {
  LearnerConfig cfg;
  cfg.trunc = Truncation(10, 3);
  const LearnerState ls = make_learner(ChannelModel(0.5, 0.5, 3), cfg);
  CHECK(ls.allowed[state_index(cfg.trunc, {5, 0})] == ActionMask{true, true, false});
  CHECK(ls.allowed[state_index(cfg.trunc, {5, 2})] == ActionMask{true, true, true});
  CHECK(ls.allowed[state_index(cfg.trunc, {5, 3})] == ActionMask{true, true, false});
  cfg.allow_idle = false;
  const LearnerState no_idle = make_learner(ChannelModel(0.5, 0.5, 3), cfg);
  CHECK_FALSE(no_idle.allowed[0][0]);
}

TEST_CASE("first update from (1,0)") {
  // Only NewUpdate is allowed at (1,0) once Idle is removed.
  LearnerConfig cfg;
  cfg.trunc = Truncation(10, 0);
  cfg.eta = 5.0;
  cfg.allow_idle = false;
  const ChannelModel m = ChannelModel::arq(0.0);
  LearnerState ls = make_learner(m, cfg);
  CleanEnv env;
  Rng rng = make_rng(1);
  step(ls, env, cfg, rng);
  CHECK(env.last == Action::NewUpdate);
  CHECK(ls.q[0][index_of(Action::NewUpdate)] == doctest::Approx(6.0));
  CHECK(ls.gain == doctest::Approx(6.0));
  CHECK(ls.n == 1);
  CHECK(ls.empirical_cost == 1.0);
}

TEST_CASE("constant stage cost drives the gain to 1 + eta") {
  LearnerConfig cfg;
  cfg.trunc = Truncation(10, 0);
  cfg.eta = 3.0;
  cfg.allow_idle = false;
  LearnerState ls = make_learner(ChannelModel::arq(0.0), cfg);
  CleanEnv env;
  Rng rng = make_rng(2);
  for (int k = 0; k < 500; ++k) step(ls, env, cfg, rng);
  CHECK(ls.gain == doctest::Approx(4.0));
  CHECK(ls.mean_aoi() == doctest::Approx(1.0));
}

TEST_CASE("zero learning rate leaves Q untouched") {
  LearnerConfig cfg;
  cfg.trunc = Truncation(20, 3);
  cfg.learning_rate = [](long long) { return 0.0; };
  cfg.horizon = 2000;
  const TrainResult r = train(ChannelModel(0.5, 0.5, 3), cfg);
  for (const QRow& row : r.state.q)
    for (double v : row) CHECK(v == 0.0);
  CHECK(r.state.n == 2000);
}

TEST_CASE("error-free unconstrained learner transmits always") {
  LearnerConfig cfg;
  cfg.trunc = Truncation(10, 0);
  cfg.allow_idle = false;
  cfg.horizon = 3000;
  const TrainResult r = train(ChannelModel::arq(0.0), cfg);
  const DeterministicTable g = greedy_policy(r.state);
  for (Action a : g.actions) CHECK(a == Action::NewUpdate);
  CHECK(r.timeline.back().mean_aoi == doctest::Approx(1.0));
}

TEST_CASE("on-policy action carried to the next slot") {
  LearnerConfig cfg;
  cfg.trunc = Truncation(30, 3);
  LearnerState ls = make_learner(ChannelModel(0.5, 0.5, 3), cfg);
  Rng rng = make_rng(4);
  ChannelEnvironment env(ChannelModel(0.5, 0.5, 3), rng);
  for (int k = 0; k < 200; ++k) {
    step(ls, env, cfg, rng);
    REQUIRE(ls.pending.has_value());
    CHECK(ls.pending->first == clamp(cfg.trunc, env.state()));
    const State s = ls.pending->first;
    CHECK(ls.allowed[state_index(cfg.trunc, s)][index_of(ls.pending->second)]);
  }
}

TEST_CASE("training is deterministic, bounded and tracks the budget") {
  const ChannelModel m(0.5, 0.5, 3);
  LearnerConfig cfg;
  cfg.trunc = Truncation::fit(m, 30);
  cfg.tau = 2.0;
  cfg.eta = 5.0;
  cfg.eta_adapt = true;
  cfg.c_max = 0.4;
  cfg.horizon = 10000;
  cfg.record_every = 1000;
  const TrainResult a = train(m, cfg);
  const TrainResult b = train(m, cfg);
  CHECK(a.state.q == b.state.q);
  CHECK(a.state.eta == b.state.eta);
  REQUIRE(a.timeline.size() == 10);
  CHECK(a.timeline.back().n == 10000);
  CHECK(a.state.max_abs_q() <= 10.0 * (cfg.trunc.n_max + a.state.eta + cfg.eta));
  CHECK(a.state.empirical_cost >= 0.0);
  CHECK(a.state.empirical_cost <= 1.0);
  CHECK(a.state.eta >= 0.0);
  for (const auto& p : a.timeline) CHECK(std::isfinite(p.gain));
}

TEST_CASE("multiplier adaptation reacts to overspending") {
  const ChannelModel m(0.5, 0.5, 3);
  LearnerConfig cfg;
  cfg.trunc = Truncation::fit(m, 30);
  cfg.eta = 0.0;
  cfg.eta_adapt = true;
  cfg.c_max = 0.1;
  cfg.horizon = 5000;
  const TrainResult r = train(m, cfg);
  CHECK(r.state.eta > 0.0);
  cfg.eta_adapt = false;
  const TrainResult fixed = train(m, cfg);
  CHECK(fixed.state.eta == 0.0);
}

TEST_CASE("replicated timelines and csv") {
  const ChannelModel m(0.5, 0.5, 3);
  LearnerConfig cfg;
  cfg.trunc = Truncation::fit(m, 20);
  cfg.horizon = 1000;
  cfg.record_every = 250;
  const auto stats = train_replications(m, cfg, 6, 2);
  REQUIRE(stats.size() == 4);
  CHECK(stats[3].n == 1000);
  CHECK(stats[3].var_aoi > 0.0);
  CHECK(train_replications(m, cfg, 6, 1)[3].mean_aoi == stats[3].mean_aoi);

  cfg.horizon = 0;
  CHECK(train(m, cfg).timeline.empty());
  CHECK(train_replications(m, cfg, 3).empty());

  std::ostringstream tl, ts, q;
  cfg.horizon = 300;
  const TrainResult r = train(m, cfg);
  write_timeline_csv(tl, r.timeline);
  write_timeline_stats_csv(ts, stats);
  write_q_csv(q, r.state);
  CHECK(tl.str().rfind("n,mean_aoi,mean_cost,eta,gain\n", 0) == 0);
  CHECK(ts.str().rfind("n,mean_aoi,var_aoi,mean_cost,var_cost,mean_eta\n", 0) == 0);
  CHECK(q.str().rfind("delta,r,q_idle,q_new,q_retransmit\n1,0,", 0) == 0);
}

}
