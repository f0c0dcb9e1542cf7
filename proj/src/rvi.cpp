#include "aoi/rvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "aoi/errors.hpp"
#include "compiled_mdp.hpp"

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool action_enabled(Action a, bool allow_idle) { return allow_idle || a != Action::Idle; }

QRow q_row(const detail::CompiledMdp& cm, std::size_t i, const std::vector<double>& h, double eta,
           bool allow_idle) {
  QRow row;
  const double age = cm.states[i].delta;
  for (Action a : kAllActions) {
    const detail::Row& tr = cm.rows[i][index_of(a)];
    if (!tr.admissible || !action_enabled(a, allow_idle)) {
      row[index_of(a)] = kInf;
      continue;
    }
    double expect = 0.0;
    for (std::uint8_t k = 0; k < tr.count; ++k) expect += tr.prob[k] * h[tr.next[k]];
    row[index_of(a)] = age + (a == Action::Idle ? 0.0 : eta) + expect;
  }
  return row;
}

}  // namespace

Action argmin_action(const QRow& row) {
  Action best = Action::Idle;
  double best_value = row[0];
  for (Action a : {Action::NewUpdate, Action::Retransmit}) {
    if (row[index_of(a)] < best_value) {
      best_value = row[index_of(a)];
      best = a;
    }
  }
  return best;
}

DeterministicTable greedy_policy(const Truncation& trunc, std::span<const QRow> q) {
  if (q.size() != state_count(trunc)) throw InvalidArgument("Q table size does not match truncation");
  DeterministicTable out{trunc, {}};
  out.actions.reserve(q.size());
  for (const QRow& row : q) out.actions.push_back(argmin_action(row));
  return out;
}

SolverOutput solve(const ChannelModel& model, const Truncation& trunc, double eta, const SolverConfig& cfg) {
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be non-negative");
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
  if (cfg.max_iters < 1) throw InvalidArgument("max_iters must be positive");
  const Mdp mdp(model, trunc);
  const detail::CompiledMdp cm(mdp);
  const std::size_t n = cm.states.size();
  const std::size_t ref = mdp.index(cfg.reference);

  std::vector<double> h(n, 0.0);
  if (!cfg.initial_h.empty()) {
    if (cfg.initial_h.size() != n) throw InvalidArgument("warm-start vector has the wrong size");
    h = cfg.initial_h;
  }
  std::vector<double> v(n);
  std::vector<QRow> q(n);

  SolverOutput out{trunc, cm.states, {}, {}, 0.0, DeterministicTable{trunc, {}}, 0, kInf, cfg.allow_idle};
  for (long it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = q_row(cm, i, h, eta, cfg.allow_idle);
      v[i] = *std::min_element(q[i].begin(), q[i].end());
    }
    const double gain = v[ref];
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double step = v[i] - gain - h[i];
      change = std::max(change, std::abs(step));
      h[i] += cfg.damping * step;
    }
    out.residual = change;
    out.iterations = it;
    out.gain = gain;
    if (change <= cfg.epsilon) {
      out.h = std::move(h);
      out.q = std::move(q);
      out.policy = greedy_policy(trunc, out.q);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "relative value iteration did not converge in " << cfg.max_iters
      << " sweeps (last residual " << out.residual << ")";
  throw IterationLimitError(msg.str(), out.residual);
}

SolverOutput solve_unconstrained(const ChannelModel& model, const Truncation& trunc, SolverConfig cfg) {
  cfg.allow_idle = false;
  return solve(model, trunc, 0.0, cfg);
}

double bellman_residual(const SolverOutput& out, const ChannelModel& model, const Truncation& trunc,
                        double eta) {
  if (!(out.trunc == trunc) || out.h.size() != state_count(trunc))
    throw InvalidArgument("solver output does not match the truncation");
  const Mdp mdp(model, trunc);
  const detail::CompiledMdp cm(mdp);
  double worst = 0.0;
  for (std::size_t i = 0; i < cm.states.size(); ++i) {
    const QRow row = q_row(cm, i, out.h, eta, out.allow_idle);
    const double best = *std::min_element(row.begin(), row.end());
    worst = std::max(worst, std::abs(best - out.gain - out.h[i]));
  }
  return worst;
}

int threshold_of(const DeterministicTable& policy) {
  int threshold = 0;
  Action prev = Action::Idle;
  const auto states = enumerate_states(policy.trunc);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].r != 0) continue;
    const Action a = policy.actions[i];
    if (a == Action::Retransmit) return 0;
    if (a == Action::NewUpdate && prev == Action::Idle) {
      if (threshold != 0) return 0;
      threshold = states[i].delta;
    } else if (a == Action::Idle && prev == Action::NewUpdate) {
      return 0;
    }
    prev = a;
  }
  return threshold;
}

void write_values_csv(std::ostream& os, const SolverOutput& out) {
  os << "delta,r,h,q_idle,q_new,q_retransmit,policy\n";
  auto cell = [&os](double v) {
    if (std::isinf(v)) os << "";
    else os << v;
  };
  const auto prec = os.precision(17);
  for (std::size_t i = 0; i < out.states.size(); ++i) {
    os << out.states[i].delta << ',' << out.states[i].r << ',' << out.h[i];
    for (double v : out.q[i]) {
      os << ',';
      cell(v);
    }
    os << ',' << action_code(out.policy.actions[i]) << '\n';
  }
  os.precision(prec);
}

void write_policy_csv(std::ostream& os, const DeterministicTable& policy) {
  os << "delta,r,action\n";
  const auto states = enumerate_states(policy.trunc);
  for (std::size_t i = 0; i < states.size(); ++i)
    os << states[i].delta << ',' << states[i].r << ',' << action_code(policy.actions[i]) << '\n';
}

}  // namespace aoi
