#include "aoi/policy_eval.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <deque>
#include <sstream>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"
#include "compiled_mdp.hpp"

namespace aoi {

namespace {

constexpr double kStationaryTolerance = 1e-10;

struct Arc {
  std::uint32_t to;
  double prob;
};

EvalResult evaluate_stationary(const Policy& policy, const Mdp& mdp) {
  const detail::CompiledMdp cm(mdp);
  const std::size_t n = cm.states.size();

  std::vector<std::vector<Arc>> out(n);
  std::vector<double> transmit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const ActionDist d = policy.distribution(cm.states[i]);
    for (Action a : kAllActions) {
      const double w = d[index_of(a)];
      if (w == 0.0) continue;
      const detail::Row& row = cm.rows[i][index_of(a)];
      if (!row.admissible) {
        std::ostringstream msg;
        msg << "policy puts mass on " << a << " in state " << cm.states[i];
        throw InadmissibleError(msg.str());
      }
      if (a != Action::Idle) transmit[i] += w;
      for (std::uint8_t k = 0; k < row.count; ++k) {
        if (row.prob[k] == 0.0) continue;
        out[i].push_back({row.next[k], w * row.prob[k]});
      }
    }
  }

  const std::size_t ref = mdp.index(kRenewalState);
  std::vector<char> reach(n, 0);
  std::deque<std::size_t> queue{ref};
  reach[ref] = 1;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (const Arc& arc : out[i])
      if (!reach[arc.to]) {
        reach[arc.to] = 1;
        queue.push_back(arc.to);
      }
  }
  // Every state reachable from (1,0) has to lead back to it.
  std::vector<std::vector<std::uint32_t>> in(n);
  for (std::size_t i = 0; i < n; ++i)
    if (reach[i])
      for (const Arc& arc : out[i]) in[arc.to].push_back(static_cast<std::uint32_t>(i));
  std::vector<char> back(n, 0);
  back[ref] = 1;
  queue.push_back(ref);
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    for (std::uint32_t i : in[j])
      if (!back[i]) {
        back[i] = 1;
        queue.push_back(i);
      }
  }
  std::vector<int> local(n, -1);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (!reach[i]) continue;
    if (!back[i]) {
      std::ostringstream msg;
      msg << "state " << cm.states[i] << " is reachable from (1,0) but never returns; "
          << "the policy has no stationary age";
      throw NoStationaryError(msg.str());
    }
    local[i] = static_cast<int>(members.size());
    members.push_back(i);
  }

  // Balance equations x (P - I) = 0 with the renewal row replaced by sum(x) = 1.
  const int m = static_cast<int>(members.size());
  const int ref_local = local[ref];
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(members.size() * 4);
  for (int c = 0; c < m; ++c) {
    const std::size_t i = members[c];
    for (const Arc& arc : out[i]) {
      const int row = local[arc.to];
      if (row != ref_local) triplets.emplace_back(row, c, arc.prob);
    }
    if (c != ref_local) triplets.emplace_back(c, c, -1.0);
    triplets.emplace_back(ref_local, c, 1.0);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[ref_local] = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NoStationaryError("stationary balance equations are singular");
  const Eigen::VectorXd x = lu.solve(rhs);

  EvalResult res{0.0, 0.0, mdp.truncation(), std::vector<double>(n, 0.0)};
  for (int c = 0; c < m; ++c) res.stationary[members[c]] = x[c];

  // x P = x check on the recurrent class.
  std::vector<double> flow(n, 0.0);
  for (std::size_t i : members)
    for (const Arc& arc : out[i]) flow[arc.to] += res.stationary[i] * arc.prob;
  double worst = 0.0;
  for (std::size_t i : members) worst = std::max(worst, std::abs(flow[i] - res.stationary[i]));
  if (worst > kStationaryTolerance) {
    std::ostringstream msg;
    msg << "stationary solve residual " << worst << " exceeds tolerance";
    throw NoStationaryError(msg.str());
  }
  for (std::size_t i : members) {
    res.avg_aoi += res.stationary[i] * cm.states[i].delta;
    res.avg_cost += res.stationary[i] * transmit[i];
  }
  return res;
}

// Open-loop period P: attempts until success K ~ Geom(1 - p), cycle = K*P
// slots with ages 1..K*P, so the occupancy of age d is p^(ceil(d/P)-1)(1-p)/P.
EvalResult evaluate_periodic(int period, const ChannelModel& model, const Truncation& trunc) {
  const double p = model.error_prob(0);
  const double P = period;
  EvalResult res{0.0, 1.0 / P, trunc, std::vector<double>(state_count(trunc), 0.0)};
  res.avg_aoi = (P * (1.0 + p) / (1.0 - p) + 1.0) / 2.0;
  double assigned = 0.0;
  for (int d = 1; d <= trunc.n_max; ++d) {
    const int r = (d > 1 && (d - 1) % period == 0) ? std::min(1, trunc.r_max) : 0;
    double mass = std::pow(p, std::ceil(d / P) - 1.0) * (1.0 - p) / P;
    if (d == trunc.n_max) mass = 1.0 - assigned;
    assigned += mass;
    res.stationary[state_index(trunc, {d, r})] += mass;
  }
  return res;
}

EvalResult evaluate_mixture(const MixtureAtRenewal& mix, const ChannelModel& model, const Truncation& trunc) {
  const Mdp mdp(model, trunc);
  const EvalResult a = evaluate_stationary(Policy(mix.first), mdp);
  const EvalResult b = evaluate_stationary(Policy(mix.second), mdp);
  // Renewal-reward over cycles between visits to (1,0).
  const double la = mix.mu * a.mean_cycle_length();
  const double lb = (1.0 - mix.mu) * b.mean_cycle_length();
  const double total = la + lb;
  EvalResult res{0.0, 0.0, trunc, std::vector<double>(a.stationary.size(), 0.0)};
  res.avg_aoi = (la * a.avg_aoi + lb * b.avg_aoi) / total;
  res.avg_cost = (la * a.avg_cost + lb * b.avg_cost) / total;
  for (std::size_t i = 0; i < res.stationary.size(); ++i)
    res.stationary[i] = (la * a.stationary[i] + lb * b.stationary[i]) / total;
  return res;
}

}  // namespace

EvalResult evaluate_exact(const Policy& policy, const ChannelModel& model, const Truncation& trunc) {
  switch (policy.kind()) {
    case PolicyKind::Periodic:
      return evaluate_periodic(policy.as<PeriodicBaseline>().period, model, trunc);
    case PolicyKind::MixtureAtRenewal:
      return evaluate_mixture(policy.as<MixtureAtRenewal>(), model, trunc);
    default:
      return evaluate_stationary(policy, Mdp(model, trunc));
  }
}

RunStats evaluate_simulated(const Policy& policy, const ChannelModel& model, long long horizon,
                            int replications, std::uint64_t seed, unsigned workers) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least one slot");
  if (replications < 1) throw InvalidArgument("need at least one replication");
  std::vector<double> aoi(static_cast<std::size_t>(replications));
  std::vector<double> cost(aoi.size());
  parallel_for(aoi.size(), workers, [&](std::size_t k) {
    const RunResult r = run(policy, model, horizon, seed, false, k);
    aoi[k] = r.avg_aoi;
    cost[k] = r.avg_cost;
  });
  return RunStats::from(std::move(aoi), std::move(cost));
}

}  // namespace aoi
