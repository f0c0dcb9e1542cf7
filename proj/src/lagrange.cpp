#include "aoi/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_cmax(double c_max) {
  if (!(c_max > 0.0 && c_max <= 1.0)) throw InvalidArgument("c_max must lie in (0,1]");
}

bool unconstrained(double c_max) { return c_max >= 1.0; }

}  // namespace

EtaPoint evaluate_eta(const ChannelModel& model, const Truncation& trunc, double eta,
                      const SolverConfig& solver) {
  SolverOutput out = solve(model, trunc, eta, solver);
  EvalResult eval = evaluate_exact(Policy(out.policy), model, trunc);
  return {eta, out.gain, std::move(eval), std::move(out.policy)};
}

EtaSearchResult search_eta_star(const ChannelModel& model, const Truncation& trunc, double c_max,
                                const EtaSearchConfig& cfg, const SolverConfig& solver) {
  check_cmax(c_max);
  if (!(cfg.xi > 0.0)) throw InvalidArgument("xi must be positive");
  if (!(cfg.stop_tol > 0.0)) throw InvalidArgument("stop_tol must be positive");
  if (!(cfg.eta0 >= 0.0)) throw InvalidArgument("eta0 must be non-negative");

  EtaSearchResult res;
  // Transmitting is free at eta = 0, so C_0 = 1 >= C_max.
  double below = 0.0;
  double above = kInf;
  double eta = cfg.eta0;
  double scale = cfg.step_scale;
  double expansion = 2.0 * cfg.xi;

  for (int m = 0; m < cfg.max_steps; ++m) {
    const EtaPoint pt = evaluate_eta(model, trunc, eta, solver);
    const double cost = pt.eval.avg_cost;
    res.trace.push_back({m, eta, cost, pt.eval.avg_aoi, pt.gain});
    if (scale <= 0.0) scale = std::max(1.0, std::abs(pt.gain));

    if (std::abs(cost - c_max) <= cfg.stop_tol) {
      res.eta_star = eta;
      res.eta_below = res.eta_above = eta;
      res.exact = true;
      return res;
    }
    if (cost > c_max) below = std::max(below, eta);
    else above = std::min(above, eta);
    if (above - below <= 2.0 * cfg.xi) {
      res.eta_star = 0.5 * (below + above);
      res.eta_below = below;
      res.eta_above = above;
      return res;
    }

    double next = eta + scale / (m + 1.0) * (cost - c_max);
    if (above == kInf) {
      // No upper bracket yet: grow the step geometrically.
      next = std::max(next, eta + expansion);
      expansion *= 2.0;
    } else {
      const double width = above - below;
      if (!(next > below + 0.1 * width && next < above - 0.1 * width)) next = 0.5 * (below + above);
    }
    eta = next;
  }
  std::ostringstream msg;
  msg << "eta search did not bracket C_max = " << c_max << " within " << cfg.max_steps << " steps";
  throw SearchFailure(msg.str(), res.trace);
}

double mixture_weight(double c_low, double c_high, double c_max) {
  constexpr double slack = 1e-12;
  if (c_max < c_high - slack || c_max > c_low + slack) {
    std::ostringstream msg;
    msg << "C_max = " << c_max << " is not bracketed by [" << c_high << ", " << c_low << "]";
    throw BracketError(msg.str());
  }
  if (c_low == c_high) return 1.0;
  return std::clamp((c_max - c_high) / (c_low - c_high), 0.0, 1.0);
}

double renewal_mixture_weight(const EvalResult& low, const EvalResult& high, double c_max) {
  mixture_weight(low.avg_cost, high.avg_cost, c_max);  // bracket check
  if (low.avg_cost == high.avg_cost) return 1.0;
  // Per-cycle transmissions B = C L; solve (mu B1 + (1-mu) B2) = c_max (mu L1 + (1-mu) L2).
  const double l1 = low.mean_cycle_length();
  const double l2 = high.mean_cycle_length();
  const double b1 = low.avg_cost * l1;
  const double b2 = high.avg_cost * l2;
  const double mu = (c_max * l2 - b2) / ((b1 - b2) - c_max * (l1 - l2));
  return std::clamp(mu, 0.0, 1.0);
}

namespace {

Policy single_state_mixture(const DeterministicTable& low, const DeterministicTable& high, double mu) {
  RandomizedTable tab{low.trunc, {}};
  tab.dists.reserve(low.actions.size());
  for (std::size_t i = 0; i < low.actions.size(); ++i) {
    ActionDist d = point_mass(high.actions[i]);
    if (low.actions[i] != high.actions[i]) {
      d[index_of(high.actions[i])] = 1.0 - mu;
      d[index_of(low.actions[i])] = mu;
    }
    tab.dists.push_back(d);
  }
  return tab;
}

// Weight in the single differing state that puts the exact cost at c_max.
double single_state_weight(const DeterministicTable& low, const DeterministicTable& high, double c_low,
                           double c_high, double c_max, const ChannelModel& model, const Truncation& trunc) {
  double lo = 0.0, hi = 1.0;  // cost(lo) = c_high <= c_max <= c_low = cost(hi)
  double f_lo = c_high - c_max, f_hi = c_low - c_max;
  double mu = mixture_weight(c_low, c_high, c_max);
  for (int it = 0; it < 200; ++it) {
    const double c = evaluate_exact(single_state_mixture(low, high, mu), model, trunc).avg_cost;
    const double f = c - c_max;
    if (std::abs(f) <= 1e-14 || hi - lo <= 1e-15) break;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mu;
      f_lo = f;
    } else {
      hi = mu;
      f_hi = f;
    }
    // Secant step inside the bracket, bisection if it stalls.
    double next = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if (!(next > lo && next < hi) || it % 3 == 2) next = 0.5 * (lo + hi);
    mu = next;
  }
  return mu;
}

}  // namespace

ConstrainedSolution solve_constrained(const ChannelModel& model, const Truncation& trunc, double c_max,
                                      const EtaSearchConfig& cfg, const SolverConfig& solver) {
  check_cmax(c_max);
  ConstrainedSolution sol;
  if (unconstrained(c_max)) {
    SolverOutput out = solve_unconstrained(model, trunc, solver);
    sol.policy_low = sol.policy_high = out.policy;
    sol.eval_low = sol.eval_high = evaluate_exact(Policy(out.policy), model, trunc);
    sol.mixed = Policy(out.policy);
    sol.achieved_cost = sol.eval_low.avg_cost;
    sol.achieved_aoi = sol.eval_low.avg_aoi;
    return sol;
  }

  sol.search = search_eta_star(model, trunc, c_max, cfg, solver);
  sol.eta_star = sol.search.eta_star;
  const double tol = cfg.stop_tol;
  double xi = cfg.xi;
  bool bracketed = false;
  EtaPoint low, high;
  for (int attempt = 0; attempt < 4 && !bracketed; ++attempt, xi *= 2.0) {
    low = evaluate_eta(model, trunc, std::max(0.0, sol.eta_star - xi), solver);
    high = evaluate_eta(model, trunc, sol.eta_star + xi, solver);
    bracketed = low.eval.avg_cost >= c_max - tol && high.eval.avg_cost <= c_max + tol;
    sol.xi = xi;
  }
  if (!bracketed) {
    std::ostringstream msg;
    msg << "policies at eta* +/- xi (up to xi = " << sol.xi << ") do not bracket C_max = " << c_max;
    throw BracketError(msg.str());
  }
  sol.policy_low = std::move(low.policy);
  sol.policy_high = std::move(high.policy);
  sol.eval_low = std::move(low.eval);
  sol.eval_high = std::move(high.eval);
  sol.differing_states = count_differences(sol.policy_low, sol.policy_high);

  const double c_low = sol.eval_low.avg_cost;
  const double c_high = sol.eval_high.avg_cost;
  if (std::abs(c_low - c_max) <= tol) {
    sol.mu = 1.0;
    sol.mixed = Policy(sol.policy_low);
  } else if (std::abs(c_high - c_max) <= tol) {
    sol.mu = 0.0;
    sol.mixed = Policy(sol.policy_high);
  } else if (sol.differing_states == 1) {
    sol.mu = single_state_weight(sol.policy_low, sol.policy_high, c_low, c_high, c_max, model, trunc);
    sol.mixed = single_state_mixture(sol.policy_low, sol.policy_high, sol.mu);
  } else {
    sol.mu = renewal_mixture_weight(sol.eval_low, sol.eval_high, c_max);
    sol.mixed = MixtureAtRenewal{sol.policy_low, sol.policy_high, sol.mu};
  }
  const EvalResult achieved = evaluate_exact(sol.mixed, model, trunc);
  sol.achieved_cost = achieved.avg_cost;
  sol.achieved_aoi = achieved.avg_aoi;
  return sol;
}

void write_search_trace_csv(std::ostream& os, std::span<const SearchStep> trace) {
  os << "step,eta,cost,aoi,gain\n";
  const auto prec = os.precision(12);
  for (const auto& s : trace) os << s.step << ',' << s.eta << ',' << s.cost << ',' << s.aoi << ',' << s.gain << '\n';
  os.precision(prec);
}

}  // namespace aoi
