// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values come from tests/oracle.hpp.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <tuple>
#include <string>
#include <vector>

#include "aoi/arq.hpp"
#include "aoi/errors.hpp"
#include "aoi/lagrange.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/rvi.hpp"
#include "aoi/sarsa.hpp"
#include "aoi/sim.hpp"
#include "oracle.hpp"

using namespace aoi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

oracle::Channel channel_of(const ChannelModel& m) { return {m.p0(), m.lambda(), m.r_max()}; }
oracle::Box box_of(const Truncation& t) { return {t.n_max, t.r_max}; }

oracle::Rule rule_of(const Policy& p) {
  return [p](oracle::S s) {
    const ActionDist d = p.distribution({s.d, s.r});
    return std::array<double, 3>{d[0], d[1], d[2]};
  };
}

// Reference evaluation of any solver output.
std::pair<double, double> reference(const Policy& p, const ChannelModel& m, const Truncation& t) {
  if (p.kind() == PolicyKind::MixtureAtRenewal) {
    const auto& mix = p.as<MixtureAtRenewal>();
    return oracle::renewal_mix(oracle::evaluate(channel_of(m), box_of(t), rule_of(Policy(mix.first))),
                               oracle::evaluate(channel_of(m), box_of(t), rule_of(Policy(mix.second))), mix.mu);
  }
  const oracle::Value v = oracle::evaluate(channel_of(m), box_of(t), rule_of(p));
  return {v.aoi, v.cost};
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int arq_nmax(double p, int delta) { return delta + static_cast<int>(std::ceil(std::log(1e-12) / std::log(p))) + 2; }

// 1 -------------------------------------------------------------------------
Outcome arq_closed_forms() {
  double worst = 0.0;
  int cases = 0;
  for (int k = 1; k <= 9; ++k) {
    const double p = 0.1 * k;
    for (int d = 1; d <= 50; ++d) {
      const EvalResult e =
          evaluate_exact(Policy(ThresholdArq::deterministic(d)), ChannelModel::arq(p), Truncation(arq_nmax(p, d), 0));
      worst = std::max(worst, std::abs(e.avg_cost / oracle::arq_cost(p, d) - 1.0));
      worst = std::max(worst, std::abs(e.avg_aoi / oracle::arq_aoi(p, d) - 1.0));
      ++cases;
    }
  }
  return {worst <= 1e-8, fmt("%g thresholds, worst relative error %.2e (tol 1e-8)", cases, worst)};
}

// 2 -------------------------------------------------------------------------
Outcome lemma_candidates() {
  int cases = 0, misses = 0;
  std::string first;
  for (int k = 0; k <= 9; ++k) {
    const double p = 0.1 * k;
    for (int e = 1; e <= 100; ++e) {
      const double eta = 0.5 * e;
      int best = 1;
      double best_l = oracle::arq_lagrangian(p, 1, eta);
      for (int d = 2; d <= 1000; ++d) {
        const double l = oracle::arq_lagrangian(p, d, eta);
        if (l < best_l) best_l = l, best = d;
      }
      const auto c = arq::threshold_candidates(p, eta);
      ++cases;
      if (best != c.lower && best != c.upper) {
        if (!misses++) first = fmt(" first miss p=%g eta=%g argmin=%g", p, eta, best);
      }
    }
  }
  return {misses == 0, fmt("%g (p, eta) pairs, %g outside the candidate pair", cases, misses) + first};
}

// 3 -------------------------------------------------------------------------
Outcome rvi_vs_arq() {
  Outcome o;
  double worst_res = 0.0, worst_time = 0.0;
  int n = 0;
  for (double p : {0.2, 0.5, 0.8}) {
    for (double eta : {2.0, 10.0, 40.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      const ChannelModel m = ChannelModel::arq(p);
      const Truncation tr(500, 0);
      const SolverOutput out = solve(m, tr, eta);
      worst_time = std::max(worst_time, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      const int thr = threshold_of(out.policy);
      const double hat = oracle::arq_delta_hat(p, eta);
      const int lo = std::max(1, static_cast<int>(std::floor(hat))), hi = std::max(1, static_cast<int>(std::ceil(hat)));
      if (thr == 0 || (thr != lo && thr != hi)) {
        o.pass = false;
        o.detail += fmt("[p=%g eta=%g threshold %g not in {%g,..}] ", p, eta, thr, lo);
      }
      const double r1 = bellman_residual(out, m, tr, eta);
      const double r2 = oracle::bellman_residual(channel_of(m), box_of(tr), eta,
                                                 [&](oracle::S s) { return out.h_at({s.d, s.r}); }, out.gain);
      worst_res = std::max({worst_res, r1, r2});
      ++n;
    }
  }
  o.pass = o.pass && worst_res <= 2e-8 && worst_time < 60.0;
  o.detail += fmt("%g instances at n_max=500, worst Bellman residual %.2e (tol 2e-8), slowest %.2fs", n, worst_res,
                  worst_time);
  return o;
}

// 4 -------------------------------------------------------------------------
struct Setting {
  double p0, lambda;
  int r_max;
  double c_max;
};

Outcome budget_equality() {
  const std::vector<Setting> grid = {
      {0.3, 0.5, 9, 0.4}, {0.4, 0.5, 9, 0.2}, {0.5, 0.5, 3, 0.4}, {0.5, 0.5, 3, 0.1}, {0.5, 0.5, 3, 0.75},
      {0.2, 0.8, 5, 0.3}, {0.7, 0.3, 2, 0.15}, {0.6, 0.9, 1, 0.5}, {0.5, 1.0, 0, 0.35}, {0.3, 1.0, 0, 0.22},
      {0.8, 0.5, 6, 0.33}, {0.1, 0.5, 3, 0.6}};
  double worst = 0.0, worst_ref = 0.0;
  for (const Setting& s : grid) {
    const ChannelModel m(s.p0, s.lambda, s.r_max);
    const Truncation tr = Truncation::fit(m, 120);
    const ConstrainedSolution sol = solve_constrained(m, tr, s.c_max);
    worst = std::max(worst, std::abs(evaluate_exact(sol.mixed, m, tr).avg_cost - s.c_max));
    worst_ref = std::max(worst_ref, std::abs(reference(sol.mixed, m, tr).second - s.c_max));
  }
  return {worst <= 1e-6 && worst_ref <= 1e-6,
          fmt("%g settings, worst |C - C_max| %.2e (reference evaluation %.2e, tol 1e-6)", grid.size(), worst,
              worst_ref)};
}

// 5 -------------------------------------------------------------------------
Outcome eta_star() {
  const ChannelModel a(0.3, 0.5, 9), b(0.4, 0.5, 9);
  const double ea = search_eta_star(a, Truncation::fit(a, 150), 0.4).eta_star;
  const double eb = search_eta_star(b, Truncation::fit(b, 150), 0.2).eta_star;
  return {ea >= 4.0 && ea <= 6.0 && eb >= 17.0 && eb <= 21.0,
          fmt("eta*=%.3f for (0.4, 0.3, 0.5, 9) in [4,6]; eta*=%.3f for (0.2, 0.4, 0.5, 9) in [17,21]", ea, eb)};
}

// 6 -------------------------------------------------------------------------
Outcome convex_hull() {
  const ChannelModel arq_m = ChannelModel::arq(0.5), harq(0.5, 0.5, 3);
  const Truncation tr_a(150, 0), tr_h = Truncation::fit(harq, 150);
  double worst_hull = 0.0, worst_gap = -1e300;
  for (int k = 1; k <= 20; ++k) {
    const double c = 0.05 * k;
    const double hull = oracle::arq_hull(0.5, c);
    const double closed = arq::optimal_policy({0.5, c}).aoi;
    const double exact = evaluate_exact(arq::optimal_policy({0.5, c}).policy(), arq_m, tr_a).avg_aoi;
    const double solved = solve_constrained(arq_m, tr_a, c).achieved_aoi;
    worst_hull = std::max({worst_hull, std::abs(closed - hull), std::abs(exact - hull), std::abs(solved - hull)});
    const double h = solve_constrained(harq, tr_h, c).achieved_aoi;
    worst_gap = std::max(worst_gap, h - solved);
  }
  return {worst_hull <= 1e-8 && worst_gap <= 1e-9,
          fmt("20 budgets: worst |J_ARQ - hull| %.2e (tol 1e-8); max J_HARQ - J_ARQ %.3e (tol 1e-9)", worst_hull,
              worst_gap)};
}

// 7 -------------------------------------------------------------------------
Outcome orderings() {
  const std::vector<double> p0s = {0.2, 0.4, 0.6}, lambdas = {0.3, 0.6, 0.9}, budgets = {0.15, 0.3, 0.5};
  const std::vector<int> rmaxes = {0, 1, 3, 6};
  constexpr double tol = 1e-9;
  std::map<std::tuple<int, int, int, int>, double> J;
  for (std::size_t a = 0; a < p0s.size(); ++a)
    for (std::size_t b = 0; b < lambdas.size(); ++b)
      for (std::size_t r = 0; r < rmaxes.size(); ++r)
        for (std::size_t c = 0; c < budgets.size(); ++c) {
          const ChannelModel m(p0s[a], lambdas[b], rmaxes[r]);
          J[{a, b, r, c}] = solve_constrained(m, Truncation::fit(m, 120), budgets[c]).achieved_aoi;
        }
  int checks = 0, bad = 0;
  std::string first;
  auto expect_le = [&](double lo, double hi, const std::string& what) {
    ++checks;
    if (lo > hi + tol && !bad++) first = " first violation: " + what + fmt(" (%.12g > %.12g)", lo, hi);
  };
  for (std::size_t a = 0; a < p0s.size(); ++a)
    for (std::size_t b = 0; b < lambdas.size(); ++b)
      for (std::size_t c = 0; c < budgets.size(); ++c)
        for (std::size_t r = 0; r < rmaxes.size(); ++r) {
          const std::string at = fmt("p0=%g lambda=%g r_max=%g C=%g", p0s[a], lambdas[b], rmaxes[r], budgets[c]);
          if (r + 1 < rmaxes.size()) expect_le(J[{a, b, r + 1, c}], J[{a, b, r, c}], "r_max at " + at);
          if (a + 1 < p0s.size()) expect_le(J[{a, b, r, c}], J[{a + 1, b, r, c}], "p0 at " + at);
          if (b + 1 < lambdas.size() && rmaxes[r] > 0) expect_le(J[{a, b, r, c}], J[{a, b + 1, r, c}], "lambda at " + at);
        }
  // Baseline against the optimal feedback policy at every budget.
  for (double p : {0.2, 0.5, 0.8})
    for (int k = 1; k <= 20; ++k) {
      const double c = 0.05 * k;
      const ChannelModel arq_m = ChannelModel::arq(p), harq(p, 0.5, 3);
      const double base = evaluate_exact(baseline_periodic(c), arq_m, Truncation(200, 0)).avg_aoi;
      expect_le(arq::optimal_policy({p, c}).aoi, base, fmt("baseline vs ARQ p=%g C=%g", p, c));
      expect_le(solve_constrained(harq, Truncation::fit(harq, 120), c).achieved_aoi,
                evaluate_exact(baseline_periodic(c), harq, Truncation::fit(harq, 200)).avg_aoi,
                fmt("baseline vs HARQ p0=%g C=%g", p, c));
    }
  return {bad == 0, fmt("%g pairwise orderings, %g violations", checks, bad) + first};
}

// 8 -------------------------------------------------------------------------
Outcome eta_monotonicity() {
  int checks = 0, bad = 0;
  double max_ref_err = 0.0;
  std::string first;
  for (const ChannelModel m : {ChannelModel(0.3, 0.5, 9), ChannelModel(0.5, 0.5, 3), ChannelModel::arq(0.6)}) {
    const Truncation tr = Truncation::fit(m, 120);
    double prev_c = 2.0, prev_j = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double eta = 0.75 * k;
      const Policy p(solve(m, tr, eta).policy);
      const EvalResult e = evaluate_exact(p, m, tr);
      if (k % 10 == 0) {
        const auto [j, c] = reference(p, m, tr);
        max_ref_err = std::max({max_ref_err, std::abs(j - e.avg_aoi), std::abs(c - e.avg_cost)});
      }
      checks += 2;
      if ((e.avg_cost > prev_c + 1e-12 || e.avg_aoi < prev_j - 1e-12) && !bad++)
        first = fmt(" first violation at eta=%g (p0=%g)", eta, m.p0());
      prev_c = e.avg_cost;
      prev_j = e.avg_aoi;
    }
  }
  return {bad == 0 && max_ref_err <= 1e-9,
          fmt("%g comparisons on 3 models x 41 etas, %g violations, reference-evaluation gap %.1e", checks, bad,
              max_ref_err) +
              first};
}

// 9 -------------------------------------------------------------------------
Outcome sarsa() {
  const ChannelModel m(0.5, 0.5, 3);
  const double target = solve_constrained(m, Truncation::fit(m, 150), 0.4).achieved_aoi;
  LearnerConfig cfg;
  cfg.trunc = Truncation::fit(m, 30);
  cfg.tau = 2.0;
  cfg.eta = 5.0;
  cfg.eta_adapt = true;
  cfg.eta_step = 1.0;
  cfg.c_max = 0.4;
  cfg.horizon = 10000;
  cfg.record_every = 1000;
  cfg.seed = 2024;
  const auto tl = train_replications(m, cfg, 100);
  const double at1k = tl.front().mean_aoi, at10k = tl.back().mean_aoi;
  const double gap1k = std::abs(at1k / target - 1.0), gap10k = std::abs(at10k / target - 1.0);
  return {gap10k <= 0.15 && gap10k < gap1k,
          fmt("RVI mixture J=%.4f; SARSA mean J=%.4f at n=1000 (gap %.1f%%), ", target, at1k, 100 * gap1k) +
              fmt("%.4f at n=10000 (gap %.1f%%, tol 15%%), final mean cost %.3f", at10k, 100 * gap10k,
                  tl.back().mean_cost)};
}

// 10 ------------------------------------------------------------------------
Outcome simulation_agreement() {
  const ChannelModel harq(0.5, 0.5, 3), arq_m = ChannelModel::arq(0.5);
  const Truncation th = Truncation::fit(harq, 150), ta(150, 0);
  const ConstrainedSolution mix = solve_constrained(harq, th, 0.4);
  const ConstrainedSolution single = solve_constrained(arq_m, ta, 0.35);
  struct Case {
    const char* name;
    Policy policy;
    ChannelModel model;
    Truncation trunc;
  };
  const std::vector<Case> cases = {
      {"deterministic table", Policy(mix.policy_low), harq, th},
      {"randomized table", single.mixed, arq_m, ta},
      {"threshold", arq::optimal_policy({0.5, 0.35}).policy(), arq_m, ta},
      {"mixture at renewal", mix.mixed, harq, th},
      {"periodic", baseline_periodic(0.3), harq, th},
  };
  Outcome o;
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (const Case& c : cases) {
    if (c.name == std::string("randomized table") && c.policy.kind() != PolicyKind::RandomizedTable) {
      o.pass = false;
      o.detail += "[no randomized table produced] ";
    }
    if (c.name == std::string("mixture at renewal") && c.policy.kind() != PolicyKind::MixtureAtRenewal) {
      o.pass = false;
      o.detail += "[no renewal mixture produced] ";
    }
    const EvalResult e = evaluate_exact(c.policy, c.model, c.trunc);
    const RunStats s = evaluate_simulated(c.policy, c.model, 1000000, 30, seed++);
    const double za = std::abs(s.mean_aoi - e.avg_aoi) / s.se_aoi();
    const double zc = std::abs(s.mean_cost - e.avg_cost) / s.se_cost();
    worst = std::max({worst, za, zc});
    if (za > 3.0 || zc > 3.0) {
      o.pass = false;
      o.detail += std::string("[") + c.name + fmt(": z_aoi=%.2f z_cost=%.2f] ", za, zc);
    }
  }
  o.detail += fmt("5 policy kinds, T=1e6 x 30 replications, worst deviation %.2f SE (tol 3)", worst);
  return o;
}

// 11 ------------------------------------------------------------------------
Outcome trace_compliance() {
  long long slots = 0, violations = 0;
  int policies = 0;
  auto scan = [&](const Policy& p, const ChannelModel& m, std::uint64_t seed) {
    const RunResult r = run(p, m, 100000, seed, true);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
      violations += r.trace[k].action == Action::Retransmit && r.trace[k - 1].action == Action::Idle;
    slots += static_cast<long long>(r.trace.size());
    ++policies;
  };
  std::uint64_t seed = 500;
  for (const ChannelModel m : {ChannelModel(0.3, 0.5, 9), ChannelModel(0.5, 0.5, 3), ChannelModel(0.7, 0.8, 5)}) {
    const Truncation tr = Truncation::fit(m, 120);
    for (double eta : {0.0, 2.0, 8.0, 25.0}) scan(Policy(solve(m, tr, eta).policy), m, seed++);
    scan(Policy(solve_unconstrained(m, tr).policy), m, seed++);
    for (double c : {0.2, 0.45, 0.8}) scan(solve_constrained(m, tr, c).mixed, m, seed++);
  }
  return {violations == 0,
          fmt("%g solver policies, %g simulated slots, %g retransmissions right after an idle slot", policies, slots,
              violations)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ARQ analytic oracle equivalence", arq_closed_forms},
      {2, "threshold candidates vs brute force", lemma_candidates},
      {3, "RVI vs analytic ARQ", rvi_vs_arq},
      {4, "constraint equality", budget_equality},
      {5, "eta* reproduction", eta_star},
      {6, "convex hull and HARQ <= ARQ", convex_hull},
      {7, "ordering properties", orderings},
      {8, "monotonicity in eta", eta_monotonicity},
      {9, "SARSA convergence", sarsa},
      {10, "simulation vs exact evaluation", simulation_agreement},
      {11, "no retransmission after idle", trace_compliance},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
