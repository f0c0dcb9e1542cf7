// aoisched: command-line front end for the AoI scheduling library.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoi/arq.hpp"
#include "aoi/errors.hpp"
#include "aoi/lagrange.hpp"
#include "aoi/parallel.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/rvi.hpp"
#include "aoi/sarsa.hpp"
#include "aoi/sim.hpp"
#include "aoi/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace aoi;

namespace {

constexpr const char* kOutDirEnv = "AOISCHED_OUT_DIR";
constexpr const char* kSweepSchema = "sweep/v1";

struct Common {
  std::string out_dir;
  std::string config;
  bool quiet = false;
};

struct ModelArgs {
  double p0 = 0.5;
  double lambda = 0.5;
  int r_max = 3;
  int n_max = 150;

  ChannelModel model() const { return ChannelModel(p0, lambda, r_max); }
  Truncation trunc() const { return Truncation::fit(model(), n_max); }
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--p0", m.p0, "error probability of a first attempt")->capture_default_str();
  cmd->add_option("--lambda", m.lambda, "per-retransmission error decay (g(r) = p0 lambda^r)")->capture_default_str();
  cmd->add_option("--rmax", m.r_max, "retransmission cap (0 = ARQ)")->capture_default_str();
  cmd->add_option("--nmax", m.n_max, "age truncation for solvers")->capture_default_str();
}

fs::path out_path(const Common& c, const std::string& name) {
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir / name;
}

std::ofstream open_out(const Common& c, const std::string& name) {
  const fs::path p = out_path(c, name);
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

void emit(const Common& c, const std::string& name, const json& j) {
  open_out(c, name) << j.dump(2) << '\n';
  if (!c.quiet) std::cout << j.dump(2) << '\n';
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path);
  return json::parse(in);
}

// Flags given on the command line win over the config file.
template <class T>
void from_config(const CLI::App* cmd, const json& cfg, const std::string& flag, const std::string& key, T& var) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

void model_from_config(const CLI::App* cmd, const json& cfg, ModelArgs& m) {
  from_config(cmd, cfg, "--p0", "p0", m.p0);
  from_config(cmd, cfg, "--lambda", "lambda", m.lambda);
  from_config(cmd, cfg, "--rmax", "r_max", m.r_max);
  from_config(cmd, cfg, "--nmax", "n_max", m.n_max);
}

json model_json(const ChannelModel& m, const Truncation& t) {
  return {{"p0", m.p0()}, {"lambda", m.lambda()}, {"r_max", m.r_max()}, {"n_max", t.n_max}, {"trunc_r_max", t.r_max}};
}

// solve ---------------------------------------------------------------------

struct SolveArgs {
  ModelArgs m;
  double eta = 0.0;
  bool unconstrained = false;
  SolverConfig solver;
};

int cmd_solve(const Common& c, const SolveArgs& a) {
  const ChannelModel model = a.m.model();
  const Truncation tr = a.m.trunc();
  const SolverOutput out = a.unconstrained ? solve_unconstrained(model, tr, a.solver) : solve(model, tr, a.eta, a.solver);
  const EvalResult e = evaluate_exact(Policy(out.policy), model, tr);
  {
    auto os = open_out(c, "values.csv");
    write_values_csv(os, out);
  }
  {
    auto os = open_out(c, "policy.csv");
    write_policy_csv(os, out.policy);
  }
  json j = {{"model", model_json(model, tr)},
            {"eta", a.unconstrained ? 0.0 : a.eta},
            {"unconstrained", a.unconstrained},
            {"gain", out.gain},
            {"iterations", out.iterations},
            {"residual", out.residual},
            {"bellman_residual", bellman_residual(out, model, tr, a.unconstrained ? 0.0 : a.eta)},
            {"avg_aoi", e.avg_aoi},
            {"avg_cost", e.avg_cost}};
  if (const int thr = threshold_of(out.policy); thr > 0) j["threshold"] = thr;
  emit(c, "solve.json", j);
  return 0;
}

// arq -----------------------------------------------------------------------

struct ArqArgs {
  double p = 0.5;
  double c_max = 0.4;
  std::optional<double> eta;
};

int cmd_arq(const Common& c, const ArqArgs& a) {
  const auto rt = arq::optimal_policy({a.p, a.c_max});
  json j = {{"p", a.p},
            {"c_max", a.c_max},
            {"delta_cmax", rt.delta_cmax},
            {"delta1", rt.delta1},
            {"delta2", rt.delta2},
            {"mu_star", rt.mu_star},
            {"avg_cost", rt.cost},
            {"avg_aoi", rt.aoi}};
  if (a.eta) {
    const auto cand = arq::threshold_candidates(a.p, *a.eta);
    j["eta"] = *a.eta;
    j["candidates"] = {{"continuous", cand.continuous}, {"lower", cand.lower}, {"upper", cand.upper}};
  }
  emit(c, "arq.json", j);
  return 0;
}

// search-eta ----------------------------------------------------------------

struct SearchArgs {
  ModelArgs m;
  double c_max = 0.4;
  EtaSearchConfig search;
};

json solution_json(const ConstrainedSolution& s) {
  return {{"eta_star", s.eta_star},
          {"eta_below", s.search.eta_below},
          {"eta_above", s.search.eta_above},
          {"exact_hit", s.search.exact},
          {"search_steps", s.search.trace.size()},
          {"xi", s.xi},
          {"policy_kind", std::string(kind_name(s.mixed.kind()))},
          {"differing_states", s.differing_states},
          {"mu", s.mu},
          {"cost_low", s.eval_low.avg_cost},
          {"cost_high", s.eval_high.avg_cost},
          {"aoi_low", s.eval_low.avg_aoi},
          {"aoi_high", s.eval_high.avg_aoi},
          {"avg_cost", s.achieved_cost},
          {"avg_aoi", s.achieved_aoi}};
}

int cmd_search(const Common& c, const SearchArgs& a) {
  const ChannelModel model = a.m.model();
  const Truncation tr = a.m.trunc();
  const ConstrainedSolution s = solve_constrained(model, tr, a.c_max, a.search);
  {
    auto os = open_out(c, "search_trace.csv");
    write_search_trace_csv(os, s.search.trace);
  }
  json j = solution_json(s);
  j["model"] = model_json(model, tr);
  j["c_max"] = a.c_max;
  emit(c, "search.json", j);
  return 0;
}

// simulate ------------------------------------------------------------------

struct SimArgs {
  ModelArgs m;
  std::string policy = "optimal";
  double c_max = 0.4;
  long long horizon = 100000;
  int reps = 20;
  std::uint64_t seed = 1;
  bool trace = false;
  unsigned workers = 0;
};

Policy make_policy(const std::string& name, const ChannelModel& model, const Truncation& tr, double c_max) {
  if (name == "optimal") return solve_constrained(model, tr, c_max).mixed;
  if (name == "baseline") return baseline_periodic(c_max);
  if (name == "always") return always_new_update(tr);
  if (name == "arq-optimal") {
    if (!model.is_arq() || model.lambda() != 1.0) throw InvalidArgument("arq-optimal needs --rmax 0 --lambda 1");
    return arq::optimal_policy({model.p0(), c_max}).policy();
  }
  throw InvalidArgument("unknown policy " + name);
}

int cmd_simulate(const Common& c, const SimArgs& a) {
  const ChannelModel model = a.m.model();
  const Truncation tr = a.m.trunc();
  const Policy pol = make_policy(a.policy, model, tr, a.c_max);
  const RunStats st = evaluate_simulated(pol, model, a.horizon, a.reps, a.seed, a.workers);
  {
    auto os = open_out(c, "simulate_stats.csv");
    const StatsRow row{a.policy, model, a.c_max, st};
    write_stats_csv(os, std::span(&row, 1));
  }
  if (a.trace) {
    const RunResult r = run(pol, model, a.horizon, a.seed, true, 0);
    auto os = open_out(c, "trace.csv");
    write_trace_csv(os, r.trace);
  }
  json j = {{"model", model_json(model, tr)},
            {"policy", a.policy},
            {"c_max", a.c_max},
            {"horizon", a.horizon},
            {"replications", a.reps},
            {"mean_aoi", st.mean_aoi},
            {"var_aoi", st.var_aoi},
            {"se_aoi", st.se_aoi()},
            {"mean_cost", st.mean_cost},
            {"se_cost", st.se_cost()}};
  try {
    const EvalResult e = evaluate_exact(pol, model, tr);
    j["exact_aoi"] = e.avg_aoi;
    j["exact_cost"] = e.avg_cost;
  } catch (const Error& err) {
    j["exact_error"] = err.what();
  }
  emit(c, "simulate.json", j);
  return 0;
}

// learn ---------------------------------------------------------------------

struct LearnArgs {
  ModelArgs m{0.5, 0.5, 3, 30};
  double c_max = 0.4;
  long long horizon = 10000;
  int reps = 100;
  double tau = 1.0;
  double tau_decay = 1.0;
  double eta0 = 0.0;
  double eta_step = 1.0;
  bool fixed_eta = false;
  std::uint64_t seed = 1;
  long long record_every = 100;
  int rvi_nmax = 150;
  unsigned workers = 0;
};

int cmd_learn(const Common& c, const LearnArgs& a) {
  const ChannelModel model = a.m.model();
  LearnerConfig cfg;
  cfg.trunc = a.m.trunc();
  cfg.tau = a.tau;
  cfg.tau_decay = a.tau_decay;
  cfg.eta = a.eta0;
  cfg.eta_adapt = !a.fixed_eta;
  cfg.eta_step = a.eta_step;
  cfg.c_max = a.c_max;
  cfg.horizon = a.horizon;
  cfg.seed = a.seed;
  cfg.record_every = a.record_every;

  const auto timeline = train_replications(model, cfg, a.reps, a.workers);
  {
    auto os = open_out(c, "learn_timeline.csv");
    write_timeline_stats_csv(os, timeline);
  }
  {
    const TrainResult first = train(model, cfg, 0);
    auto os = open_out(c, "learn_q.csv");
    write_q_csv(os, first.state);
  }
  const ConstrainedSolution ref = solve_constrained(model, Truncation::fit(model, a.rvi_nmax), a.c_max);
  json j = {{"model", model_json(model, cfg.trunc)},
            {"c_max", a.c_max},
            {"horizon", a.horizon},
            {"replications", a.reps},
            {"tau", a.tau},
            {"eta0", a.eta0},
            {"eta_step", a.eta_step},
            {"rvi_aoi", ref.achieved_aoi},
            {"rvi_eta_star", ref.eta_star}};
  if (!timeline.empty()) {
    const auto& last = timeline.back();
    j["final_mean_aoi"] = last.mean_aoi;
    j["final_var_aoi"] = last.var_aoi;
    j["final_mean_cost"] = last.mean_cost;
    j["final_mean_eta"] = last.mean_eta;
    j["relative_gap"] = last.mean_aoi / ref.achieved_aoi - 1.0;
  }
  emit(c, "learn.json", j);
  return 0;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
  std::vector<double> p0{0.5};
  std::vector<double> lambda{0.5};
  std::vector<int> r_max{0, 3};
  std::vector<double> c_max{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int n_max = 150;
  long long horizon = 10000;
  int reps = 1000;
  bool quick = false;
  bool baseline = true;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

struct SweepRow {
  double p0, lambda;
  int r_max;
  double c_max;
  std::string policy;
  double eta_star = 0.0, mu = 1.0;
  double exact_aoi = 0.0, exact_cost = 0.0;
  RunStats sim;
  std::string error;
};

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "# schema: " << kSweepSchema << '\n';
  os << "p0,lambda,r_max,c_max,policy,eta_star,mu,exact_aoi,exact_cost,mean_aoi,var_aoi,mean_cost,error\n";
  os.precision(12);
  for (const auto& r : rows) {
    os << r.p0 << ',' << r.lambda << ',' << r.r_max << ',' << r.c_max << ',' << r.policy << ',';
    if (r.error.empty()) {
      os << r.eta_star << ',' << r.mu << ',' << r.exact_aoi << ',' << r.exact_cost << ',' << r.sim.mean_aoi << ','
         << r.sim.var_aoi << ',' << r.sim.mean_cost << ",\n";
    } else {
      std::string msg = r.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      os << ",,,,,,," << msg << '\n';
    }
  }
}

int cmd_sweep(const Common& c, SweepArgs a) {
  if (a.quick) {
    a.horizon = 2000;
    a.reps = 50;
  }
  if (a.p0.empty() || a.lambda.empty() || a.r_max.empty() || a.c_max.empty()) throw InvalidArgument("empty sweep grid");
  struct Point {
    double p0, lambda;
    int r_max;
    double c_max;
    bool baseline;
  };
  std::vector<Point> grid;
  for (double p0 : a.p0)
    for (double lam : a.lambda)
      for (int r : a.r_max)
        for (double cm : a.c_max) {
          grid.push_back({p0, lam, r, cm, false});
          if (a.baseline) grid.push_back({p0, lam, r, cm, true});
        }

  std::vector<SweepRow> rows(grid.size());
  // Points run in parallel; simulations inside a point stay serial.
  parallel_for(grid.size(), a.workers, [&](std::size_t k) {
    const Point& g = grid[k];
    SweepRow& row = rows[k];
    row.p0 = g.p0;
    row.lambda = g.lambda;
    row.r_max = g.r_max;
    row.c_max = g.c_max;
    row.policy = g.baseline ? "baseline" : "optimal";
    try {
      const ChannelModel model(g.p0, g.lambda, g.r_max);
      const Truncation tr = Truncation::fit(model, a.n_max);
      Policy pol;
      if (g.baseline) {
        pol = baseline_periodic(g.c_max);
      } else {
        const ConstrainedSolution s = solve_constrained(model, tr, g.c_max);
        pol = s.mixed;
        row.eta_star = s.eta_star;
        row.mu = s.mu;
      }
      const EvalResult e = evaluate_exact(pol, model, tr);
      row.exact_aoi = e.avg_aoi;
      row.exact_cost = e.avg_cost;
      row.sim = evaluate_simulated(pol, model, a.horizon, a.reps, a.seed + k, 1);
    } catch (const std::exception& err) {
      row.error = err.what();
    }
  });
  auto os = open_out(c, "sweep.csv");
  write_sweep_csv(os, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (!c.quiet)
    std::cout << json{{"rows", rows.size()}, {"failed", failed}, {"csv", out_path(c, "sweep.csv").string()}}.dump(2)
              << '\n';
  return 0;
}

// verify --------------------------------------------------------------------

int cmd_verify(const Common& c, const verify::Options& o) {
  const auto results = verify::run_all(o);
  verify::write_report(std::cout, results);
  json j = json::array();
  for (const auto& r : results)
    j.push_back({{"identity", r.identity},
                 {"passed", r.passed},
                 {"cases", r.cases},
                 {"worst", r.worst},
                 {"tolerance", r.tolerance},
                 {"detail", r.detail}});
  open_out(c, "verify.json") << j.dump(2) << '\n';
  return verify::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling under a transmission budget"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-o,--out", common.out_dir, std::string("output directory (default: $") + kOutDirEnv + " or .)");
  app.add_flag("-q,--quiet", common.quiet, "do not echo JSON results");

  SolveArgs solve_a;
  auto* solve_c = app.add_subcommand("solve", "relative value iteration at a fixed multiplier");
  add_model_flags(solve_c, solve_a.m);
  solve_c->add_option("--eta", solve_a.eta, "price per transmission")->capture_default_str();
  solve_c->add_flag("--unconstrained", solve_a.unconstrained, "eta = 0 and Idle removed");
  solve_c->add_option("--epsilon", solve_a.solver.epsilon)->capture_default_str();
  solve_c->add_option("--max-iters", solve_a.solver.max_iters)->capture_default_str();
  solve_c->add_option("--damping", solve_a.solver.damping)->capture_default_str();

  ArqArgs arq_a;
  double arq_eta = -1.0;
  auto* arq_c = app.add_subcommand("arq", "closed-form optimal randomized threshold for ARQ");
  arq_c->add_option("--p", arq_a.p, "error probability")->capture_default_str();
  arq_c->add_option("--cmax", arq_a.c_max, "transmission budget")->capture_default_str();
  arq_c->add_option("--eta", arq_eta, "also report the threshold candidates at this multiplier");

  SearchArgs search_a;
  auto* search_c = app.add_subcommand("search-eta", "find eta* and the budget-meeting mixture");
  add_model_flags(search_c, search_a.m);
  search_c->add_option("--cmax", search_a.c_max)->capture_default_str();
  search_c->add_option("--eta0", search_a.search.eta0)->capture_default_str();
  search_c->add_option("--step-scale", search_a.search.step_scale, "0 = |L*| at eta0")->capture_default_str();
  search_c->add_option("--xi", search_a.search.xi)->capture_default_str();
  search_c->add_option("--stop-tol", search_a.search.stop_tol)->capture_default_str();
  search_c->add_option("--max-steps", search_a.search.max_steps)->capture_default_str();

  SimArgs sim_a;
  auto* sim_c = app.add_subcommand("simulate", "Monte Carlo evaluation of a policy");
  add_model_flags(sim_c, sim_a.m);
  sim_c->add_option("--policy", sim_a.policy)
      ->check(CLI::IsMember({"optimal", "baseline", "always", "arq-optimal"}))
      ->capture_default_str();
  sim_c->add_option("--cmax", sim_a.c_max)->capture_default_str();
  sim_c->add_option("--horizon", sim_a.horizon)->capture_default_str();
  sim_c->add_option("--reps", sim_a.reps)->capture_default_str();
  sim_c->add_option("--seed", sim_a.seed)->capture_default_str();
  sim_c->add_flag("--trace", sim_a.trace, "write the per-slot trace of replication 0");
  sim_c->add_option("--workers", sim_a.workers, "0 = hardware concurrency");

  LearnArgs learn_a;
  auto* learn_c = app.add_subcommand("learn", "average-cost SARSA learning curves");
  add_model_flags(learn_c, learn_a.m);
  learn_c->add_option("--config", common.config, "JSON config; flags override");
  learn_c->add_option("--cmax", learn_a.c_max)->capture_default_str();
  learn_c->add_option("--horizon", learn_a.horizon)->capture_default_str();
  learn_c->add_option("--reps", learn_a.reps)->capture_default_str();
  learn_c->add_option("--tau", learn_a.tau)->capture_default_str();
  learn_c->add_option("--tau-decay", learn_a.tau_decay)->capture_default_str();
  learn_c->add_option("--eta0", learn_a.eta0)->capture_default_str();
  learn_c->add_option("--eta-step", learn_a.eta_step)->capture_default_str();
  learn_c->add_flag("--fixed-eta", learn_a.fixed_eta, "disable multiplier adaptation");
  learn_c->add_option("--seed", learn_a.seed)->capture_default_str();
  learn_c->add_option("--record-every", learn_a.record_every)->capture_default_str();
  learn_c->add_option("--rvi-nmax", learn_a.rvi_nmax)->capture_default_str();
  learn_c->add_option("--workers", learn_a.workers);

  SweepArgs sweep_a;
  auto* sweep_c = app.add_subcommand("sweep", "grid over (p0, lambda, r_max, C_max)");
  sweep_c->add_option("--config", common.config, "JSON config; flags override");
  sweep_c->add_option("--p0", sweep_a.p0)->delimiter(',');
  sweep_c->add_option("--lambda", sweep_a.lambda)->delimiter(',');
  sweep_c->add_option("--rmax", sweep_a.r_max)->delimiter(',');
  sweep_c->add_option("--cmax", sweep_a.c_max)->delimiter(',');
  sweep_c->add_option("--nmax", sweep_a.n_max)->capture_default_str();
  sweep_c->add_option("--horizon", sweep_a.horizon)->capture_default_str();
  sweep_c->add_option("--reps", sweep_a.reps)->capture_default_str();
  sweep_c->add_flag("--quick", sweep_a.quick, "T = 2000, 50 replications");
  sweep_c->add_flag("!--no-baseline", sweep_a.baseline, "skip the periodic baseline rows");
  sweep_c->add_option("--seed", sweep_a.seed)->capture_default_str();
  sweep_c->add_option("--workers", sweep_a.workers);

  verify::Options verify_a;
  auto* verify_c = app.add_subcommand("verify", "run the cross-module consistency checks");
  verify_c->add_flag("--quick", verify_a.quick, "reduced grids");
  verify_c->add_option("--perturb", verify_a.perturb, "scale one identity's reference side (negative control)")
      ->check(CLI::IsMember(verify::identities()));
  verify_c->add_option("--seed", verify_a.seed)->capture_default_str();
  verify_c->add_option("--workers", verify_a.workers);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_c) return cmd_solve(common, solve_a);
    if (*arq_c) {
      if (arq_c->count("--eta")) arq_a.eta = arq_eta;
      return cmd_arq(common, arq_a);
    }
    if (*search_c) return cmd_search(common, search_a);
    if (*sim_c) return cmd_simulate(common, sim_a);
    if (*learn_c) {
      const json cfg = load_config(common.config);
      model_from_config(learn_c, cfg, learn_a.m);
      from_config(learn_c, cfg, "--cmax", "c_max", learn_a.c_max);
      from_config(learn_c, cfg, "--horizon", "horizon", learn_a.horizon);
      from_config(learn_c, cfg, "--reps", "replications", learn_a.reps);
      from_config(learn_c, cfg, "--tau", "tau", learn_a.tau);
      from_config(learn_c, cfg, "--tau-decay", "tau_decay", learn_a.tau_decay);
      from_config(learn_c, cfg, "--eta0", "eta0", learn_a.eta0);
      from_config(learn_c, cfg, "--eta-step", "eta_step", learn_a.eta_step);
      from_config(learn_c, cfg, "--fixed-eta", "fixed_eta", learn_a.fixed_eta);
      from_config(learn_c, cfg, "--seed", "seed", learn_a.seed);
      from_config(learn_c, cfg, "--record-every", "record_every", learn_a.record_every);
      return cmd_learn(common, learn_a);
    }
    if (*sweep_c) {
      const json cfg = load_config(common.config);
      from_config(sweep_c, cfg, "--p0", "p0", sweep_a.p0);
      from_config(sweep_c, cfg, "--lambda", "lambda", sweep_a.lambda);
      from_config(sweep_c, cfg, "--rmax", "r_max", sweep_a.r_max);
      from_config(sweep_c, cfg, "--cmax", "c_max", sweep_a.c_max);
      from_config(sweep_c, cfg, "--nmax", "n_max", sweep_a.n_max);
      from_config(sweep_c, cfg, "--horizon", "horizon", sweep_a.horizon);
      from_config(sweep_c, cfg, "--reps", "replications", sweep_a.reps);
      from_config(sweep_c, cfg, "--quick", "quick", sweep_a.quick);
      from_config(sweep_c, cfg, "--no-baseline", "baseline", sweep_a.baseline);
      from_config(sweep_c, cfg, "--seed", "seed", sweep_a.seed);
      return cmd_sweep(common, sweep_a);
    }
    if (*verify_c) return cmd_verify(common, verify_a);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
