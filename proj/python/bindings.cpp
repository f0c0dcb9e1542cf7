#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aoi/arq.hpp"
#include "aoi/errors.hpp"
#include "aoi/lagrange.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/rvi.hpp"
#include "aoi/sarsa.hpp"
#include "aoi/sim.hpp"
#include "aoi/verify.hpp"

namespace py = pybind11;
using namespace aoi;

namespace {

std::string codes(const DeterministicTable& t) {
  std::string s;
  s.reserve(t.actions.size());
  for (Action a : t.actions) s += action_code(a);
  return s;
}

py::dict eval_dict(const EvalResult& e) {
  py::dict d;
  d["aoi"] = e.avg_aoi;
  d["cost"] = e.avg_cost;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Age-of-information transmission scheduling over ARQ/HARQ channels";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<InadmissibleError>(m, "InadmissibleError", base.ptr());
  py::register_exception<IterationLimitError>(m, "IterationLimitError", base.ptr());
  py::register_exception<NoStationaryError>(m, "NoStationaryError", base.ptr());
  py::register_exception<SearchFailure>(m, "SearchFailure", base.ptr());
  py::register_exception<BracketError>(m, "BracketError", base.ptr());
  py::register_exception<ProtocolViolation>(m, "ProtocolViolation", base.ptr());

  py::enum_<Action>(m, "Action")
      .value("IDLE", Action::Idle)
      .value("NEW", Action::NewUpdate)
      .value("RETRANSMIT", Action::Retransmit);

  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init<double, double, int>(), py::arg("p0"), py::arg("lam"), py::arg("r_max"))
      .def_static("arq", &ChannelModel::arq, py::arg("p"))
      .def_property_readonly("p0", &ChannelModel::p0)
      .def_property_readonly("lam", &ChannelModel::lambda)
      .def_property_readonly("r_max", &ChannelModel::r_max)
      .def("error_prob", &ChannelModel::error_prob, py::arg("r"))
      .def("__repr__", [](const ChannelModel& c) {
        return "ChannelModel(p0=" + std::to_string(c.p0()) + ", lam=" + std::to_string(c.lambda()) +
               ", r_max=" + std::to_string(c.r_max()) + ")";
      });

  py::class_<Truncation>(m, "Truncation")
      .def(py::init<int, int>(), py::arg("n_max"), py::arg("r_max"))
      .def_static("fit", &Truncation::fit, py::arg("model"), py::arg("n_max"))
      .def_readonly("n_max", &Truncation::n_max)
      .def_readonly("r_max", &Truncation::r_max)
      .def("state_count", [](const Truncation& t) { return state_count(t); })
      .def("states", [](const Truncation& t) {
        std::vector<std::pair<int, int>> out;
        for (State s : enumerate_states(t)) out.emplace_back(s.delta, s.r);
        return out;
      });

  py::class_<Policy>(m, "Policy")
      .def_property_readonly("kind", [](const Policy& p) { return std::string(kind_name(p.kind())); })
      .def("distribution",
           [](const Policy& p, int delta, int r) {
             const ActionDist d = p.distribution({delta, r});
             return std::make_tuple(d[0], d[1], d[2]);
           },
           py::arg("delta"), py::arg("r"))
      .def_static("threshold", [](int lower, int upper, double mu) {
                    return Policy(ThresholdArq{lower, upper < 0 ? lower : upper, mu});
                  },
                  py::arg("lower"), py::arg("upper") = -1, py::arg("mu") = 1.0)
      .def_static("periodic", [](int period) { return Policy(PeriodicBaseline{period}); }, py::arg("period"))
      .def_static("baseline", &baseline_periodic, py::arg("c_max"))
      .def_static("always_new", &always_new_update, py::arg("trunc"));

  m.def("threshold_candidates", [](double p, double eta) {
    const auto c = arq::threshold_candidates(p, eta);
    return std::make_tuple(c.continuous, c.lower, c.upper);
  }, py::arg("p"), py::arg("eta"));
  m.def("arq_cost", &arq::cost_of_threshold, py::arg("p"), py::arg("delta"));
  m.def("arq_aoi", &arq::aoi_of_threshold, py::arg("p"), py::arg("delta"));
  m.def("arq_lagrangian", &arq::lagrangian_cost, py::arg("p"), py::arg("delta"), py::arg("eta"));
  m.def("arq_optimal", [](double p, double c_max) {
    const auto r = arq::optimal_policy({p, c_max});
    py::dict d;
    d["delta_cmax"] = r.delta_cmax;
    d["delta1"] = r.delta1;
    d["delta2"] = r.delta2;
    d["mu"] = r.mu_star;
    d["cost"] = r.cost;
    d["aoi"] = r.aoi;
    d["policy"] = r.policy();
    return d;
  }, py::arg("p"), py::arg("c_max"));

  m.def("solve", [](const ChannelModel& model, const Truncation& trunc, std::optional<double> eta, double epsilon,
                    double damping) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.damping = damping;
    const SolverOutput out = eta ? solve(model, trunc, *eta, cfg) : solve_unconstrained(model, trunc, cfg);
    py::dict d;
    d["gain"] = out.gain;
    d["h"] = out.h;
    d["actions"] = codes(out.policy);
    d["threshold"] = threshold_of(out.policy);
    d["iterations"] = out.iterations;
    d["residual"] = out.residual;
    d["bellman_residual"] = bellman_residual(out, model, trunc, eta.value_or(0.0));
    d["policy"] = Policy(out.policy);
    return d;
  }, py::arg("model"), py::arg("trunc"), py::arg("eta") = py::none(), py::arg("epsilon") = 1e-8,
     py::arg("damping") = 0.9);

  m.def("search_eta_star", [](const ChannelModel& model, const Truncation& trunc, double c_max) {
    const EtaSearchResult r = search_eta_star(model, trunc, c_max);
    py::dict d;
    d["eta_star"] = r.eta_star;
    d["eta_below"] = r.eta_below;
    d["eta_above"] = r.eta_above;
    d["exact"] = r.exact;
    d["steps"] = r.trace.size();
    return d;
  }, py::arg("model"), py::arg("trunc"), py::arg("c_max"));

  m.def("solve_constrained", [](const ChannelModel& model, const Truncation& trunc, double c_max) {
    const ConstrainedSolution s = solve_constrained(model, trunc, c_max);
    py::dict d;
    d["eta_star"] = s.eta_star;
    d["mu"] = s.mu;
    d["aoi"] = s.achieved_aoi;
    d["cost"] = s.achieved_cost;
    d["low"] = eval_dict(s.eval_low);
    d["high"] = eval_dict(s.eval_high);
    d["differing_states"] = s.differing_states;
    d["policy"] = s.mixed;
    return d;
  }, py::arg("model"), py::arg("trunc"), py::arg("c_max"));

  m.def("evaluate_exact", [](const Policy& p, const ChannelModel& model, const Truncation& trunc) {
    return eval_dict(evaluate_exact(p, model, trunc));
  }, py::arg("policy"), py::arg("model"), py::arg("trunc"));

  m.def("simulate", [](const Policy& p, const ChannelModel& model, long long horizon, int reps, std::uint64_t seed) {
    RunStats s;
    {
      py::gil_scoped_release release;
      s = evaluate_simulated(p, model, horizon, reps, seed);
    }
    py::dict d;
    d["mean_aoi"] = s.mean_aoi;
    d["var_aoi"] = s.var_aoi;
    d["se_aoi"] = s.se_aoi();
    d["mean_cost"] = s.mean_cost;
    d["var_cost"] = s.var_cost;
    d["se_cost"] = s.se_cost();
    return d;
  }, py::arg("policy"), py::arg("model"), py::arg("horizon"), py::arg("reps") = 10, py::arg("seed") = 1);

  m.def("trace", [](const Policy& p, const ChannelModel& model, long long horizon, std::uint64_t seed) {
    const RunResult r = run(p, model, horizon, seed, true);
    py::list rows;
    for (const SlotRecord& s : r.trace) {
      py::object ok = s.success ? py::cast(*s.success) : py::none();
      rows.append(py::make_tuple(s.t, s.before.delta, s.before.r, std::string(1, action_code(s.action)), ok));
    }
    return rows;
  }, py::arg("policy"), py::arg("model"), py::arg("horizon"), py::arg("seed") = 1);

  m.def("learn", [](const ChannelModel& model, int n_max, double c_max, double tau, double eta0, double eta_step,
                    bool eta_adapt, long long horizon, int reps, long long record_every, std::uint64_t seed) {
    LearnerConfig cfg;
    cfg.trunc = Truncation::fit(model, n_max);
    cfg.tau = tau;
    cfg.eta = eta0;
    cfg.eta_step = eta_step;
    cfg.eta_adapt = eta_adapt;
    cfg.c_max = c_max;
    cfg.horizon = horizon;
    cfg.record_every = record_every;
    cfg.seed = seed;
    std::vector<TimelineStats> tl;
    {
      py::gil_scoped_release release;
      tl = train_replications(model, cfg, reps);
    }
    py::list rows;
    for (const auto& t : tl) {
      py::dict d;
      d["n"] = t.n;
      d["mean_aoi"] = t.mean_aoi;
      d["var_aoi"] = t.var_aoi;
      d["mean_cost"] = t.mean_cost;
      d["var_cost"] = t.var_cost;
      d["mean_eta"] = t.mean_eta;
      rows.append(d);
    }
    return rows;
  }, py::arg("model"), py::arg("n_max") = 30, py::arg("c_max") = 1.0, py::arg("tau") = 1.0, py::arg("eta0") = 0.0,
     py::arg("eta_step") = 1.0, py::arg("eta_adapt") = true, py::arg("horizon") = 10000, py::arg("reps") = 10,
     py::arg("record_every") = 1000, py::arg("seed") = 1);

  m.def("verify", [](bool quick, const std::string& perturb, std::uint64_t seed) {
    verify::Options opts;
    opts.quick = quick;
    opts.perturb = perturb;
    opts.seed = seed;
    std::vector<verify::CheckResult> res;
    {
      py::gil_scoped_release release;
      res = verify::run_all(opts);
    }
    py::list rows;
    for (const auto& r : res) {
      py::dict d;
      d["identity"] = r.identity;
      d["passed"] = r.passed;
      d["worst"] = r.worst;
      d["tolerance"] = r.tolerance;
      d["cases"] = r.cases;
      d["detail"] = r.detail;
      rows.append(d);
    }
    return rows;
  }, py::arg("quick") = true, py::arg("perturb") = "", py::arg("seed") = 1);
}
