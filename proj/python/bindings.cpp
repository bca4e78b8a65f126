#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "lmdp/chain_analysis.hpp"
#include "lmdp/convex_view.hpp"
#include "lmdp/experiment.hpp"
#include "lmdp/online_harness.hpp"

namespace py = pybind11;
using namespace lmdp;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
std::string dump(const json& j) { return j.dump(); }

py::dict solution_dict(const LmdpSolution& sol) {
  py::dict d;
  d["lambda"] = sol.lambda;
  d["z"] = sol.z;
  d["v"] = sol.v;
  d["policy"] = sol.policy.kernel();
  d["iterations"] = sol.iterations;
  d["residual"] = sol.residual;
  return d;
}

py::dict trace_dict(const ExperimentTrace& trace) {
  const std::size_t rows = trace.records.size();
  std::vector<std::vector<double>> cols(std::size(kTraceColumns), std::vector<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const RoundRecord& r = trace.records[i];
    const double values[] = {static_cast<double>(r.t), r.lambda, r.idealized_loss, r.expected_true_loss,
                             r.sampled_loss, r.policy_change, r.change_rate_bound, r.state_gap,
                             r.pmudiff_bound, r.cum_idealized_regret, r.cum_true_regret_proxy, r.v_span};
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c][i] = values[c];
  }
  py::dict columns;
  for (std::size_t c = 0; c < cols.size(); ++c)
    columns[kTraceColumns[c]] = Eigen::Map<const Vector>(cols[c].data(), static_cast<int>(rows)).eval();
  py::dict d;
  d["columns"] = columns;
  d["summary"] = dump(summary_json(trace));
  d["final_policy"] = trace.final_policy;
  d["final_lambda"] = trace.final_lambda;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linearly solvable MDP solver, chain diagnostics and online FTL harness";

  auto base = py::register_exception<Error>(m, "LmdpError", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
  py::register_exception<SupportViolation>(m, "SupportViolation", base.ptr());
  py::register_exception<NonErgodic>(m, "NonErgodic", base.ptr());
  py::register_exception<NotPrimitive>(m, "NotPrimitive", base.ptr());
  py::register_exception<NoCycle>(m, "NoCycle", base.ptr());
  py::register_exception<ZeroMarginal>(m, "ZeroMarginal", base.ptr());
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", base.ptr());
  py::register_exception<GenerationFailed>(m, "GenerationFailed", base.ptr());

  m.def(
      "solve",
      [](const Matrix& p, const Vector& c, double tol, int max_iters, std::optional<Vector> warm_start) {
        SolveOptions opts;
        opts.tol = tol;
        opts.max_iters = max_iters;
        opts.warm_start = std::move(warm_start);
        return solution_dict(solve(PassiveDynamics(p), StateCost(c), opts));
      },
      py::arg("P"), py::arg("c"), py::arg("tol") = 1e-10, py::arg("max_iters") = 100000,
      py::arg("warm_start") = py::none());

  m.def(
      "kl_divergence", [](const Vector& q, const Vector& p) { return kl_divergence(q, p); }, py::arg("q"),
      py::arg("p"));

  m.def(
      "analyze", [](const Matrix& p) { return dump(to_json(analyze(PassiveDynamics(p)))); }, py::arg("P"));
  m.def("stationary_distribution", &stationary_distribution, py::arg("K"));
  m.def("ergodicity_coefficient", &ergodicity_coefficient, py::arg("K"));
  m.def(
      "primitivity_index", [](const Matrix& p) { return primitivity_index(PassiveDynamics(p)); },
      py::arg("P"));
  m.def(
      "max_expected_hitting_time", [](const Matrix& p) { return max_expected_hitting_time(PassiveDynamics(p)); },
      py::arg("P"));
  m.def(
      "tau_upper_bound", [](double alpha, double h_hit) { return tau_upper_bound(alpha, h_hit); },
      py::arg("alpha"), py::arg("h_hit"));

  m.def(
      "measure_from_policy",
      [](const Matrix& p, const Matrix& q) { return measure_from_policy(PassiveDynamics(p), Policy(q)).pi(); },
      py::arg("P"), py::arg("Q"));
  m.def(
      "objective_f",
      [](const Matrix& pi, const Vector& c, const Matrix& p) {
        return objective_f(StationaryTransitionMeasure(pi), StateCost(c), PassiveDynamics(p));
      },
      py::arg("pi"), py::arg("c"), py::arg("P"));
  m.def(
      "feasibility_residual",
      [](const Matrix& pi, const Matrix& p) { return feasibility_residual(pi, PassiveDynamics(p)); },
      py::arg("pi"), py::arg("P"));
  m.def(
      "minimize_f",
      [](const Matrix& p, const Vector& c, double tol, int max_iters) {
        FrankWolfeOptions opts;
        opts.tol = tol;
        opts.max_iters = max_iters;
        const FrankWolfeResult r = minimize_f(PassiveDynamics(p), StateCost(c), opts);
        py::dict d;
        d["measure"] = r.measure.pi();
        d["value"] = r.value;
        d["gap"] = r.gap;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("P"), py::arg("c"), py::arg("tol") = 1e-3, py::arg("max_iters") = 200000);
  m.def(
      "min_mean_cycle",
      [](const Matrix& w, const Mask& support) {
        const CycleMeasure r = min_mean_cycle(w, support);
        py::dict d;
        d["cycle"] = r.cycle;
        d["mean_weight"] = r.mean_weight;
        d["measure"] = r.measure.pi();
        return d;
      },
      py::arg("weights"), py::arg("support"));
  m.def(
      "bregman_negcondent",
      [](const Matrix& a, const Matrix& b) {
        return bregman_negcondent(StationaryTransitionMeasure(a), StationaryTransitionMeasure(b));
      },
      py::arg("pi_prime"), py::arg("pi"));
  m.def(
      "pinsker_lower_bound",
      [](const Matrix& a, const Matrix& b) {
        return pinsker_lower_bound(StationaryTransitionMeasure(a), StationaryTransitionMeasure(b));
      },
      py::arg("pi_prime"), py::arg("pi"));
  m.def(
      "kkt_residual",
      [](const Matrix& pi, const Vector& c, const Vector& v, double lambda, const Matrix& p) {
        return kkt_residual(StationaryTransitionMeasure(pi), StateCost(c), v, lambda, PassiveDynamics(p));
      },
      py::arg("pi"), py::arg("c"), py::arg("v"), py::arg("lambda_"), py::arg("P"));

  m.def("theoretical_bound", &theoretical_bound, py::arg("tau"), py::arg("B"), py::arg("T"));
  m.def(
      "generate_instance",
      [](const std::string& kind, int n, std::uint64_t seed, double min_prob) {
        return generate_instance(instance_kind_from_string(kind), n, seed, min_prob).kernel();
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("min_prob") = 0.05);

  m.def(
      "run_experiment",
      [](const Matrix& p, const std::string& adversary, int horizon, const std::string& mode, std::uint64_t seed,
         std::uint64_t adversary_seed, const std::map<std::string, double>& params,
         std::optional<std::vector<Vector>> replay, std::optional<Vector> mu0) {
        const PassiveDynamics pd(p);
        Adversary adv;
        adv.kind = adversary_kind_from_string(adversary);
        adv.seed = adversary_seed;
        adv.params = params;
        if (replay) adv.replay = std::move(*replay);
        const Vector start = mu0.value_or(Vector::Constant(pd.size(), 1.0 / pd.size()));
        ExperimentTrace trace;
        {
          py::gil_scoped_release release;
          trace = run_experiment(pd, start, adv, horizon, mode_from_string(mode), seed);
        }
        return trace_dict(trace);
      },
      py::arg("P"), py::arg("adversary") = "iid-uniform", py::arg("T") = 100, py::arg("mode") = "exact",
      py::arg("seed") = 0, py::arg("adversary_seed") = 0,
      py::arg("params") = std::map<std::string, double>{}, py::arg("replay") = py::none(),
      py::arg("mu0") = py::none());

  m.def(
      "run_config",
      [](const std::string& config_text, std::optional<std::uint64_t> seed, std::optional<std::string> output,
         bool negative_control) {
        RunOverrides overrides;
        overrides.seed = seed;
        overrides.output = std::move(output);
        if (negative_control) overrides.negative_control = true;
        const ExperimentConfig config = parse_config_text(config_text);
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run_from_config(config, overrides);
        }
        return py::make_tuple(out.exit_code, dump(out.aggregate));
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("output") = py::none(),
      py::arg("negative_control") = false);

  m.def(
      "verify",
      [](const Matrix& p, std::optional<Vector> c, int samples, std::uint64_t seed) {
        VerifyOptions opts;
        opts.samples = samples;
        opts.seed = seed;
        std::optional<StateCost> cost;
        if (c) cost.emplace(*c);
        const VerifyReport r = verify(PassiveDynamics(p), cost, opts);
        return py::make_tuple(r.pass, dump(r.report));
      },
      py::arg("P"), py::arg("c") = py::none(), py::arg("samples") = 20, py::arg("seed") = 0);
}
