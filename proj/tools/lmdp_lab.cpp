// lmdp_lab: command-line front end for the LMDP solver and the online
// FTL experiment harness.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lmdp/experiment.hpp"

namespace {

using lmdp::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lmdp::InvalidInput("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw lmdp::InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void emit(const json& j, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(output);
  if (!out) throw lmdp::InvalidInput("cannot write '" + output + "'");
  out << j.dump(2) << "\n";
}

lmdp::PassiveDynamics load_instance(const std::string& instance_path, const std::string& config_path) {
  if (!instance_path.empty()) return lmdp::instance_from_json(read_json(instance_path));
  if (!config_path.empty()) return lmdp::parse_config(read_json(config_path)).instance.build();
  throw lmdp::InvalidInput("one of --instance or --config is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control and online FTL experiments for linearly solvable MDPs"};
  app.require_subcommand(1);

  std::string instance_path, cost_path, config_path, output;

  auto* solve_cmd = app.add_subcommand("solve", "solve an instance for one state cost");
  solve_cmd->add_option("--instance,-i", instance_path, "instance JSON")->required();
  solve_cmd->add_option("--cost,-c", cost_path, "state cost JSON")->required();
  double tol = 1e-10;
  int max_iters = 100000;
  solve_cmd->add_option("--tol", tol, "Bellman residual tolerance");
  solve_cmd->add_option("--max-iters", max_iters, "power iteration cap");
  solve_cmd->add_option("--output,-o", output, "output file (default stdout)");

  auto* analyze_cmd = app.add_subcommand("analyze", "chain diagnostics of an instance");
  analyze_cmd->add_option("--instance,-i", instance_path, "instance JSON")->required();
  analyze_cmd->add_option("--output,-o", output, "output file (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen", "generate an instance");
  std::string kind = "random-ergodic";
  int n = 5;
  std::uint64_t gen_seed = 0;
  double min_prob = 0.05;
  gen_cmd->add_option("--kind", kind, "random-ergodic | ring-with-jumps | gridworld");
  gen_cmd->add_option("--n", n, "number of states");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--min-prob", min_prob, "entry floor / leakage per entry");
  gen_cmd->add_option("--output,-o", output, "output file (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "run the online experiment described by a config");
  run_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  std::optional<std::uint64_t> seed_override;
  std::string out_dir;
  bool negative_control = false;
  run_cmd->add_option("--seed", seed_override, "override the config's seed list");
  run_cmd->add_option("--output,-o", out_dir, "override the output directory");
  run_cmd->add_flag("--negative-control", negative_control,
                    "play the passive dynamics in the middle round (ledger must fail)");

  auto* verify_cmd = app.add_subcommand("verify", "check assumptions, oracles and bounds");
  verify_cmd->add_option("--instance,-i", instance_path, "instance JSON");
  verify_cmd->add_option("--config", config_path, "experiment config JSON (instance taken from it)");
  verify_cmd->add_option("--cost,-c", cost_path, "state cost JSON (random when omitted)");
  int samples = 20;
  std::uint64_t verify_seed = 0;
  verify_cmd->add_option("--samples", samples, "number of sampled costs");
  verify_cmd->add_option("--seed", verify_seed, "sampling seed");
  verify_cmd->add_option("--output,-o", output, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const auto p = lmdp::instance_from_json(read_json(instance_path));
      const auto c = lmdp::cost_from_json(read_json(cost_path));
      lmdp::SolveOptions opts;
      opts.tol = tol;
      opts.max_iters = max_iters;
      emit(lmdp::to_json(lmdp::solve(p, c, opts)), output);
      return 0;
    }
    if (*analyze_cmd) {
      const auto p = lmdp::instance_from_json(read_json(instance_path));
      emit(lmdp::to_json(lmdp::analyze(p)), output);
      return 0;
    }
    if (*gen_cmd) {
      const auto p = lmdp::generate_instance(lmdp::instance_kind_from_string(kind), n, gen_seed, min_prob);
      json j = lmdp::to_json(p);
      j["kind"] = kind;
      j["seed"] = gen_seed;
      j["min_prob"] = min_prob;
      emit(j, output);
      return 0;
    }
    if (*run_cmd) {
      const auto config = lmdp::parse_config(read_json(config_path));
      lmdp::RunOverrides ov;
      ov.seed = seed_override;
      if (!out_dir.empty()) ov.output = out_dir;
      if (negative_control) ov.negative_control = true;
      const auto outcome = lmdp::run_from_config(config, ov);
      std::cout << outcome.aggregate.dump(2) << "\n";
      if (outcome.exit_code != 0) std::cerr << "ledger check failed\n";
      return outcome.exit_code;
    }
    if (*verify_cmd) {
      const auto p = load_instance(instance_path, config_path);
      std::optional<lmdp::StateCost> cost;
      if (!cost_path.empty()) cost = lmdp::cost_from_json(read_json(cost_path));
      lmdp::VerifyOptions opts;
      opts.samples = samples;
      opts.seed = verify_seed;
      if (!config_path.empty()) opts.tolerances = lmdp::parse_config(read_json(config_path)).tolerances;
      const auto rep = lmdp::verify(p, cost, opts);
      emit(rep.report, output);
      return rep.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
