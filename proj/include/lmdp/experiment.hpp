#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmdp/online_harness.hpp"

namespace lmdp {

using json = nlohmann::json;

enum class InstanceKind { RandomErgodic, RingWithJumps, Gridworld };
std::string to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& name);

// random-ergodic: min_prob + (1 - n min_prob) * normalized uniform rows
// ring-with-jumps: (1 - eps) * cycle + eps/n everywhere, eps = n min_prob
// gridworld: lazy 4-neighbour walk on a sqrt(n) x sqrt(n) torus, 1/5 per move
// Throws GenerationFailed if the result violates the mixing assumptions.
PassiveDynamics generate_instance(InstanceKind kind, int n, std::uint64_t seed, double min_prob);

struct InstanceSpec {
  std::optional<Matrix> matrix;  // inline kernel; generator fields ignored when set
  InstanceKind kind = InstanceKind::RandomErgodic;
  int n = 0;
  std::uint64_t seed = 0;
  double min_prob = 0.0;

  PassiveDynamics build() const;
  bool operator==(const InstanceSpec& other) const;
};

struct Tolerances {
  double solver_tol = 1e-10;
  double oracle_tol = 1e-3;
  bool operator==(const Tolerances&) const = default;
};

struct ExperimentConfig {
  InstanceSpec instance;
  AdversaryKind adversary_kind = AdversaryKind::IidUniform;
  std::map<std::string, double> adversary_params;
  std::uint64_t adversary_seed = 0;
  std::string replay_path;
  int horizon = 1;
  Mode mode = Mode::Exact;
  std::vector<std::uint64_t> seeds{0};
  std::string output = ".";
  Tolerances tolerances;
  std::optional<Vector> mu0;  // uniform when absent
  bool negative_control = false;

  bool operator==(const ExperimentConfig& other) const;
};

// Parsing validates every field and throws InvalidInput with the field path.
ExperimentConfig parse_config(const json& j);
ExperimentConfig parse_config_text(const std::string& text);
json to_json(const ExperimentConfig& config);

// Adversary for one sweep seed; replay files are loaded here.
Adversary make_adversary(const ExperimentConfig& config, std::uint64_t sweep_seed, int n);
std::vector<Vector> load_cost_sequence(const std::filesystem::path& path);

// Matrices are row-major arrays of arrays.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& where);
Vector vector_from_json(const json& j, const std::string& where);

json to_json(const PassiveDynamics& p);
PassiveDynamics instance_from_json(const json& j);
StateCost cost_from_json(const json& j);
json to_json(const LmdpSolution& sol);
json to_json(const ChainDiagnostics& d);
json to_json(const Ledger& ledger);
json summary_json(const ExperimentTrace& trace);

// Fixed column order; doubles with 17 significant digits.
inline constexpr const char* kTraceColumns[] = {
    "t", "lambda_t", "idealized_loss", "expected_true_loss", "sampled_loss",
    "policy_change_l1", "lemma4_bound", "state_gap_l1", "pmudiff_bound",
    "cum_idealized_regret", "cum_true_regret_proxy", "v_span"};
void write_trace_csv(std::ostream& os, const ExperimentTrace& trace);
std::string format_double(double value);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  json aggregate;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<bool> negative_control;
  int threads = 0;  // 0: LMDP_LAB_THREADS or hardware concurrency
};

// One trace CSV and summary JSON per seed plus aggregate.json. Exit code 0
// iff every ledger passes.
RunOutcome run_from_config(const ExperimentConfig& config, const RunOverrides& overrides = {});

struct VerifyOptions {
  int samples = 20;
  std::uint64_t seed = 0;
  Tolerances tolerances;
};

struct VerifyReport {
  bool pass = true;
  json report;
};

// Assumption status, chain constants, eigen vs Frank-Wolfe agreement,
// KKT residual and sampled checks of the value/policy bounds. Uses a
// random cost when `cost` is empty.
VerifyReport verify(const PassiveDynamics& p, const std::optional<StateCost>& cost,
                    const VerifyOptions& options = {});

}  // namespace lmdp
