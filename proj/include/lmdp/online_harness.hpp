#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lmdp/chain_analysis.hpp"
#include "lmdp/convex_view.hpp"
#include "lmdp/lmdp_core.hpp"

namespace lmdp {

enum class AdversaryKind { IidUniform, PiecewiseSwitch, Sinusoid, SimulatedFtl, ReplayFile };

std::string to_string(AdversaryKind kind);
AdversaryKind adversary_kind_from_string(const std::string& name);

// Oblivious cost generator. The emitted sequence depends only on
// (kind, params, seed, T) and, for the simulated-FTL kind, on the passive
// dynamics; never on realized states.
//
// params by kind:
//   piecewise-switch: period (default 50) - alternates between two random costs
//   sinusoid: period (default 100), amplitude in [0,1] (default 1)
//   simulated-ftl-adversarial: none - charges 1 on the states the leader
//     visits most (top half of its stationary distribution)
//   replay-file: the sequence is loaded into `replay` by the caller
struct Adversary {
  AdversaryKind kind = AdversaryKind::IidUniform;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  std::vector<Vector> replay;
  std::string replay_path;  // informational

  double param(const std::string& name, double fallback) const;
  std::vector<StateCost> generate(const PassiveDynamics& p, int horizon,
                                  double solver_tol = 1e-10) const;
};

enum class Mode { Exact, MonteCarlo };
std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct RoundRecord {
  int t = 0;
  Vector cost;              // c_t
  Vector cbar;              // average cost the leader was computed from
  double lambda = 0.0;      // optimal average cost of the leader for cbar
  double policy_change = 0.0;  // max_x ||Q_t(.|x) - Q_{t+1}(.|x)||_1
  double change_rate_bound = 0.0;  // tau_ub / t
  double idealized_loss = 0.0;     // f(pi_t; c_t)
  double next_idealized_loss = 0.0;  // f(pi_{t+1}; c_t)
  double expected_true_loss = 0.0;   // sum_x p_t(x) l_t(x, Q_t)
  double sampled_loss = 0.0;         // realized loss (NaN in exact mode)
  int sampled_state = -1;
  double state_gap = 0.0;        // ||mu_t - p_t||_1
  double pmudiff_bound = 0.0;    // 2 e^{-(t-1)/tau} + 2 (tau+1)^3 (1 + log t) / t
  double v_span = 0.0;
  double max_control_cost = 0.0;  // max_x KL(Q_t(.|x) || P(.|x))
  double policy_alpha = 0.0;      // alpha(Q_t)
  double comparator_loss = 0.0;   // sum_x p'_t(x) l_t(x, Q_dagger)
  double cum_idealized_regret = 0.0;   // idealized regret at horizon t
  double cum_true_regret_proxy = 0.0;
};

struct LedgerEntry {
  bool pass = true;
  double min_slack = 0.0;  // smallest bound - value; negative on violation
  double max_slack = 0.0;
  int violations = 0;
  int checked = 0;
};
using Ledger = std::map<std::string, LedgerEntry>;

struct TraceSummary {
  double idealized_regret = 0.0;
  double true_regret_proxy = 0.0;
  double comparator_value = 0.0;    // L_T(Q_dagger)
  double comparator_slack = 0.0;    // (2 tau_ub + 2)(B + 1)
  double fullbound_value = 0.0;
  double max_policy_tau = 0.0;      // largest measured tau(Q_t)
  Ledger ledger;
  bool all_pass() const;
};

struct ExperimentTrace {
  std::string description;
  int horizon = 0;
  Mode mode = Mode::Exact;
  std::uint64_t seed = 0;
  Vector mu0;
  ChainDiagnostics chain;
  std::vector<RoundRecord> records;
  Vector final_cbar;      // cbar_{T+1}
  double final_lambda = 0.0;  // lambda_{T+1}
  Matrix final_policy;    // Q*(cbar_{T+1})
  TraceSummary summary;
};

struct RunOptions {
  double solver_tol = 1e-10;
  // Negative control: play P instead of the leader in this round (0 = off).
  int corrupt_round = 0;
  std::string description;
};

// FTL leader for the running average cost. cbar == 0 gives Q = P.
LmdpSolution ftl_policy(const PassiveDynamics& p, const StateCost& cbar,
                        const SolveOptions& options = {});

// Runs the online protocol with FTL for T rounds. Throws
// AssumptionViolation when P is not primitive or alpha(P) >= 1.
ExperimentTrace run_experiment(const PassiveDynamics& p, const Vector& mu0,
                               const Adversary& adversary, int horizon, Mode mode,
                               std::uint64_t seed, const RunOptions& options = {});

// sum_t f(pi_t; c_t) - T min_pi f(pi; cbar_{T+1}).
double idealized_regret(const ExperimentTrace& trace, const PassiveDynamics& p);

struct TrueRegretProxy {
  double regret = 0.0;
  double comparator_value = 0.0;
};
// Learner's expected loss minus the exact loss of the final leader played
// from mu0 over the same costs.
TrueRegretProxy true_regret_proxy(const ExperimentTrace& trace, const PassiveDynamics& p,
                                  const Vector& mu0);

// 2(tau+1)^3 (1+log T)^2 + 2(tau^2+tau+2)(3+log T) + (2tau+2)(B+2).
double theoretical_bound(double tau, double barrier, int horizon);

// Pass/fail ledger for every per-round and cumulative inequality.
Ledger lemma_diagnostics(const ExperimentTrace& trace, const PassiveDynamics& p);

}  // namespace lmdp
