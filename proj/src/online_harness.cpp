#include "lmdp/online_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lmdp/rng.hpp"

namespace lmdp {

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::IidUniform: return "iid-uniform";
    case AdversaryKind::PiecewiseSwitch: return "piecewise-switch";
    case AdversaryKind::Sinusoid: return "sinusoid";
    case AdversaryKind::SimulatedFtl: return "simulated-ftl-adversarial";
    case AdversaryKind::ReplayFile: return "replay-file";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(const std::string& name) {
  for (auto kind : {AdversaryKind::IidUniform, AdversaryKind::PiecewiseSwitch,
                    AdversaryKind::Sinusoid, AdversaryKind::SimulatedFtl,
                    AdversaryKind::ReplayFile})
    if (to_string(kind) == name) return kind;
  throw InvalidInput("unknown adversary kind '" + name + "'");
}

std::string to_string(Mode mode) { return mode == Mode::Exact ? "exact" : "monte-carlo"; }

Mode mode_from_string(const std::string& name) {
  if (name == "exact") return Mode::Exact;
  if (name == "monte-carlo") return Mode::MonteCarlo;
  throw InvalidInput("unknown mode '" + name + "'");
}

double Adversary::param(const std::string& name, double fallback) const {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

namespace {

// Cost 1 on the ceil(n/2) states with the largest stationary mass.
Vector punish_frequent_states(const Vector& mu) {
  const int n = static_cast<int>(mu.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu(a) > mu(b); });
  Vector c = Vector::Zero(n);
  for (int i = 0; i < (n + 1) / 2; ++i) c(order[i]) = 1.0;
  return c;
}

}  // namespace

std::vector<StateCost> Adversary::generate(const PassiveDynamics& p, int horizon,
                                           double solver_tol) const {
  const int n = p.size();
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  const CounterRng rng(seed, CounterRng::kAdversary);
  std::vector<StateCost> out;
  out.reserve(horizon);

  switch (kind) {
    case AdversaryKind::IidUniform: {
      for (int t = 1; t <= horizon; ++t) {
        Vector c(n);
        for (int x = 0; x < n; ++x)
          c(x) = rng.uniform_at(static_cast<std::uint64_t>(t - 1) * n + x);
        out.emplace_back(std::move(c));
      }
      break;
    }
    case AdversaryKind::PiecewiseSwitch: {
      const int period = std::max(1, static_cast<int>(param("period", 50)));
      Vector a(n), b(n);
      for (int x = 0; x < n; ++x) {
        a(x) = rng.uniform_at(x);
        b(x) = rng.uniform_at(n + x);
      }
      for (int t = 1; t <= horizon; ++t)
        out.emplace_back(((t - 1) / period) % 2 == 0 ? a : b);
      break;
    }
    case AdversaryKind::Sinusoid: {
      const double period = param("period", 100.0);
      const double amplitude = param("amplitude", 1.0);
      if (!(period > 0.0) || amplitude < 0.0 || amplitude > 1.0)
        throw InvalidInput("sinusoid adversary needs period > 0 and amplitude in [0,1]");
      Vector phase(n);
      for (int x = 0; x < n; ++x) phase(x) = 2.0 * std::numbers::pi * rng.uniform_at(x);
      for (int t = 1; t <= horizon; ++t) {
        Vector c(n);
        for (int x = 0; x < n; ++x) {
          const double s = std::sin(2.0 * std::numbers::pi * t / period + phase(x));
          c(x) = std::clamp(0.5 + 0.5 * amplitude * s, 0.0, 1.0);
        }
        out.emplace_back(std::move(c));
      }
      break;
    }
    case AdversaryKind::SimulatedFtl: {
      // Replays the deterministic learner offline; the realized states of
      // any actual run never enter.
      Vector cbar = Vector::Zero(n);
      SolveOptions opts;
      opts.tol = solver_tol;
      for (int t = 1; t <= horizon; ++t) {
        const LmdpSolution leader = solve(p, StateCost(cbar), opts);
        opts.warm_start = leader.z;
        const Vector mu = stationary_distribution(leader.policy.kernel());
        Vector c = punish_frequent_states(mu);
        cbar = ((t - 1) * cbar + c) / t;
        cbar = cbar.cwiseMax(0.0).cwiseMin(1.0);
        out.emplace_back(std::move(c));
      }
      break;
    }
    case AdversaryKind::ReplayFile: {
      if (static_cast<int>(replay.size()) < horizon) {
        std::ostringstream os;
        os << "replay sequence has " << replay.size() << " rounds, need " << horizon;
        throw InvalidInput(os.str());
      }
      for (int t = 0; t < horizon; ++t) {
        if (replay[t].size() != n) throw InvalidInput("replay cost has the wrong length");
        out.emplace_back(replay[t]);
      }
      break;
    }
  }
  return out;
}

bool TraceSummary::all_pass() const {
  return std::all_of(ledger.begin(), ledger.end(), [](const auto& kv) { return kv.second.pass; });
}

LmdpSolution ftl_policy(const PassiveDynamics& p, const StateCost& cbar,
                        const SolveOptions& options) {
  return solve(p, cbar, options);
}

double theoretical_bound(double tau, double barrier, int horizon) {
  const double log_t = std::log(static_cast<double>(horizon));
  return 2.0 * std::pow(tau + 1.0, 3) * (1.0 + log_t) * (1.0 + log_t) +
         2.0 * (tau * tau + tau + 2.0) * (3.0 + log_t) + (2.0 * tau + 2.0) * (barrier + 2.0);
}

namespace {

double pmudiff_bound(double tau, int t) {
  const double first = tau > 0.0 ? 2.0 * std::exp(-(t - 1) / tau) : (t == 1 ? 2.0 : 0.0);
  return first + 2.0 * std::pow(tau + 1.0, 3) * (1.0 + std::log(static_cast<double>(t))) / t;
}

double expected_loss(const Vector& dist, const StateCost& c, const PassiveDynamics& p,
                     const Policy& q) {
  double total = 0.0;
  for (int x = 0; x < p.size(); ++x)
    if (dist(x) > 0.0) total += dist(x) * step_loss(c, p, q, x);
  return total;
}

int sample_row(const Matrix& q, int x, double u) {
  double acc = 0.0;
  const int n = static_cast<int>(q.cols());
  int last = 0;
  for (int y = 0; y < n; ++y) {
    if (q(x, y) <= 0.0) continue;
    last = y;
    acc += q(x, y);
    if (u < acc) return y;
  }
  return last;
}

}  // namespace

ExperimentTrace run_experiment(const PassiveDynamics& p, const Vector& mu0,
                               const Adversary& adversary, int horizon, Mode mode,
                               std::uint64_t seed, const RunOptions& options) {
  const int n = p.size();
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (mu0.size() != n || (mu0.array() < 0.0).any() || std::abs(mu0.sum() - 1.0) > 1e-10)
    throw InvalidInput("initial distribution must be a probability vector of length n");

  ExperimentTrace trace;
  try {
    trace.chain = analyze(p);
  } catch (const NotPrimitive& e) {
    throw AssumptionViolation(std::string("passive dynamics is not irreducible and aperiodic: ") + e.what());
  } catch (const NonErgodic& e) {
    throw AssumptionViolation(std::string("passive dynamics does not contract: ") + e.what());
  }
  trace.description = options.description;
  trace.horizon = horizon;
  trace.mode = mode;
  trace.seed = seed;
  trace.mu0 = mu0;
  const double tau_ub = trace.chain.tau_ub;

  const std::vector<StateCost> costs = adversary.generate(p, horizon, options.solver_tol);
  const Policy passive(p.kernel());
  const CounterRng sampler(seed, CounterRng::kTrajectory);

  SolveOptions solve_opts;
  solve_opts.tol = options.solver_tol;

  Vector cbar = Vector::Zero(n);
  LmdpSolution leader = ftl_policy(p, StateCost(cbar), solve_opts);

  auto played_policy = [&](int t, const LmdpSolution& sol) -> const Policy& {
    return t == options.corrupt_round ? passive : sol.policy;
  };

  const Policy* current = &played_policy(1, leader);
  StationaryTransitionMeasure pi_current = measure_from_policy(p, *current);

  Vector dist = mu0;
  int state = -1;
  if (mode == Mode::MonteCarlo) {
    // Initial state from mu0 uses counter 0; round t uses counter t.
    Matrix row(1, n);
    row.row(0) = mu0.transpose();
    state = sample_row(row, 0, sampler.uniform_at(0));
  }

  trace.records.reserve(horizon);
  double cum_idealized = 0.0;
  double max_tau = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    const StateCost& c = costs[t - 1];
    RoundRecord r;
    r.t = t;
    r.cost = c.values();
    r.cbar = cbar;
    r.lambda = leader.lambda;
    r.idealized_loss = objective_f(pi_current, c, p);
    r.expected_true_loss = expected_loss(dist, c, p, *current);
    r.state_gap = (pi_current.mu() - dist).lpNorm<1>();
    r.pmudiff_bound = pmudiff_bound(tau_ub, t);
    r.change_rate_bound = tau_ub / t;
    r.v_span = span(leader.v);
    r.max_control_cost = max_control_cost(p, *current);
    r.policy_alpha = ergodicity_coefficient(current->kernel());
    if (r.policy_alpha < 1.0) max_tau = std::max(max_tau, mixing_time_from_alpha(r.policy_alpha));

    if (mode == Mode::MonteCarlo) {
      r.sampled_state = state;
      r.sampled_loss = step_loss(c, p, *current, state);
      state = sample_row(current->kernel(), state, sampler.uniform_at(t));
    } else {
      r.sampled_loss = std::numeric_limits<double>::quiet_NaN();
    }

    // Leader for round t+1.
    cbar = ((t - 1) * cbar + c.values()) / t;
    cbar = cbar.cwiseMax(0.0).cwiseMin(1.0);
    solve_opts.warm_start = leader.z;
    LmdpSolution next = ftl_policy(p, StateCost(cbar), solve_opts);
    const Policy* next_policy = &played_policy(t + 1, next);
    StationaryTransitionMeasure pi_next = measure_from_policy(p, *next_policy);

    r.policy_change = max_row_l1(current->kernel(), next_policy->kernel());
    r.next_idealized_loss = objective_f(pi_next, c, p);
    cum_idealized += r.idealized_loss;
    r.cum_idealized_regret = cum_idealized - t * next.lambda;

    dist = (dist.transpose() * current->kernel()).transpose();
    trace.records.push_back(std::move(r));

    leader = std::move(next);
    current = &played_policy(t + 1, leader);
    pi_current = std::move(pi_next);
  }

  trace.final_cbar = cbar;
  trace.final_lambda = leader.lambda;
  trace.final_policy = leader.policy.kernel();

  // Comparator: the final leader played from mu0 over the same costs.
  const Policy& comparator = leader.policy;
  Vector cdist = mu0;
  double cum_true = 0.0;
  double comparator_total = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    RoundRecord& r = trace.records[t - 1];
    r.comparator_loss = expected_loss(cdist, costs[t - 1], p, comparator);
    comparator_total += r.comparator_loss;
    cum_true += r.expected_true_loss - r.comparator_loss;
    r.cum_true_regret_proxy = cum_true;
    cdist = (cdist.transpose() * comparator.kernel()).transpose();
  }

  TraceSummary& s = trace.summary;
  s.idealized_regret = trace.records.back().cum_idealized_regret;
  s.true_regret_proxy = cum_true;
  s.comparator_value = comparator_total;
  s.comparator_slack = (2.0 * tau_ub + 2.0) * (trace.chain.log_barrier + 1.0);
  s.fullbound_value = theoretical_bound(tau_ub, trace.chain.log_barrier, horizon);
  s.max_policy_tau = max_tau;
  s.ledger = lemma_diagnostics(trace, p);
  return trace;
}

double idealized_regret(const ExperimentTrace& trace, const PassiveDynamics& p) {
  double total = 0.0;
  for (const auto& r : trace.records) total += r.idealized_loss;
  const LmdpSolution best = solve(p, StateCost(trace.final_cbar));
  return total - trace.horizon * best.lambda;
}

TrueRegretProxy true_regret_proxy(const ExperimentTrace& trace, const PassiveDynamics& p,
                                  const Vector& mu0) {
  const LmdpSolution final_leader = solve(p, StateCost(trace.final_cbar));
  const Policy& q = final_leader.policy;
  Vector dist = mu0;
  double learner = 0.0;
  double comparator = 0.0;
  for (const auto& r : trace.records) {
    learner += r.expected_true_loss;
    comparator += expected_loss(dist, StateCost(r.cost), p, q);
    dist = (dist.transpose() * q.kernel()).transpose();
  }
  return TrueRegretProxy{learner - comparator, comparator};
}

namespace {

class LedgerBuilder {
 public:
  // Records bound - value; tol absorbs floating-point noise in identities.
  void check(const std::string& name, double value, double bound, double tol = 1e-9) {
    LedgerEntry& e = entries_[name];
    const double slack = bound - value;
    if (e.checked == 0) {
      e.min_slack = slack;
      e.max_slack = slack;
    } else {
      e.min_slack = std::min(e.min_slack, slack);
      e.max_slack = std::max(e.max_slack, slack);
    }
    ++e.checked;
    if (!(slack >= -tol * std::max(1.0, std::abs(bound)))) {
      ++e.violations;
      e.pass = false;
    }
  }
  Ledger take() { return std::move(entries_); }

 private:
  Ledger entries_;
};

}  // namespace

Ledger lemma_diagnostics(const ExperimentTrace& trace, const PassiveDynamics& p) {
  (void)p;
  const double tau = trace.chain.tau_ub;
  const double h_hit = trace.chain.h_hit;
  const int horizon = trace.horizon;
  const double log_t = std::log(static_cast<double>(horizon));
  LedgerBuilder ledger;

  double sum_next = 0.0;
  double sum_lookahead = 0.0;
  double sum_true_gap = 0.0;
  for (const auto& r : trace.records) {
    ledger.check("policy_change_rate", r.policy_change, tau / r.t);
    ledger.check("value_span", r.v_span, h_hit);
    ledger.check("control_cost", r.max_control_cost, h_hit + 1.0);
    ledger.check("state_gap", r.state_gap, r.pmudiff_bound);
    sum_next += r.next_idealized_loss;
    sum_lookahead += r.idealized_loss - r.next_idealized_loss;
    sum_true_gap += r.expected_true_loss - r.idealized_loss;
  }
  // Be-the-leader: the lookahead sequence beats the best fixed measure.
  ledger.check("be_the_leader", sum_next, horizon * trace.final_lambda, 1e-8);
  ledger.check("lookahead_gap", sum_lookahead, 2.0 * (tau * tau + 1.0) * (1.0 + log_t));
  ledger.check("true_vs_idealized_loss", sum_true_gap,
               std::pow(tau + 1.0, 3) * (1.0 + log_t) * (1.0 + log_t) +
                   2.0 * (tau + 1.0) * (3.0 + log_t));
  const double regret = trace.records.back().cum_idealized_regret;
  ledger.check("idealized_regret", regret, 2.0 * (tau * tau + 1.0) * (1.0 + log_t));
  ledger.check("idealized_regret_nonnegative", 0.0, regret, 1e-8);
  const double slack = (2.0 * tau + 2.0) * (trace.chain.log_barrier + 1.0);
  ledger.check("regret_bound", trace.summary.true_regret_proxy + slack,
               theoretical_bound(tau, trace.chain.log_barrier, horizon));
  return ledger.take();
}

}  // namespace lmdp
