#pragma once

#include <vector>

#include "lmdp/lmdp_core.hpp"

namespace lmdp {

// Distribution over state pairs whose row and column marginals agree:
// the long-run transition frequencies of a stationary policy.
class StationaryTransitionMeasure {
 public:
  // Validates nonnegativity, normalization and flow balance (1e-10).
  explicit StationaryTransitionMeasure(Matrix pi);

  int size() const { return static_cast<int>(pi_.rows()); }
  const Matrix& pi() const { return pi_; }
  // Row marginal mu(x) = sum_y pi(x, y).
  const Vector& mu() const { return mu_; }
  double operator()(int x, int y) const { return pi_(x, y); }

 private:
  Matrix pi_;
  Vector mu_;
};

inline constexpr double kMeasureTolerance = 1e-10;

// pi(x, x') = mu_Q(x) Q(x'|x).
StationaryTransitionMeasure measure_from_policy(const PassiveDynamics& p, const Policy& q);

struct MeasurePolicy {
  Vector mu;
  Policy policy;
};
MeasurePolicy policy_from_measure(const StationaryTransitionMeasure& pi);

// f(pi; c) = sum pi(x,x') (c(x) + log(pi(x,x') / (P(x'|x) mu(x)))).
double objective_f(const StationaryTransitionMeasure& pi, const StateCost& c,
                   const PassiveDynamics& p);

// Largest violation among flow balance, normalization, nonnegativity and
// the support constraint; zero exactly on the feasible polytope.
double feasibility_residual(const Matrix& pi, const PassiveDynamics& p);

// Uniform measure on a minimum-mean-weight simple cycle of the support
// graph (Karp). Ties go to the lexicographically smallest cycle rotated
// to start at its lowest vertex.
struct CycleMeasure {
  std::vector<int> cycle;  // vertices in order; edge cycle[i] -> cycle[i+1 mod len]
  double mean_weight = 0.0;
  StationaryTransitionMeasure measure;
};
CycleMeasure min_mean_cycle(const Matrix& weights, const Mask& support);

struct FrankWolfeOptions {
  double tol = 1e-3;
  int max_iters = 200000;
};

struct FrankWolfeResult {
  StationaryTransitionMeasure measure;  // best iterate seen
  double value = 0.0;                   // f at `measure`
  double gap = 0.0;                     // smallest duality-gap estimate seen
  int iterations = 0;
  std::vector<double> best_values;      // best-so-far objective per iteration
};

// Frank-Wolfe on f(.; c) over the feasible measures, started from the
// passive-dynamics measure, with step 2/(k+2) and a min-mean-cycle
// linear oracle. Stops once the duality-gap estimate is <= tol.
FrankWolfeResult minimize_f(const PassiveDynamics& p, const StateCost& c,
                            const FrankWolfeOptions& options = {});

// Bregman divergence of the negative conditional entropy:
// sum_x mu'(x) KL(Q'(.|x) || Q(.|x)).
double bregman_negcondent(const StationaryTransitionMeasure& pi_prime,
                          const StationaryTransitionMeasure& pi);

// 1/2 sum_x mu'(x) ||Q'(.|x) - Q(.|x)||_1^2.
double pinsker_lower_bound(const StationaryTransitionMeasure& pi_prime,
                           const StationaryTransitionMeasure& pi);

// Stationarity residual of the Lagrangian: max over support pairs of
// |pi(x,x')/mu(x) - P(x'|x) exp(lambda - c(x) + v(x) - v(x'))|, where v is
// the value function and lambda the average cost (the multipliers of the
// flow and normalization constraints are -v and -lambda).
double kkt_residual(const StationaryTransitionMeasure& pi, const StateCost& c,
                    const Eigen::Ref<const Vector>& v, double lambda, const PassiveDynamics& p);

}  // namespace lmdp
