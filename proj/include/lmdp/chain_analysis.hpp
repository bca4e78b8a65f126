#pragma once

#include "lmdp/lmdp_core.hpp"

namespace lmdp {

struct ChainDiagnostics {
  double alpha = 0.0;   // Markov-Dobrushin ergodicity coefficient
  double tau = 0.0;     // 1 / log(1/alpha)
  int h_prim = 1;       // primitivity index
  double h_hit = 0.0;   // largest expected hitting time
  Vector stationary;
  // Derived constants used by the regret-analysis checks.
  double alpha_ub = 0.0;
  double tau_ub = 0.0;
  double p_star = 1.0;
  double log_barrier = 0.0;  // B = -log p_star
};

// Unique mu with mu^T K = mu^T, sum mu = 1. Throws NonErgodic when the
// fixed point is not unique or not strictly positive.
Vector stationary_distribution(const Matrix& k);

// 1 - min_{x,y} sum_s min(K(s|x), K(s|y)).
double ergodicity_coefficient(const Matrix& k);

double mixing_time_from_alpha(double alpha);
double mixing_time(const Matrix& k);

// Smallest H with supp(P^m) full for every m in [H, (n-1)^2 + 1].
int primitivity_index(const PassiveDynamics& p);

// max over x != y of E[first passage time to y from x].
double max_expected_hitting_time(const PassiveDynamics& p);

// alpha(P) + (1 - alpha(P)) (1 - e^{-H-2}); bounds alpha(Q) over all
// optimal policies of costs in [0,1].
double alpha_upper_bound(double alpha_p, double h_hit);
double tau_upper_bound(double alpha_p, double h_hit);
double tau_upper_bound(const PassiveDynamics& p);

// Full diagnostic bundle. Throws NotPrimitive / NonErgodic when the
// kernel violates the irreducibility or contraction assumptions.
ChainDiagnostics analyze(const PassiveDynamics& p);

}  // namespace lmdp
