#pragma once

#include <Eigen/Dense>
#include <optional>

#include "lmdp/errors.hpp"

namespace lmdp {

// Kernels are stored row-major so that K.row(x) is the contiguous
// next-state distribution from x.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Entries at or below this magnitude are treated as exact zeros.
inline constexpr double kZeroThreshold = 1e-300;
inline constexpr double kRowSumTolerance = 1e-12;

// Uncontrolled dynamics of the environment: a row-stochastic kernel
// together with its support pattern.
class PassiveDynamics {
 public:
  explicit PassiveDynamics(Matrix kernel);

  int size() const { return static_cast<int>(kernel_.rows()); }
  const Matrix& kernel() const { return kernel_; }
  const Mask& support() const { return support_; }
  double operator()(int x, int y) const { return kernel_(x, y); }

  // Smallest nonzero transition probability.
  double p_star() const { return p_star_; }
  // B = -log(p_star).
  double log_barrier() const { return -std::log(p_star_); }

 private:
  Matrix kernel_;
  Mask support_;
  double p_star_ = 1.0;
};

// State-cost function with values in [0, 1]. Out-of-range input is
// rejected, never clamped.
class StateCost {
 public:
  explicit StateCost(Vector values);
  static StateCost zeros(int n) { return StateCost(Vector::Zero(n)); }
  static StateCost constant(int n, double value) {
    return StateCost(Vector::Constant(n, value));
  }

  int size() const { return static_cast<int>(values_.size()); }
  const Vector& values() const { return values_; }
  double operator()(int x) const { return values_(x); }
  double max() const { return values_.maxCoeff(); }

 private:
  Vector values_;
};

class Policy {
 public:
  explicit Policy(Matrix kernel);

  int size() const { return static_cast<int>(kernel_.rows()); }
  const Matrix& kernel() const { return kernel_; }
  const Mask& support() const { return support_; }
  double operator()(int x, int y) const { return kernel_(x, y); }

  // support(Q(.|x)) is contained in support(P(.|x)) for every x.
  bool feasible_for(const PassiveDynamics& p) const;

 private:
  Matrix kernel_;
  Mask support_;
};

struct LmdpSolution {
  double lambda = 0.0;   // optimal average cost per stage
  Vector z;              // Perron vector of diag(e^-c) P, unit Euclidean norm
  Vector v;              // value function, v[0] == 0
  Policy policy;
  int iterations = 0;
  double residual = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iters = 100000;
  // Optional starting vector for the power iteration (must be positive).
  std::optional<Vector> warm_start;
};

// Optimal average cost, value function and policy for one state cost,
// via power iteration on G P with G = diag(e^{-c}).
LmdpSolution solve(const PassiveDynamics& p, const StateCost& c,
                   const SolveOptions& options = {});

// Q(x'|x) = P(x'|x) z(x') / sum_y P(y|x) z(y).
Policy optimal_policy(const PassiveDynamics& p, const Eigen::Ref<const Vector>& z);

// sum_x q(x) log(q(x)/p(x)) with 0 log 0 = 0.
double kl_divergence(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& p);

// c(x) + KL(Q(.|x) || P(.|x)).
double step_loss(const StateCost& c, const PassiveDynamics& p, const Policy& q, int x);

// max_x |z(x) - e^{lambda - c(x)} sum_x' P(x'|x) z(x')| / ||z||_inf.
double bellman_residual(const PassiveDynamics& p, const StateCost& c, double lambda,
                        const Eigen::Ref<const Vector>& z);
double bellman_residual(const PassiveDynamics& p, const StateCost& c, const LmdpSolution& sol);

// max_x f(x) - min_x f(x).
inline double span(const Eigen::Ref<const Vector>& f) { return f.maxCoeff() - f.minCoeff(); }

// Largest per-row KL(Q(.|x) || P(.|x)).
double max_control_cost(const PassiveDynamics& p, const Policy& q);

// max_x ||Q1(.|x) - Q2(.|x)||_1.
double max_row_l1(const Matrix& a, const Matrix& b);

}  // namespace lmdp
