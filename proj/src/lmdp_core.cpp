#include "lmdp/lmdp_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lmdp {

namespace {

void check_stochastic(const Matrix& k, const char* what) {
  if (k.rows() == 0 || k.rows() != k.cols()) {
    std::ostringstream os;
    os << what << " must be a nonempty square matrix, got " << k.rows() << "x" << k.cols();
    throw InvalidInput(os.str());
  }
  for (int x = 0; x < k.rows(); ++x) {
    double sum = 0.0;
    for (int y = 0; y < k.cols(); ++y) {
      const double e = k(x, y);
      if (!std::isfinite(e) || e < 0.0 || e > 1.0) {
        std::ostringstream os;
        os << what << " entry (" << x << "," << y << ") = " << e << " is outside [0,1]";
        throw InvalidInput(os.str());
      }
      sum += e;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << what << " row " << x << " sums to " << sum;
      throw InvalidInput(os.str());
    }
  }
}

Mask support_of(const Matrix& k) {
  return (k.array() > kZeroThreshold).matrix();
}

}  // namespace

PassiveDynamics::PassiveDynamics(Matrix kernel) : kernel_(std::move(kernel)) {
  check_stochastic(kernel_, "passive dynamics");
  // Sub-threshold entries are snapped to zero so the support mask and the
  // stored entries agree.
  kernel_ = (kernel_.array() > kZeroThreshold).select(kernel_, 0.0);
  support_ = support_of(kernel_);
  p_star_ = std::numeric_limits<double>::infinity();
  for (int x = 0; x < size(); ++x)
    for (int y = 0; y < size(); ++y)
      if (support_(x, y)) p_star_ = std::min(p_star_, kernel_(x, y));
}

StateCost::StateCost(Vector values) : values_(std::move(values)) {
  if (values_.size() == 0) throw InvalidInput("state cost must be nonempty");
  for (int x = 0; x < values_.size(); ++x) {
    const double c = values_(x);
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      std::ostringstream os;
      os << "state cost c(" << x << ") = " << c << " is outside [0,1]";
      throw InvalidInput(os.str());
    }
  }
}

Policy::Policy(Matrix kernel) : kernel_(std::move(kernel)) {
  check_stochastic(kernel_, "policy");
  kernel_ = (kernel_.array() > kZeroThreshold).select(kernel_, 0.0);
  support_ = support_of(kernel_);
}

bool Policy::feasible_for(const PassiveDynamics& p) const {
  if (p.size() != size()) return false;
  return !(support_.array() && !p.support().array()).any();
}

Policy optimal_policy(const PassiveDynamics& p, const Eigen::Ref<const Vector>& z) {
  const int n = p.size();
  if (z.size() != n) throw InvalidInput("z has the wrong length");
  for (int x = 0; x < n; ++x)
    if (!(z(x) > 0.0)) throw InvalidInput("z must be strictly positive");

  Matrix q = p.kernel() * z.asDiagonal();
  for (int x = 0; x < n; ++x) q.row(x) /= q.row(x).sum();
  return Policy(std::move(q));
}

double kl_divergence(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& p) {
  if (q.size() != p.size()) throw InvalidInput("kl_divergence: length mismatch");
  double kl = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    if (q(i) <= kZeroThreshold) continue;
    if (p(i) <= kZeroThreshold) {
      std::ostringstream os;
      os << "q(" << i << ") = " << q(i) << " > 0 where p(" << i << ") = 0";
      throw SupportViolation(os.str());
    }
    kl += q(i) * std::log(q(i) / p(i));
  }
  // Rounding can push an exact zero slightly negative.
  return std::max(kl, 0.0);
}

double step_loss(const StateCost& c, const PassiveDynamics& p, const Policy& q, int x) {
  return c(x) + kl_divergence(q.kernel().row(x).transpose(), p.kernel().row(x).transpose());
}

double max_control_cost(const PassiveDynamics& p, const Policy& q) {
  double worst = 0.0;
  for (int x = 0; x < p.size(); ++x)
    worst = std::max(worst, kl_divergence(q.kernel().row(x).transpose(),
                                          p.kernel().row(x).transpose()));
  return worst;
}

double max_row_l1(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().rowwise().sum().maxCoeff();
}

double bellman_residual(const PassiveDynamics& p, const StateCost& c, double lambda,
                        const Eigen::Ref<const Vector>& z) {
  const Vector pz = p.kernel() * z;
  double worst = 0.0;
  for (int x = 0; x < p.size(); ++x)
    worst = std::max(worst, std::abs(z(x) - std::exp(lambda - c(x)) * pz(x)));
  return worst / z.cwiseAbs().maxCoeff();
}

double bellman_residual(const PassiveDynamics& p, const StateCost& c, const LmdpSolution& sol) {
  return bellman_residual(p, c, sol.lambda, sol.z);
}

LmdpSolution solve(const PassiveDynamics& p, const StateCost& c, const SolveOptions& options) {
  const int n = p.size();
  if (c.size() != n) throw InvalidInput("state cost length does not match the kernel");
  if (!(options.tol > 0.0)) throw InvalidInput("solver tolerance must be positive");

  // M = diag(e^{-c}) P
  const Matrix m = c.values().array().exp().inverse().matrix().asDiagonal() * p.kernel();

  Vector z;
  if (options.warm_start && options.warm_start->size() == n &&
      (options.warm_start->array() > 0.0).all()) {
    z = options.warm_start->normalized();
  } else {
    z = Vector::Ones(n).normalized();
  }

  double residual = std::numeric_limits<double>::infinity();
  double gamma = 1.0;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    Vector next = m * z;
    gamma = next.norm();
    next /= gamma;
    residual = (z - next).cwiseAbs().maxCoeff() / z.cwiseAbs().maxCoeff();
    if (residual <= options.tol) break;
    z = std::move(next);
  }
  if (residual > options.tol) {
    std::ostringstream os;
    os << "power iteration stopped after " << it << " iterations with residual " << residual;
    throw NonConvergence(os.str());
  }

  Vector v = -z.array().log();
  v.array() -= v(0);
  Policy q = optimal_policy(p, z);
  return LmdpSolution{-std::log(gamma), std::move(z), std::move(v), std::move(q), it + 1, residual};
}

}  // namespace lmdp
