#include "lmdp/chain_analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lmdp {

namespace {

constexpr int kDirectSolveLimit = 64;

Vector stationary_by_power(const Matrix& k) {
  const int n = static_cast<int>(k.rows());
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < 1000000; ++it) {
    Eigen::RowVectorXd next = mu * k;
    next /= next.sum();
    const double change = (next - mu).lpNorm<1>();
    mu = std::move(next);
    if (change < 1e-15) return mu.transpose();
  }
  throw NonErgodic("stationary distribution power iteration did not settle");
}

using BoolMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b) {
  return ((a * b).array() > 0).cast<int>().matrix();
}

}  // namespace

Vector stationary_distribution(const Matrix& k) {
  const int n = static_cast<int>(k.rows());
  if (n == 0 || k.cols() != n) throw InvalidInput("kernel must be square");
  if (n == 1) return Vector::Ones(1);

  Vector mu;
  if (n <= kDirectSolveLimit) {
    // (K^T - I) mu = 0 with the last equation replaced by sum(mu) = 1.
    Eigen::MatrixXd a = k.transpose();
    a.diagonal().array() -= 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> null_check(a);
    // The default threshold (n * eps) misreads rounding noise as rank.
    null_check.setThreshold(1e-10);
    if (null_check.rank() != n - 1)
      throw NonErgodic("stationary distribution is not unique");
    a.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    mu = a.partialPivLu().solve(rhs);
  } else {
    mu = stationary_by_power(k);
  }
  if (!(mu.array() > 0.0).all())
    throw NonErgodic("stationary distribution is not strictly positive");
  return mu / mu.sum();
}

double ergodicity_coefficient(const Matrix& k) {
  const int n = static_cast<int>(k.rows());
  double min_overlap = 1.0;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      min_overlap = std::min(min_overlap, k.row(x).cwiseMin(k.row(y)).sum());
  return std::clamp(1.0 - min_overlap, 0.0, 1.0);
}

double mixing_time_from_alpha(double alpha) {
  if (!(alpha < 1.0)) {
    std::ostringstream os;
    os << "ergodicity coefficient " << alpha << " is not below 1";
    throw NonErgodic(os.str());
  }
  if (alpha <= 0.0) return 0.0;
  return 1.0 / std::log(1.0 / alpha);
}

double mixing_time(const Matrix& k) { return mixing_time_from_alpha(ergodicity_coefficient(k)); }

int primitivity_index(const PassiveDynamics& p) {
  const int n = p.size();
  const int wielandt = (n - 1) * (n - 1) + 1;
  const BoolMatrix base = p.support().cast<int>();
  BoolMatrix power = base;
  // last_gap = largest m <= wielandt with supp(P^m) not full
  int last_gap = 0;
  for (int m = 1; m <= wielandt; ++m) {
    if (m > 1) power = bool_product(power, base);
    if ((power.array() == 0).any()) last_gap = m;
  }
  if (last_gap == wielandt) {
    std::ostringstream os;
    os << "P^" << wielandt << " has zero entries; the chain is reducible or periodic";
    throw NotPrimitive(os.str());
  }
  return last_gap + 1;
}

double max_expected_hitting_time(const PassiveDynamics& p) {
  const int n = p.size();
  if (n == 1) return 0.0;
  double worst = 0.0;
  for (int target = 0; target < n; ++target) {
    // h(x) = 1 + sum_{s != target} P(s|x) h(s) for x != target
    Eigen::MatrixXd a(n - 1, n - 1);
    for (int i = 0, x = 0; x < n; ++x) {
      if (x == target) continue;
      for (int j = 0, s = 0; s < n; ++s) {
        if (s == target) continue;
        a(i, j) = (i == j ? 1.0 : 0.0) - p(x, s);
        ++j;
      }
      ++i;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
      std::ostringstream os;
      os << "state " << target << " is not reachable from every other state";
      throw NonErgodic(os.str());
    }
    const Vector h = lu.solve(Vector::Ones(n - 1));
    if (!h.allFinite() || (h.array() < 0.0).any())
      throw NonErgodic("hitting-time system has no nonnegative solution");
    worst = std::max(worst, h.maxCoeff());
  }
  return worst;
}

double alpha_upper_bound(double alpha_p, double h_hit) {
  return alpha_p + (1.0 - alpha_p) * (1.0 - std::exp(-h_hit - 2.0));
}

double tau_upper_bound(double alpha_p, double h_hit) {
  return mixing_time_from_alpha(alpha_upper_bound(alpha_p, h_hit));
}

double tau_upper_bound(const PassiveDynamics& p) {
  return tau_upper_bound(ergodicity_coefficient(p.kernel()), max_expected_hitting_time(p));
}

ChainDiagnostics analyze(const PassiveDynamics& p) {
  ChainDiagnostics d;
  d.h_prim = primitivity_index(p);
  d.alpha = ergodicity_coefficient(p.kernel());
  d.tau = mixing_time_from_alpha(d.alpha);
  d.h_hit = max_expected_hitting_time(p);
  d.stationary = stationary_distribution(p.kernel());
  d.alpha_ub = alpha_upper_bound(d.alpha, d.h_hit);
  d.tau_ub = mixing_time_from_alpha(d.alpha_ub);
  d.p_star = p.p_star();
  d.log_barrier = p.log_barrier();
  return d;
}

}  // namespace lmdp
