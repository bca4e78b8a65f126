#pragma once

// Test-only reference computations. Each routine here takes a different
// route from the library code it is used to check.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lmdp/lmdp_core.hpp"
#include "lmdp/rng.hpp"

namespace oracle {

using lmdp::Matrix;
using lmdp::Vector;

// Dominant (Perron) eigenpair of diag(e^{-c}) P from a dense full-spectrum
// eigendecomposition.
struct DenseEigen {
  double lambda;
  Vector z;  // positive, unit norm
};

inline DenseEigen dense_perron(const Matrix& p, const Vector& c) {
  const Eigen::MatrixXd m = c.array().exp().inverse().matrix().asDiagonal() * p;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  int best = 0;
  for (int i = 1; i < m.rows(); ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  Vector z = es.eigenvectors().col(best).real();
  if (z.sum() < 0) z = -z;
  z.normalize();
  return {-std::log(es.eigenvalues()(best).real()), z};
}

// Mean weight of the best simple cycle by exhaustive DFS enumeration.
inline double brute_min_mean_cycle(const Matrix& w, const lmdp::Mask& support) {
  const int n = static_cast<int>(w.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> path;
  std::vector<bool> used(n, false);
  // Cycles are enumerated with their smallest vertex as the start.
  std::function<void(int, int, double)> dfs = [&](int start, int u, double weight) {
    for (int v = start; v < n; ++v) {
      if (!support(u, v)) continue;
      if (v == start) {
        best = std::min(best, (weight + w(u, v)) / (path.size()));
      } else if (!used[v]) {
        used[v] = true;
        path.push_back(v);
        dfs(start, v, weight + w(u, v));
        path.pop_back();
        used[v] = false;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    used.assign(n, false);
    used[s] = true;
    dfs(s, s, 0.0);
  }
  return best;
}

// Primitivity index by numeric matrix powers.
inline int brute_primitivity(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  const int limit = (n - 1) * (n - 1) + 1;
  Eigen::MatrixXd power = p;
  int last_gap = 0;
  for (int m = 1; m <= limit; ++m) {
    if (m > 1) power = power * Eigen::MatrixXd(p);
    if ((power.array() <= 0.0).any()) last_gap = m;
  }
  return last_gap == limit ? -1 : last_gap + 1;
}

// Expected hitting times by value iteration on h(x) = 1 + sum P h.
inline double iterated_hitting_time(const Matrix& p, int iterations = 200000) {
  const int n = static_cast<int>(p.rows());
  double worst = 0.0;
  for (int target = 0; target < n; ++target) {
    Vector h = Vector::Zero(n);
    for (int it = 0; it < iterations; ++it) {
      Vector next = Vector::Ones(n) + Eigen::MatrixXd(p) * h;
      next(target) = 0.0;
      const double change = (next - h).cwiseAbs().maxCoeff();
      h = next;
      if (change < 1e-13) break;
    }
    worst = std::max(worst, h.maxCoeff());
  }
  return worst;
}

// Negative conditional entropy R(pi) = sum pi log(pi / mu).
inline double negcondent(const Matrix& pi) {
  const Vector mu = pi.rowwise().sum();
  double r = 0.0;
  for (int x = 0; x < pi.rows(); ++x)
    for (int y = 0; y < pi.cols(); ++y)
      if (pi(x, y) > 0) r += pi(x, y) * std::log(pi(x, y) / mu(x));
  return r;
}

// R(pi') - R(pi) - <grad R(pi), pi' - pi> straight from the definition.
inline double bregman_by_definition(const Matrix& pi_prime, const Matrix& pi) {
  const Vector mu = pi.rowwise().sum();
  double inner = 0.0;
  for (int x = 0; x < pi.rows(); ++x)
    for (int y = 0; y < pi.cols(); ++y)
      if (pi(x, y) > 0) inner += (std::log(pi(x, y)) - std::log(mu(x))) * (pi_prime(x, y) - pi(x, y));
  return negcondent(pi_prime) - negcondent(pi) - inner;
}

// Row-stochastic matrix with entries >= floor, drawn from a counter RNG.
inline Matrix random_kernel(int n, std::uint64_t seed, double floor = 0.05) {
  const lmdp::CounterRng rng(seed, 99);
  Matrix k(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) k(x, y) = rng.uniform_at(x * n + y) + 1e-9;
    k.row(x) /= k.row(x).sum();
    k.row(x) = (floor + (1.0 - n * floor) * k.row(x).array()).matrix();
    k.row(x) /= k.row(x).sum();
  }
  return k;
}

inline Vector random_vector(int n, lmdp::CounterRng& rng) {
  Vector c(n);
  for (int x = 0; x < n; ++x) c(x) = rng.uniform();
  return c;
}

inline Vector random_distribution(int n, lmdp::CounterRng& rng) {
  Vector v = random_vector(n, rng).array() + 1e-3;
  return v / v.sum();
}

}  // namespace oracle
