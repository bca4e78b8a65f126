#include "lmdp/convex_view.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lmdp/chain_analysis.hpp"

namespace lmdp {

StationaryTransitionMeasure::StationaryTransitionMeasure(Matrix pi) : pi_(std::move(pi)) {
  if (pi_.rows() == 0 || pi_.rows() != pi_.cols())
    throw InvalidInput("transition measure must be a nonempty square matrix");
  if (!pi_.allFinite()) throw InvalidInput("transition measure has non-finite entries");
  if ((pi_.array() < 0.0).any()) throw InvalidInput("transition measure has negative entries");
  if (std::abs(pi_.sum() - 1.0) > kMeasureTolerance) {
    std::ostringstream os;
    os << "transition measure sums to " << pi_.sum();
    throw InvalidInput(os.str());
  }
  mu_ = pi_.rowwise().sum();
  const Vector inflow = pi_.colwise().sum().transpose();
  if ((mu_ - inflow).cwiseAbs().maxCoeff() > kMeasureTolerance)
    throw InvalidInput("transition measure violates flow balance");
}

StationaryTransitionMeasure measure_from_policy(const PassiveDynamics& p, const Policy& q) {
  if (!q.feasible_for(p))
    throw SupportViolation("policy puts mass outside the support of the passive dynamics");
  const Vector mu = stationary_distribution(q.kernel());
  Matrix pi = mu.asDiagonal() * q.kernel();
  return StationaryTransitionMeasure(std::move(pi));
}

MeasurePolicy policy_from_measure(const StationaryTransitionMeasure& pi) {
  const Vector& mu = pi.mu();
  for (int x = 0; x < pi.size(); ++x) {
    if (mu(x) <= kZeroThreshold) {
      std::ostringstream os;
      os << "state " << x << " has zero marginal; its policy row is undefined";
      throw ZeroMarginal(os.str());
    }
  }
  Matrix q = mu.cwiseInverse().asDiagonal() * pi.pi();
  // Renormalize to remove the rounding left by the division.
  for (int x = 0; x < q.rows(); ++x) q.row(x) /= q.row(x).sum();
  return MeasurePolicy{mu, Policy(std::move(q))};
}

double objective_f(const StationaryTransitionMeasure& pi, const StateCost& c,
                   const PassiveDynamics& p) {
  const int n = pi.size();
  if (p.size() != n || c.size() != n) throw InvalidInput("objective_f: size mismatch");
  const Vector& mu = pi.mu();
  double value = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      const double m = pi(x, y);
      if (m <= kZeroThreshold) continue;
      if (!p.support()(x, y)) {
        std::ostringstream os;
        os << "pi(" << x << "," << y << ") = " << m << " > 0 where P is zero";
        throw SupportViolation(os.str());
      }
      value += m * (c(x) + std::log(m / (p(x, y) * mu(x))));
    }
  }
  return value;
}

double feasibility_residual(const Matrix& pi, const PassiveDynamics& p) {
  if (pi.rows() != p.size() || pi.cols() != p.size())
    throw InvalidInput("feasibility_residual: size mismatch");
  const Vector out = pi.rowwise().sum();
  const Vector in = pi.colwise().sum().transpose();
  double worst = (out - in).cwiseAbs().maxCoeff();
  worst = std::max(worst, std::abs(pi.sum() - 1.0));
  worst = std::max(worst, (-pi.array()).maxCoeff());
  for (int x = 0; x < p.size(); ++x)
    for (int y = 0; y < p.size(); ++y)
      if (!p.support()(x, y)) worst = std::max(worst, std::abs(pi(x, y)));
  return worst;
}

namespace {

// Rotate so the smallest vertex comes first.
std::vector<int> canonical(std::vector<int> cycle) {
  auto first = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), first, cycle.end());
  return cycle;
}

double cycle_mean(const std::vector<int>& cycle, const Matrix& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    total += w(cycle[i], cycle[(i + 1) % cycle.size()]);
  return total / static_cast<double>(cycle.size());
}

Matrix cycle_measure(const std::vector<int>& cycle, int n) {
  Matrix pi = Matrix::Zero(n, n);
  const double mass = 1.0 / static_cast<double>(cycle.size());
  for (std::size_t i = 0; i < cycle.size(); ++i)
    pi(cycle[i], cycle[(i + 1) % cycle.size()]) += mass;
  return pi;
}

}  // namespace

CycleMeasure min_mean_cycle(const Matrix& weights, const Mask& support) {
  const int n = static_cast<int>(weights.rows());
  if (n == 0 || weights.cols() != n || support.rows() != n || support.cols() != n)
    throw InvalidInput("min_mean_cycle: weights and support must be square and equal-sized");
  constexpr double inf = std::numeric_limits<double>::infinity();

  // best[k][v]: lightest walk with exactly k edges ending at v, starting
  // anywhere (an implicit zero-weight super source).
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(n, inf));
  std::vector<std::vector<int>> parent(n + 1, std::vector<int>(n, -1));
  std::fill(best[0].begin(), best[0].end(), 0.0);
  for (int k = 1; k <= n; ++k) {
    for (int u = 0; u < n; ++u) {
      if (best[k - 1][u] == inf) continue;
      for (int v = 0; v < n; ++v) {
        if (!support(u, v)) continue;
        const double cand = best[k - 1][u] + weights(u, v);
        if (cand < best[k][v]) {
          best[k][v] = cand;
          parent[k][v] = u;
        }
      }
    }
  }

  double mean_star = inf;
  int end_vertex = -1;
  for (int v = 0; v < n; ++v) {
    if (best[n][v] == inf) continue;
    double worst = -inf;
    for (int k = 0; k < n; ++k) {
      if (best[k][v] == inf) continue;
      worst = std::max(worst, (best[n][v] - best[k][v]) / static_cast<double>(n - k));
    }
    if (worst < mean_star) {
      mean_star = worst;
      end_vertex = v;
    }
  }
  if (end_vertex < 0) throw NoCycle("support graph is acyclic");

  // Every cycle on the n-edge walk into end_vertex has the optimal mean.
  std::vector<int> walk(n + 1);
  walk[n] = end_vertex;
  for (int k = n; k > 0; --k) walk[k - 1] = parent[k][walk[k]];

  std::vector<std::vector<int>> cycles;
  std::vector<int> stack;
  std::vector<int> position(n, -1);
  for (int v : walk) {
    if (position[v] >= 0) {
      std::vector<int> cyc(stack.begin() + position[v], stack.end());
      for (std::size_t i = position[v] + 1; i < stack.size(); ++i) position[stack[i]] = -1;
      stack.resize(position[v] + 1);
      cycles.push_back(canonical(std::move(cyc)));
    } else {
      position[v] = static_cast<int>(stack.size());
      stack.push_back(v);
    }
  }

  std::vector<int> chosen;
  double chosen_mean = inf;
  for (auto& cyc : cycles) {
    const double m = cycle_mean(cyc, weights);
    constexpr double tie = 1e-12;
    if (m < chosen_mean - tie || (std::abs(m - chosen_mean) <= tie && cyc < chosen)) {
      chosen = cyc;
      chosen_mean = m;
    }
  }
  return CycleMeasure{chosen, chosen_mean, StationaryTransitionMeasure(cycle_measure(chosen, n))};
}

FrankWolfeResult minimize_f(const PassiveDynamics& p, const StateCost& c,
                            const FrankWolfeOptions& options) {
  const int n = p.size();
  if (c.size() != n) throw InvalidInput("minimize_f: size mismatch");
  if (!(options.tol > 0.0)) throw InvalidInput("minimize_f: tolerance must be positive");

  const Policy passive(p.kernel());
  Matrix pi = measure_from_policy(p, passive).pi();
  Matrix log_p = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (p.support()(x, y)) log_p(x, y) = std::log(p(x, y));

  Matrix best_pi = pi;
  double best_value = std::numeric_limits<double>::infinity();
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  Matrix grad = Matrix::Zero(n, n);

  int k = 1;
  for (; k <= options.max_iters; ++k) {
    // grad f = c(x) + log pi(x,y) - log mu(x) - log P(y|x) on the support.
    // f is 1-homogeneous, so <grad f, pi> = f(pi).
    const Vector mu = pi.rowwise().sum();
    double value = 0.0;
    for (int x = 0; x < n; ++x) {
      const double log_mu = std::log(mu(x));
      for (int y = 0; y < n; ++y) {
        if (!p.support()(x, y)) continue;
        grad(x, y) = c(x) + std::log(pi(x, y)) - log_mu - log_p(x, y);
        value += pi(x, y) * grad(x, y);
      }
    }
    if (value < best_value) {
      best_value = value;
      best_pi = pi;
    }
    history.push_back(best_value);

    const CycleMeasure vertex = min_mean_cycle(grad, p.support());
    best_gap = std::min(best_gap, value - vertex.mean_weight);
    if (best_gap <= options.tol) break;

    const double step = 2.0 / (k + 2.0);
    pi *= 1.0 - step;
    pi += step * vertex.measure.pi();
  }
  if (best_gap > options.tol) {
    std::ostringstream os;
    os << "Frank-Wolfe gap " << best_gap << " above " << options.tol << " after "
       << options.max_iters << " iterations";
    throw NonConvergence(os.str());
  }
  // Renormalize away accumulated rounding before validating.
  best_pi /= best_pi.sum();
  return FrankWolfeResult{StationaryTransitionMeasure(std::move(best_pi)), best_value, best_gap,
                          std::min(k, options.max_iters), std::move(history)};
}

double bregman_negcondent(const StationaryTransitionMeasure& pi_prime,
                          const StationaryTransitionMeasure& pi) {
  const int n = pi.size();
  if (pi_prime.size() != n) throw InvalidInput("bregman_negcondent: size mismatch");
  double total = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      const double a = pi_prime(x, y);
      if (a <= kZeroThreshold) continue;
      const double b = pi(x, y);
      if (b <= kZeroThreshold) {
        std::ostringstream os;
        os << "pi'(" << x << "," << y << ") > 0 where pi is zero";
        throw SupportViolation(os.str());
      }
      total += a * std::log((a * pi.mu()(x)) / (pi_prime.mu()(x) * b));
    }
  }
  return std::max(total, 0.0);
}

double pinsker_lower_bound(const StationaryTransitionMeasure& pi_prime,
                           const StationaryTransitionMeasure& pi) {
  const int n = pi.size();
  double total = 0.0;
  for (int x = 0; x < n; ++x) {
    const double w = pi_prime.mu()(x);
    if (w <= kZeroThreshold) continue;
    if (pi.mu()(x) <= kZeroThreshold)
      throw SupportViolation("pi has zero marginal where pi' does not");
    const double l1 =
        (pi_prime.pi().row(x) / w - pi.pi().row(x) / pi.mu()(x)).lpNorm<1>();
    total += 0.5 * w * l1 * l1;
  }
  return total;
}

double kkt_residual(const StationaryTransitionMeasure& pi, const StateCost& c,
                    const Eigen::Ref<const Vector>& v, double lambda, const PassiveDynamics& p) {
  const int n = pi.size();
  if (p.size() != n || c.size() != n || v.size() != n)
    throw InvalidInput("kkt_residual: size mismatch");
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    const double mu = pi.mu()(x);
    for (int y = 0; y < n; ++y) {
      if (!p.support()(x, y)) continue;
      const double ratio = mu > kZeroThreshold ? pi(x, y) / mu : 0.0;
      const double target = p(x, y) * std::exp(lambda - c(x) + v(x) - v(y));
      worst = std::max(worst, std::abs(ratio - target));
    }
  }
  return worst;
}

}  // namespace lmdp
