#include <doctest.h>

#include <cmath>

#include "lmdp/chain_analysis.hpp"
#include "lmdp/convex_view.hpp"
#include "oracles.hpp"

using namespace lmdp;

namespace {

PassiveDynamics uniform2() { return PassiveDynamics(Matrix::Constant(2, 2, 0.5)); }

StateCost cost01() {
  Vector c(2);
  c << 0.0, 1.0;
  return StateCost(c);
}

// Random feasible measure: stationary measure of a random full-support policy.
StationaryTransitionMeasure random_measure(int n, std::uint64_t seed) {
  return StationaryTransitionMeasure(
      measure_from_policy(PassiveDynamics(Matrix::Constant(n, n, 1.0 / n)),
                          Policy(oracle::random_kernel(n, seed, 0.0)))
          .pi());
}

}  // namespace

TEST_CASE("measure_from_policy") {
  const auto p = uniform2();
  const auto pi = measure_from_policy(p, Policy(p.kernel()));
  CHECK((pi.pi().array() - 0.25).abs().maxCoeff() < 1e-15);

  const auto sol = solve(p, cost01());
  const auto pq = measure_from_policy(p, sol.policy);
  CHECK(pq(0, 0) == doctest::Approx(0.534446645388523).epsilon(1e-10));
  CHECK(feasibility_residual(pq.pi(), p) < 1e-15);

  // Deterministic 3-cycle inside a full-support P.
  const PassiveDynamics full(Matrix::Constant(3, 3, 1.0 / 3));
  Matrix cyc = Matrix::Zero(3, 3);
  cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1.0;
  const auto pc = measure_from_policy(full, Policy(cyc));
  CHECK(pc(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(pc(2, 0) == doctest::Approx(1.0 / 3));
  CHECK(pc(0, 0) == 0.0);

  Matrix holey(2, 2);
  holey << 0.5, 0.5, 1.0, 0.0;
  CHECK_THROWS_AS(measure_from_policy(PassiveDynamics(holey), Policy(p.kernel())), SupportViolation);
}

TEST_CASE("policy_from_measure") {
  const auto back = policy_from_measure(StationaryTransitionMeasure(Matrix::Constant(2, 2, 0.25)));
  CHECK((back.mu.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK((back.policy.kernel().array() - 0.5).abs().maxCoeff() < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const PassiveDynamics p(oracle::random_kernel(n, 900 + trial));
    const Policy q(oracle::random_kernel(n, 950 + trial, 0.01));
    const auto round = policy_from_measure(measure_from_policy(p, q));
    CHECK(max_row_l1(round.policy.kernel(), q.kernel()) < 1e-8);
  }

  Matrix zero_row = Matrix::Zero(2, 2);
  zero_row(0, 0) = 1.0;
  CHECK_THROWS_AS(policy_from_measure(StationaryTransitionMeasure(zero_row)), ZeroMarginal);
}

TEST_CASE("measure invariants are enforced") {
  CHECK_THROWS_AS(StationaryTransitionMeasure{Matrix::Zero(2, 2)}, InvalidInput);
  Matrix unbalanced(2, 2);
  unbalanced << 0.5, 0.5, 0.0, 0.0;
  CHECK_THROWS_AS(StationaryTransitionMeasure{unbalanced}, InvalidInput);
}

TEST_CASE("objective_f") {
  const auto p = uniform2();
  const auto passive = measure_from_policy(p, Policy(p.kernel()));
  Vector c(2);
  c << 0.3, 0.8;
  CHECK(objective_f(passive, StateCost(c), p) == doctest::Approx(0.55).epsilon(1e-14));

  const auto sol = solve(p, cost01());
  const auto pq = measure_from_policy(p, sol.policy);
  CHECK(objective_f(pq, cost01(), p) == doctest::Approx(0.3798854930417225).epsilon(1e-10));

  // Affine in the cost.
  const auto pi = random_measure(4, 1);
  const PassiveDynamics p4(Matrix::Constant(4, 4, 0.25));
  lmdp::CounterRng rng(2, 2);
  const Vector c1 = oracle::random_vector(4, rng);
  const Vector c2 = oracle::random_vector(4, rng);
  const double mid = objective_f(pi, StateCost((c1 + c2) / 2), p4);
  const double avg = 0.5 * (objective_f(pi, StateCost(c1), p4) + objective_f(pi, StateCost(c2), p4));
  CHECK(std::abs(mid - avg) < 1e-14);

  Matrix holey(2, 2);
  holey << 0.5, 0.5, 1.0, 0.0;
  CHECK_THROWS_AS(objective_f(passive, cost01(), PassiveDynamics(holey)), SupportViolation);
}

TEST_CASE("cost identity: f(pi_Q; c) = sum mu_Q (c + KL)") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const PassiveDynamics p(oracle::random_kernel(n, 40 + trial));
    const Policy q(oracle::random_kernel(n, 70 + trial, 0.0));
    lmdp::CounterRng rng(trial, 3);
    const StateCost c(oracle::random_vector(n, rng));
    const Vector mu = stationary_distribution(q.kernel());
    double direct = 0.0;
    for (int x = 0; x < n; ++x) direct += mu(x) * step_loss(c, p, q, x);
    CHECK(std::abs(objective_f(measure_from_policy(p, q), c, p) - direct) < 1e-10);
  }
}

TEST_CASE("feasibility_residual") {
  const auto p = uniform2();
  CHECK(feasibility_residual(Matrix::Constant(2, 2, 0.25), p) == 0.0);
  CHECK(feasibility_residual(Matrix::Zero(2, 2), p) == 1.0);
  Matrix holey(2, 2);
  holey << 0.5, 0.5, 1.0, 0.0;
  CHECK(feasibility_residual(Matrix::Constant(2, 2, 0.25), PassiveDynamics(holey)) == 0.25);
  Matrix skew(2, 2);
  skew << 0.6, 0.1, 0.2, 0.1;
  CHECK(feasibility_residual(skew, p) == doctest::Approx(0.1));
}

TEST_CASE("min_mean_cycle") {
  Matrix w(2, 2);
  w << 0.2, 0.4, 0.4, 0.5;
  const Mask full = Mask::Constant(2, 2, true);
  const auto best = min_mean_cycle(w, full);
  CHECK(best.mean_weight == doctest::Approx(0.2));
  CHECK(best.cycle == std::vector<int>{0});
  CHECK(best.measure(0, 0) == 1.0);

  const auto tie = min_mean_cycle(Matrix::Constant(3, 3, 0.7), Mask::Constant(3, 3, true));
  CHECK(tie.mean_weight == doctest::Approx(0.7));

  Mask dag = Mask::Constant(2, 2, false);
  dag(0, 1) = true;
  CHECK_THROWS_AS(min_mean_cycle(w, dag), NoCycle);
}

TEST_CASE("min_mean_cycle matches exhaustive enumeration") {
  lmdp::CounterRng rng(5, 5);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 5;
    Matrix w(n, n);
    Mask s(n, n);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        w(x, y) = 2.0 * rng.uniform() - 1.0;
        s(x, y) = rng.uniform() < 0.6;
      }
      s(x, (x + 1) % n) = true;  // keep a Hamiltonian cycle so a cycle exists
    }
    const auto got = min_mean_cycle(w, s);
    CHECK(got.mean_weight == doctest::Approx(oracle::brute_min_mean_cycle(w, s)).epsilon(1e-12));
    // The returned measure attains the reported value.
    CHECK((got.measure.pi().array() * w.array()).sum() == doctest::Approx(got.mean_weight).epsilon(1e-12));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (got.measure(x, y) > 0) CHECK(s(x, y));
  }
}

TEST_CASE("minimize_f agrees with the eigen solver") {
  const auto p = uniform2();
  const auto fw = minimize_f(p, cost01());
  CHECK(std::abs(fw.value - 0.3798854930417225) <= 1e-3);
  CHECK(fw.value >= 0.3798854930417225 - 1e-12);
  CHECK(feasibility_residual(fw.measure.pi(), p) < 1e-10);

  const auto zero = minimize_f(p, StateCost::zeros(2));
  CHECK(std::abs(zero.value) <= 1e-3);
  const auto flat = minimize_f(p, StateCost::constant(2, 0.4));
  CHECK(std::abs(flat.value - 0.4) <= 1e-3);

  const PassiveDynamics p5(oracle::random_kernel(5, 12));
  lmdp::CounterRng rng(12, 12);
  const StateCost c(oracle::random_vector(5, rng));
  const auto r = minimize_f(p5, c);
  CHECK(std::abs(r.value - solve(p5, c).lambda) <= 1e-3);
  for (std::size_t i = 1; i < r.best_values.size(); ++i)
    CHECK(r.best_values[i] <= r.best_values[i - 1]);

  FrankWolfeOptions tiny;
  tiny.max_iters = 3;
  tiny.tol = 1e-12;
  CHECK_THROWS_AS(minimize_f(p5, c, tiny), NonConvergence);
}

TEST_CASE("bregman_negcondent") {
  const auto pi = random_measure(3, 4);
  CHECK(bregman_negcondent(pi, pi) == doctest::Approx(0.0).epsilon(1e-15));

  // Q' deterministic swap on 2 states vs uniform Q: each row contributes log 2.
  Matrix swap = Matrix::Zero(2, 2);
  swap(0, 1) = swap(1, 0) = 0.5;
  const StationaryTransitionMeasure point(swap);
  const StationaryTransitionMeasure uniform(Matrix::Constant(2, 2, 0.25));
  CHECK(bregman_negcondent(point, uniform) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(bregman_negcondent(uniform, point), SupportViolation);

  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_measure(4, 2 * trial + 1000);
    const auto b = random_measure(4, 2 * trial + 1001);
    const double d = bregman_negcondent(a, b);
    CHECK(d >= 0.0);
    CHECK(d >= pinsker_lower_bound(a, b) - 1e-12);
    CHECK(d == doctest::Approx(oracle::bregman_by_definition(a.pi(), b.pi())).epsilon(1e-9));
  }
}

TEST_CASE("kkt_residual") {
  const auto p = uniform2();
  const auto sol = solve(p, cost01());
  const auto pq = measure_from_policy(p, sol.policy);
  CHECK(kkt_residual(pq, cost01(), sol.v, sol.lambda, p) <= 1e-9);

  const auto passive = measure_from_policy(p, Policy(p.kernel()));
  const double f = objective_f(passive, cost01(), p);
  CHECK(kkt_residual(passive, cost01(), Vector::Zero(2), f, p) > 1e-3);
  CHECK(kkt_residual(passive, StateCost::zeros(2), Vector::Zero(2), 0.0, p) == 0.0);
}
