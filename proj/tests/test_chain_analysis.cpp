#include <doctest.h>

#include <cmath>

#include "lmdp/chain_analysis.hpp"
#include "oracles.hpp"

using namespace lmdp;

namespace {
Matrix m2(double a, double b, double c, double d) {
  Matrix k(2, 2);
  k << a, b, c, d;
  return k;
}
}  // namespace

TEST_CASE("stationary_distribution") {
  Matrix ds(3, 3);
  ds << 0.2, 0.3, 0.5, 0.5, 0.2, 0.3, 0.3, 0.5, 0.2;
  CHECK((stationary_distribution(ds) - Vector::Constant(3, 1.0 / 3)).cwiseAbs().maxCoeff() < 1e-14);

  const Vector mu = stationary_distribution(m2(0.9, 0.1, 0.2, 0.8));
  CHECK(mu(0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(mu(1) == doctest::Approx(1.0 / 3).epsilon(1e-14));

  const double q0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  const Vector mq = stationary_distribution(m2(q0, 1 - q0, q0, 1 - q0));
  CHECK(mq(0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(mq(1) == doctest::Approx(0.2689414213699951).epsilon(1e-13));

  CHECK_THROWS_AS(stationary_distribution(Matrix::Identity(2, 2)), NonErgodic);
  // Absorbing state: unique but not strictly positive.
  CHECK_THROWS_AS(stationary_distribution(m2(1.0, 0.0, 0.5, 0.5)), NonErgodic);
}

TEST_CASE("stationary_distribution is a fixed point on random kernels") {
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 9;
    const Matrix k = oracle::random_kernel(n, 300 + trial);
    const Vector mu = stationary_distribution(k);
    CHECK((k.transpose() * mu - mu).lpNorm<1>() <= 1e-10);
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Power-iteration branch above the direct-solve size.
  const Matrix big = oracle::random_kernel(80, 9, 0.001);
  const Vector mu = stationary_distribution(big);
  CHECK((big.transpose() * mu - mu).lpNorm<1>() <= 1e-10);
}

TEST_CASE("ergodicity_coefficient and mixing_time") {
  CHECK(ergodicity_coefficient(m2(0.3, 0.7, 0.3, 0.7)) == 0.0);
  CHECK(ergodicity_coefficient(m2(0.9, 0.1, 0.2, 0.8)) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(ergodicity_coefficient(Matrix::Identity(2, 2)) == 1.0);

  CHECK(mixing_time_from_alpha(std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mixing_time(m2(0.9, 0.1, 0.2, 0.8)) == doctest::Approx(2.803673252057129).epsilon(1e-12));
  CHECK(mixing_time(m2(0.3, 0.7, 0.3, 0.7)) == 0.0);
  CHECK_THROWS_AS(mixing_time(Matrix::Identity(2, 2)), NonErgodic);
}

TEST_CASE("contraction in l1 under the ergodicity coefficient") {
  const Matrix k = oracle::random_kernel(6, 4, 0.02);
  const double alpha = ergodicity_coefficient(k);
  lmdp::CounterRng rng(4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = oracle::random_distribution(6, rng);
    const Vector b = oracle::random_distribution(6, rng);
    const double lhs = (k.transpose() * (a - b)).lpNorm<1>();
    CHECK(lhs <= alpha * (a - b).lpNorm<1>() + 1e-14);
  }
}

TEST_CASE("primitivity_index") {
  CHECK(primitivity_index(PassiveDynamics(Matrix::Constant(3, 3, 1.0 / 3))) == 1);
  CHECK(primitivity_index(PassiveDynamics(m2(0.5, 0.5, 1.0, 0.0))) == 2);
  CHECK_THROWS_AS(primitivity_index(PassiveDynamics(m2(0.0, 1.0, 1.0, 0.0))), NotPrimitive);
  CHECK_THROWS_AS(primitivity_index(PassiveDynamics(Matrix::Identity(3, 3))), NotPrimitive);
  Matrix one(1, 1);
  one << 1.0;
  CHECK(primitivity_index(PassiveDynamics(one)) == 1);
}

TEST_CASE("primitivity_index matches a numeric power scan") {
  lmdp::CounterRng rng(8, 8);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 5;
    // Sparse random kernels: each entry kept with probability ~0.4.
    Matrix k = Matrix::Zero(n, n);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y)
        if (rng.uniform() < 0.4) k(x, y) = 0.1 + rng.uniform();
      if (k.row(x).sum() == 0.0) k(x, (x + 1) % n) = 1.0;
      k.row(x) /= k.row(x).sum();
    }
    const PassiveDynamics p(k);
    const int expected = oracle::brute_primitivity(p.kernel());
    CAPTURE(k);
    if (expected < 0) {
      CHECK_THROWS_AS(primitivity_index(p), NotPrimitive);
    } else {
      CHECK(primitivity_index(p) == expected);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("max_expected_hitting_time") {
  CHECK(max_expected_hitting_time(PassiveDynamics(Matrix::Constant(2, 2, 0.5))) ==
        doctest::Approx(2.0).epsilon(1e-14));
  Matrix one(1, 1);
  one << 1.0;
  CHECK(max_expected_hitting_time(PassiveDynamics(one)) == 0.0);
  CHECK(max_expected_hitting_time(PassiveDynamics(m2(0.9, 0.1, 0.2, 0.8))) ==
        doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(max_expected_hitting_time(PassiveDynamics(Matrix::Identity(2, 2))), NonErgodic);

  for (int trial = 0; trial < 10; ++trial) {
    const Matrix k = oracle::random_kernel(2 + trial % 5, 500 + trial);
    CHECK(max_expected_hitting_time(PassiveDynamics(k)) ==
          doctest::Approx(oracle::iterated_hitting_time(k)).epsilon(1e-9));
  }
}

TEST_CASE("tau_upper_bound") {
  // alpha(P) = 0, H = 0: alpha_ub = 1 - e^{-2}
  CHECK(alpha_upper_bound(0.0, 0.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(tau_upper_bound(0.0, 0.0) == doctest::Approx(6.876942579151431).epsilon(1e-12));
  CHECK(alpha_upper_bound(0.0, 1.0) == doctest::Approx(0.950212931632136).epsilon(1e-14));
  for (double a : {0.0, 0.3, 0.9, 0.999})
    for (double h : {0.0, 1.0, 5.0, 10.0}) CHECK(alpha_upper_bound(a, h) < 1.0);

  const PassiveDynamics p(Matrix::Constant(2, 2, 0.5));
  const auto d = analyze(p);
  CHECK(d.alpha == 0.0);
  CHECK(d.h_hit == doctest::Approx(2.0));
  CHECK(d.tau_ub == doctest::Approx(tau_upper_bound(0.0, 2.0)));
  CHECK(tau_upper_bound(p) == doctest::Approx(d.tau_ub));
}

TEST_CASE("optimal policies contract no worse than alpha_ub") {
  const PassiveDynamics p(oracle::random_kernel(4, 31));
  const auto d = analyze(p);
  lmdp::CounterRng rng(31, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sol = solve(p, StateCost(oracle::random_vector(4, rng)));
    CHECK(ergodicity_coefficient(sol.policy.kernel()) <= d.alpha_ub + 1e-10);
  }
}
