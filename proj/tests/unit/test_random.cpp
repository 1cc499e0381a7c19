#include <doctest.h>

#include <cmath>
#include <vector>

#include "bagl/errors.hpp"
#include "bagl/random.hpp"
#include "support/oracles.hpp"

using namespace bagl;

TEST_CASE("streams are deterministic and derived streams differ") {
  RngStream a(7), b(7);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  RngStream c0 = RngStream::derive(7, 0), c1 = RngStream::derive(7, 1);
  CHECK(c0.next_u64() != c1.next_u64());
  RngStream d0 = RngStream::derive(7, 0);
  RngStream e0 = RngStream::derive(7, 0);
  CHECK(d0.uniform() == e0.uniform());
}

TEST_CASE("uniform stays in the open interval") {
  RngStream rng(1);
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal draws match the standard normal") {
  RngStream rng(2);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = rng.normal();
  CHECK(oracle::ks_distance(xs, oracle::normal_cdf) < 0.005);
}

TEST_CASE("gamma moments") {
  RngStream rng(3);
  for (double shape : {0.01, 0.5, 1.0, 2.5, 50.0}) {
    const double rate = 2.0;
    const int n = 400000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = draw_gamma(rng, shape, rate);
      REQUIRE(x > 0.0);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double true_mean = shape / rate;
    const double true_var = shape / (rate * rate);
    INFO("shape " << shape);
    CHECK(std::abs(mean - true_mean) < 5.0 * std::sqrt(true_var / n));
    CHECK(var == doctest::Approx(true_var).epsilon(shape < 0.1 ? 0.15 : 0.03));
  }
}

TEST_CASE("gamma with tiny shape never returns zero") {
  RngStream rng(4);
  for (int k = 0; k < 200000; ++k) REQUIRE(draw_gamma(rng, 0.01, 1.0) > 0.0);
}

TEST_CASE("gamma rejects bad parameters") {
  RngStream rng(5);
  CHECK_THROWS_AS(draw_gamma(rng, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(draw_gamma(rng, 1.0, -1.0), ConfigError);
}

TEST_CASE("inverse gaussian matches its CDF") {
  RngStream rng(6);
  for (auto [mu, lambda] : {std::pair{1.0, 1.0}, {0.3, 5.0}, {1e3, 1e-2}, {2.0, 1e4}}) {
    std::vector<double> xs(200000);
    for (auto& x : xs) {
      x = draw_inverse_gaussian(rng, mu, lambda);
      REQUIRE(x > 0.0);
    }
    INFO("mu " << mu << " lambda " << lambda);
    CHECK(oracle::ks_distance(xs, [&](double x) { return oracle::inverse_gaussian_cdf(x, mu, lambda); }) < 0.006);
  }
}

TEST_CASE("truncated normal moments") {
  RngStream rng(7);
  struct Case {
    double mu, sd, lo, hi;
  };
  for (const Case c : {Case{0, 1, -1, 2}, Case{0, 1, 3, 4}, Case{0, 1, -8, -7}, Case{2, 0.5, -1e300, 1.9},
                       Case{0, 1, 0.2, 0.2001}, Case{-1, 3, 0, HUGE_VAL}}) {
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = draw_truncated_normal(rng, c.mu, c.sd, c.lo, c.hi);
      REQUIRE(x > c.lo);
      REQUIRE(x < c.hi);
      sum += x;
      sum2 += x * x;
    }
    const auto m = oracle::truncated_normal_moments(c.mu, c.sd, c.lo, c.hi);
    const double mean = sum / n;
    INFO("interval (" << c.lo << ", " << c.hi << ")");
    CHECK(std::abs(mean - m.mean) < 5.0 * std::sqrt(m.variance / n) + 1e-12);
    CHECK((sum2 / n - mean * mean) == doctest::Approx(m.variance).epsilon(0.03));
  }
}

TEST_CASE("unit directions have unit norm") {
  RngStream rng(8);
  for (int k = 0; k < 100; ++k) CHECK(draw_unit_direction(rng, 7).norm() == doctest::Approx(1.0));
}

TEST_CASE("hit-and-run stays inside the ellipsoid and matches 1-d moments") {
  RngStream rng(9);
  const double mean = 0.4, var = 2.0, bound = 1.0, a = 1.5;  // x^2 a < bound
  TruncatedMvnSpec spec{Vector::Constant(1, mean), SymmetricMatrix(1, var), SymmetricMatrix(1, a), bound};
  const double edge = std::sqrt(bound / a);
  Vector x = Vector::Zero(1);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    x = draw_truncated_mvn_har(rng, spec, x, 1);
    REQUIRE(std::abs(x[0]) < edge);
    sum += x[0];
    sum2 += x[0] * x[0];
  }
  const auto m = oracle::truncated_normal_moments(mean, std::sqrt(var), -edge, edge);
  CHECK(sum / n == doctest::Approx(m.mean).epsilon(0.02));
  CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(m.variance).epsilon(0.02));
}

TEST_CASE("hit-and-run rejects an infeasible start") {
  RngStream rng(10);
  TruncatedMvnSpec spec{Vector::Zero(2), SymmetricMatrix::identity(2), SymmetricMatrix::identity(2), 1.0};
  CHECK_THROWS_AS(draw_truncated_mvn_har(rng, spec, Vector::Constant(2, 1.0), 5), InvariantError);
}

TEST_CASE("hit-and-run in 3-d has the right mean under a loose constraint") {
  RngStream rng(11);
  const Matrix cov = oracle::random_spd(12, 3, 0.2, 1.0);
  const Vector mean = (Vector(3) << 0.3, -0.2, 0.1).finished();
  TruncatedMvnSpec spec{mean, SymmetricMatrix::from_dense(cov), SymmetricMatrix::identity(3), 100.0};
  Vector x = Vector::Zero(3), sum = Vector::Zero(3);
  const int n = 50000;
  for (int k = 0; k < n; ++k) {
    x = draw_truncated_mvn_har(rng, spec, x, 3);
    sum += x;
  }
  CHECK(((sum / n) - mean).cwiseAbs().maxCoeff() < 0.03);
}
