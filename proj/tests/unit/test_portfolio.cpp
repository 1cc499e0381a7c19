#include <doctest.h>

#include <cmath>
#include <random>
#include <cstring>
#include <sstream>

#include "bagl/errors.hpp"
#include "bagl/portfolio.hpp"
#include "support/oracles.hpp"

using namespace bagl;

namespace {

Weights make_weights(std::initializer_list<double> values) {
  Weights w;
  w.w = Vector(static_cast<Index>(values.size()));
  Index k = 0;
  for (double v : values) w.w[k++] = v;
  return w;
}

}  // namespace

TEST_CASE("gmv with identity precision is equal weight") {
  const auto w = gmv_weights(SymmetricMatrix::identity(4));
  for (Index i = 0; i < 4; ++i) CHECK(w.w[i] == 0.25);
  CHECK(w.w == equal_weights(4).w);
  CHECK(gmv_weights(SymmetricMatrix::identity(100)).w == equal_weights(100).w);
}

TEST_CASE("gmv with a diagonal precision") {
  const auto w = gmv_weights(SymmetricMatrix::diagonal((Vector(2) << 1.0, 4.0).finished()));
  CHECK(w.w[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(w.w[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("gmv matches the KKT oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix sigma = oracle::random_spd(seed, 10);
    const Vector expected = oracle::kkt_min_variance(sigma);
    const auto w = gmv_weights(SymmetricMatrix::from_dense(inverse_spd_dense(sigma)));
    CHECK((w.w - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(w.w.sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("gmv beats random feasible portfolios") {
  const Matrix sigma = oracle::random_spd(77, 8);
  const auto w = gmv_weights(SymmetricMatrix::from_dense(inverse_spd_dense(sigma)));
  const double best = w.w.dot(sigma * w.w);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 1000; ++k) {
    Vector x(8);
    for (Index i = 0; i < 8; ++i) x[i] = normal(gen);
    x /= x.sum();
    CHECK(x.dot(sigma * x) > best);
  }
}

TEST_CASE("gmv is scale invariant") {
  const SymmetricMatrix omega = SymmetricMatrix::from_dense(oracle::random_spd(3, 6));
  const auto base = gmv_weights(omega);
  CHECK(gmv_weights(4.0 * omega).w == base.w);
  CHECK(gmv_weights(0.125 * omega).w == base.w);
  CHECK((gmv_weights(3.7 * omega).w - base.w).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gmv rejects a non-PD precision") {
  SymmetricMatrix bad(2, 1.0);
  bad.set(1, 0, 2.0);
  CHECK_THROWS_AS(gmv_weights(bad), EstimatorError);
}

TEST_CASE("equal weights at p = 100") {
  const auto w = equal_weights(100);
  for (Index i = 0; i < 100; ++i) CHECK(w.w[i] == 0.01);
  const auto c = composition(w, w);
  CHECK(c.gross_exposure == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.short_exposure == 0.0);
  CHECK(c.hdi == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(c.turnover == 0.0);
  CHECK(c.active_position_fraction == 1.0);
  CHECK_THROWS_AS(equal_weights(0), ConfigError);
}

TEST_CASE("composition of a leveraged pair") {
  const auto c = composition(make_weights({1.5, -0.5}));
  CHECK(c.gross_exposure == 2.0);
  CHECK(c.short_exposure == 0.5);
  CHECK(c.max_short == -0.5);
  CHECK(c.hdi == doctest::Approx(0.625));
  CHECK(c.turnover == 0.0);
}

TEST_CASE("long-only weights have unit gross exposure") {
  const auto c = composition(make_weights({0.2, 0.3, 0.5}));
  CHECK(c.gross_exposure == 1.0);
  CHECK(c.short_exposure == 0.0);
  CHECK(c.max_short == 0.0);
}

TEST_CASE("turnover and universe checks") {
  const auto c = composition(make_weights({0.5, 0.5}), make_weights({0.8, 0.2}));
  CHECK(c.turnover == doctest::Approx(0.6));
  CHECK_THROWS_AS(composition(make_weights({0.5, 0.5}), make_weights({0.2, 0.3, 0.5})), DataError);
}

TEST_CASE("hdi is smallest at equal absolute weights") {
  const Index p = 7;
  std::mt19937_64 gen(9);
  std::exponential_distribution<double> expo;
  for (int k = 0; k < 2000; ++k) {
    Vector x(p);
    for (Index i = 0; i < p; ++i) x[i] = expo(gen);
    x /= x.sum();
    Weights w;
    w.w = x;
    CHECK(composition(w).hdi >= 1.0 / static_cast<double>(p) - 1e-15);
  }
  Weights flat;
  flat.w = Vector::Constant(p, 1.0 / static_cast<double>(p));
  CHECK(composition(flat).hdi == doctest::Approx(1.0 / static_cast<double>(p)).epsilon(1e-14));
}

TEST_CASE("composition and performance are pure") {
  const auto w = make_weights({0.7, -0.2, 0.5});
  const auto a = composition(w, make_weights({0.3, 0.3, 0.4}));
  const auto b = composition(w, make_weights({0.3, 0.3, 0.4}));
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  const std::vector<double> r = {0.01, -0.02, 0.03, 0.005};
  const std::vector<double> rf(4, 0.001);
  const auto p1 = performance(r, rf);
  const auto p2 = performance(r, rf);
  CHECK(std::memcmp(&p1, &p2, sizeof p1) == 0);
}

TEST_CASE("constant returns have zero variance") {
  CHECK_THROWS_AS(performance(std::vector<double>(12, 0.01), std::vector<double>(12, 0.0)), DataError);
}

TEST_CASE("annualised statistics and sharpe") {
  // monthly m +- d with the sample standard deviation giving the target
  auto series = [](double annual_mean, double annual_sd, int n) {
    const double m = annual_mean / 12.0;
    const double sd = annual_sd / std::sqrt(12.0);
    const double d = sd * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
    std::vector<double> out;
    for (int t = 0; t < n; ++t) out.push_back(t % 2 ? m - d : m + d);
    return out;
  };
  const auto zero_rf = std::vector<double>(120, 0.0);
  const auto p = performance(series(0.5, 0.25, 120), zero_rf);
  CHECK(p.mean_return == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.std_dev == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.sharpe == doctest::Approx(2.0).epsilon(1e-12));

  const auto rf = std::vector<double>(120, 0.0212 / 12.0);
  const auto ew = performance(series(0.148, 0.254, 120), rf);
  CHECK(ew.sharpe == doctest::Approx(0.499).epsilon(5e-4));

  const auto monthly = performance(series(0.12, 0.12, 24), std::vector<double>(24, 0.0), false);
  CHECK(monthly.mean_return == doctest::Approx(0.01));
  CHECK(monthly.std_dev == doctest::Approx(0.12 / std::sqrt(12.0)));
}

TEST_CASE("performance input checks") {
  CHECK_THROWS_AS(performance({0.1}, {0.0}), DataError);
  CHECK_THROWS_AS(performance({0.1, 0.2}, {0.0}), DataError);
}

TEST_CASE("weights csv layout") {
  Weights w = make_weights({0.25, 0.75});
  w.assets = {"x", "y"};
  w.as_of = YearMonth(2011, 4);
  std::ostringstream out;
  write_weights_csv(out, {w});
  CHECK(out.str() == "date,asset,weight\n201104,x,0.25\n201104,y,0.75\n");
}
