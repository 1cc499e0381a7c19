#include <doctest.h>

#include <sstream>

#include "bagl/errors.hpp"
#include "bagl/market_data.hpp"
#include "bagl/random.hpp"

using namespace bagl;

namespace {

const char* kReturnsText =
    "This file was created using the 202012 CRSP database.\n"
    "  Average Value Weighted Returns -- Monthly\n"
    ",SMALL LoBM,ME1 BM2,BIG HiBM\n"
    "201001,   1.50,  -2.00,   0.25\n"
    "201002,  -99.99,  1.00,   2.00\n"
    "201003,   0.10,   0.20,   0.30\n"
    "\n"
    "  Average Equal Weighted Returns -- Monthly\n"
    ",SMALL LoBM,ME1 BM2,BIG HiBM\n"
    "201001,   9.00,   9.00,   9.00\n";

FactorPanel synthetic_factors(std::uint64_t seed, int n, YearMonth start) {
  RngStream rng(seed);
  FactorPanel f;
  f.mkt_rf.resize(n);
  f.smb.resize(n);
  f.hml.resize(n);
  f.rf.resize(n);
  for (int t = 0; t < n; ++t) {
    f.dates.push_back(start.plus_months(t));
    f.mkt_rf[t] = 0.05 * rng.normal();
    f.smb[t] = 0.03 * rng.normal();
    f.hml[t] = 0.03 * rng.normal();
    f.rf[t] = 0.001 + 0.0005 * rng.uniform();
  }
  return f;
}

ReturnPanel random_panel(std::uint64_t seed, int n, int p, YearMonth start) {
  RngStream rng(seed);
  Matrix v(n, p);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < p; ++j) v(t, j) = 0.05 * rng.normal();
  std::vector<YearMonth> dates;
  std::vector<std::string> assets;
  for (int t = 0; t < n; ++t) dates.push_back(start.plus_months(t));
  for (int j = 0; j < p; ++j) assets.push_back("a" + std::to_string(j));
  return ReturnPanel(dates, assets, v);
}

}  // namespace

TEST_CASE("parses the first monthly block in percent") {
  std::istringstream in(kReturnsText);
  const ParseResult r = parse_french_returns(in);
  REQUIRE(r.panel.n() == 2);
  REQUIRE(r.panel.p() == 3);
  CHECK(r.panel.dates()[0] == YearMonth(2010, 1));
  CHECK(r.panel.values()(0, 0) == 0.015);
  CHECK(r.panel.values()(0, 1) == -0.02);
  CHECK(r.panel.assets()[2] == "BIG HiBM");
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("201002") != std::string::npos);
}

TEST_CASE("whitespace separated rows are accepted") {
  std::istringstream in("  Date  A  B\n201001  1.50 -2.00\n201002 0.5 0.5\n");
  const auto r = parse_french_returns(in);
  CHECK(r.panel.values()(0, 0) == 0.015);
  CHECK(r.panel.values()(0, 1) == -0.02);
  CHECK(r.panel.assets() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("a 120 by 100 block parses to n = 120, p = 100") {
  std::ostringstream text;
  text << "header\n";
  for (int j = 0; j < 100; ++j) text << ",P" << j;
  text << '\n';
  for (int t = 0; t < 120; ++t) {
    text << YearMonth(2001, 1).plus_months(t).compact();
    for (int j = 0; j < 100; ++j) text << ',' << (0.01 * (t + j));
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto r = parse_french_returns(in);
  CHECK(r.panel.n() == 120);
  CHECK(r.panel.p() == 100);
}

TEST_CASE("malformed input is rejected") {
  std::istringstream bad_stamp("h\n,A\n20101,1.0\n");
  CHECK_THROWS_AS(parse_french_returns(bad_stamp), DataError);
  std::istringstream bad_month("h\n,A\n201013,1.0\n");
  CHECK_THROWS_AS(parse_french_returns(bad_month), DataError);
  std::istringstream ragged("h\n,A,B\n201001,1.0,2.0\n201002,1.0\n");
  CHECK_THROWS_AS(parse_french_returns(ragged), DataError);
  std::istringstream all_missing("h\n,A\n201001,-99.99\n");
  CHECK_THROWS_AS(parse_french_returns(all_missing), DataError);
  std::istringstream empty("nothing here\n");
  CHECK_THROWS_AS(parse_french_returns(empty), DataError);
}

TEST_CASE("factor file columns are found by name") {
  std::istringstream in(",RF,Mkt-RF,SMB,HML\n201001,0.01,-3.36,0.40,0.31\n201002,0.00,3.40,1.19,3.15\n");
  const FactorPanel f = parse_french_factors(in);
  REQUIRE(f.n() == 2);
  CHECK(f.mkt_rf[0] == doctest::Approx(-0.0336));
  CHECK(f.rf[0] == doctest::Approx(0.0001));
  CHECK(f.hml[1] == doctest::Approx(0.0315));
}

TEST_CASE("panel construction enforces invariants") {
  CHECK_THROWS_AS(ReturnPanel({YearMonth(2010, 2), YearMonth(2010, 1)}, {"a"}, Matrix::Zero(2, 1)), DataError);
  CHECK_THROWS_AS(ReturnPanel({YearMonth(2010, 1)}, {"a", "b"}, Matrix::Zero(1, 1)), DataError);
  Matrix nan = Matrix::Zero(1, 1);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(ReturnPanel({YearMonth(2010, 1)}, {"a"}, nan), DataError);
}

TEST_CASE("affine returns residualize to zero") {
  const auto f = synthetic_factors(1, 60, YearMonth(2005, 1));
  Matrix v(60, 2);
  for (int t = 0; t < 60; ++t) {
    v(t, 0) = f.rf[t] + 0.01 + 1.1 * f.mkt_rf[t] - 0.3 * f.smb[t] + 0.2 * f.hml[t];
    v(t, 1) = f.rf[t] - 0.02 + 0.7 * f.mkt_rf[t] + 0.5 * f.smb[t];
  }
  std::vector<YearMonth> dates(f.dates.begin(), f.dates.end());
  const ReturnPanel panel(dates, {"x", "y"}, v);
  CHECK(residualize(panel, f).values().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("residuals are centred and orthogonal to the factors") {
  const auto f = synthetic_factors(2, 120, YearMonth(2001, 1));
  const auto panel = random_panel(3, 120, 3, YearMonth(2001, 1));
  const Matrix e = residualize(panel, f).values();
  for (Index j = 0; j < e.cols(); ++j) {
    CHECK(std::abs(e.col(j).sum()) < 1e-12);
    CHECK(std::abs(e.col(j).dot(f.mkt_rf)) < 1e-10);
    CHECK(std::abs(e.col(j).dot(f.smb)) < 1e-10);
    CHECK(std::abs(e.col(j).dot(f.hml)) < 1e-10);
  }
}

TEST_CASE("residualizing raw returns is idempotent") {
  const auto f = synthetic_factors(4, 80, YearMonth(2001, 1));
  const auto panel = random_panel(5, 80, 4, YearMonth(2001, 1));
  const ResidualizeOptions raw{false};
  const auto once = residualize(panel, f, raw);
  const auto twice = residualize(once, f, raw);
  CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() < 1e-10);
  // with excess returns the second pass subtracts rf again, which the intercept
  // and slopes absorb only up to the rf variation
  const auto excess = residualize(panel, f);
  CHECK((excess.values() - once.values()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("residualize checks inputs") {
  const auto f = synthetic_factors(6, 10, YearMonth(2001, 1));
  CHECK_THROWS_AS(residualize(random_panel(7, 4, 2, YearMonth(2001, 1)), f), DataError);
  CHECK_THROWS_AS(residualize(random_panel(7, 8, 2, YearMonth(2001, 6)), f), DataError);
  FactorPanel flat = f;
  flat.smb = flat.mkt_rf;
  CHECK_THROWS_AS(residualize(random_panel(7, 10, 2, YearMonth(2001, 1)), flat), DataError);
}

TEST_CASE("windows take consecutive trailing rows") {
  const auto panel = random_panel(8, 24, 2, YearMonth(2009, 1));
  const auto w = window(panel, YearMonth(2010, 12), 3);
  REQUIRE(w.n() == 3);
  CHECK(w.dates().front() == YearMonth(2010, 10));
  CHECK(w.values() == panel.values().bottomRows(3));
  const auto short_panel = random_panel(9, 6, 2, YearMonth(2010, 7));
  CHECK_THROWS_WITH_AS(window(short_panel, YearMonth(2010, 12), 12), doctest::Contains("insufficient history"),
                       DataError);
}

TEST_CASE("scatter is the uncentred cross product") {
  const ReturnPanel eye({YearMonth(2000, 1), YearMonth(2000, 2)}, {"a", "b"}, Matrix::Identity(2, 2));
  CHECK(scatter(eye).s == SymmetricMatrix::identity(2));
  Matrix row(1, 2);
  row << 0.3, -0.5;
  const auto one = scatter(ReturnPanel({YearMonth(2000, 1)}, {"a", "b"}, row)).s;
  CHECK(one(0, 0) == doctest::Approx(0.09));
  CHECK(one(0, 1) == doctest::Approx(-0.15));
  CHECK(one(1, 1) == doctest::Approx(0.25));

  const auto panel = random_panel(10, 3, 5, YearMonth(2000, 1));
  const auto sc = scatter(panel);
  CHECK(sc.n_obs == 3);
  const Matrix& r = panel.values();
  double worst = 0.0, trace = 0.0;
  for (Index i = 0; i < 5; ++i) {
    trace += sc.s(i, i);
    for (Index j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (Index t = 0; t < 3; ++t) acc += r(t, i) * r(t, j);
      worst = std::max(worst, std::abs(acc - sc.s(i, j)));
    }
  }
  CHECK(worst < 1e-12);
  CHECK(eigenvalues_descending(sc.s).minCoeff() > -1e-10 * trace);
}

TEST_CASE("panel csv round-trips exactly") {
  const auto panel = random_panel(11, 5, 3, YearMonth(1999, 11));
  std::stringstream buf;
  write_panel_csv(buf, panel);
  const auto back = read_panel_csv(buf);
  CHECK(back.dates() == panel.dates());
  CHECK(back.assets() == panel.assets());
  CHECK(back.values() == panel.values());
  std::stringstream again;
  write_panel_csv(again, back);
  std::stringstream first;
  write_panel_csv(first, panel);
  CHECK(again.str() == first.str());
}

TEST_CASE("slicing and column selection") {
  const auto panel = random_panel(12, 12, 4, YearMonth(2000, 1));
  const auto part = panel.slice(YearMonth(2000, 3), YearMonth(2000, 5));
  CHECK(part.n() == 3);
  const auto cols = panel.select_columns({3, 1});
  CHECK(cols.assets() == std::vector<std::string>{"a3", "a1"});
  CHECK(cols.values().col(0) == panel.values().col(3));
  CHECK(panel.row_of(YearMonth(2001, 1)) == -1);
}
