#include <algorithm>
#include "bagl/portfolio.hpp"

#include <cmath>
#include <ostream>

#include "bagl/errors.hpp"

namespace bagl {

void Weights::validate() const {
  if (w.size() == 0) throw DataError("empty weight vector");
  if (!w.allFinite()) throw DataError("non-finite weight");
  if (!assets.empty() && static_cast<Index>(assets.size()) != w.size())
    throw DataError("weights and asset list differ in length");
  if (std::abs(w.sum() - 1.0) > 1e-10) throw DataError("weights do not sum to one");
}

Weights gmv_weights(const SymmetricMatrix& precision, std::vector<std::string> assets, YearMonth as_of) {
  const auto chol = cholesky_lower(precision);
  if (!chol) throw EstimatorError("precision matrix is not positive definite");
  const Vector row_sums = precision * Vector::Ones(precision.dim());
  const double total = row_sums.sum();
  Weights out{row_sums / total, std::move(assets), as_of};
  out.validate();
  return out;
}

Weights equal_weights(Index p, std::vector<std::string> assets, YearMonth as_of) {
  if (p < 1) throw ConfigError("equal weights need p >= 1");
  Weights out{Vector::Constant(p, 1.0 / static_cast<double>(p)), std::move(assets), as_of};
  out.validate();
  return out;
}

CompositionStats composition(const Weights& w, const std::optional<Weights>& prev) {
  const Index p = w.p();
  CompositionStats c;
  c.gross_exposure = w.w.cwiseAbs().sum();
  c.max_short = std::min(0.0, w.w.minCoeff());
  Index active = 0;
  double hdi = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double v = w.w[i];
    if (v < 0.0) c.short_exposure -= v;
    if (v != 0.0) ++active;
    const double star = std::abs(v) / c.gross_exposure;
    hdi += star * star;
  }
  c.active_position_fraction = static_cast<double>(active) / static_cast<double>(p);
  c.hdi = hdi;
  if (prev) {
    if (prev->p() != p || (!prev->assets.empty() && !w.assets.empty() && prev->assets != w.assets))
      throw DataError("turnover between different asset universes");
    c.turnover = (w.w - prev->w).cwiseAbs().sum();
  }
  return c;
}

CompositionStats average(const std::vector<CompositionStats>& stats) {
  CompositionStats m;
  if (stats.empty()) return m;
  for (const auto& s : stats) {
    m.gross_exposure += s.gross_exposure;
    m.short_exposure += s.short_exposure;
    m.max_short += s.max_short;
    m.active_position_fraction += s.active_position_fraction;
    m.hdi += s.hdi;
    m.turnover += s.turnover;
  }
  const double k = static_cast<double>(stats.size());
  m.gross_exposure /= k;
  m.short_exposure /= k;
  m.max_short /= k;
  m.active_position_fraction /= k;
  m.hdi /= k;
  m.turnover /= k;
  return m;
}

PerformanceStats performance(const std::vector<double>& monthly, const std::vector<double>& rf_monthly,
                             bool annualize) {
  const std::size_t n = monthly.size();
  if (n < 2) throw DataError("performance needs at least two returns");
  if (rf_monthly.size() != n) throw DataError("return and risk-free series are misaligned");
  double mean = 0.0;
  double rf_mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mean += monthly[t];
    rf_mean += rf_monthly[t];
  }
  mean /= static_cast<double>(n);
  rf_mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : monthly) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const auto [lo, hi] = std::minmax_element(monthly.begin(), monthly.end());
  if (*lo == *hi || !(sd > 0.0)) throw DataError("zero variance return series");

  const double scale = annualize ? 12.0 : 1.0;
  PerformanceStats out;
  out.mean_return = scale * mean;
  out.std_dev = std::sqrt(scale) * sd;
  out.sharpe = (out.mean_return - scale * rf_mean) / out.std_dev;
  return out;
}

void write_weights_csv(std::ostream& out, const std::vector<Weights>& weights) {
  out << "date,asset,weight\n";
  for (const auto& w : weights) {
    for (Index i = 0; i < w.p(); ++i) {
      out << w.as_of.compact() << ','
          << (w.assets.empty() ? std::to_string(i) : w.assets[static_cast<std::size_t>(i)]) << ','
          << format_double(w.w[i]) << '\n';
    }
  }
}

}  // namespace bagl
