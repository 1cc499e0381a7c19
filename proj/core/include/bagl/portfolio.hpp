#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bagl/matrix.hpp"
#include "bagl/year_month.hpp"

namespace bagl {

struct Weights {
  Vector w;
  std::vector<std::string> assets;
  YearMonth as_of;

  [[nodiscard]] Index p() const { return w.size(); }
  /// Throws DataError unless entries are finite, sum to 1 within 1e-10 and
  /// the asset list (when present) matches the dimension.
  void validate() const;
};

struct CompositionStats {
  double gross_exposure = 0.0;
  double short_exposure = 0.0;
  double max_short = 0.0;
  double active_position_fraction = 0.0;
  double hdi = 0.0;
  double turnover = 0.0;
};

struct PerformanceStats {
  double mean_return = 0.0;
  double std_dev = 0.0;
  double sharpe = 0.0;
};

/// w = Omega 1 / (1' Omega 1). Throws EstimatorError if Omega is not PD.
Weights gmv_weights(const SymmetricMatrix& precision, std::vector<std::string> assets = {}, YearMonth as_of = {});

Weights equal_weights(Index p, std::vector<std::string> assets = {}, YearMonth as_of = {});

/// Turnover is sum |w - prev| over target weights, 0 without `prev`.
CompositionStats composition(const Weights& w, const std::optional<Weights>& prev = std::nullopt);

/// Field-wise arithmetic mean.
CompositionStats average(const std::vector<CompositionStats>& stats);

/// Annualized (x12 mean, x sqrt(12) sample std) unless `annualize` is false.
/// Sharpe is computed on the excess over `rf_monthly`. Throws DataError on
/// misaligned or too-short input and on zero variance.
PerformanceStats performance(const std::vector<double>& monthly, const std::vector<double>& rf_monthly,
                             bool annualize = true);

/// "date,asset,weight" rows, one block per Weights.
void write_weights_csv(std::ostream& out, const std::vector<Weights>& weights);

}  // namespace bagl
