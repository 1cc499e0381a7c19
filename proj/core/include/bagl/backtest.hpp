#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bagl/baselines.hpp"
#include "bagl/market_data.hpp"
#include "bagl/portfolio.hpp"

namespace bagl {

struct Scenario {
  std::string label;
  Index p = 100;
  Index n = 120;
  YearMonth oos_start{2011, 1};
  YearMonth oos_end{2020, 12};

  void validate() const;
  /// Presets "a".."e": n = 120, 60, 12, 6, 3 with p = 100 over 2011-01..2020-12.
  static Scenario preset(const std::string& label);
};

/// Span of the factor regression that produces the estimation residuals.
enum class ResidualSpan {
  /// One regression over the whole panel, before any windowing.
  full_sample,
  /// For each rebalance, a regression over every panel row before it.
  expanding,
};

struct BacktestOptions {
  int rebalance_every = 3;
  /// Price holdings with residual returns instead of the original returns.
  bool realize_on_residuals = false;
  ResidualSpan residual_span = ResidualSpan::full_sample;
  ResidualizeOptions residualize;
  bool annualize = true;
  std::uint64_t seed = 1;
  int jobs = 1;

  void validate() const;
};

struct BacktestReport {
  std::string strategy;
  Scenario scenario;
  EstimatorSpec estimator;
  std::uint64_t seed = 0;
  /// False when the estimator failed at some rebalance (an "NA" row).
  bool available = true;
  std::string failure;

  std::vector<YearMonth> rebalance_dates;
  std::vector<Weights> weights;
  std::vector<YearMonth> months;
  std::vector<double> returns;
  std::vector<double> rf;

  PerformanceStats performance;
  CompositionStats composition;
  double runtime_seconds = 0.0;
};

/// Rebalance dates oos_start, oos_start + k, ... up to oos_end.
std::vector<YearMonth> rebalance_schedule(const Scenario& scenario, int every = 3);

/// Rolling-window backtest of one strategy. Each rebalance estimates on the n
/// residual months ending the month before it, holds the resulting weights
/// for `rebalance_every` months and records w'r for each held month. An
/// EstimatorError at any rebalance yields available = false.
BacktestReport run_backtest(const ReturnPanel& panel, const FactorPanel& factors, const Scenario& scenario,
                            const EstimatorSpec& estimator, const BacktestOptions& options = {});

struct ComparisonRow {
  std::string strategy;
  bool available = true;
  PerformanceStats performance;
  CompositionStats composition;
};

/// One row per report in input order. Throws DataError if the reports do not
/// share the scenario and the realized months.
std::vector<ComparisonRow> compare_strategies(const std::vector<BacktestReport>& reports);

/// Performance then composition columns; NA for unavailable strategies. `decimals`
/// rounds to fixed notation, otherwise values round-trip.
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows,
                          std::optional<int> decimals = std::nullopt);

/// "month,<strategy>..." with realized returns; NA columns for failed strategies.
void write_returns_csv(std::ostream& out, const std::vector<BacktestReport>& reports);

}  // namespace bagl
