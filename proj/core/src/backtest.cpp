#include "bagl/backtest.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "bagl/errors.hpp"
#include "bagl/random.hpp"

namespace bagl {

void Scenario::validate() const {
  if (p < 1) throw ConfigError("scenario p must be >= 1");
  if (n < 1) throw ConfigError("scenario n must be >= 1");
  if (!oos_start.valid() || !oos_end.valid()) throw ConfigError("scenario has an invalid month");
  if (oos_end < oos_start) throw ConfigError("scenario oos_end precedes oos_start");
}

Scenario Scenario::preset(const std::string& label) {
  static const std::pair<const char*, Index> table[] = {{"a", 120}, {"b", 60}, {"c", 12}, {"d", 6}, {"e", 3}};
  for (const auto& [name, n] : table) {
    if (label == name) return Scenario{label, 100, n, {2011, 1}, {2020, 12}};
  }
  throw ConfigError("unknown scenario '" + label + "' (expected a..e)");
}

void BacktestOptions::validate() const {
  if (rebalance_every < 1) throw ConfigError("rebalance_every must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::vector<YearMonth> rebalance_schedule(const Scenario& scenario, int every) {
  std::vector<YearMonth> out;
  for (YearMonth t = scenario.oos_start; t <= scenario.oos_end; t = t.plus_months(every)) out.push_back(t);
  return out;
}

namespace {

struct Prepared {
  ReturnPanel original;
  std::optional<ReturnPanel> residual_full;
};

ReturnPanel take_assets(const ReturnPanel& panel, Index p) {
  if (panel.p() < p)
    throw DataError("panel has " + std::to_string(panel.p()) + " assets, scenario needs " + std::to_string(p));
  if (panel.p() == p) return panel;
  std::vector<Index> cols(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) cols[static_cast<std::size_t>(j)] = j;
  return panel.select_columns(cols);
}

ReturnPanel rows_through(const ReturnPanel& panel, const YearMonth& last) {
  return panel.slice(panel.dates().front(), last);
}

ReturnPanel estimation_window(const Prepared& prep, const FactorPanel& factors, const Scenario& scenario,
                              const BacktestOptions& options, const YearMonth& rebalance) {
  const YearMonth end = rebalance.plus_months(-1);
  if (prep.residual_full) return window(*prep.residual_full, end, scenario.n);
  const ReturnPanel history = rows_through(prep.original, end);
  return window(residualize(history, factors, options.residualize), end, scenario.n);
}

}  // namespace

BacktestReport run_backtest(const ReturnPanel& panel, const FactorPanel& factors, const Scenario& scenario,
                            const EstimatorSpec& estimator, const BacktestOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  scenario.validate();
  estimator.validate();
  options.validate();
  factors.validate();

  Prepared prep{take_assets(panel, scenario.p), std::nullopt};
  if (prep.original.row_of(scenario.oos_end) < 0)
    throw DataError("panel does not cover oos_end " + scenario.oos_end.compact());
  const YearMonth first_needed = scenario.oos_start.plus_months(-static_cast<int>(scenario.n));
  if (prep.original.dates().front() > first_needed)
    throw DataError("insufficient history: scenario needs data from " + first_needed.compact());
  std::optional<ReturnPanel> full_residual;
  if (options.residual_span == ResidualSpan::full_sample || options.realize_on_residuals)
    full_residual = residualize(prep.original, factors, options.residualize);
  const ReturnPanel pricing = options.realize_on_residuals ? *full_residual : prep.original;
  if (options.residual_span == ResidualSpan::full_sample) prep.residual_full = std::move(full_residual);

  BacktestReport report;
  report.strategy = estimator.display_label();
  report.scenario = scenario;
  report.estimator = estimator;
  report.seed = options.seed;
  report.rebalance_dates = rebalance_schedule(scenario, options.rebalance_every);

  const std::size_t k_total = report.rebalance_dates.size();
  std::vector<std::optional<Weights>> targets(k_total);
  std::vector<std::string> errors(k_total);
  const auto& assets = prep.original.assets();

  auto solve = [&](std::size_t k) {
    const YearMonth t = report.rebalance_dates[k];
    if (estimator.kind == EstimatorKind::equal_weight) {
      targets[k] = equal_weights(scenario.p, assets, t);
      return;
    }
    const ReturnPanel win = estimation_window(prep, factors, scenario, options, t);
    if (!(win.dates().back() < t)) throw InvariantError("estimation window overlaps rebalance " + t.compact());
    try {
      const SymmetricMatrix omega =
          estimate_precision(estimator, win, t, RngStream::derive(options.seed, k).next_u64());
      targets[k] = gmv_weights(omega, assets, t);
    } catch (const EstimatorError& e) {
      errors[k] = t.compact() + ": " + e.what();
    }
  };

  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.jobs), k_total));
  if (workers <= 1) {
    for (std::size_t k = 0; k < k_total; ++k) solve(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < k_total; k = next++) {
          try {
            solve(k);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (std::size_t k = 0; k < k_total; ++k) {
    if (!errors[k].empty()) {
      report.available = false;
      report.failure = errors[k];
      break;
    }
  }

  std::vector<CompositionStats> comps;
  for (std::size_t k = 0; k < k_total; ++k) {
    const YearMonth t = report.rebalance_dates[k];
    for (int h = 0; h < options.rebalance_every; ++h) {
      const YearMonth m = t.plus_months(h);
      if (m > scenario.oos_end) break;
      const Index row = pricing.row_of(m);
      if (row < 0) throw DataError("no returns for held month " + m.compact());
      const Index frow = factors.row_of(m);
      if (frow < 0) throw DataError("no risk-free rate for " + m.compact());
      report.months.push_back(m);
      report.rf.push_back(factors.rf[frow]);
      if (report.available) report.returns.push_back(pricing.values().row(row).dot(targets[k]->w));
    }
    if (report.available) {
      comps.push_back(composition(*targets[k], k > 0 ? targets[k - 1] : std::nullopt));
      report.weights.push_back(*targets[k]);
    }
  }

  if (report.available) {
    report.performance = performance(report.returns, report.rf, options.annualize);
    report.composition = average(comps);
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<ComparisonRow> compare_strategies(const std::vector<BacktestReport>& reports) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports) {
    if (!rows.empty()) {
      const auto& first = reports.front();
      if (r.scenario.n != first.scenario.n || r.scenario.p != first.scenario.p ||
          r.scenario.oos_start != first.scenario.oos_start || r.scenario.oos_end != first.scenario.oos_end)
        throw DataError("strategy '" + r.strategy + "' uses a different scenario");
      if (r.months != first.months) throw DataError("strategy '" + r.strategy + "' covers different months");
    }
    rows.push_back({r.strategy, r.available, r.performance, r.composition});
  }
  return rows;
}

namespace {

std::string cell(double v, std::optional<int> decimals) {
  if (!decimals) return format_double(v);
  char buf[64];
  double rounded = v;
  // keep "-0.000" out of fixed-point output
  if (std::abs(v) < 0.5 * std::pow(10.0, -*decimals)) rounded = 0.0;
  std::snprintf(buf, sizeof buf, "%.*f", *decimals, rounded);
  return buf;
}

}  // namespace

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows, std::optional<int> decimals) {
  out << "strategy,mean_return,std_dev,sharpe,gross_exposure,short_exposure,max_short,active_position_fraction,"
         "hdi,turnover\n";
  for (const auto& r : rows) {
    out << r.strategy;
    if (!r.available) {
      for (int c = 0; c < 9; ++c) out << ",NA";
      out << '\n';
      continue;
    }
    const auto& p = r.performance;
    const auto& c = r.composition;
    for (double v : {p.mean_return, p.std_dev, p.sharpe, c.gross_exposure, c.short_exposure, c.max_short,
                     c.active_position_fraction, c.hdi, c.turnover})
      out << ',' << cell(v, decimals);
    out << '\n';
  }
}

void write_returns_csv(std::ostream& out, const std::vector<BacktestReport>& reports) {
  if (reports.empty()) return;
  out << "month";
  for (const auto& r : reports) out << ',' << r.strategy;
  out << '\n';
  const auto& months = reports.front().months;
  for (std::size_t t = 0; t < months.size(); ++t) {
    out << months[t].compact();
    for (const auto& r : reports) out << ',' << (r.available ? format_double(r.returns[t]) : std::string("NA"));
    out << '\n';
  }
}

}  // namespace bagl
