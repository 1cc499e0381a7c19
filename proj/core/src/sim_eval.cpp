#include "bagl/sim_eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bagl/errors.hpp"

namespace bagl {

SymmetricMatrix make_ar4_precision(Index p) {
  if (p < 5) throw ConfigError("AR(4) design needs p >= 5");
  static constexpr double band[] = {1.0, 0.8, 0.6, 0.4, 0.2};
  SymmetricMatrix m(p);
  for (Index i = 0; i < p; ++i)
    for (Index lag = 0; lag <= 4 && i + lag < p; ++lag) m.set(i + lag, i, band[lag]);
  if (!is_positive_definite(m)) throw InvariantError("AR(4) precision is not positive definite");
  return m;
}

ReturnPanel sample_mvn_zero(RngStream& rng, const SymmetricMatrix& precision, Index n) {
  if (n < 1) throw ConfigError("sample size must be >= 1");
  const Index p = precision.dim();
  const auto chol = cholesky_lower(inverse_spd(precision));
  if (!chol) throw EstimatorError("covariance is not positive definite");
  const Vector zero = Vector::Zero(p);
  Matrix values(n, p);
  for (Index t = 0; t < n; ++t) values.row(t) = draw_mvn(rng, zero, *chol).transpose();
  std::vector<YearMonth> dates;
  dates.reserve(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) dates.push_back(YearMonth(2000, 1).plus_months(static_cast<int>(t)));
  std::vector<std::string> assets;
  for (Index j = 0; j < p; ++j) assets.push_back("x" + std::to_string(j + 1));
  return ReturnPanel(std::move(dates), std::move(assets), std::move(values));
}

double matthews_correlation(long long tn, long long fp, long long fn, long long tp, bool* degenerate) {
  const double denom = std::sqrt(static_cast<double>(tp + fp)) * std::sqrt(static_cast<double>(tp + fn)) *
                       std::sqrt(static_cast<double>(tn + fp)) * std::sqrt(static_cast<double>(tn + fn));
  if (degenerate) *degenerate = denom == 0.0;
  if (denom == 0.0) return 0.0;
  const double num = static_cast<double>(tp) * static_cast<double>(tn) - static_cast<double>(fp) * static_cast<double>(fn);
  return num / denom;
}

StructureScore score_structure(const SymmetricMatrix& estimate, const SymmetricMatrix& truth, double threshold,
                               ScoreMode mode) {
  if (estimate.dim() != truth.dim()) throw DataError("estimate and truth differ in dimension");
  const Index p = truth.dim();
  StructureScore s;
  auto tally = [&](Index i, Index j, long long weight) {
    const bool actual = truth(i, j) != 0.0;
    const bool found = std::abs(estimate(i, j)) >= threshold;
    if (actual) (found ? s.tp : s.fn) += weight;
    else (found ? s.fp : s.tn) += weight;
  };
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < i; ++j) tally(i, j, mode == ScoreMode::all_elements ? 2 : 1);
    if (mode == ScoreMode::all_elements) tally(i, i, 1);
  }
  s.specificity = s.tn + s.fp > 0 ? static_cast<double>(s.tn) / static_cast<double>(s.tn + s.fp) : 1.0;
  s.sensitivity = s.tp + s.fn > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 1.0;
  s.mcc = matthews_correlation(s.tn, s.fp, s.fn, s.tp, &s.mcc_degenerate);
  return s;
}

Index select_top_eigen_count(const SymmetricMatrix& truth, double coverage, EigenContribution mode) {
  if (!(coverage >= 0.0 && coverage < 1.0)) throw ConfigError("coverage must lie in [0, 1)");
  Vector contrib = eigenvalues_descending(truth);
  if (mode == EigenContribution::squared) {
    contrib = contrib.array().square().matrix();
    std::sort(contrib.data(), contrib.data() + contrib.size(), std::greater<>());
  }
  const double total = contrib.sum();
  double running = 0.0;
  for (Index k = 0; k < contrib.size(); ++k) {
    running += contrib[k];
    if (running / total > coverage) return k + 1;
  }
  return contrib.size();
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw DataError("Gelman-Rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 10) throw DataError("Gelman-Rubin needs chains of length >= 10");
  for (const auto& c : chains)
    if (c.size() != n) throw DataError("Gelman-Rubin chains differ in length");

  std::vector<double> means(m);
  double within = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double mean = 0.0;
    for (double x : chains[c]) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : chains[c]) ss += (x - mean) * (x - mean);
    means[c] = mean;
    within += ss / static_cast<double>(n - 1);
  }
  within /= static_cast<double>(m);
  if (!(within > 0.0)) throw DataError("Gelman-Rubin undefined: zero within-chain variance");

  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= static_cast<double>(m);
  double between_over_n = 0.0;
  for (double mu : means) between_over_n += (mu - grand) * (mu - grand);
  between_over_n /= static_cast<double>(m - 1);

  const double nn = static_cast<double>(n);
  const double pooled = (nn - 1.0) / nn * within + between_over_n;
  return std::sqrt(pooled / within);
}

std::pair<double, double> hpdi(std::vector<double> samples, double mass) {
  if (samples.size() < 100) throw DataError("HPDI needs at least 100 samples");
  if (!(mass > 0.0 && mass < 1.0)) throw ConfigError("HPDI mass must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const auto m = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n)));
  std::size_t best = 0;
  double width = samples[m - 1] - samples[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double w = samples[i + m - 1] - samples[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {samples[best], samples[best + m - 1]};
}

ConvergenceReport convergence_report(const std::vector<std::vector<std::vector<double>>>& traces, double mass) {
  if (traces.size() < 2) throw DataError("convergence report needs at least two chains");
  ConvergenceReport report;
  report.n_chains = static_cast<int>(traces.size());
  report.mass = mass;
  if (traces.front().empty()) throw DataError("empty eigenvalue trace");
  const std::size_t k = traces.front().front().size();
  report.k = static_cast<int>(k);
  for (const auto& chain : traces)
    for (const auto& row : chain)
      if (row.size() != k) throw DataError("ragged eigenvalue trace");

  for (std::size_t j = 0; j < k; ++j) {
    std::vector<std::vector<double>> per_chain;
    std::vector<double> pooled;
    for (const auto& chain : traces) {
      std::vector<double> series;
      series.reserve(chain.size());
      for (const auto& row : chain) series.push_back(row[j]);
      pooled.insert(pooled.end(), series.begin(), series.end());
      per_chain.push_back(std::move(series));
    }
    double mean = 0.0;
    for (double x : pooled) mean += x;
    mean /= static_cast<double>(pooled.size());
    double ss = 0.0;
    for (double x : pooled) ss += (x - mean) * (x - mean);
    ConvergenceRow row;
    row.rank = static_cast<int>(j + 1);
    row.mean = mean;
    row.std_dev = std::sqrt(ss / static_cast<double>(pooled.size() - 1));
    std::tie(row.hpdi_lower, row.hpdi_upper) = hpdi(std::move(pooled), mass);
    row.rhat = gelman_rubin(per_chain);
    report.rows.push_back(row);
  }
  return report;
}

void SimulationConfig::validate() const {
  if (p < 5) throw ConfigError("simulation needs p >= 5");
  if (n < 1) throw ConfigError("simulation needs n >= 1");
  if (n_chains < 2) throw ConfigError("n_chains must be >= 2 for the convergence diagnostic");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!(coverage >= 0.0 && coverage < 1.0)) throw ConfigError("coverage must lie in [0, 1)");
  if (!(hpdi_mass > 0.0 && hpdi_mass < 1.0)) throw ConfigError("hpdi_mass must lie in (0, 1)");
  chain.validate();
}

SimulationReport run_simulation(const SimulationConfig& cfg, const SweepObserver& observer) {
  cfg.validate();
  SimulationReport out;
  out.truth = make_ar4_precision(cfg.p);
  RngStream data_rng = RngStream::derive(cfg.seed, 0xda7a);
  out.data = sample_mvn_zero(data_rng, out.truth, cfg.n);

  ChainConfig chain = cfg.chain;
  chain.seed = cfg.seed;
  if (chain.trace_top_k <= 0)
    chain.trace_top_k = static_cast<int>(select_top_eigen_count(out.truth, cfg.coverage, cfg.eigen_mode));

  const ScatterMatrix sc = scatter(out.data);
  if (observer) {
    for (int c = 0; c < cfg.n_chains; ++c)
      out.chains.push_back(run_chain(sc, cfg.n, chain, observer, static_cast<std::uint64_t>(c)));
  } else {
    out.chains = run_chains(sc, cfg.n, chain, cfg.n_chains, cfg.jobs);
  }

  out.estimate = SymmetricMatrix(cfg.p);
  for (const auto& s : out.chains) out.estimate += s.mean_omega;
  out.estimate *= 1.0 / static_cast<double>(out.chains.size());
  out.score = score_structure(out.estimate, out.truth, cfg.threshold, cfg.score_mode);

  if (out.chains.size() >= 2) {
    std::vector<std::vector<std::vector<double>>> traces;
    for (const auto& s : out.chains) traces.push_back(s.eigen_traces);
    out.convergence = convergence_report(traces, cfg.hpdi_mass);
  }
  return out;
}

void write_structure_csv(std::ostream& out, const StructureScore& s) {
  out << "tn,fp,fn,tp,specificity,sensitivity,mcc,mcc_degenerate\n"
      << s.tn << ',' << s.fp << ',' << s.fn << ',' << s.tp << ',' << format_double(s.specificity) << ','
      << format_double(s.sensitivity) << ',' << format_double(s.mcc) << ',' << (s.mcc_degenerate ? 1 : 0) << '\n';
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "rank,mean,std,hpdi_lower,hpdi_upper,rhat\n";
  for (const auto& r : report.rows) {
    out << r.rank << ',' << format_double(r.mean) << ',' << format_double(r.std_dev) << ','
        << format_double(r.hpdi_lower) << ',' << format_double(r.hpdi_upper) << ',' << format_double(r.rhat) << '\n';
  }
}

}  // namespace bagl
