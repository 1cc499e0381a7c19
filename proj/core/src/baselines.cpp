#include "bagl/baselines.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bagl/errors.hpp"

namespace bagl {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::equal_weight: return "ew";
    case EstimatorKind::sample: return "sample";
    case EstimatorKind::ledoit_wolf: return "ledoit_wolf";
    case EstimatorKind::rmt_clip: return "rmt_clip";
    case EstimatorKind::bada_pd: return "bada_pd";
    case EstimatorKind::external_file: return "external_file";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& text) {
  if (text == "ew" || text == "equal_weight") return EstimatorKind::equal_weight;
  if (text == "sample") return EstimatorKind::sample;
  if (text == "ledoit_wolf" || text == "lw") return EstimatorKind::ledoit_wolf;
  if (text == "rmt_clip" || text == "rmt") return EstimatorKind::rmt_clip;
  if (text == "bada_pd") return EstimatorKind::bada_pd;
  if (text == "external_file" || text == "external") return EstimatorKind::external_file;
  throw ConfigError("unknown estimator kind '" + text + "'");
}

void EstimatorSpec::validate() const {
  if (kind == EstimatorKind::external_file && path.empty())
    throw ConfigError("external_file estimator needs a path");
  if (kind == EstimatorKind::bada_pd) chain.validate();
}

namespace {

Matrix prepared_data(const ReturnPanel& panel, bool center) {
  Matrix x = panel.values();
  if (center) x.rowwise() -= x.colwise().mean();
  return x;
}

Matrix second_moment(const Matrix& x) {
  Matrix s = Matrix::Zero(x.cols(), x.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

}  // namespace

SymmetricMatrix sample_covariance(const ReturnPanel& panel, bool center) {
  return SymmetricMatrix::from_dense(second_moment(prepared_data(panel, center)));
}

SymmetricMatrix sample_precision(const ReturnPanel& panel, bool center) {
  const Index n = panel.n();
  const Index p = panel.p();
  const Index effective_n = center ? n - 1 : n;
  if (effective_n < p)
    throw EstimatorError("sample covariance is singular: " + std::to_string(n) + " observations for " +
                         std::to_string(p) + " assets");
  const SymmetricMatrix cov = sample_covariance(panel, center);
  const Vector ev = eigenvalues_descending(cov);
  const double lo = ev[ev.size() - 1];
  const double hi = ev[0];
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber)
    throw EstimatorError("sample covariance is singular or ill-conditioned (condition number " +
                         (lo > 0.0 ? format_double(hi / lo) : std::string("inf")) + ")");
  return inverse_spd(cov);
}

ShrinkageResult ledoit_wolf_covariance(const ReturnPanel& panel, bool center) {
  const Matrix x = prepared_data(panel, center);
  const Index n = x.rows();
  const Index p = x.cols();
  const Matrix s = second_moment(x);
  const double mu = s.trace() / static_cast<double>(p);
  const Matrix target = mu * Matrix::Identity(p, p);

  double intensity = 1.0;
  if (n > 1) {
    const double delta = (s - target).squaredNorm() / static_cast<double>(p);
    // sum_t ||x_t x_t' - S||_F^2 = sum((X.^2)'(X.^2)) - n ||S||_F^2
    const Matrix x2 = x.array().square().matrix();
    const double fourth = (x2.transpose() * x2).sum();
    const double spread = std::max(0.0, fourth - static_cast<double>(n) * s.squaredNorm());
    const double beta = spread / (static_cast<double>(p) * static_cast<double>(n) * static_cast<double>(n));
    intensity = delta > 0.0 ? std::min(beta, delta) / delta : 0.0;
    intensity = std::clamp(intensity, 0.0, 1.0);
  }
  const Matrix shrunk = (1.0 - intensity) * s + intensity * target;
  return {SymmetricMatrix::from_dense(shrunk, 1e-12), intensity};
}

double marchenko_pastur_edge(Index p, Index n) {
  if (p < 1 || n < 1) throw ConfigError("Marchenko-Pastur edge needs p, n >= 1");
  const double root = 1.0 + std::sqrt(static_cast<double>(p) / static_cast<double>(n));
  return root * root;
}

SymmetricMatrix clip_correlation_eigenvalues(const SymmetricMatrix& corr, double edge) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(corr.dense());
  if (solver.info() != Eigen::Success) throw EstimatorError("eigen decomposition of correlation failed");
  Vector ev = solver.eigenvalues();
  double bulk_sum = 0.0;
  Index bulk_count = 0;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev[k] <= edge) {
      bulk_sum += ev[k];
      ++bulk_count;
    }
  }
  if (bulk_count > 0) {
    const double avg = bulk_sum / static_cast<double>(bulk_count);
    for (Index k = 0; k < ev.size(); ++k)
      if (ev[k] <= edge) ev[k] = avg;
  }
  const Matrix& v = solver.eigenvectors();
  const Matrix filtered = v * ev.asDiagonal() * v.transpose();
  return SymmetricMatrix::from_dense(0.5 * (filtered + filtered.transpose()));
}

SymmetricMatrix rmt_clip_covariance(const ReturnPanel& panel, bool center) {
  const Matrix s = second_moment(prepared_data(panel, center));
  const Index p = s.rows();
  Vector sd(p);
  for (Index i = 0; i < p; ++i) {
    if (!(s(i, i) > 0.0)) throw DataError("asset '" + panel.assets()[static_cast<std::size_t>(i)] + "' has zero variance");
    sd[i] = std::sqrt(s(i, i));
  }
  const Vector inv_sd = sd.cwiseInverse();
  const Matrix corr = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
  SymmetricMatrix filtered = clip_correlation_eigenvalues(SymmetricMatrix::from_dense(0.5 * (corr + corr.transpose())),
                                                          marchenko_pastur_edge(p, panel.n()));
  SymmetricMatrix cov(p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < i; ++j) cov.set(i, j, filtered(i, j) * sd[i] * sd[j]);
    cov.set(i, i, s(i, i));
  }
  return cov;
}

ExternalPrecision load_external_precision(const std::string& path, std::optional<Index> expected_dim) {
  SymmetricMatrix m;
  try {
    m = read_matrix_csv(path, 1e-10);
  } catch (const DataError& e) {
    throw EstimatorError("external precision '" + path + "': " + e.what());
  }
  if (expected_dim && m.dim() != *expected_dim)
    throw EstimatorError("external precision '" + path + "' is " + std::to_string(m.dim()) + "x" +
                         std::to_string(m.dim()) + ", expected dimension " + std::to_string(*expected_dim));
  if (!is_positive_definite(m)) throw EstimatorError("external precision '" + path + "' is not positive definite");
  return {std::move(m), std::filesystem::path(path).filename().string()};
}

SymmetricMatrix estimate_precision(const EstimatorSpec& spec, const ReturnPanel& window_panel,
                                   std::optional<YearMonth> window_tag, std::optional<std::uint64_t> seed) {
  switch (spec.kind) {
    case EstimatorKind::equal_weight:
      return SymmetricMatrix::identity(window_panel.p());
    case EstimatorKind::sample:
      return sample_precision(window_panel, spec.center);
    case EstimatorKind::ledoit_wolf:
      return inverse_spd(ledoit_wolf_covariance(window_panel, spec.center).covariance);
    case EstimatorKind::rmt_clip:
      return inverse_spd(rmt_clip_covariance(window_panel, spec.center));
    case EstimatorKind::bada_pd: {
      ChainConfig cfg = spec.chain;
      if (seed) cfg.seed = *seed;
      return run_chain(scatter(window_panel), window_panel.n(), cfg).mean_omega;
    }
    case EstimatorKind::external_file: {
      std::filesystem::path p(spec.path);
      if (std::filesystem::is_directory(p)) {
        if (!window_tag) throw ConfigError("external precision directory needs a rebalance date");
        p /= window_tag->compact() + ".csv";
        if (!std::filesystem::exists(p))
          throw EstimatorError("external precision file absent: " + p.string());
      }
      return load_external_precision(p.string(), window_panel.p()).precision;
    }
  }
  throw ConfigError("unhandled estimator kind");
}

}  // namespace bagl
