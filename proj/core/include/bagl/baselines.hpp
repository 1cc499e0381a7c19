#pragma once

#include <optional>
#include <string>

#include "bagl/gibbs.hpp"
#include "bagl/market_data.hpp"
#include "bagl/matrix.hpp"

namespace bagl {

enum class EstimatorKind { equal_weight, sample, ledoit_wolf, rmt_clip, bada_pd, external_file };

/// Config-key spelling: "ew", "sample", "ledoit_wolf", "rmt_clip", "bada_pd", "external_file".
std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& text);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::bada_pd;
  /// Row label in reports; defaults to to_string(kind).
  std::string label;
  ChainConfig chain;
  /// external_file: a single matrix file, or a directory holding YYYYMM.csv
  /// per rebalance date.
  std::string path;
  /// Subtract column means before forming sample moments.
  bool center = false;

  [[nodiscard]] std::string display_label() const { return label.empty() ? to_string(kind) : label; }
  void validate() const;
};

/// Condition number above which a sample covariance is treated as singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// Second-moment matrix S/n (zero-mean convention) or the centered version.
SymmetricMatrix sample_covariance(const ReturnPanel& panel, bool center = false);

/// Inverse of the sample covariance. Throws EstimatorError("... singular ...")
/// when n <= p or the condition number exceeds kMaxConditionNumber.
SymmetricMatrix sample_precision(const ReturnPanel& panel, bool center = false);

struct ShrinkageResult {
  SymmetricMatrix covariance;
  double intensity = 0.0;
};

/// (1 - d) S + d mu I with mu = tr(S)/p and the analytic Ledoit-Wolf
/// intensity d clipped to [0, 1]; a single observation gives d = 1.
ShrinkageResult ledoit_wolf_covariance(const ReturnPanel& panel, bool center = false);

/// Marchenko-Pastur upper edge (1 + sqrt(p/n))^2.
double marchenko_pastur_edge(Index p, Index n);

/// Replaces every eigenvalue <= edge by the average of those eigenvalues.
SymmetricMatrix clip_correlation_eigenvalues(const SymmetricMatrix& corr, double edge);

/// Eigenvalue clipping of the sample correlation matrix, rescaled to a
/// covariance with the sample variances on the diagonal. Throws DataError on
/// a zero-variance column.
SymmetricMatrix rmt_clip_covariance(const ReturnPanel& panel, bool center = false);

struct ExternalPrecision {
  SymmetricMatrix precision;
  std::string source;
};

/// Loads a header-less p x p CSV; checks symmetry (1e-10), positive
/// definiteness and, if given, the dimension. Errors are EstimatorError.
ExternalPrecision load_external_precision(const std::string& path, std::optional<Index> expected_dim = {});

/// Precision matrix for one estimation window, dispatching on spec.kind.
/// `window_end` selects the file when spec.path is a directory; `seed`
/// overrides spec.chain.seed for bada_pd.
SymmetricMatrix estimate_precision(const EstimatorSpec& spec, const ReturnPanel& window_panel,
                                   std::optional<YearMonth> window_tag = {}, std::optional<std::uint64_t> seed = {});

}  // namespace bagl
