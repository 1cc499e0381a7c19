#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "bagl/gibbs.hpp"
#include "bagl/market_data.hpp"
#include "bagl/matrix.hpp"
#include "bagl/random.hpp"

namespace bagl {

/// Banded AR(4) precision: 1 on the diagonal, 0.8/0.6/0.4/0.2 at lags 1..4.
SymmetricMatrix make_ar4_precision(Index p);

/// n rows from N(0, precision^{-1}) via the Cholesky factor of the covariance.
/// Rows are dated monthly from 2000-01; assets are named x1..xp.
ReturnPanel sample_mvn_zero(RngStream& rng, const SymmetricMatrix& precision, Index n);

enum class ScoreMode {
  /// Unordered off-diagonal pairs i < j.
  off_diagonal_pairs,
  /// Every ordered element including the diagonal (p^2 cells).
  all_elements,
};

struct StructureScore {
  long long tn = 0;
  long long fp = 0;
  long long fn = 0;
  long long tp = 0;
  double specificity = 0.0;
  double sensitivity = 0.0;
  double mcc = 0.0;
  /// Set when the MCC denominator is zero (mcc is then reported as 0).
  bool mcc_degenerate = false;
};

/// Standard Matthews correlation from the four counts.
double matthews_correlation(long long tn, long long fp, long long fn, long long tp, bool* degenerate = nullptr);

/// An edge is declared where |estimate_ij| >= threshold and is true where
/// truth_ij != 0.
StructureScore score_structure(const SymmetricMatrix& estimate, const SymmetricMatrix& truth, double threshold = 1e-3,
                               ScoreMode mode = ScoreMode::off_diagonal_pairs);

enum class EigenContribution {
  /// Contribution of eigenvalue k is ev_k^2 (variance share of an uncentered
  /// PCA on the matrix rows).
  squared,
  /// Contribution is ev_k itself.
  linear,
};

/// Smallest k whose leading contributions exceed `coverage` of the total.
/// Requires 0 <= coverage < 1.
Index select_top_eigen_count(const SymmetricMatrix& truth, double coverage,
                             EigenContribution mode = EigenContribution::squared);

/// Classic potential scale reduction sqrt(((n-1)/n W + B/n) / W). Needs >= 2
/// chains of equal length >= 10; throws DataError on zero within-chain variance.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

/// Shortest interval holding ceil(mass * N) of the sorted samples.
std::pair<double, double> hpdi(std::vector<double> samples, double mass);

struct ConvergenceRow {
  int rank = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double hpdi_lower = 0.0;
  double hpdi_upper = 0.0;
  double rhat = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  int k = 0;
  int n_chains = 0;
  double mass = 0.95;
};

/// `traces[c][t][j]`: chain c, retained sweep t, j-th largest eigenvalue.
/// Mean, std and HPDI pool all chains.
ConvergenceReport convergence_report(const std::vector<std::vector<std::vector<double>>>& traces, double mass = 0.95);

struct SimulationConfig {
  Index p = 300;
  Index n = 3;
  ChainConfig chain;
  int n_chains = 2;
  int jobs = 1;
  double threshold = 1e-3;
  double coverage = 0.8;
  EigenContribution eigen_mode = EigenContribution::squared;
  ScoreMode score_mode = ScoreMode::off_diagonal_pairs;
  double hpdi_mass = 0.95;
  /// Seeds the data draw and, through chain.seed, the chains.
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulationReport {
  SymmetricMatrix truth;
  ReturnPanel data;
  /// Average of the chain posterior means.
  SymmetricMatrix estimate;
  StructureScore score;
  ConvergenceReport convergence;
  std::vector<PosteriorSummary> chains;
};

/// AR(4) truth, one data draw, n_chains chains tracking the top eigenvalues
/// picked by select_top_eigen_count, then structure and convergence scoring.
SimulationReport run_simulation(const SimulationConfig& cfg, const SweepObserver& observer = {});

void write_structure_csv(std::ostream& out, const StructureScore& score);
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace bagl
