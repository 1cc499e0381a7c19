#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bagl/market_data.hpp"
#include "bagl/matrix.hpp"
#include "bagl/random.hpp"

namespace bagl {

/// Gamma(r, s) prior (shape r, rate s) on every shrinkage parameter.
struct HyperParams {
  double r = 1e-2;
  double s = 1e-6;

  void validate() const;
};

struct ChainConfig {
  long burn_in = 5000;
  long keep = 10000;
  std::uint64_t seed = 1;
  /// Hit-and-Run moves per omega_12 draw; 0 selects max(10, p-1).
  int har_steps = 0;
  HyperParams hyper;
  /// Largest eigenvalues of each retained draw to record (0 disables).
  int trace_top_k = 0;

  void validate() const;
  [[nodiscard]] int har_steps_for(Index block_dim) const {
    return har_steps > 0 ? har_steps : default_har_steps(block_dim);
  }
};

/// One Gibbs snapshot. `tau` has a zero diagonal (off-diagonal latent
/// scales only); `lambda` covers the diagonal and upper triangle.
struct ChainState {
  SymmetricMatrix omega;
  SymmetricMatrix tau;
  SymmetricMatrix lambda;
  long sweep_index = 0;
};

struct PosteriorSummary {
  SymmetricMatrix mean_omega;
  SymmetricMatrix std_omega;
  /// One row per retained sweep: the trace_top_k largest eigenvalues.
  std::vector<std::vector<double>> eigen_traces;
  long n_draws = 0;
  ChainConfig config;
  double runtime_seconds = 0.0;
};

/// Omega = I, tau = 1, lambda = r/s clipped to [1e-4, 1e4].
ChainState init_chain(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg);

struct Omega22Draw {
  double omega22 = 0.0;
  double gamma_part = 0.0;
};

/// gamma ~ Gamma(n/2 + 1, s22/2 + lambda22); omega22 = gamma + w' A w with
/// A = Omega_11^{-1}.
Omega22Draw draw_omega22(RngStream& rng, Index n_obs, double s22, double lambda22, const Vector& omega12,
                         const Matrix& omega11_inv);

/// Precision of the omega_12 full conditional:
/// (s22 + 2 lambda22) Omega_11^{-1} + diag(1/tau_12).
Matrix omega12_precision(double s22, double lambda22, const Vector& tau12, const Matrix& omega11_inv);

/// C = omega12_precision(...)^{-1}, exposed for diagnostics and tests.
Matrix omega12_covariance(double s22, double lambda22, const Vector& tau12, const Matrix& omega11_inv);

/// Normal(-C s12, C) restricted to {w : w' Omega_11^{-1} w < omega22}, drawn
/// with Hit-and-Run from `current`. Throws InvariantError if `current` is not
/// strictly feasible.
Vector draw_omega12(RngStream& rng, const Vector& s12, double s22, double lambda22, const Vector& tau12,
                    const Matrix& omega11_inv, double omega22, const Vector& current, int har_steps);

/// lambda_ij ~ Gamma(r + 1, s + |omega_ij|).
double draw_lambda(RngStream& rng, double r, double s, double omega_ij);

/// Smallest |omega_ij| used in the inverse Gaussian mean lambda/|omega_ij|.
inline constexpr double kTauOmegaFloor = 1e-12;

/// upsilon ~ IG(lambda/|omega|, lambda^2); returns tau = 1/upsilon.
double draw_tau(RngStream& rng, double lambda_ij, double omega_ij);

/// One full scan over i = 1..p. Throws InvariantError (with the offending
/// partition described) if positive definiteness is lost.
void sweep(ChainState& state, const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg, RngStream& rng);

using SweepObserver = std::function<void(const ChainState&)>;

/// Burn-in then `keep` retained sweeps averaged into the posterior mean. The
/// chain's stream is RngStream::derive(cfg.seed, chain_index).
PosteriorSummary run_chain(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg,
                           const SweepObserver& observer = {}, std::uint64_t chain_index = 0);

/// Independent chains 0..n_chains-1, at most `jobs` at a time.
std::vector<PosteriorSummary> run_chains(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg,
                                         int n_chains, int jobs = 1);

/// "sweep,ev1,...,evk" rows.
void write_eigen_traces_csv(std::ostream& out, const std::vector<std::vector<double>>& traces);
std::vector<std::vector<double>> read_eigen_traces_csv(std::istream& in);

}  // namespace bagl
