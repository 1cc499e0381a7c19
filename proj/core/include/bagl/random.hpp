#pragma once

#include <cstdint>
#include <random>

#include "bagl/matrix.hpp"

namespace bagl {

/// Seeded pseudo-random stream. Identical seeds give identical variate
/// sequences for every generator below; all transforms are implemented here
/// rather than through std:: distributions so the sequence does not depend on
/// the standard library vendor.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Independent child stream; deterministic in (seed, index).
  [[nodiscard]] static RngStream derive(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Gamma with density proportional to x^(shape-1) exp(-rate x).
/// Marsaglia-Tsang squeeze/rejection; shapes below one are boosted through
/// Gamma(shape+1) * U^(1/shape) evaluated in log space. Results that would
/// underflow are floored at the smallest normal double so draws stay positive.
double draw_gamma(RngStream& rng, double shape, double rate);

/// Inverse Gaussian IG(mu, lambda): mean mu, variance mu^3/lambda.
/// Michael-Schucany-Haas transformation with roots; the smaller root is
/// computed in cancellation-free form.
double draw_inverse_gaussian(RngStream& rng, double mu, double lambda);

/// Exponential with the given rate.
double draw_exponential(RngStream& rng, double rate);

/// Normal(mean, sd^2) truncated to (lo, hi). Inverse-CDF on the complementary
/// error function, with rejection when the interval mass underflows.
double draw_truncated_normal(RngStream& rng, double mean, double sd, double lo, double hi);

/// Uniform direction on the unit sphere in R^dim.
Vector draw_unit_direction(RngStream& rng, Index dim);

/// Multivariate normal N(mean, L L') given the lower Cholesky factor L.
Vector draw_mvn(RngStream& rng, const Vector& mean, const Matrix& chol_lower);

/// Normal(mean, cov) restricted to the ellipsoid {x : x' A x < bound}.
struct TruncatedMvnSpec {
  Vector mean;
  SymmetricMatrix cov;
  SymmetricMatrix constraint_matrix;
  double bound = 0.0;
};

/// Hit-and-Run over an ellipsoid-truncated multivariate normal.
///
/// Moves are made in whitened coordinates z (x = mean + M z, M M' = cov), so a
/// uniform direction u on the sphere maps to the line x + t M u and the
/// conditional density along it is a unit-variance normal in t. The ellipsoid
/// cuts the line in an interval found from a quadratic in t; t is drawn from
/// the truncated normal on that interval. A proposed point is kept only if it
/// satisfies x' A x < bound as evaluated in floating point, so the returned
/// point is always strictly feasible.
class HitAndRunSampler {
 public:
  static HitAndRunSampler from_covariance(Vector mean, const Matrix& cov, Matrix constraint, double bound);
  /// Same target, specified through the precision matrix cov^{-1}.
  static HitAndRunSampler from_precision(Vector mean, const Matrix& precision, Matrix constraint, double bound);
  /// As from_precision, reusing an existing lower Cholesky factor of the precision.
  static HitAndRunSampler from_precision_factor(Vector mean, Matrix precision_chol, Matrix constraint, double bound);

  [[nodiscard]] Index dim() const { return mean_.size(); }
  [[nodiscard]] bool feasible(const Vector& x) const;

  /// Throws InvariantError if `start` is not strictly inside the ellipsoid.
  Vector run(RngStream& rng, const Vector& start, int steps) const;

 private:
  HitAndRunSampler() = default;
  [[nodiscard]] Vector color(const Vector& u) const;    // M u
  [[nodiscard]] Vector whiten(const Vector& dx) const;  // M^{-1} dx

  Vector mean_;
  Matrix chol_;  // lower factor of cov (covariance form) or of precision
  bool precision_form_ = false;
  Matrix constraint_;
  double bound_ = 0.0;
};

/// Validates the spec (PD cov and constraint, bound > 0) and runs Hit-and-Run.
Vector draw_truncated_mvn_har(RngStream& rng, const TruncatedMvnSpec& spec, const Vector& start, int steps);

/// Default number of Hit-and-Run moves per call: max(10, dim).
[[nodiscard]] inline int default_har_steps(Index dim) { return static_cast<int>(std::max<Index>(10, dim)); }

}  // namespace bagl
