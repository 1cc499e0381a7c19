#include "bagl/random.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "bagl/errors.hpp"

namespace bagl {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kTiny = std::numeric_limits<double>::min();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Upper-tail probability Q(x) = P(Z > x).
double upper_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Inverse of upper_tail on (0, 1).
double upper_tail_inverse(double q) { return kSqrt2 * boost::math::erfc_inv(2.0 * q); }

// Standard normal truncated to (a, b) with a < b, by rejection from a
// uniform proposal on the interval. Used when the interval is narrow or its
// mass underflows.
double truncated_uniform_rejection(RngStream& rng, double a, double b) {
  const double closest = (a > 0.0) ? a : (b < 0.0 ? b : 0.0);
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform()) <= 0.5 * (closest * closest - z * z)) return z;
  }
}

// Standard normal truncated to (a, b), 0 <= a < b, deep in the upper tail.
// Exponential proposal with the optimal rate (Robert, 1995).
double truncated_tail_rejection(RngStream& rng, double a, double b) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.uniform()) / alpha;
    if (z >= b) continue;
    const double d = z - alpha;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
  }
}

double clamp_open(double x, double a, double b) {
  if (x <= a) return std::nextafter(a, b);
  if (x >= b) return std::nextafter(b, a);
  return x;
}

double truncated_standard_normal(RngStream& rng, double a, double b) {
  if (!(a < b)) throw ConfigError("truncated normal needs lo < hi");
  if (b <= 0.0) return -truncated_standard_normal(rng, -b, -a);
  if (a >= 0.0) {
    const double qa = upper_tail(a);
    const double qb = std::isinf(b) ? 0.0 : upper_tail(b);
    const double mass = qa - qb;
    if (!(mass > 1e-300) || mass < 1e-12 * qa) {
      if (std::isinf(b) || b - a > 1.0 / std::max(a, 1.0)) return truncated_tail_rejection(rng, a, b);
      return truncated_uniform_rejection(rng, a, b);
    }
    const double q = qb + mass * rng.uniform();
    return clamp_open(upper_tail_inverse(q), a, b);
  }
  // Interval straddles zero; lower-tail CDF is accurate here.
  const double pa = std::isinf(a) ? 0.0 : upper_tail(-a);
  const double pb = std::isinf(b) ? 1.0 : upper_tail(-b);
  const double mass = pb - pa;
  if (!(mass > 1e-12)) return truncated_uniform_rejection(rng, a, b);
  const double u = pa + mass * rng.uniform();
  // Phi^{-1}(u) = -Q^{-1}(u)
  return clamp_open(-upper_tail_inverse(u), a, b);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t index) {
  return RngStream(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double RngStream::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double draw_gamma(RngStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw ConfigError("gamma parameters must be positive and finite (shape=" + format_double(shape) +
                      ", rate=" + format_double(rate) + ")");
  if (shape < 1.0) {
    const double g = draw_gamma(rng, shape + 1.0, 1.0);
    const double log_x = std::log(g) + std::log(rng.uniform()) / shape - std::log(rate);
    return std::max(std::exp(log_x), kTiny);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return std::max(d * v / rate, kTiny);
  }
}

double draw_inverse_gaussian(RngStream& rng, double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0) || !std::isfinite(mu) || !std::isfinite(lambda))
    throw ConfigError("inverse Gaussian parameters must be positive and finite (mu=" + format_double(mu) +
                      ", lambda=" + format_double(lambda) + ")");
  const double nu = rng.normal();
  const double phi = mu * nu * nu / lambda;
  // Roots of the quadratic are mu/q and mu*q with q >= 1.
  const double q = 1.0 + 0.5 * phi + 0.5 * std::sqrt(phi * (4.0 + phi));
  const double small = std::max(mu / q, kTiny);
  if (rng.uniform() * (mu + small) <= mu) return small;
  return std::min(mu * q, std::numeric_limits<double>::max());
}

double draw_exponential(RngStream& rng, double rate) {
  if (!(rate > 0.0)) throw ConfigError("exponential rate must be positive");
  return -std::log(rng.uniform()) / rate;
}

double draw_truncated_normal(RngStream& rng, double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0)) throw ConfigError("truncated normal needs sd > 0");
  const double z = truncated_standard_normal(rng, (lo - mean) / sd, (hi - mean) / sd);
  return mean + sd * z;
}

Vector draw_unit_direction(RngStream& rng, Index dim) {
  Vector u(dim);
  double norm2 = 0.0;
  do {
    for (Index k = 0; k < dim; ++k) u[k] = rng.normal();
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  return u / std::sqrt(norm2);
}

Vector draw_mvn(RngStream& rng, const Vector& mean, const Matrix& chol_lower) {
  Vector z(mean.size());
  for (Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return mean + chol_lower.triangularView<Eigen::Lower>() * z;
}

HitAndRunSampler HitAndRunSampler::from_covariance(Vector mean, const Matrix& cov, Matrix constraint, double bound) {
  HitAndRunSampler s;
  auto l = cholesky_lower(cov);
  if (!l) throw ConfigError("truncated normal covariance is not positive definite");
  s.mean_ = std::move(mean);
  s.chol_ = std::move(*l);
  s.precision_form_ = false;
  s.constraint_ = std::move(constraint);
  s.bound_ = bound;
  return s;
}

HitAndRunSampler HitAndRunSampler::from_precision(Vector mean, const Matrix& precision, Matrix constraint,
                                                  double bound) {
  HitAndRunSampler s;
  auto l = cholesky_lower(precision);
  if (!l) throw ConfigError("truncated normal precision is not positive definite");
  s.mean_ = std::move(mean);
  s.chol_ = std::move(*l);
  s.precision_form_ = true;
  s.constraint_ = std::move(constraint);
  s.bound_ = bound;
  return s;
}

HitAndRunSampler HitAndRunSampler::from_precision_factor(Vector mean, Matrix precision_chol, Matrix constraint,
                                                         double bound) {
  HitAndRunSampler s;
  s.mean_ = std::move(mean);
  s.chol_ = std::move(precision_chol);
  s.precision_form_ = true;
  s.constraint_ = std::move(constraint);
  s.bound_ = bound;
  return s;
}

Vector HitAndRunSampler::color(const Vector& u) const {
  if (precision_form_) return chol_.transpose().triangularView<Eigen::Upper>().solve(u);
  return chol_.triangularView<Eigen::Lower>() * u;
}

Vector HitAndRunSampler::whiten(const Vector& dx) const {
  if (precision_form_) return chol_.transpose().triangularView<Eigen::Upper>() * dx;
  return chol_.triangularView<Eigen::Lower>().solve(dx);
}

bool HitAndRunSampler::feasible(const Vector& x) const {
  const double g = x.dot(constraint_ * x);
  return std::isfinite(g) && g < bound_;
}

Vector HitAndRunSampler::run(RngStream& rng, const Vector& start, int steps) const {
  const Index d = dim();
  if (start.size() != d) throw ConfigError("Hit-and-Run start has wrong dimension");
  if (!feasible(start)) throw InvariantError("Hit-and-Run start point lies outside the ellipsoid");
  if (d == 0) return start;

  Vector x = start;
  Vector ax = constraint_ * x;
  Vector z = whiten(x - mean_);
  for (int step = 0; step < steps; ++step) {
    const Vector u = draw_unit_direction(rng, d);
    const Vector v = color(u);
    const Vector av = constraint_ * v;
    const double qa = v.dot(av);
    const double qb = ax.dot(v);
    const double qc = x.dot(ax) - bound_;
    if (!(qa > 0.0) || !(qc < 0.0)) continue;
    // Roots of qa t^2 + 2 qb t + qc = 0; qc < 0 so they bracket zero.
    const double sq = std::sqrt(qb * qb - qa * qc);
    const double w = -(qb + std::copysign(sq, qb));
    double t_lo = w / qa;
    double t_hi = qc / w;
    if (t_lo > t_hi) std::swap(t_lo, t_hi);
    if (!(t_lo < t_hi)) continue;
    const double t = draw_truncated_normal(rng, -z.dot(u), 1.0, t_lo, t_hi);

    Vector x_new = x + t * v;
    Vector ax_new = ax + t * av;
    if (!(x_new.dot(ax_new) < bound_)) continue;
    x = std::move(x_new);
    ax = std::move(ax_new);
    z += t * u;
  }
  // The running product A x accumulates rounding; confirm feasibility exactly.
  if (!feasible(x)) return start;
  return x;
}

Vector draw_truncated_mvn_har(RngStream& rng, const TruncatedMvnSpec& spec, const Vector& start, int steps) {
  const Index d = spec.mean.size();
  if (spec.cov.dim() != d || spec.constraint_matrix.dim() != d)
    throw ConfigError("truncated normal spec has inconsistent dimensions");
  if (!(spec.bound > 0.0)) throw ConfigError("truncated normal bound must be positive");
  if (!is_positive_definite(spec.constraint_matrix))
    throw ConfigError("truncated normal constraint matrix is not positive definite");
  const auto sampler =
      HitAndRunSampler::from_covariance(spec.mean, spec.cov.dense(), spec.constraint_matrix.dense(), spec.bound);
  return sampler.run(rng, start, steps);
}

}  // namespace bagl
