#include "bagl/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "bagl/errors.hpp"

namespace bagl {

void HyperParams::validate() const {
  if (!(r > 0.0) || !(s > 0.0) || !std::isfinite(r) || !std::isfinite(s))
    throw ConfigError("hyperparameters r and s must be positive");
}

void ChainConfig::validate() const {
  hyper.validate();
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  if (keep < 1) throw ConfigError("keep must be >= 1");
  if (har_steps < 0) throw ConfigError("har_steps must be >= 0");
  if (trace_top_k < 0) throw ConfigError("trace_top_k must be >= 0");
}

ChainState init_chain(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg) {
  cfg.validate();
  const Index p = scatter.s.dim();
  if (p < 1) throw ConfigError("scatter matrix is empty");
  if (n_obs < 1) throw ConfigError("need at least one observation");
  if (scatter.n_obs != 0 && scatter.n_obs != n_obs)
    throw ConfigError("observation count does not match the scatter matrix");
  ChainState st;
  st.omega = SymmetricMatrix::identity(p);
  st.tau = SymmetricMatrix(p, 1.0);
  for (Index i = 0; i < p; ++i) st.tau.set(i, i, 0.0);
  const double lambda0 = std::clamp(cfg.hyper.r / cfg.hyper.s, 1e-4, 1e4);
  st.lambda = SymmetricMatrix(p, lambda0);
  return st;
}

Omega22Draw draw_omega22(RngStream& rng, Index n_obs, double s22, double lambda22, const Vector& omega12,
                         const Matrix& omega11_inv) {
  const double q = omega12.size() == 0 ? 0.0 : omega12.dot(omega11_inv * omega12);
  if (!std::isfinite(q)) throw InvariantError("non-finite quadratic form in omega22 draw");
  const double gamma = draw_gamma(rng, 0.5 * static_cast<double>(n_obs) + 1.0, 0.5 * s22 + lambda22);
  return {gamma + q, gamma};
}

Matrix omega12_precision(double s22, double lambda22, const Vector& tau12, const Matrix& omega11_inv) {
  Matrix q = (s22 + 2.0 * lambda22) * omega11_inv;
  q.diagonal() += tau12.cwiseInverse();
  return q;
}

Matrix omega12_covariance(double s22, double lambda22, const Vector& tau12, const Matrix& omega11_inv) {
  return inverse_spd_dense(omega12_precision(s22, lambda22, tau12, omega11_inv));
}

Vector draw_omega12(RngStream& rng, const Vector& s12, double s22, double lambda22, const Vector& tau12,
                    const Matrix& omega11_inv, double omega22, const Vector& current, int har_steps) {
  if ((tau12.array() <= 0.0).any() || !tau12.allFinite()) throw InvariantError("latent scales must be positive");
  const Matrix q = omega12_precision(s22, lambda22, tau12, omega11_inv);
  auto l = cholesky_lower(q);
  if (!l) throw InvariantError("omega12 conditional precision is not positive definite");
  // mean = -C s12 = -(L L')^{-1} s12
  Vector mean = -s12;
  l->triangularView<Eigen::Lower>().solveInPlace(mean);
  l->transpose().triangularView<Eigen::Upper>().solveInPlace(mean);
  const auto sampler = HitAndRunSampler::from_precision_factor(std::move(mean), std::move(*l), omega11_inv, omega22);
  if (!sampler.feasible(current))
    throw InvariantError("omega12 start violates the positive-definiteness constraint (omega22=" +
                         format_double(omega22) + ", quadratic form=" +
                         format_double(current.dot(omega11_inv * current)) + ")");
  return sampler.run(rng, current, har_steps);
}

double draw_lambda(RngStream& rng, double r, double s, double omega_ij) {
  return draw_gamma(rng, r + 1.0, s + std::abs(omega_ij));
}

double draw_tau(RngStream& rng, double lambda_ij, double omega_ij) {
  const double abs_omega = std::max(std::abs(omega_ij), kTauOmegaFloor);
  const double upsilon = draw_inverse_gaussian(rng, lambda_ij / abs_omega, lambda_ij * lambda_ij);
  return 1.0 / upsilon;
}

namespace {

std::string describe_partition(Index i, const Partition& part, double s22, double lambda22) {
  std::ostringstream os;
  os << "partition at index " << i << ": dim(Omega_11)=" << part.m11.dim() << ", omega22=" << format_double(part.s22)
     << ", |omega12|=" << format_double(part.v12.norm()) << ", max|Omega_11|=" << format_double(part.m11.max_abs())
     << ", s22=" << format_double(s22) << ", lambda22=" << format_double(lambda22);
  return os.str();
}

}  // namespace

void sweep(ChainState& state, const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg, RngStream& rng) {
  const Index p = state.omega.dim();
  const SymmetricMatrix& s = scatter.s;
  if (s.dim() != p || state.tau.dim() != p || state.lambda.dim() != p)
    throw ConfigError("chain state and scatter matrix dimensions differ");
  const double r = cfg.hyper.r;
  const double hs = cfg.hyper.s;
  const int har_steps = cfg.har_steps_for(p - 1);

  Vector s12(p - 1), tau12(p - 1);
  for (Index i = 0; i < p; ++i) {
    // Step 1: move index i last and partition.
    Partition part = rotate_to_last(state.omega, i);
    for (Index a = 0; a < p - 1; ++a) {
      const Index orig = transposed_index(a, i, p);
      s12[a] = s(orig, i);
      tau12[a] = state.tau(orig, i);
    }
    const double s22 = s(i, i);
    const double lambda22 = state.lambda(i, i);

    Matrix a_inv(0, 0);
    if (p > 1) {
      try {
        a_inv = inverse_spd_dense(part.m11.dense());
      } catch (const EstimatorError&) {
        throw InvariantError("Omega_11 lost positive definiteness; " + describe_partition(i, part, s22, lambda22));
      }
    }

    // Step 2.
    if (i >= 1) {
      part.v12 = draw_omega12(rng, s12, s22, lambda22, tau12, a_inv, part.s22, part.v12, har_steps);
    }
    // Step 3.
    const Omega22Draw d22 = draw_omega22(rng, n_obs, s22, lambda22, part.v12, a_inv);
    if (!(d22.gamma_part > 0.0) || !std::isfinite(d22.omega22))
      throw InvariantError("Schur complement not positive; " + describe_partition(i, part, s22, lambda22));
    part.s22 = d22.omega22;
    write_back_last(state.omega, part);

    // Step 4: lambda_ij, j = i..p.
    for (Index j = i; j < p; ++j) state.lambda.set(i, j, draw_lambda(rng, r, hs, state.omega(i, j)));
    // Step 5: tau_ij, j = i+1..p.
    for (Index j = i + 1; j < p; ++j) state.tau.set(i, j, draw_tau(rng, state.lambda(i, j), state.omega(i, j)));
  }
  ++state.sweep_index;
  if (!is_positive_definite(state.omega))
    throw InvariantError("Omega is not positive definite after sweep " + std::to_string(state.sweep_index));
}

PosteriorSummary run_chain(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg,
                           const SweepObserver& observer, std::uint64_t chain_index) {
  const auto t0 = std::chrono::steady_clock::now();
  ChainState state = init_chain(scatter, n_obs, cfg);
  RngStream rng = RngStream::derive(cfg.seed, chain_index);
  const Index p = state.omega.dim();

  for (long t = 0; t < cfg.burn_in; ++t) {
    sweep(state, scatter, n_obs, cfg, rng);
    if (observer) observer(state);
  }

  const std::size_t m = state.omega.packed().size();
  std::vector<double> mean(m, 0.0), m2(m, 0.0);
  PosteriorSummary out;
  const auto k = static_cast<Index>(std::min<Index>(cfg.trace_top_k, p));
  if (k > 0) out.eigen_traces.reserve(static_cast<std::size_t>(cfg.keep));
  for (long t = 0; t < cfg.keep; ++t) {
    sweep(state, scatter, n_obs, cfg, rng);
    if (observer) observer(state);
    const auto& x = state.omega.packed();
    const double count = static_cast<double>(t + 1);
    for (std::size_t e = 0; e < m; ++e) {
      const double delta = x[e] - mean[e];
      mean[e] += delta / count;
      m2[e] += delta * (x[e] - mean[e]);
    }
    if (k > 0) {
      const Vector ev = eigenvalues_descending(state.omega);
      out.eigen_traces.emplace_back(ev.data(), ev.data() + k);
    }
  }

  out.mean_omega = SymmetricMatrix(p);
  out.std_omega = SymmetricMatrix(p);
  std::size_t e = 0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j <= i; ++j, ++e) {
      out.mean_omega.set(i, j, mean[e]);
      out.std_omega.set(i, j, cfg.keep > 1 ? std::sqrt(m2[e] / static_cast<double>(cfg.keep - 1)) : 0.0);
    }
  }
  out.n_draws = cfg.keep;
  out.config = cfg;
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<PosteriorSummary> run_chains(const ScatterMatrix& scatter, Index n_obs, const ChainConfig& cfg,
                                         int n_chains, int jobs) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  cfg.validate();
  std::vector<PosteriorSummary> out(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < n_chains; c = next++) {
      try {
        out[static_cast<std::size_t>(c)] = run_chain(scatter, n_obs, cfg, {}, static_cast<std::uint64_t>(c));
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, n_chains);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return out;
}

void write_eigen_traces_csv(std::ostream& out, const std::vector<std::vector<double>>& traces) {
  const std::size_t k = traces.empty() ? 0 : traces.front().size();
  out << "sweep";
  for (std::size_t j = 0; j < k; ++j) out << ",ev" << (j + 1);
  out << '\n';
  for (std::size_t t = 0; t < traces.size(); ++t) {
    out << (t + 1);
    for (double v : traces[t]) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<std::vector<double>> read_eigen_traces_csv(std::istream& in) {
  std::vector<std::vector<double>> traces;
  std::string line;
  if (!std::getline(in, line)) throw DataError("trace file is empty");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
      if (first) {
        first = false;
        continue;
      }
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw DataError("bad trace value '" + tok + "'");
      }
    }
    if (!traces.empty() && row.size() != traces.front().size()) throw DataError("ragged trace file");
    traces.push_back(std::move(row));
  }
  return traces;
}

}  // namespace bagl
