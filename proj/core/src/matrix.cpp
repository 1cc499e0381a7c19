#include "bagl/matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bagl/errors.hpp"

namespace bagl {

SymmetricMatrix::SymmetricMatrix(Index dim, double fill)
    : dim_(dim), packed_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim + 1) / 2, fill) {
  if (dim < 0) throw ConfigError("negative matrix dimension");
}

SymmetricMatrix SymmetricMatrix::identity(Index dim) {
  SymmetricMatrix m(dim);
  for (Index i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& diag) {
  SymmetricMatrix m(diag.size());
  for (Index i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
  return m;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw DataError("matrix is not square");
  SymmetricMatrix out(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double a = m(i, j);
      const double b = m(j, i);
      if (std::abs(a - b) > tol)
        throw DataError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) +
                        "): |a_ij - a_ji| = " + format_double(std::abs(a - b)));
      out.set(i, j, a == b ? a : 0.5 * (a + b));
    }
  }
  return out;
}

Matrix SymmetricMatrix::dense() const {
  Matrix m(dim_, dim_);
  std::size_t k = 0;
  for (Index i = 0; i < dim_; ++i) {
    for (Index j = 0; j <= i; ++j, ++k) {
      m(i, j) = packed_[k];
      m(j, i) = packed_[k];
    }
  }
  return m;
}

Vector SymmetricMatrix::diag() const {
  Vector d(dim_);
  for (Index i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
  return d;
}

double SymmetricMatrix::trace() const { return diag().sum(); }

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : packed_) m = std::max(m, std::abs(v));
  return m;
}

SymmetricMatrix& SymmetricMatrix::operator+=(const SymmetricMatrix& other) {
  if (other.dim_ != dim_) throw ConfigError("dimension mismatch in matrix sum");
  for (std::size_t k = 0; k < packed_.size(); ++k) packed_[k] += other.packed_[k];
  return *this;
}

SymmetricMatrix& SymmetricMatrix::operator*=(double c) {
  for (double& v : packed_) v *= c;
  return *this;
}

Vector SymmetricMatrix::operator*(const Vector& x) const {
  if (x.size() != dim_) throw ConfigError("dimension mismatch in matrix-vector product");
  Vector y = Vector::Zero(dim_);
  std::size_t k = 0;
  for (Index i = 0; i < dim_; ++i) {
    for (Index j = 0; j < i; ++j, ++k) {
      y[i] += packed_[k] * x[j];
      y[j] += packed_[k] * x[i];
    }
    y[i] += packed_[k++] * x[i];
  }
  return y;
}

double SymmetricMatrix::quadratic_form(const Vector& x) const { return x.dot((*this) * x); }

double max_abs_diff(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw ConfigError("dimension mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.packed().size(); ++k) m = std::max(m, std::abs(a.packed()[k] - b.packed()[k]));
  return m;
}

Index Partition::block_position(Index k) const {
  const Index last = m11.dim();
  if (k == pivot) throw ConfigError("pivot index has no block position");
  return k == last ? pivot : k;
}

Partition rotate_to_last(const SymmetricMatrix& m, Index pivot) {
  const Index p = m.dim();
  if (pivot < 0 || pivot >= p)
    throw ConfigError("partition index " + std::to_string(pivot) + " out of range for dimension " +
                      std::to_string(p));
  Partition part;
  part.pivot = pivot;
  part.m11 = SymmetricMatrix(p - 1);
  part.v12.resize(p - 1);
  for (Index a = 0; a < p - 1; ++a) {
    const Index oa = transposed_index(a, pivot, p);
    for (Index b = 0; b <= a; ++b) part.m11.set(a, b, m(oa, transposed_index(b, pivot, p)));
    part.v12[a] = m(oa, pivot);
  }
  part.s22 = m(pivot, pivot);
  return part;
}

SymmetricMatrix restore(const Partition& part) {
  const Index p = part.m11.dim() + 1;
  SymmetricMatrix m(p);
  for (Index a = 0; a < p - 1; ++a) {
    const Index oa = transposed_index(a, part.pivot, p);
    for (Index b = 0; b <= a; ++b) m.set(oa, transposed_index(b, part.pivot, p), part.m11(a, b));
  }
  write_back_last(m, part);
  return m;
}

void write_back_last(SymmetricMatrix& m, const Partition& part) {
  const Index p = m.dim();
  if (part.v12.size() != p - 1) throw ConfigError("partition does not match matrix dimension");
  for (Index a = 0; a < p - 1; ++a) m.set(transposed_index(a, part.pivot, p), part.pivot, part.v12[a]);
  m.set(part.pivot, part.pivot, part.s22);
}

std::optional<Matrix> cholesky_lower(const Matrix& a) {
  const Index n = a.rows();
  if (a.cols() != n) return std::nullopt;
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) = (a.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).transpose()) / ljj;
      if (!l.col(j).tail(rest).allFinite()) return std::nullopt;
    }
  }
  return l;
}

std::optional<Matrix> cholesky_lower(const SymmetricMatrix& m) { return cholesky_lower(m.dense()); }

bool is_positive_definite(const SymmetricMatrix& m) { return cholesky_lower(m).has_value(); }

Matrix inverse_spd_dense(const Matrix& m) {
  const auto l = cholesky_lower(m);
  if (!l) throw EstimatorError("matrix is not positive definite; cannot invert");
  const Index n = m.rows();
  const Matrix linv = l->triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  Matrix inv = Matrix::Zero(n, n);
  inv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
  inv.triangularView<Eigen::StrictlyUpper>() = inv.transpose();
  return inv;
}

SymmetricMatrix inverse_spd(const SymmetricMatrix& m) {
  return SymmetricMatrix::from_dense(inverse_spd_dense(m.dense()));
}

Vector eigenvalues_descending(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EstimatorError("eigenvalue decomposition failed");
  return solver.eigenvalues().reverse();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& out, const SymmetricMatrix& m) {
  for (Index i = 0; i < m.dim(); ++i) {
    for (Index j = 0; j < m.dim(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const SymmetricMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_matrix_csv(out, m);
  if (!out) throw DataError("write failed for '" + path + "'");
}

namespace {

double parse_double(std::string_view tok) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw DataError("not a number: '" + std::string(tok) + "'");
  return v;
}

}  // namespace

SymmetricMatrix read_matrix_csv(std::istream& in, double symmetry_tol) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  const auto p = static_cast<Index>(rows.size());
  if (p == 0) throw DataError("matrix file is empty");
  Matrix m(p, p);
  for (Index i = 0; i < p; ++i) {
    if (static_cast<Index>(rows[i].size()) != p)
      throw DataError("matrix row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(p));
    for (Index j = 0; j < p; ++j) m(i, j) = rows[i][j];
  }
  return SymmetricMatrix::from_dense(m, symmetry_tol);
}

SymmetricMatrix read_matrix_csv(const std::string& path, double symmetry_tol) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file '" + path + "'");
  return read_matrix_csv(in, symmetry_tol);
}

}  // namespace bagl
