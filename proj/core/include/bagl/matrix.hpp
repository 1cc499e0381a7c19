#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bagl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix storing one value per unordered pair (packed lower
/// triangle), so a(i,j) == a(j,i) holds structurally.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Index dim, double fill = 0.0);

  static SymmetricMatrix identity(Index dim);
  static SymmetricMatrix diagonal(const Vector& diag);
  /// Builds from a dense matrix. Throws DataError if max |a_ij - a_ji| > tol;
  /// otherwise stores the average of each pair.
  static SymmetricMatrix from_dense(const Matrix& m, double tol = 0.0);

  [[nodiscard]] Index dim() const { return dim_; }
  [[nodiscard]] bool empty() const { return dim_ == 0; }

  [[nodiscard]] double operator()(Index i, Index j) const { return packed_[offset(i, j)]; }
  void set(Index i, Index j, double value) { packed_[offset(i, j)] = value; }
  void add(Index i, Index j, double value) { packed_[offset(i, j)] += value; }

  [[nodiscard]] Matrix dense() const;
  [[nodiscard]] Vector diag() const;
  [[nodiscard]] double trace() const;
  [[nodiscard]] double max_abs() const;

  SymmetricMatrix& operator+=(const SymmetricMatrix& other);
  SymmetricMatrix& operator*=(double c);
  friend SymmetricMatrix operator*(double c, SymmetricMatrix m) { return m *= c; }

  [[nodiscard]] Vector operator*(const Vector& x) const;
  [[nodiscard]] double quadratic_form(const Vector& x) const;

  [[nodiscard]] const std::vector<double>& packed() const { return packed_; }

  friend bool operator==(const SymmetricMatrix& a, const SymmetricMatrix& b) = default;

 private:
  [[nodiscard]] static std::size_t offset(Index i, Index j) {
    if (i < j) std::swap(i, j);
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2 + static_cast<std::size_t>(j);
  }

  Index dim_ = 0;
  std::vector<double> packed_;
};

[[nodiscard]] double max_abs_diff(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// Block view of a matrix after moving one index to the last position:
///   [ m11   v12 ]
///   [ v12'  s22 ]
/// `pivot` is the original index now sitting last. The permutation is the
/// single transposition (pivot, dim-1); it is its own inverse.
struct Partition {
  SymmetricMatrix m11;
  Vector v12;
  double s22 = 0.0;
  Index pivot = 0;

  /// Position in m11/v12 of original index k (k != pivot).
  [[nodiscard]] Index block_position(Index k) const;
};

/// Original index held at rotated position `pos` under the transposition
/// (pivot, dim-1).
[[nodiscard]] inline Index transposed_index(Index pos, Index pivot, Index dim) {
  if (pos == pivot) return dim - 1;
  if (pos == dim - 1) return pivot;
  return pos;
}

/// Zero-based pivot. Throws ConfigError if out of range.
[[nodiscard]] Partition rotate_to_last(const SymmetricMatrix& m, Index pivot);

/// Inverse of rotate_to_last: writes the blocks back at their original
/// positions.
[[nodiscard]] SymmetricMatrix restore(const Partition& part);

/// Writes only the last row/column (v12, s22) of a partition back into `m`.
void write_back_last(SymmetricMatrix& m, const Partition& part);

/// Lower Cholesky factor, or nullopt if any pivot is not strictly positive or
/// any entry is non-finite. No tolerance slack.
[[nodiscard]] std::optional<Matrix> cholesky_lower(const SymmetricMatrix& m);
[[nodiscard]] std::optional<Matrix> cholesky_lower(const Matrix& dense_symmetric);

[[nodiscard]] bool is_positive_definite(const SymmetricMatrix& m);

/// Inverse of a positive definite matrix. Throws EstimatorError if not PD.
[[nodiscard]] SymmetricMatrix inverse_spd(const SymmetricMatrix& m);
/// Same, on a dense symmetric input, returning a dense symmetric result.
[[nodiscard]] Matrix inverse_spd_dense(const Matrix& m);

/// Eigenvalues sorted descending.
[[nodiscard]] Vector eigenvalues_descending(const SymmetricMatrix& m);

/// Matrix CSV: dim rows of dim comma-separated decimals, no header.
void write_matrix_csv(std::ostream& out, const SymmetricMatrix& m);
void write_matrix_csv(const std::string& path, const SymmetricMatrix& m);
/// Throws DataError on ragged/non-square input or asymmetry beyond `symmetry_tol`.
[[nodiscard]] SymmetricMatrix read_matrix_csv(std::istream& in, double symmetry_tol = 1e-12);
[[nodiscard]] SymmetricMatrix read_matrix_csv(const std::string& path, double symmetry_tol = 1e-12);

/// Shortest decimal text that round-trips the double exactly.
[[nodiscard]] std::string format_double(double v);

}  // namespace bagl
