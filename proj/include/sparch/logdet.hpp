#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <memory>
#include <variant>
#include <vector>

namespace sparch {

struct LogDet {
  double log_abs = 0.0;  // ln|det|; -inf when singular
  int sign = 1;          // +1, -1, or 0 when singular
  bool singular() const noexcept { return sign == 0; }
};

/// LU factorization of a square sparse matrix with log-determinant and solve.
///
/// Sparse LU with COLAMD fill-reducing ordering and partial pivoting; systems
/// of size <= kDenseCutoff are factorized densely instead, where the sparse
/// machinery costs more than it saves. Calling factorize() again with a matrix
/// of identical sparsity pattern reuses the symbolic analysis.
class LuFactorization {
 public:
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  static constexpr Eigen::Index kDenseCutoff = 64;

  LuFactorization() = default;
  explicit LuFactorization(const ColMajor& a) { factorize(a); }

  void factorize(const ColMajor& a);

  Eigen::Index size() const noexcept { return n_; }
  bool singular() const noexcept { return log_det_.singular(); }
  LogDet log_det() const noexcept { return log_det_; }
  /// Throws SingularSystem when the factorization is singular.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  using Sparse = Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>;
  using Dense = Eigen::PartialPivLU<Eigen::MatrixXd>;

  bool same_pattern(const ColMajor& a) const;

  Eigen::Index n_ = 0;
  std::unique_ptr<Sparse> sparse_;
  Dense dense_;
  bool use_dense_ = false;
  std::vector<int> outer_;
  std::vector<int> inner_;
  LogDet log_det_;
};

inline LogDet log_determinant(const LuFactorization::ColMajor& a) {
  return LuFactorization(a).log_det();
}

/// Fixed-pattern assembly of diag(d) + s * A (or A') in column-major form.
/// The pattern is built once; assemble() only rewrites values, so repeated
/// factorizations of the result reuse the symbolic analysis.
class DiagonalPlusScaled {
 public:
  using RowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  DiagonalPlusScaled(const RowMajor& a, bool transpose);

  const LuFactorization::ColMajor& assemble(const Eigen::VectorXd& diag, double scale);
  const LuFactorization::ColMajor& assemble(double diag, double scale);

 private:
  LuFactorization::ColMajor m_;
  std::vector<double> base_;  // A entries in m_'s value order, 0 on the diagonal
  std::vector<int> diag_pos_;
};

}  // namespace sparch
