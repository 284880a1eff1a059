#include "sparch/logdet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparch/error.hpp"

namespace sparch {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LogDet from_diagonal(const Eigen::VectorXd& diag, int permutation_sign) {
  LogDet out;
  out.sign = permutation_sign;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double d = diag[i];
    if (d == 0.0 || !std::isfinite(d)) return {kNegInf, 0};
    out.log_abs += std::log(std::abs(d));
    if (d < 0.0) out.sign = -out.sign;
  }
  return out;
}

}  // namespace

bool LuFactorization::same_pattern(const LuFactorization::ColMajor& a) const {
  const auto nnz = static_cast<std::size_t>(a.nonZeros());
  return a.rows() == n_ && inner_.size() == nnz &&
         std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
         std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
}

void LuFactorization::factorize(const ColMajor& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("LU factorization needs a square matrix");
  if (!a.isCompressed()) throw InvalidArgument("LU factorization needs compressed storage");
  const bool reuse = sparse_ && same_pattern(a);
  n_ = a.rows();
  log_det_ = {};
  if (n_ == 0) return;

  if (n_ <= kDenseCutoff) {
    use_dense_ = true;
    dense_.compute(Eigen::MatrixXd(a));
    log_det_ = from_diagonal(dense_.matrixLU().diagonal(),
                             static_cast<int>(dense_.permutationP().determinant()));
    return;
  }

  use_dense_ = false;
  if (!reuse) {
    sparse_ = std::make_unique<Sparse>();
    sparse_->analyzePattern(a);
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
  }
  sparse_->factorize(a);
  if (sparse_->info() != Eigen::Success) {
    log_det_ = {kNegInf, 0};
    return;
  }
  const double log_abs = sparse_->logAbsDeterminant();
  const double sign = sparse_->signDeterminant();
  if (!std::isfinite(log_abs) || sign == 0.0) {
    log_det_ = {kNegInf, 0};
  } else {
    log_det_ = {log_abs, sign < 0.0 ? -1 : 1};
  }
}

Eigen::VectorXd LuFactorization::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw InvalidArgument("right-hand side length does not match the system");
  if (singular()) throw SingularSystem("linear system is singular");
  if (n_ == 0) return {};
  if (use_dense_) return dense_.solve(b);
  return sparse_->solve(b);
}

DiagonalPlusScaled::DiagonalPlusScaled(const RowMajor& a, bool transpose) {
  if (a.rows() != a.cols()) throw InvalidArgument("operator must be square");
  const int n = static_cast<int>(a.rows());
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() + n));
  for (int r = 0; r < a.outerSize(); ++r) {
    for (RowMajor::InnerIterator it(a, r); it; ++it) {
      if (it.row() == it.col()) throw InvalidArgument("operator must have a zero diagonal");
      if (transpose) {
        triplets.emplace_back(it.col(), it.row(), it.value());
      } else {
        triplets.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }
  // Placeholder diagonal keeps the pattern fixed; values are replaced in assemble().
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 0.0);
  m_.resize(n, n);
  m_.setFromTriplets(triplets.begin(), triplets.end());
  m_.makeCompressed();

  base_.assign(m_.valuePtr(), m_.valuePtr() + m_.nonZeros());
  diag_pos_.assign(static_cast<std::size_t>(n), -1);
  for (int c = 0; c < n; ++c) {
    for (int k = m_.outerIndexPtr()[c]; k < m_.outerIndexPtr()[c + 1]; ++k) {
      if (m_.innerIndexPtr()[k] == c) diag_pos_[static_cast<std::size_t>(c)] = k;
    }
  }
}

const LuFactorization::ColMajor& DiagonalPlusScaled::assemble(const Eigen::VectorXd& diag,
                                                               double scale) {
  if (diag.size() != m_.rows()) throw InvalidArgument("diagonal length does not match operator");
  double* values = m_.valuePtr();
  for (std::size_t k = 0; k < base_.size(); ++k) values[k] = scale * base_[k];
  for (std::size_t c = 0; c < diag_pos_.size(); ++c) {
    values[diag_pos_[c]] = diag[static_cast<Eigen::Index>(c)];
  }
  return m_;
}

const LuFactorization::ColMajor& DiagonalPlusScaled::assemble(double diag, double scale) {
  double* values = m_.valuePtr();
  for (std::size_t k = 0; k < base_.size(); ++k) values[k] = scale * base_[k];
  for (int pos : diag_pos_) values[pos] = diag;
  return m_;
}

}  // namespace sparch
