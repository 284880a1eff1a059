#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sparch/kernels.hpp"

namespace sparch {

/// Sparse nonnegative n x n weight matrix with an exactly zero diagonal.
///
/// Used both for the variance-equation matrix W and the mean-equation matrix B.
/// Entries are held in compressed row-major storage with no explicit zeros, so
/// the sparsity pattern is exactly the set of positive weights. Immutable once
/// built.
class WeightsMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
    bool operator==(const Entry&) const = default;
  };

  WeightsMatrix() = default;

  /// Validates and assembles. Throws InvalidArgument on an out-of-range index,
  /// a negative or non-finite weight, a nonzero diagonal entry, or a duplicate
  /// (row, col) pair. Zero-valued entries are dropped.
  static WeightsMatrix from_entries(std::size_t n, std::span<const Entry> entries,
                                    bool row_standardized = false);
  static WeightsMatrix from_sparse(Sparse m, bool row_standardized = false);
  static WeightsMatrix from_dense(const Eigen::MatrixXd& m, bool row_standardized = false);
  static WeightsMatrix zero(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(m_.nonZeros()); }
  bool row_standardized() const noexcept { return row_standardized_; }

  const Sparse& sparse() const noexcept { return m_; }
  kernels::CsrView csr() const noexcept;
  double coeff(std::size_t i, std::size_t j) const { return m_.coeff(static_cast<int>(i), static_cast<int>(j)); }
  std::vector<Entry> entries() const;
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }

  /// Row sums and column sums of the weights.
  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd col_sums() const;
  /// True when every nonzero row sums to one within 1e-12.
  bool rows_sum_to_one() const;

  /// P W P' for the permutation new_index = perm[old_index].
  WeightsMatrix permuted(std::span<const std::size_t> perm) const;

  bool operator==(const WeightsMatrix& other) const;

 private:
  explicit WeightsMatrix(Sparse m, bool row_standardized);
  Sparse m_{0, 0};
  bool row_standardized_ = false;
};

enum class Contiguity { rook, queen };

struct LatticeSpec {
  std::size_t rows = 1;
  std::size_t cols = 1;
  Contiguity scheme = Contiguity::rook;
};

/// Binary contiguity on a rows x cols grid. Cell (r, c) has index r * cols + c
/// (row-major). Rook links cells sharing an edge; queen also links corners.
WeightsMatrix build_lattice_contiguity(const LatticeSpec& spec);

/// Divides every nonzero row by its sum; zero rows stay zero.
WeightsMatrix row_standardize(const WeightsMatrix& w);

/// Binary indicator of "reachable within 1..max_lag steps" over the pattern
/// of w (a pair reached at several lags appears once). Diagonal forced to zero.
WeightsMatrix higher_order_sum(const WeightsMatrix& w, int max_lag);

/// If the influence graph (edge j -> i whenever w_ij > 0) is acyclic, returns
/// an ordering `order` such that listing locations as order[0], order[1], ...
/// makes W strictly lower triangular. Among valid orders the lexicographically
/// smallest one is returned. std::nullopt when the graph has a cycle.
std::optional<std::vector<std::size_t>> triangular_order(const WeightsMatrix& w);

inline bool is_strictly_triangularizable(const WeightsMatrix& w) {
  return triangular_order(w).has_value();
}

/// Half-width a of the error support under which the squared-observation
/// solve stays nonnegative: +inf when rho == 0 or W is nilpotent, otherwise
/// (rho^2 ||W^2||_1)^{-1/4} with ||.||_1 the maximum absolute column sum.
double truncation_bound(const WeightsMatrix& w, double rho);

/// Maximum absolute column sum of W^2.
double squared_l1_norm(const WeightsMatrix& w);

struct SpatioTemporalSpec {
  std::vector<WeightsMatrix> spatial;  // W_1 .. W_T, each N x N
  std::vector<double> temporal;        // phi_1 .. phi_p, p < T
};

struct SpatioTemporalWeights {
  std::size_t locations = 0;  // N
  std::size_t periods = 0;    // T
  WeightsMatrix spatial_part;               // blockdiag(W_1, ..., W_T)
  std::vector<WeightsMatrix> temporal_parts;  // identity blocks on the k-th time subdiagonal
  std::vector<double> temporal_weights;       // phi_1 .. phi_p

  /// rho * spatial_part + sum_k phi_k * temporal_parts[k]. Observations are
  /// stacked period by period (index t * N + s).
  WeightsMatrix combined(double rho) const;
};

SpatioTemporalWeights build_spatiotemporal_weights(const SpatioTemporalSpec& spec);

/// True when no entry links an observation to one in the same or a later
/// period outside the diagonal time blocks.
bool respects_time_order(const WeightsMatrix& w, std::size_t locations, std::size_t periods);

}  // namespace sparch
