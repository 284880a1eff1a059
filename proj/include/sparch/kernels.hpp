#pragma once

// Data-parallel inner loops shared by the likelihood, simulation, and Moran
// code. Each kernel has a portable scalar reference and an AVX2/FMA variant;
// the variant is picked once at startup from CPUID and can be overridden with
// SPARCH_KERNELS=scalar or set_backend(). Reductions in the AVX2 variant use
// four partial sums, so they agree with the scalar path to rounding, not bit
// for bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace sparch::kernels {

enum class Backend { scalar, avx2 };

/// Non-owning compressed-sparse-row view (Eigen RowMajor compressed storage).
struct CsrView {
  std::size_t rows = 0;
  std::span<const int> row_ptr;  // rows + 1 entries
  std::span<const int> col_idx;
  std::span<const double> values;
};

Backend active_backend() noexcept;
bool backend_available(Backend b) noexcept;
/// Throws InvalidArgument when the backend is not supported on this CPU.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

double dot(std::span<const double> x, std::span<const double> y);

/// sum_i x_i^2 / h_i
double sum_sq_ratio(std::span<const double> x, std::span<const double> h);

/// out_i = x_i^2
void square(std::span<const double> x, std::span<double> out);

/// out = shift + scale * (A x)
void spmv_affine(const CsrView& a, std::span<const double> x, double shift, double scale,
                 std::span<double> out);

inline void spmv(const CsrView& a, std::span<const double> x, std::span<double> out) {
  spmv_affine(a, x, 0.0, 1.0, out);
}

// Portable reference implementations; the equivalence tests compare the
// dispatched kernels against these.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sum_sq_ratio(const double* x, const double* h, std::size_t n);
void square(const double* x, double* out, std::size_t n);
void spmv_affine(const CsrView& a, const double* x, double shift, double scale, double* out);
}  // namespace scalar

}  // namespace sparch::kernels
