#include "sparch/kernels.hpp"

namespace sparch::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_sq_ratio(const double* x, const double* h, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i] / h[i];
  return acc;
}

void square(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * x[i];
}

void spmv_affine(const CsrView& a, const double* x, double shift, double scale, double* out) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
    out[r] = shift + scale * acc;
  }
}

}  // namespace sparch::kernels::scalar
