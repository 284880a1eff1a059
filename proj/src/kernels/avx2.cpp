#include <immintrin.h>

#include "sparch/kernels.hpp"

namespace sparch::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return hsum(acc) + tail;
}

double sum_sq_ratio(const double* x, const double* h, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_mul_pd(xv, xv), _mm256_loadu_pd(h + i)));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * x[i] / h[i];
  return hsum(acc) + tail;
}

void square(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(xv, xv));
  }
  for (; i < n; ++i) out[i] = x[i] * x[i];
}

void spmv_affine(const CsrView& a, const double* x, double shift, double scale, double* out) {
  const int* cols = a.col_idx.data();
  const double* vals = a.values.data();
  for (std::size_t r = 0; r < a.rows; ++r) {
    int k = a.row_ptr[r];
    const int end = a.row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(vals + k), xv, acc);
    }
    double tail = 0.0;
    for (; k < end; ++k) tail += vals[k] * x[cols[k]];
    out[r] = shift + scale * (hsum(acc) + tail);
  }
}

}  // namespace sparch::kernels::avx2
