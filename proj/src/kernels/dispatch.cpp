#include <atomic>
#include <cstdlib>
#include <cstring>

#include "sparch/error.hpp"
#include "sparch/kernels.hpp"

namespace sparch::kernels {

#if defined(SPARCH_HAVE_AVX2_TU)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sum_sq_ratio(const double* x, const double* h, std::size_t n);
void square(const double* x, double* out, std::size_t n);
void spmv_affine(const CsrView& a, const double* x, double shift, double scale, double* out);
}  // namespace avx2
#endif

namespace {

struct Table {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq_ratio)(const double*, const double*, std::size_t);
  void (*square)(const double*, double*, std::size_t);
  void (*spmv_affine)(const CsrView&, const double*, double, double, double*);
};

constexpr Table kScalar{Backend::scalar, scalar::dot, scalar::sum_sq_ratio, scalar::square,
                        scalar::spmv_affine};
#if defined(SPARCH_HAVE_AVX2_TU)
constexpr Table kAvx2{Backend::avx2, avx2::dot, avx2::sum_sq_ratio, avx2::square,
                      avx2::spmv_affine};
#endif

bool cpu_has_avx2() noexcept {
#if defined(SPARCH_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* select_default() noexcept {
  const char* env = std::getenv("SPARCH_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
#if defined(SPARCH_HAVE_AVX2_TU)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const Table*>& table() {
  static std::atomic<const Table*> t{select_default()};
  return t;
}

const Table& current() { return *table().load(std::memory_order_acquire); }

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("kernel operands differ in length");
}

}  // namespace

Backend active_backend() noexcept { return current().backend; }

bool backend_available(Backend b) noexcept {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw InvalidArgument("kernel backend '" + std::string(backend_name(b)) +
                          "' is not supported on this CPU");
  }
#if defined(SPARCH_HAVE_AVX2_TU)
  table().store(b == Backend::avx2 ? &kAvx2 : &kScalar, std::memory_order_release);
#else
  table().store(&kScalar, std::memory_order_release);
#endif
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  return current().dot(x.data(), y.data(), x.size());
}

double sum_sq_ratio(std::span<const double> x, std::span<const double> h) {
  check_same_size(x.size(), h.size());
  return current().sum_sq_ratio(x.data(), h.data(), x.size());
}

void square(std::span<const double> x, std::span<double> out) {
  check_same_size(x.size(), out.size());
  current().square(x.data(), out.data(), x.size());
}

void spmv_affine(const CsrView& a, std::span<const double> x, double shift, double scale,
                 std::span<double> out) {
  check_same_size(x.size(), a.rows);
  check_same_size(out.size(), a.rows);
  if (x.data() == out.data() && a.rows > 0) throw InvalidArgument("spmv cannot run in place");
  current().spmv_affine(a, x.data(), shift, scale, out.data());
}

}  // namespace sparch::kernels
