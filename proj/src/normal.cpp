#include "sparch/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "sparch/error.hpp"

namespace sparch::normal {

double pdf(double x) noexcept { return std::exp(log_pdf(x)); }

double log_pdf(double x) noexcept { return -kLogSqrt2Pi - 0.5 * x * x; }

double cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double survival(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("normal quantile needs p in [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace sparch::normal
