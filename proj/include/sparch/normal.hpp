#pragma once

// Standard normal density, distribution, and quantile functions.

namespace sparch::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double x) noexcept;
double log_pdf(double x) noexcept;
double cdf(double x) noexcept;
/// Upper tail 1 - cdf(x), accurate for large x.
double survival(double x) noexcept;
/// Inverse of cdf on (0, 1); returns -inf / +inf at 0 / 1.
double quantile(double p);

}  // namespace sparch::normal
