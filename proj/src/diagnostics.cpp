#include "sparch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparch/error.hpp"
#include "sparch/kernels.hpp"
#include "sparch/normal.hpp"

namespace sparch {

std::string_view alternative_name(Alternative a) noexcept {
  switch (a) {
    case Alternative::two_sided:
      return "two-sided";
    case Alternative::greater:
      return "greater";
    case Alternative::less:
      return "less";
  }
  return "two-sided";
}

Alternative parse_alternative(std::string_view name) {
  if (name == "two-sided" || name == "two_sided") return Alternative::two_sided;
  if (name == "greater") return Alternative::greater;
  if (name == "less") return Alternative::less;
  throw InvalidArgument("unknown alternative '" + std::string(name) +
                        "' (expected two-sided, greater or less)");
}

MoranTest morans_i(const Eigen::VectorXd& z, const WeightsMatrix& w, Alternative alternative) {
  const auto n = z.size();
  if (n < 3) throw InvalidArgument("Moran's I needs at least 3 observations");
  if (static_cast<std::size_t>(n) != w.size()) {
    throw InvalidArgument("vector has length " + std::to_string(n) + " but W is " +
                          std::to_string(w.size()) + " x " + std::to_string(w.size()));
  }
  if (!z.allFinite()) throw InvalidArgument("Moran's I input contains non-finite values");
  const Eigen::VectorXd d = z.array() - z.mean();
  const double dd = d.squaredNorm();
  if (!(dd > 0.0) || (z.array() == z[0]).all()) {
    throw InvalidArgument("Moran's I is undefined for a constant vector");
  }
  const auto& a = w.sparse();
  const double s0 = a.sum();
  if (!(s0 > 0.0)) throw InvalidArgument("Moran's I needs a weights matrix with positive total weight");

  Eigen::VectorXd wd(n);
  kernels::spmv(w.csr(), {d.data(), static_cast<std::size_t>(n)},
                {wd.data(), static_cast<std::size_t>(n)});
  const double nn = static_cast<double>(n);

  MoranTest t;
  t.alternative = alternative;
  t.statistic = (nn / s0) * d.dot(wd) / dd;
  t.null_mean = -1.0 / (nn - 1.0);

  const WeightsMatrix::Sparse sym = a + WeightsMatrix::Sparse(a.transpose());
  const double s1 = 0.5 * sym.squaredNorm();
  const Eigen::VectorXd rc = w.row_sums() + w.col_sums();
  const double s2 = rc.squaredNorm();
  const double second_moment =
      (nn * nn * s1 - nn * s2 + 3.0 * s0 * s0) / ((nn * nn - 1.0) * s0 * s0);
  t.null_variance = second_moment - t.null_mean * t.null_mean;
  t.z_score = (t.statistic - t.null_mean) / std::sqrt(t.null_variance);
  switch (alternative) {
    case Alternative::two_sided:
      t.p_value = std::min(1.0, 2.0 * normal::survival(std::abs(t.z_score)));
      break;
    case Alternative::greater:
      t.p_value = normal::survival(t.z_score);
      break;
    case Alternative::less:
      t.p_value = normal::cdf(t.z_score);
      break;
  }
  return t;
}

InformationCriteria information_criteria(double loglik, int k, double n) {
  return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * std::log(n)};
}

MoranScatter moran_scatter_data(const Eigen::VectorXd& z, const WeightsMatrix& w) {
  const auto n = z.size();
  if (static_cast<std::size_t>(n) != w.size()) {
    throw InvalidArgument("vector has length " + std::to_string(n) + " but W is " +
                          std::to_string(w.size()) + " x " + std::to_string(w.size()));
  }
  MoranScatter s;
  s.value = z;
  s.lag.resize(n);
  kernels::spmv(w.csr(), {z.data(), static_cast<std::size_t>(n)},
                {s.lag.data(), static_cast<std::size_t>(n)});
  if (n == 0) return s;
  const Eigen::VectorXd dz = z.array() - z.mean();
  const Eigen::VectorXd dl = s.lag.array() - s.lag.mean();
  const double sxx = dz.squaredNorm();
  s.slope = sxx > 0.0 ? dz.dot(dl) / sxx : 0.0;
  s.intercept = s.lag.mean() - s.slope * z.mean();
  return s;
}

double sample_quantile(const Eigen::VectorXd& sorted, double p) {
  const auto n = sorted.size();
  if (n == 0) throw InvalidArgument("quantile of an empty sample");
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

QqData qq_data(const Eigen::VectorXd& z, bool standardize) {
  const auto n = z.size();
  if (n < 2) throw InvalidArgument("Q-Q data needs at least 2 values");
  if (!z.allFinite()) throw InvalidArgument("Q-Q input contains non-finite values");
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw InvalidArgument("Q-Q data is undefined for zero sample variance");

  QqData q;
  q.sample = standardize ? Eigen::VectorXd((z.array() - mean) / std::sqrt(var)) : z;
  std::sort(q.sample.data(), q.sample.data() + n);
  q.theoretical.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q.theoretical[i] = normal::quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  const double x1 = normal::quantile(0.25);
  const double x2 = normal::quantile(0.75);
  const double y1 = sample_quantile(q.sample, 0.25);
  const double y2 = sample_quantile(q.sample, 0.75);
  q.line_slope = (y2 - y1) / (x2 - x1);
  q.line_intercept = y1 - q.line_slope * x1;
  return q;
}

}  // namespace sparch
