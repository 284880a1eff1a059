#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "sparch/weights.hpp"

namespace sparch {

enum class Alternative { two_sided, greater, less };

std::string_view alternative_name(Alternative a) noexcept;
/// Accepts "two-sided", "two_sided", "greater", "less".
Alternative parse_alternative(std::string_view name);

struct MoranTest {
  double statistic = 0.0;  // I
  double null_mean = 0.0;
  double null_variance = 0.0;
  double z_score = 0.0;
  double p_value = 1.0;
  Alternative alternative = Alternative::two_sided;
};

/// Moran's I with its normal approximation under the normality null.
/// Throws InvalidArgument for n < 3, a size mismatch or constant z.
MoranTest morans_i(const Eigen::VectorXd& z, const WeightsMatrix& w,
                   Alternative alternative = Alternative::two_sided);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = -2 l + 2k, BIC = -2 l + k ln n.
InformationCriteria information_criteria(double loglik, int k, double n);

struct MoranScatter {
  Eigen::VectorXd value;
  Eigen::VectorXd lag;  // W z
  double slope = 0.0;   // least-squares slope of lag on value (with intercept)
  double intercept = 0.0;
};

MoranScatter moran_scatter_data(const Eigen::VectorXd& z, const WeightsMatrix& w);

struct QqData {
  Eigen::VectorXd theoretical;  // Phi^{-1}((i - 0.5) / n)
  Eigen::VectorXd sample;       // sorted values
  double line_intercept = 0.0;  // reference line through the quartile pairs
  double line_slope = 1.0;
};

/// Normal Q-Q data of the sorted values. With standardize the values are
/// first centred and scaled by their sample standard deviation. Throws
/// InvalidArgument for n < 2 or zero variance.
QqData qq_data(const Eigen::VectorXd& z, bool standardize = false);

/// Type-7 sample quantile (linear interpolation between order statistics).
double sample_quantile(const Eigen::VectorXd& sorted, double p);

}  // namespace sparch
