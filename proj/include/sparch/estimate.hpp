#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparch/diagnostics.hpp"
#include "sparch/likelihood.hpp"
#include "sparch/simulate.hpp"
#include "sparch/weights.hpp"

namespace sparch {

struct OptimizerConfig {
  int max_iterations = 500;
  double tolerance = 1e-8;
  int multi_starts = 3;
  double alpha_lower = 1e-8;
  double rho_lower = 0.0;
  /// Defaults to +inf for spARCH and to the invertibility limit of
  /// I + rho b W / 2 for the exponential family.
  std::optional<double> rho_upper;
  double b = 2.0;  // starting value when estimate_b, fixed value otherwise
  bool estimate_b = false;
  double b_lower = 1e-3;
  /// Default (-0.999, 0.999) for a row-standardized B, otherwise the
  /// reciprocals of the extreme real eigenvalues of B (shrunk by 0.999).
  std::optional<double> lambda_lower;
  std::optional<double> lambda_upper;
  /// Hold a parameter at a value instead of estimating it.
  std::optional<double> fixed_alpha;
  std::optional<double> fixed_rho;
  std::optional<double> fixed_lambda;
  Alternative moran_alternative = Alternative::two_sided;

  /// Throws InvalidArgument on non-positive tolerances or infeasible bounds.
  void validate() const;
};

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;  // NaN when unavailable
  double t_value = 0.0;    // NaN when the standard error is unavailable
  double p_value = 0.0;    // two-sided normal tail of t_value
  bool at_bound = false;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  int starts = 0;
  double gradient_norm = 0.0;  // finite-difference gradient of l over interior parameters
  std::string method;
  bool hessian_ok = false;  // -H positive definite over the interior parameters
  std::vector<double> start_logliks;  // optimum reached from each start
  std::vector<std::string> at_bound;  // labels of parameters on a bound
};

struct TraceStep {
  std::string formula;
  double bic = 0.0;
  std::string action;  // "start", "- name", "+ name"
};

/// Everything needed to refit a model with a modified design.
struct ModelContext {
  Eigen::VectorXd y;
  std::string response = "y";
  DesignMatrix table;                // every known covariate column
  std::vector<std::string> columns;  // covariates in the model, in table order
  bool intercept = false;
  std::shared_ptr<const WeightsMatrix> w;
  std::shared_ptr<const WeightsMatrix> b;  // null without a SAR term
  Family family = Family::sparch_gaussian;
  OptimizerConfig config;

  DesignMatrix design() const;
  std::string formula() const;
};

struct FitResult {
  Family family = Family::sparch_gaussian;
  bool sar = false;
  Parameters params;
  /// Row order: alpha, rho, [b], [lambda], [(Intercept)], covariates.
  std::vector<Coefficient> coefficients;
  Eigen::MatrixXd covariance;  // over the interior parameters, in coefficient order
  std::vector<std::string> covariance_labels;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int k = 0;  // number of estimated parameters
  std::size_t n = 0;
  Eigen::VectorXd fitted;     // y - residuals
  Eigen::VectorXd residuals;  // u = (I - lambda B) y - X beta
  Eigen::VectorXd h;
  Eigen::VectorXd standardized_residuals;  // u / sqrt(h)
  MoranTest moran_residuals;  // on the standardized residuals
  MoranTest moran_squared;    // on their squares
  ConvergenceReport convergence;
  std::string formula;
  std::vector<TraceStep> trace;  // filled by stepwise_bic
  std::vector<std::string> notes;  // skipped candidates and other remarks
  std::shared_ptr<const ModelContext> context;

  const Coefficient* find(const std::string& name) const;
};

/// Pure spatial ARCH model for y (no mean equation).
FitResult fit_sparch(const Eigen::VectorXd& y, const WeightsMatrix& w, Family family,
                     const OptimizerConfig& config = {});

/// Linear regression with spatial ARCH disturbances; x holds all columns
/// (include an intercept column explicitly if wanted).
FitResult fit_sparch(const Eigen::VectorXd& y, const DesignMatrix& x, const WeightsMatrix& w,
                     Family family, const OptimizerConfig& config = {});

/// SAR mean model with spatial ARCH disturbances.
FitResult fit_sarsparch(const Eigen::VectorXd& y, const DesignMatrix& x, const WeightsMatrix& b,
                        const WeightsMatrix& w, Family family, const OptimizerConfig& config = {});

/// Fits the model described by a context. A previous fit may seed the first
/// start; its coefficients are matched to the new design by name.
FitResult fit_model(std::shared_ptr<const ModelContext> context, const FitResult* warm = nullptr);

/// Greedy bidirectional BIC search starting from all candidates plus an
/// intercept. b may be null (regression without a SAR term).
FitResult stepwise_bic(const Eigen::VectorXd& y, const DesignMatrix& candidates,
                       const WeightsMatrix* b, const WeightsMatrix& w, Family family,
                       const OptimizerConfig& config = {});

/// Refit with columns added from the fit's covariate table and dropped by name.
FitResult update_model(const FitResult& fit, const std::vector<std::string>& add,
                       const std::vector<std::string>& drop);
/// Refit after appending new columns to the table and the model.
FitResult update_model(const FitResult& fit, const DesignMatrix& add_columns,
                       const std::vector<std::string>& drop);

/// Ordinary least squares by column-pivoted QR.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace sparch
