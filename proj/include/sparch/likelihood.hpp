#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sparch/logdet.hpp"
#include "sparch/simulate.hpp"
#include "sparch/weights.hpp"

namespace sparch {

struct Parameters {
  double alpha = 1.0;
  double rho = 0.0;
  double b = 2.0;       // exponential family only
  double lambda = 0.0;  // SAR coefficient, mean equation only
  Eigen::VectorXd beta;  // regression coefficients, possibly empty
};

/// Covariates of the mean equation with column labels.
struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index cols() const noexcept { return x.cols(); }
  /// Throws InvalidArgument on a label/column count mismatch or rank deficiency.
  void validate(Eigen::Index n) const;
};

/// h = alpha 1 + rho W y^2 (may be negative; the likelihood guards).
Eigen::VectorXd h_sparch(const Eigen::VectorXd& y, double alpha, double rho, const WeightsMatrix& w);

/// h = exp(S (alpha 1 + rho b W ln|y|)) with S = (I + rho b W / 2)^{-1}, by one
/// sparse solve. Throws DomainError naming the zero entries of y and
/// SingularSystem when I + rho b W / 2 is singular.
Eigen::VectorXd h_esparch(const Eigen::VectorXd& y, double alpha, double rho, double b,
                          const WeightsMatrix& w);

/// ln|det d(y_j / sqrt(h_j)) / d y_i| for the spatial ARCH process:
///   ln|det(diag(h / y^2) - rho W')| + sum ln(y_i^2 / h_i^{3/2}).
/// Returns -inf when some h_i <= 0; throws DomainError when some y_i == 0.
double logdet_jacobian_sparch(const Eigen::VectorXd& y, double alpha, double rho,
                              const WeightsMatrix& w);

/// Same Jacobian for the exponential process. Differentiating
/// ln h = S (alpha 1 + rho b W ln|y|) gives J = diag(1/y) S' diag(y / sqrt(h)),
/// hence ln|det J| = -ln|det(I + rho b W / 2)| - (1/2) sum ln h_i, evaluated
/// from the same factorization that produces h. Returns -inf when
/// I + rho b W / 2 is singular; throws DomainError when some y_i == 0.
double logdet_jacobian_esparch(const Eigen::VectorXd& y, double alpha, double rho, double b,
                               const WeightsMatrix& w);

/// Gaussian log-likelihood of y: Jacobian term plus sum ln phi(y_i / sqrt(h_i)).
/// family must be sparch_gaussian or esparch. -inf outside the valid
/// parameter region (alpha <= 0, rho < 0, b <= 0, h_i <= 0, singular operator).
double loglik_sparch(const Eigen::VectorXd& y, const Parameters& params, const WeightsMatrix& w,
                     Family family);

/// SAR mean model with spatial ARCH disturbances:
///   u = (I - lambda B) y - X beta,
///   l = ln|det(I - lambda B)| + loglik_sparch(u).
/// X may have zero columns (beta empty). -inf when I - lambda B is singular.
double loglik_sarsparch(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                        const Parameters& params, const WeightsMatrix& b_matrix,
                        const WeightsMatrix& w, Family family);

/// Reusable evaluator for repeated likelihood calls on fixed matrices.
///
/// Holds the sparsity patterns and symbolic factorizations of the operators
/// so only numeric refactorization happens per call. Not thread-safe: give
/// each thread its own instance. Results are identical to the free functions.
class LikelihoodEvaluator {
 public:
  /// b_matrix may be null for models without a SAR term. The matrices must
  /// outlive the evaluator.
  LikelihoodEvaluator(const WeightsMatrix& w, Family family, const WeightsMatrix* b_matrix = nullptr);

  Family family() const noexcept { return family_; }
  std::size_t size() const noexcept { return w_->size(); }

  /// Disturbance-level pieces. y_i == 0 throws DomainError.
  Eigen::VectorXd h(const Eigen::VectorXd& y, const Parameters& p);
  double logdet_jacobian(const Eigen::VectorXd& y, const Parameters& p);
  double loglik(const Eigen::VectorXd& y, const Parameters& p);

  /// Mean-equation residual u = (I - lambda B) y - X beta.
  Eigen::VectorXd residuals(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                            const Parameters& p) const;
  /// ln|det(I - lambda B)|, 0 without a SAR term, -inf when singular.
  double log_det_sar(double lambda);
  double loglik_sar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Parameters& p);

 private:
  struct Pieces {
    Eigen::VectorXd h;
    double logdet = 0.0;
    bool valid = false;
  };
  Pieces evaluate(const Eigen::VectorXd& y, const Parameters& p, bool need_logdet);

  const WeightsMatrix* w_;
  const WeightsMatrix* b_;
  Family family_;
  DiagonalPlusScaled jacobian_pattern_;  // diag + s W' (spARCH) or I + s W (exponential)
  std::optional<DiagonalPlusScaled> sar_pattern_;
  LuFactorization lu_;
  LuFactorization sar_lu_;
  std::optional<double> cached_lambda_;
  double cached_sar_logdet_ = 0.0;
};

}  // namespace sparch
