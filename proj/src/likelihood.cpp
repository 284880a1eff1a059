#include "sparch/likelihood.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sparch/error.hpp"
#include "sparch/kernels.hpp"
#include "sparch/normal.hpp"

namespace sparch {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_family(Family f) {
  if (f != Family::sparch_gaussian && f != Family::esparch) {
    throw InvalidArgument("likelihood is defined for the sparch_gaussian and esparch families only");
  }
}

void require_nonzero(const Eigen::VectorXd& y) {
  std::vector<std::size_t> zeros;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) zeros.push_back(static_cast<std::size_t>(i));
  }
  if (zeros.empty()) return;
  std::string list;
  for (std::size_t k = 0; k < zeros.size() && k < 10; ++k) {
    if (k > 0) list += ", ";
    list += std::to_string(zeros[k] + 1);
  }
  if (zeros.size() > 10) list += ", ...";
  throw DomainError("observations are exactly zero at locations " + list, std::move(zeros));
}

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<double> view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

bool finite_params(const Parameters& p, Family f) {
  if (!std::isfinite(p.alpha) || !std::isfinite(p.rho) || !(p.alpha > 0.0) || !(p.rho >= 0.0)) {
    return false;
  }
  return f != Family::esparch || (std::isfinite(p.b) && p.b > 0.0);
}

}  // namespace

void DesignMatrix::validate(Eigen::Index n) const {
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw InvalidArgument("design matrix has " + std::to_string(x.cols()) + " columns but " +
                          std::to_string(names.size()) + " labels");
  }
  if (x.cols() == 0) return;
  if (x.rows() != n) {
    throw InvalidArgument("design matrix has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(n));
  }
  if (!x.allFinite()) throw InvalidArgument("design matrix contains non-finite values");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    throw InvalidArgument("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                          " < " + std::to_string(x.cols()) + " columns)");
  }
}

LikelihoodEvaluator::LikelihoodEvaluator(const WeightsMatrix& w, Family family,
                                         const WeightsMatrix* b_matrix)
    : w_(&w),
      b_(b_matrix),
      family_(family),
      jacobian_pattern_(w.sparse(), /*transpose=*/family == Family::sparch_gaussian) {
  require_family(family);
  if (b_ != nullptr) {
    if (b_->size() != w.size()) {
      throw InvalidArgument("B is " + std::to_string(b_->size()) + " x " +
                            std::to_string(b_->size()) + " but W is " + std::to_string(w.size()) +
                            " x " + std::to_string(w.size()));
    }
    sar_pattern_.emplace(b_->sparse(), false);
  }
}

LikelihoodEvaluator::Pieces LikelihoodEvaluator::evaluate(const Eigen::VectorXd& y,
                                                          const Parameters& p, bool need_logdet) {
  if (static_cast<std::size_t>(y.size()) != w_->size()) {
    throw InvalidArgument("observation vector has length " + std::to_string(y.size()) +
                          " but W is " + std::to_string(w_->size()) + " x " +
                          std::to_string(w_->size()));
  }
  require_nonzero(y);
  Pieces out;
  const auto n = y.size();
  const bool ok = finite_params(p, family_);

  if (family_ == Family::sparch_gaussian) {
    Eigen::VectorXd y2(n);
    kernels::square(view(y), view(y2));
    out.h.resize(n);
    kernels::spmv_affine(w_->csr(), view(y2), p.alpha, p.rho, view(out.h));
    if (!ok || !(out.h.array() > 0.0).all() || !out.h.allFinite()) return out;
    if (!need_logdet) {
      out.valid = true;
      return out;
    }
    const Eigen::VectorXd diag = out.h.array() / y2.array();
    lu_.factorize(jacobian_pattern_.assemble(diag, -p.rho));
    if (lu_.singular()) return out;
    const double correction = (y2.array().log() - 1.5 * out.h.array().log()).sum();
    out.logdet = lu_.log_det().log_abs + correction;
    out.valid = std::isfinite(out.logdet);
    return out;
  }

  // Exponential family: (I + rho b W / 2) ln h = alpha 1 + rho b W ln|y|.
  if (!ok) {
    out.h = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const Eigen::VectorXd log_abs_y = y.array().abs().log();
  Eigen::VectorXd rhs(n);
  kernels::spmv_affine(w_->csr(), view(log_abs_y), p.alpha, p.rho * p.b, view(rhs));
  lu_.factorize(jacobian_pattern_.assemble(1.0, 0.5 * p.rho * p.b));
  if (lu_.singular()) {
    out.h = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const Eigen::VectorXd log_h = lu_.solve(rhs);
  out.h = log_h.array().exp();
  out.logdet = -lu_.log_det().log_abs - 0.5 * log_h.sum();
  out.valid = out.h.allFinite() && (out.h.array() > 0.0).all() && std::isfinite(out.logdet);
  return out;
}

Eigen::VectorXd LikelihoodEvaluator::h(const Eigen::VectorXd& y, const Parameters& p) {
  Pieces pieces = evaluate(y, p, false);
  if (family_ == Family::esparch && !pieces.h.allFinite()) {
    if (!finite_params(p, family_)) throw InvalidArgument("invalid exponential-family parameters");
    throw SingularSystem("I + rho b W / 2 is singular");
  }
  return pieces.h;
}

double LikelihoodEvaluator::logdet_jacobian(const Eigen::VectorXd& y, const Parameters& p) {
  const Pieces pieces = evaluate(y, p, true);
  return pieces.valid ? pieces.logdet : kNegInf;
}

double LikelihoodEvaluator::loglik(const Eigen::VectorXd& y, const Parameters& p) {
  const Pieces pieces = evaluate(y, p, true);
  if (!pieces.valid) return kNegInf;
  const double n = static_cast<double>(y.size());
  const double value =
      pieces.logdet - n * normal::kLogSqrt2Pi - 0.5 * kernels::sum_sq_ratio(view(y), view(pieces.h));
  return std::isfinite(value) ? value : kNegInf;
}

Eigen::VectorXd LikelihoodEvaluator::residuals(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                               const Parameters& p) const {
  if (static_cast<std::size_t>(y.size()) != w_->size()) {
    throw InvalidArgument("observation vector length does not match W");
  }
  if (p.beta.size() != x.cols()) {
    throw InvalidArgument("beta has " + std::to_string(p.beta.size()) + " entries but X has " +
                          std::to_string(x.cols()) + " columns");
  }
  if (x.cols() > 0 && x.rows() != y.size()) throw InvalidArgument("X row count does not match y");
  Eigen::VectorXd u = y;
  if (p.lambda != 0.0) {
    if (b_ == nullptr) throw InvalidArgument("lambda != 0 needs a B matrix");
    Eigen::VectorXd by(y.size());
    kernels::spmv(b_->csr(), view(y), view(by));
    u -= p.lambda * by;
  }
  if (x.cols() > 0) u -= x * p.beta;
  return u;
}

double LikelihoodEvaluator::log_det_sar(double lambda) {
  if (b_ == nullptr || lambda == 0.0) return 0.0;
  if (!std::isfinite(lambda)) return kNegInf;
  if (cached_lambda_ && *cached_lambda_ == lambda) return cached_sar_logdet_;
  sar_lu_.factorize(sar_pattern_->assemble(1.0, -lambda));
  cached_sar_logdet_ = sar_lu_.singular() ? kNegInf : sar_lu_.log_det().log_abs;
  cached_lambda_ = lambda;
  return cached_sar_logdet_;
}

double LikelihoodEvaluator::loglik_sar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                       const Parameters& p) {
  const double sar = log_det_sar(p.lambda);
  if (!std::isfinite(sar)) return kNegInf;
  const Eigen::VectorXd u = residuals(y, x, p);
  const double arch = loglik(u, p);
  return std::isfinite(arch) ? sar + arch : kNegInf;
}

Eigen::VectorXd h_sparch(const Eigen::VectorXd& y, double alpha, double rho, const WeightsMatrix& w) {
  if (static_cast<std::size_t>(y.size()) != w.size()) {
    throw InvalidArgument("observation vector length does not match W");
  }
  Eigen::VectorXd y2(y.size());
  kernels::square(view(y), view(y2));
  Eigen::VectorXd h(y.size());
  kernels::spmv_affine(w.csr(), view(y2), alpha, rho, view(h));
  return h;
}

Eigen::VectorXd h_esparch(const Eigen::VectorXd& y, double alpha, double rho, double b,
                          const WeightsMatrix& w) {
  LikelihoodEvaluator eval(w, Family::esparch);
  return eval.h(y, Parameters{alpha, rho, b, 0.0, {}});
}

double logdet_jacobian_sparch(const Eigen::VectorXd& y, double alpha, double rho,
                              const WeightsMatrix& w) {
  LikelihoodEvaluator eval(w, Family::sparch_gaussian);
  return eval.logdet_jacobian(y, Parameters{alpha, rho, 2.0, 0.0, {}});
}

double logdet_jacobian_esparch(const Eigen::VectorXd& y, double alpha, double rho, double b,
                               const WeightsMatrix& w) {
  LikelihoodEvaluator eval(w, Family::esparch);
  return eval.logdet_jacobian(y, Parameters{alpha, rho, b, 0.0, {}});
}

double loglik_sparch(const Eigen::VectorXd& y, const Parameters& params, const WeightsMatrix& w,
                     Family family) {
  LikelihoodEvaluator eval(w, family);
  return eval.loglik(y, params);
}

double loglik_sarsparch(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                        const Parameters& params, const WeightsMatrix& b_matrix,
                        const WeightsMatrix& w, Family family) {
  LikelihoodEvaluator eval(w, family, &b_matrix);
  return eval.loglik_sar(y, x, params);
}

}  // namespace sparch
