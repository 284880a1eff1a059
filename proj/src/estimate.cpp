#include "sparch/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sparch/error.hpp"
#include "sparch/normal.hpp"
#include "sparch/optimize.hpp"

namespace sparch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBoundTol = 1e-6;
const char* const kIntercept = "(Intercept)";

enum class Slot { alpha, rho, b, lambda, beta };

struct Item {
  std::string name;
  Slot slot;
  Eigen::Index beta_index = 0;
  double lower = -kInf;
  double upper = kInf;
};

struct Layout {
  std::vector<Item> items;
  Parameters base;  // holds fixed values

  Parameters to_params(const Eigen::VectorXd& theta) const {
    Parameters p = base;
    for (std::size_t k = 0; k < items.size(); ++k) {
      const double v = theta[static_cast<Eigen::Index>(k)];
      switch (items[k].slot) {
        case Slot::alpha:
          p.alpha = v;
          break;
        case Slot::rho:
          p.rho = v;
          break;
        case Slot::b:
          p.b = v;
          break;
        case Slot::lambda:
          p.lambda = v;
          break;
        case Slot::beta:
          p.beta[items[k].beta_index] = v;
          break;
      }
    }
    return p;
  }

  Eigen::VectorXd from_params(const Parameters& p) const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(items.size()));
    for (std::size_t k = 0; k < items.size(); ++k) {
      double v = 0.0;
      switch (items[k].slot) {
        case Slot::alpha:
          v = p.alpha;
          break;
        case Slot::rho:
          v = p.rho;
          break;
        case Slot::b:
          v = p.b;
          break;
        case Slot::lambda:
          v = p.lambda;
          break;
        case Slot::beta:
          v = p.beta[items[k].beta_index];
          break;
      }
      theta[static_cast<Eigen::Index>(k)] = v;
    }
    return theta;
  }

  optimize::Bounds bounds() const {
    optimize::Bounds b;
    const auto m = static_cast<Eigen::Index>(items.size());
    b.lower.resize(m);
    b.upper.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      b.lower[k] = items[static_cast<std::size_t>(k)].lower;
      b.upper[k] = items[static_cast<std::size_t>(k)].upper;
    }
    return b;
  }
};

// Most negative and most positive real eigenvalues of a weights matrix.
std::pair<double, double> real_eigen_range(const WeightsMatrix& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m.to_dense(), false);
  double lo = 0.0;
  double hi = 0.0;
  const auto& ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > 1e-10 * std::max(1.0, std::abs(ev[i].real()))) continue;
    lo = std::min(lo, ev[i].real());
    hi = std::max(hi, ev[i].real());
  }
  return {lo, hi};
}

bool is_row_standardized(const WeightsMatrix& m) { return m.row_standardized() || m.rows_sum_to_one(); }

std::pair<double, double> lambda_bounds(const WeightsMatrix& b, const OptimizerConfig& c) {
  double lo = -0.999;
  double hi = 0.999;
  if (!is_row_standardized(b) && !(c.lambda_lower && c.lambda_upper)) {
    const auto [emin, emax] = real_eigen_range(b);
    hi = emax > 0.0 ? 0.999 / emax : kInf;
    lo = emin < 0.0 ? 0.999 / emin : (emax > 0.0 ? -0.999 / emax : -kInf);
  }
  if (c.lambda_lower) lo = *c.lambda_lower;
  if (c.lambda_upper) hi = *c.lambda_upper;
  return {lo, hi};
}

double rho_upper_bound(const ModelContext& ctx) {
  const auto& c = ctx.config;
  if (c.rho_upper) return *c.rho_upper;
  if (ctx.family != Family::esparch || c.estimate_b) return kInf;
  // I + rho b W / 2 stays invertible while rho b |omega_min| / 2 < 1.
  const double omega = is_row_standardized(*ctx.w) ? 1.0 : -real_eigen_range(*ctx.w).first;
  if (!(omega > 0.0)) return kInf;
  return 0.999 * 2.0 / (c.b * omega);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

FitResult make_context_and_fit(const Eigen::VectorXd& y, const DesignMatrix* x,
                               const WeightsMatrix* b, const WeightsMatrix& w, Family family,
                               const OptimizerConfig& config) {
  auto ctx = std::make_shared<ModelContext>();
  ctx->y = y;
  if (x != nullptr) {
    ctx->table = *x;
    ctx->columns = x->names;
  }
  ctx->w = std::make_shared<const WeightsMatrix>(w);
  if (b != nullptr) ctx->b = std::make_shared<const WeightsMatrix>(*b);
  ctx->family = family;
  ctx->config = config;
  return fit_model(ctx);
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_iterations <= 0) throw InvalidArgument("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (multi_starts <= 0) throw InvalidArgument("multi_starts must be positive");
  if (!(alpha_lower > 0.0)) throw InvalidArgument("alpha lower bound must be positive");
  if (!(rho_lower >= 0.0)) throw InvalidArgument("rho lower bound must be >= 0");
  if (rho_upper && !(*rho_upper > rho_lower)) throw InvalidArgument("rho bounds are infeasible");
  if (!(b > 0.0)) throw InvalidArgument("b must be positive");
  if (!(b_lower > 0.0)) throw InvalidArgument("b lower bound must be positive");
  if (lambda_lower && lambda_upper && !(*lambda_upper > *lambda_lower)) {
    throw InvalidArgument("lambda bounds are infeasible");
  }
  if (fixed_alpha && !(*fixed_alpha > 0.0)) throw InvalidArgument("fixed alpha must be positive");
  if (fixed_rho && !(*fixed_rho >= 0.0)) throw InvalidArgument("fixed rho must be >= 0");
}

DesignMatrix ModelContext::design() const {
  DesignMatrix d;
  const auto n = y.size();
  const auto p = static_cast<Eigen::Index>(columns.size()) + (intercept ? 1 : 0);
  d.x.resize(n, p);
  Eigen::Index c = 0;
  if (intercept) {
    d.x.col(c++).setOnes();
    d.names.emplace_back(kIntercept);
  }
  for (const auto& name : columns) {
    const auto it = std::find(table.names.begin(), table.names.end(), name);
    if (it == table.names.end()) throw InvalidArgument("unknown column '" + name + "'");
    d.x.col(c++) = table.x.col(it - table.names.begin());
    d.names.push_back(name);
  }
  return d;
}

std::string ModelContext::formula() const {
  std::string f = response + " ~ ";
  if (columns.empty()) return f + (intercept ? "1" : "0");
  if (!intercept) f += "0 + ";
  for (std::size_t i = 0; i < columns.size(); ++i) f += (i ? " + " : "") + columns[i];
  return f;
}

const Coefficient* FitResult::find(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

FitResult fit_model(std::shared_ptr<const ModelContext> context, const FitResult* warm) {
  if (!context || !context->w) throw InvalidArgument("model context needs a W matrix");
  const ModelContext& ctx = *context;
  const OptimizerConfig& cfg = ctx.config;
  cfg.validate();
  const auto n = ctx.y.size();
  if (n < 10) throw InvalidArgument("fitting needs at least 10 observations, got " + std::to_string(n));
  if (static_cast<std::size_t>(n) != ctx.w->size()) {
    throw InvalidArgument("y has length " + std::to_string(n) + " but W is " +
                          std::to_string(ctx.w->size()) + " x " + std::to_string(ctx.w->size()));
  }
  if (!ctx.y.allFinite()) throw InvalidArgument("y contains non-finite values");
  if (ctx.family != Family::sparch_gaussian && ctx.family != Family::esparch) {
    throw InvalidArgument("estimation supports the sparch_gaussian and esparch families only");
  }
  const DesignMatrix design = ctx.design();
  design.validate(n);
  const Eigen::MatrixXd& x = design.x;
  const auto p = x.cols();

  // Parameter layout.
  Layout layout;
  layout.base.b = cfg.b;
  layout.base.beta = Eigen::VectorXd::Zero(p);
  if (cfg.fixed_alpha) {
    layout.base.alpha = *cfg.fixed_alpha;
  } else {
    layout.items.push_back({"alpha", Slot::alpha, 0, cfg.alpha_lower, kInf});
  }
  if (cfg.fixed_rho) {
    layout.base.rho = *cfg.fixed_rho;
  } else {
    layout.items.push_back({"rho", Slot::rho, 0, cfg.rho_lower, rho_upper_bound(ctx)});
  }
  if (ctx.family == Family::esparch && cfg.estimate_b) {
    layout.items.push_back({"b", Slot::b, 0, cfg.b_lower, kInf});
  }
  if (ctx.b) {
    if (ctx.b->size() != ctx.w->size()) {
      throw InvalidArgument("B is " + std::to_string(ctx.b->size()) + " x " +
                            std::to_string(ctx.b->size()) + " but W is " +
                            std::to_string(ctx.w->size()) + " x " + std::to_string(ctx.w->size()));
    }
    if (cfg.fixed_lambda) {
      layout.base.lambda = *cfg.fixed_lambda;
    } else {
      const auto [lo, hi] = lambda_bounds(*ctx.b, cfg);
      layout.items.push_back({"lambda", Slot::lambda, 0, lo, hi});
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    layout.items.push_back({design.names[static_cast<std::size_t>(j)], Slot::beta, j, -kInf, kInf});
  }
  const optimize::Bounds bounds = layout.bounds();
  const auto m = static_cast<Eigen::Index>(layout.items.size());

  LikelihoodEvaluator eval(*ctx.w, ctx.family, ctx.b.get());
  auto loglik = [&](const Eigen::VectorXd& theta) {
    try {
      return eval.loglik_sar(ctx.y, x, layout.to_params(theta));
    } catch (const DomainError&) {
      return -kInf;
    }
  };
  auto objective = [&](const Eigen::VectorXd& theta) { return -loglik(theta); };

  // Starting points.
  Parameters start = layout.base;
  Eigen::VectorXd u0 = ctx.y;
  if (p > 0) {
    start.beta = least_squares(x, ctx.y);
    u0 = ctx.y - x * start.beta;
  }
  if (ctx.b && !cfg.fixed_lambda) start.lambda = 0.0;
  const double m2 = std::max(u0.squaredNorm() / static_cast<double>(n), 1e-8);
  const double mean_log_abs = u0.array().abs().max(1e-300).log().mean();
  const double b_start = cfg.b;

  std::vector<Eigen::VectorXd> starts;
  if (warm != nullptr && m > 0) {
    Parameters w0 = start;
    w0.alpha = warm->params.alpha;
    w0.rho = warm->params.rho;
    w0.b = cfg.estimate_b ? warm->params.b : cfg.b;
    w0.lambda = ctx.b ? warm->params.lambda : 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (const Coefficient* c = warm->find(design.names[static_cast<std::size_t>(j)])) w0.beta[j] = c->estimate;
    }
    if (cfg.fixed_alpha) w0.alpha = *cfg.fixed_alpha;
    if (cfg.fixed_rho) w0.rho = *cfg.fixed_rho;
    if (cfg.fixed_lambda) w0.lambda = *cfg.fixed_lambda;
    starts.push_back(bounds.project(layout.from_params(w0)));
  }
  const double rho_hi = rho_upper_bound(ctx);
  const double rho_grid[] = {0.25, 0.1, 0.5};
  for (int s = 0; s < std::min(cfg.multi_starts, 3) && m > 0; ++s) {
    Parameters p0 = start;
    p0.rho = cfg.fixed_rho ? *cfg.fixed_rho : std::max(cfg.rho_lower, std::min(rho_grid[s], 0.5 * rho_hi));
    if (ctx.family == Family::esparch) {
      const double c = p0.rho * b_start;
      p0.alpha = std::max(std::log(m2) * (1.0 + 0.5 * c) - c * mean_log_abs, 0.05);
    } else {
      p0.alpha = m2;
    }
    if (cfg.fixed_alpha) p0.alpha = *cfg.fixed_alpha;
    p0.b = b_start;
    starts.push_back(bounds.project(layout.from_params(p0)));
  }

  optimize::Options opts;
  opts.max_iterations = cfg.max_iterations;
  opts.tolerance = cfg.tolerance;

  FitResult fit;
  fit.family = ctx.family;
  fit.sar = static_cast<bool>(ctx.b);
  fit.n = static_cast<std::size_t>(n);
  fit.formula = ctx.formula();
  fit.context = context;

  auto interior = [&](const Eigen::VectorXd& theta) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!bounds.at_lower(theta, k, kBoundTol) && !bounds.at_upper(theta, k, kBoundTol)) idx.push_back(k);
    }
    return idx;
  };
  auto gradient_norm = [&](const Eigen::VectorXd& theta, double f) {
    const Eigen::VectorXd g = optimize::numerical_gradient(objective, theta, bounds, f);
    double s = 0.0;
    for (Eigen::Index k : interior(theta)) s += g[k] * g[k];
    return std::sqrt(s);
  };
  auto stationary = [&](const optimize::Result& r) {
    return std::isfinite(r.value) && gradient_norm(r.x, r.value) < 1e-4 * (1.0 + std::abs(r.value));
  };

  optimize::Result best;
  best.value = kInf;
  if (m == 0) {
    best.x = Eigen::VectorXd(0);
    best.value = objective(best.x);
    best.converged = std::isfinite(best.value);
    best.method = "none";
  }
  for (const auto& s0 : starts) {
    optimize::Result r = optimize::minimize_bfgs(objective, s0, bounds, opts);
    r = optimize::polish_newton(objective, r, bounds);
    fit.convergence.iterations += r.iterations;
    fit.convergence.evaluations += r.evaluations;
    fit.convergence.start_logliks.push_back(-r.value);
    ++fit.convergence.starts;
    if (r.value < best.value || !std::isfinite(best.value)) best = r;
  }
  if (m > 0 && !stationary(best) && std::isfinite(best.value)) {
    optimize::Result nm = optimize::minimize_nelder_mead(objective, best.x, bounds, opts);
    optimize::Result r = optimize::minimize_bfgs(objective, nm.x, bounds, opts);
    r = optimize::polish_newton(objective, r, bounds);
    fit.convergence.iterations += nm.iterations + r.iterations;
    fit.convergence.evaluations += nm.evaluations + r.evaluations;
    if (r.value <= best.value) {
      best = r;
      best.method = "nelder-mead+bfgs";
    }
  }
  if (!std::isfinite(best.value) || (m > 0 && !stationary(best))) {
    std::vector<double> point(best.x.data(), best.x.data() + best.x.size());
    std::vector<std::string> labels;
    for (const auto& it : layout.items) labels.push_back(it.name);
    std::ostringstream msg;
    msg << "optimizer did not converge after " << cfg.max_iterations << " iterations x "
        << starts.size() << " starts; best log-likelihood " << -best.value << " at ("
        << join(labels) << ") = (";
    for (std::size_t i = 0; i < point.size(); ++i) msg << (i ? ", " : "") << point[i];
    msg << ")";
    throw ConvergenceError(msg.str(), point, -best.value);
  }

  const Eigen::VectorXd theta = best.x;
  fit.params = layout.to_params(theta);
  fit.loglik = loglik(theta);
  fit.convergence.converged = true;
  fit.convergence.method = best.method.empty() ? "bfgs" : best.method;
  fit.convergence.gradient_norm = m > 0 ? gradient_norm(theta, best.value) : 0.0;

  // Standard errors from the Hessian over the interior parameters.
  const std::vector<Eigen::Index> inner = interior(theta);
  const auto q = static_cast<Eigen::Index>(inner.size());
  Eigen::VectorXd se = Eigen::VectorXd::Constant(m, kNaN);
  if (q > 0) {
    auto restricted = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd full = theta;
      for (Eigen::Index k = 0; k < q; ++k) full[inner[static_cast<std::size_t>(k)]] = z[k];
      return loglik(full);
    };
    Eigen::VectorXd z(q);
    for (Eigen::Index k = 0; k < q; ++k) z[k] = theta[inner[static_cast<std::size_t>(k)]];
    try {
      const Eigen::MatrixXd neg_h = -optimize::numerical_hessian(restricted, z);
      Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
      if (llt.info() == Eigen::Success) {
        fit.covariance = llt.solve(Eigen::MatrixXd::Identity(q, q));
        fit.convergence.hessian_ok = true;
        for (Eigen::Index k = 0; k < q; ++k) {
          se[inner[static_cast<std::size_t>(k)]] = std::sqrt(fit.covariance(k, k));
        }
      } else {
        fit.notes.push_back("-H is not positive definite; standard errors unavailable");
      }
    } catch (const Error& e) {
      fit.notes.push_back(std::string("Hessian failed: ") + e.what());
    }
  }
  if (!fit.convergence.hessian_ok) fit.covariance.resize(0, 0);
  for (Eigen::Index k = 0; k < q && fit.convergence.hessian_ok; ++k) {
    fit.covariance_labels.push_back(layout.items[static_cast<std::size_t>(inner[static_cast<std::size_t>(k)])].name);
  }

  for (Eigen::Index k = 0; k < m; ++k) {
    const Item& it = layout.items[static_cast<std::size_t>(k)];
    Coefficient c;
    c.name = it.name;
    c.estimate = theta[k];
    c.at_bound = bounds.at_lower(theta, k, kBoundTol) || bounds.at_upper(theta, k, kBoundTol);
    c.std_error = se[k];
    if (std::isfinite(c.std_error) && c.std_error > 0.0) {
      c.t_value = c.estimate / c.std_error;
      c.p_value = 2.0 * normal::survival(std::abs(c.t_value));
    } else {
      c.std_error = kNaN;
      c.t_value = kNaN;
      c.p_value = kNaN;
    }
    if (c.at_bound) fit.convergence.at_bound.push_back(c.name);
    fit.coefficients.push_back(c);
  }

  fit.k = static_cast<int>(m);
  const InformationCriteria ic = information_criteria(fit.loglik, fit.k, static_cast<double>(n));
  fit.aic = ic.aic;
  fit.bic = ic.bic;

  fit.residuals = eval.residuals(ctx.y, x, fit.params);
  fit.fitted = ctx.y - fit.residuals;
  fit.h = eval.h(fit.residuals, fit.params);
  fit.standardized_residuals = fit.residuals.array() / fit.h.array().sqrt();
  fit.moran_residuals = morans_i(fit.standardized_residuals, *ctx.w, cfg.moran_alternative);
  fit.moran_squared =
      morans_i(fit.standardized_residuals.array().square().matrix(), *ctx.w, cfg.moran_alternative);
  return fit;
}

FitResult fit_sparch(const Eigen::VectorXd& y, const WeightsMatrix& w, Family family,
                     const OptimizerConfig& config) {
  return make_context_and_fit(y, nullptr, nullptr, w, family, config);
}

FitResult fit_sparch(const Eigen::VectorXd& y, const DesignMatrix& x, const WeightsMatrix& w,
                     Family family, const OptimizerConfig& config) {
  return make_context_and_fit(y, &x, nullptr, w, family, config);
}

FitResult fit_sarsparch(const Eigen::VectorXd& y, const DesignMatrix& x, const WeightsMatrix& b,
                        const WeightsMatrix& w, Family family, const OptimizerConfig& config) {
  return make_context_and_fit(y, &x, &b, w, family, config);
}

FitResult stepwise_bic(const Eigen::VectorXd& y, const DesignMatrix& candidates,
                       const WeightsMatrix* b, const WeightsMatrix& w, Family family,
                       const OptimizerConfig& config) {
  auto ctx = std::make_shared<ModelContext>();
  ctx->y = y;
  ctx->table = candidates;
  ctx->columns = candidates.names;
  ctx->intercept = true;
  ctx->w = std::make_shared<const WeightsMatrix>(w);
  if (b != nullptr) ctx->b = std::make_shared<const WeightsMatrix>(*b);
  ctx->family = family;
  ctx->config = config;

  FitResult current = fit_model(ctx);
  std::vector<TraceStep> trace{{current.formula, current.bic, "start"}};
  std::vector<std::string> notes;

  for (;;) {
    const ModelContext& cur = *current.context;
    std::optional<FitResult> chosen;
    std::string action;
    double best_bic = current.bic;

    auto consider = [&](std::vector<std::string> cols, const std::string& label) {
      auto next = std::make_shared<ModelContext>(cur);
      next->columns = std::move(cols);
      try {
        FitResult f = fit_model(next, &current);
        if (f.bic < best_bic) {
          best_bic = f.bic;
          action = label;
          chosen = std::move(f);
        }
      } catch (const Error& e) {
        notes.push_back("skipped " + label + " (" + next->formula() + "): " + e.what());
      }
    };

    for (const auto& col : cur.columns) {
      std::vector<std::string> cols;
      for (const auto& c : cur.columns) {
        if (c != col) cols.push_back(c);
      }
      consider(std::move(cols), "- " + col);
    }
    for (const auto& col : cur.table.names) {
      if (std::find(cur.columns.begin(), cur.columns.end(), col) != cur.columns.end()) continue;
      std::vector<std::string> cols;
      for (const auto& c : cur.table.names) {
        if (c == col || std::find(cur.columns.begin(), cur.columns.end(), c) != cur.columns.end()) {
          cols.push_back(c);
        }
      }
      consider(std::move(cols), "+ " + col);
    }
    if (!chosen) break;
    current = std::move(*chosen);
    trace.push_back({current.formula, current.bic, action});
  }
  current.trace = std::move(trace);
  current.notes.insert(current.notes.end(), notes.begin(), notes.end());
  return current;
}

FitResult update_model(const FitResult& fit, const std::vector<std::string>& add,
                       const std::vector<std::string>& drop) {
  if (!fit.context) throw InvalidArgument("fit carries no model context");
  auto next = std::make_shared<ModelContext>(*fit.context);
  for (const auto& name : drop) {
    if (name == kIntercept) {
      if (!next->intercept) throw InvalidArgument("model has no intercept to drop");
      next->intercept = false;
      continue;
    }
    const auto it = std::find(next->columns.begin(), next->columns.end(), name);
    if (it == next->columns.end()) throw InvalidArgument("cannot drop '" + name + "': not in the model");
    next->columns.erase(it);
  }
  for (const auto& name : add) {
    if (name == kIntercept) {
      next->intercept = true;
      continue;
    }
    if (std::find(next->table.names.begin(), next->table.names.end(), name) == next->table.names.end()) {
      throw InvalidArgument("cannot add '" + name + "': unknown column");
    }
    if (std::find(next->columns.begin(), next->columns.end(), name) != next->columns.end()) {
      throw InvalidArgument("cannot add '" + name + "': already in the model");
    }
    next->columns.push_back(name);
  }
  // Keep covariates in table order.
  std::vector<std::string> ordered;
  for (const auto& c : next->table.names) {
    if (std::find(next->columns.begin(), next->columns.end(), c) != next->columns.end()) ordered.push_back(c);
  }
  next->columns = std::move(ordered);
  return fit_model(next, &fit);
}

FitResult update_model(const FitResult& fit, const DesignMatrix& add_columns,
                       const std::vector<std::string>& drop) {
  if (!fit.context) throw InvalidArgument("fit carries no model context");
  if (static_cast<Eigen::Index>(add_columns.names.size()) != add_columns.x.cols()) {
    throw InvalidArgument("added columns and labels disagree in number");
  }
  if (add_columns.x.cols() > 0 && add_columns.x.rows() != fit.context->y.size()) {
    throw InvalidArgument("added columns have " + std::to_string(add_columns.x.rows()) +
                          " rows, expected " + std::to_string(fit.context->y.size()));
  }
  auto ctx = std::make_shared<ModelContext>(*fit.context);
  DesignMatrix& t = ctx->table;
  for (Eigen::Index j = 0; j < add_columns.x.cols(); ++j) {
    const std::string& name = add_columns.names[static_cast<std::size_t>(j)];
    if (name == kIntercept || std::find(t.names.begin(), t.names.end(), name) != t.names.end()) {
      throw InvalidArgument("column '" + name + "' already exists");
    }
    t.x.conservativeResize(ctx->y.size(), t.x.cols() + 1);
    t.x.col(t.x.cols() - 1) = add_columns.x.col(j);
    t.names.push_back(name);
  }
  FitResult staged = fit;
  staged.context = ctx;
  return update_model(staged, add_columns.names, drop);
}

}  // namespace sparch
