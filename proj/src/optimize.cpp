#include "sparch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sparch/error.hpp"

namespace sparch::optimize {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe(double v) { return std::isfinite(v) ? v : kInf; }

// Counts objective evaluations for the result record.
struct Counted {
  const Objective& f;
  int count = 0;
  double operator()(const Eigen::VectorXd& x) {
    ++count;
    return safe(f(x));
  }
};

double fd_step(double x) { return 6e-6 * std::max(std::abs(x), 1.0); }

Eigen::VectorXd gradient_impl(Counted& f, const Eigen::VectorXd& x, const Bounds& bounds,
                              double fx) {
  const auto n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = fd_step(x[i]);
    const bool up_ok = x[i] + h <= bounds.upper[i];
    const bool down_ok = x[i] - h >= bounds.lower[i];
    double fp = kInf;
    double fm = kInf;
    if (up_ok) {
      probe[i] = x[i] + h;
      fp = f(probe);
    }
    if (down_ok) {
      probe[i] = x[i] - h;
      fm = f(probe);
    }
    probe[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXd Bounds::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Bounds::at_lower(const Eigen::VectorXd& x, Eigen::Index i, double tol) const {
  return std::isfinite(lower[i]) && x[i] <= lower[i] + tol;
}

bool Bounds::at_upper(const Eigen::VectorXd& x, Eigen::Index i, double tol) const {
  return std::isfinite(upper[i]) && x[i] >= upper[i] - tol;
}

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   const Bounds& bounds, double fx) {
  Counted counted{f};
  return gradient_impl(counted, x, bounds, fx);
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Bounds& bounds) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= bounds.lower[i] && g[i] > 0.0) pg[i] = 0.0;
    if (x[i] >= bounds.upper[i] && g[i] < 0.0) pg[i] = 0.0;
  }
  return pg;
}

Result minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const Bounds& bounds,
                     const Options& options) {
  Counted f{objective};
  const auto n = x0.size();
  Result r;
  r.method = "bfgs";
  r.x = bounds.project(x0);
  r.value = f(r.x);
  if (!std::isfinite(r.value)) {
    r.evaluations = f.count;
    return r;
  }
  Eigen::VectorXd g = gradient_impl(f, r.x, bounds, r.value);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
  bool fresh = true;

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    Eigen::VectorXd pg = projected_gradient(r.x, g, bounds);
    r.projected_gradient_norm = inf_norm(pg);
    if (r.projected_gradient_norm <= 1e-6 * (1.0 + std::abs(r.value))) {
      r.converged = true;
      break;
    }

    Eigen::VectorXd d = -(h_inv * pg);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pg[i] == 0.0 && (r.x[i] <= bounds.lower[i] || r.x[i] >= bounds.upper[i])) d[i] = 0.0;
    }
    if (d.dot(pg) >= 0.0) {
      h_inv = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
      fresh = true;
      d = -(h_inv * pg);
    }

    double t = 1.0;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      x_new = bounds.project(r.x + t * d);
      const Eigen::VectorXd s = x_new - r.x;
      if (inf_norm(s) == 0.0) break;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * g.dot(s)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        h_inv = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
        fresh = true;
        continue;
      }
      // No descent is possible along the gradient either: stalled.
      r.converged = r.projected_gradient_norm <= 1e-4 * (1.0 + std::abs(r.value));
      break;
    }

    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd g_new = gradient_impl(f, x_new, bounds, f_new);
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    const double df = r.value - f_new;
    r.x = x_new;
    r.value = f_new;
    g = g_new;

    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh) {
        h_inv = Eigen::MatrixXd::Identity(n, n) * (sy / yv.squaredNorm());
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * yv.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }

    if (df <= options.tolerance * (1.0 + std::abs(r.value)) &&
        inf_norm(s) <= std::sqrt(options.tolerance) * (1.0 + inf_norm(r.x))) {
      pg = projected_gradient(r.x, g, bounds);
      r.projected_gradient_norm = inf_norm(pg);
      r.converged = r.projected_gradient_norm <= 1e-4 * (1.0 + std::abs(r.value));
      ++r.iterations;
      break;
    }
  }
  r.evaluations = f.count;
  return r;
}

Result minimize_nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                            const Bounds& bounds, const Options& options) {
  Counted f{objective};
  const auto n = x0.size();
  Result r;
  r.method = "nelder-mead";

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), bounds.project(x0));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& p = pts[static_cast<std::size_t>(i + 1)];
    const double step = 0.1 * std::max(std::abs(p[i]), 0.1);
    p[i] = p[i] + step <= bounds.upper[i] ? p[i] + step : p[i] - step;
    p = bounds.project(p);
  }
  std::vector<double> vals(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = f(pts[k]);

  std::vector<std::size_t> order(pts.size());
  const int budget = options.max_iterations * static_cast<int>(std::max<Eigen::Index>(n, 1)) * 4;
  for (r.iterations = 0; r.iterations < budget; ++r.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, inf_norm(p - pts[best]));
    if (std::isfinite(vals[worst]) &&
        vals[worst] - vals[best] <= options.tolerance * (1.0 + std::abs(vals[best])) &&
        diameter <= std::sqrt(options.tolerance) * (1.0 + inf_norm(pts[best]))) {
      r.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k != worst) centroid += pts[k];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = bounds.project(centroid + (centroid - pts[worst]));
    const double fr = f(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = bounds.project(centroid + 2.0 * (centroid - pts[worst]));
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? bounds.project(centroid + 0.5 * (xr - centroid))
                                       : bounds.project(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == best) continue;
      pts[k] = bounds.project(pts[best] + 0.5 * (pts[k] - pts[best]));
      vals[k] = f(pts[k]);
    }
  }
  const auto best_it = std::min_element(vals.begin(), vals.end());
  const auto best = static_cast<std::size_t>(best_it - vals.begin());
  r.x = pts[best];
  r.value = vals[best];
  if (std::isfinite(r.value)) {
    const Eigen::VectorXd g = gradient_impl(f, r.x, bounds, r.value);
    r.projected_gradient_norm = inf_norm(projected_gradient(r.x, g, bounds));
  }
  r.evaluations = f.count;
  return r;
}

Result polish_newton(const Objective& objective, const Result& start, const Bounds& bounds,
                     int max_steps) {
  Counted f{objective};
  Result r = start;
  if (!std::isfinite(r.value)) return r;
  const auto n = r.x.size();
  for (int step = 0; step < max_steps; ++step) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!bounds.at_lower(r.x, i) && !bounds.at_upper(r.x, i)) free.push_back(i);
    }
    if (free.empty()) break;
    const auto m = static_cast<Eigen::Index>(free.size());
    const Eigen::VectorXd base = r.x;
    auto restricted = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd full = base;
      for (Eigen::Index k = 0; k < m; ++k) full[free[static_cast<std::size_t>(k)]] = z[k];
      return f(full);
    };
    Eigen::VectorXd z(m);
    for (Eigen::Index k = 0; k < m; ++k) z[k] = base[free[static_cast<std::size_t>(k)]];

    Eigen::MatrixXd hess;
    try {
      hess = numerical_hessian(restricted, z);
    } catch (const Error&) {
      break;
    }
    const Eigen::VectorXd g_full = gradient_impl(f, base, bounds, r.value);
    Eigen::VectorXd g(m);
    for (Eigen::Index k = 0; k < m; ++k) g[k] = g_full[free[static_cast<std::size_t>(k)]];

    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd delta = -llt.solve(g);

    bool improved = false;
    double t = 1.0;
    for (int k = 0; k < 8; ++k, t *= 0.5) {
      Eigen::VectorXd cand = base;
      for (Eigen::Index j = 0; j < m; ++j) cand[free[static_cast<std::size_t>(j)]] += t * delta[j];
      cand = bounds.project(cand);
      const double fc = f(cand);
      if (std::isfinite(fc) && fc <= r.value) {
        const double gain = r.value - fc;
        r.x = cand;
        r.value = fc;
        improved = gain > 1e-14 * (1.0 + std::abs(fc));
        break;
      }
    }
    if (!improved) break;
  }
  const Eigen::VectorXd g = gradient_impl(f, r.x, bounds, r.value);
  r.projected_gradient_norm = inf_norm(projected_gradient(r.x, g, bounds));
  r.evaluations += f.count;
  return r;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  HessianReport* report) {
  const auto n = x.size();
  const double f0 = f(x);
  if (!std::isfinite(f0)) throw Error("numerical Hessian: objective is not finite at the point");

  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = std::max(1e-4 * std::abs(x[i]), 1e-5);
  std::vector<int> halved(static_cast<std::size_t>(n), 0);
  int total_halvings = 0;

  auto halve = [&](Eigen::Index i) {
    if (++halved[static_cast<std::size_t>(i)] > 5) {
      throw Error("numerical Hessian: objective not finite near coordinate " +
                  std::to_string(i + 1) + " after 5 step halvings");
    }
    h[i] *= 0.5;
    ++total_halvings;
  };

  Eigen::MatrixXd hess(n, n);
  for (;;) {
    bool restart = false;
    Eigen::VectorXd p = x;
    for (Eigen::Index i = 0; i < n && !restart; ++i) {
      p[i] = x[i] + h[i];
      const double fp = f(p);
      p[i] = x[i] - h[i];
      const double fm = f(p);
      p[i] = x[i];
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        halve(i);
        restart = true;
        break;
      }
      hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for (Eigen::Index i = 0; i < n && !restart; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        double v[4];
        const double si[4] = {1, 1, -1, -1};
        const double sj[4] = {1, -1, 1, -1};
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
          p[i] = x[i] + si[k] * h[i];
          p[j] = x[j] + sj[k] * h[j];
          v[k] = f(p);
          ok = ok && std::isfinite(v[k]);
        }
        p[i] = x[i];
        p[j] = x[j];
        if (!ok) {
          halve(i);
          halve(j);
          restart = true;
          break;
        }
        hess(i, j) = hess(j, i) = (v[0] - v[1] - v[2] + v[3]) / (4.0 * h[i] * h[j]);
      }
    }
    if (!restart) break;
  }
  if (report != nullptr) {
    report->steps = h;
    report->halvings = total_halvings;
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace sparch::optimize
