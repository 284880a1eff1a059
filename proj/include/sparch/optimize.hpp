#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace sparch::optimize {

/// Objective to minimize. Returning +inf (or NaN) marks an infeasible point.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Coordinate i sits within tol of a bound.
  bool at_lower(const Eigen::VectorXd& x, Eigen::Index i, double tol = 1e-6) const;
  bool at_upper(const Eigen::VectorXd& x, Eigen::Index i, double tol = 1e-6) const;
};

struct Options {
  int max_iterations = 500;
  double tolerance = 1e-8;  // on objective change and parameter step
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  double projected_gradient_norm = 0.0;
  std::string method;
};

/// Finite-difference gradient. Central where both probes stay inside the
/// bounds and are finite, one-sided otherwise.
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   const Bounds& bounds, double fx);

/// Gradient with the components pointing out of an active bound zeroed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Bounds& bounds);

/// Projected BFGS with Armijo backtracking along the projection arc.
Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                     const Options& options = {});

/// Nelder-Mead simplex search; vertices are projected into the box.
Result minimize_nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                            const Options& options = {});

/// Up to max_steps damped Newton steps on the coordinates away from their
/// bounds, using numerical_hessian. Never returns a worse point.
Result polish_newton(const Objective& f, const Result& start, const Bounds& bounds,
                     int max_steps = 4);

struct HessianReport {
  Eigen::VectorXd steps;  // final per-coordinate steps
  int halvings = 0;       // total number of step halvings performed
};

/// Central-difference Hessian of f at x with per-coordinate step
/// max(1e-4 |x_i|, 1e-5), symmetrized. A non-finite probe halves the steps of
/// the coordinates involved; more than 5 halvings of one coordinate throw
/// sparch::Error.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  HessianReport* report = nullptr);

}  // namespace sparch::optimize
