#include "sparch/simulate.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "sparch/error.hpp"
#include "sparch/kernels.hpp"
#include "sparch/logdet.hpp"
#include "sparch/normal.hpp"
#include "sparch/rng.hpp"

namespace sparch {
namespace {

void check_common(const SimulationSpec& spec, const WeightsMatrix& w) {
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) throw InvalidArgument("alpha must be > 0");
  if (!(spec.rho >= 0.0) || !std::isfinite(spec.rho)) throw InvalidArgument("rho must be >= 0");
  if (!(spec.b > 0.0) || !std::isfinite(spec.b)) throw InvalidArgument("b must be > 0");
  if (w.size() == 0) throw InvalidArgument("weights matrix is empty");
}

void check_errors(const Eigen::VectorXd& eps, const WeightsMatrix& w) {
  if (static_cast<std::size_t>(eps.size()) != w.size()) {
    throw InvalidArgument("error vector has length " + std::to_string(eps.size()) +
                          " but the weights matrix is " + std::to_string(w.size()) + " x " +
                          std::to_string(w.size()));
  }
}

Eigen::VectorXd draw_errors(double a, std::size_t n, std::uint64_t seed) {
  const std::vector<double> e = sample_truncated_normal(a, n, seed);
  return Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(n));
}

// Solves (I - rho diag(eps^2) W) y2 = alpha eps^2 and fills h = alpha + rho W y2.
SimulatedField solve_squared(const Eigen::VectorXd& eps, double alpha, double rho,
                             const WeightsMatrix& w, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(w.size());
  const Eigen::VectorXd eps2 = eps.array().square();

  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> triplets;
  triplets.reserve(w.nonzeros() + w.size());
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (const auto& e : w.entries()) {
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col),
                          -rho * eps2[static_cast<Eigen::Index>(e.row)] * e.value);
  }
  LuFactorization::ColMajor system(n, n);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  const LuFactorization lu(system);
  if (lu.singular()) {
    throw SingularSystem("I - rho diag(eps^2) W is singular (seed " + std::to_string(seed) + ")",
                         seed);
  }

  SimulatedField field;
  field.seed = seed;
  field.eps = eps;
  field.y_squared = lu.solve(alpha * eps2);
  field.h.resize(n);
  kernels::spmv_affine(w.csr(), {field.y_squared.data(), static_cast<std::size_t>(n)}, alpha, rho,
                       {field.h.data(), static_cast<std::size_t>(n)});
  field.y.resize(n);
  field.y_imag = Eigen::VectorXd::Zero(n);
  return field;
}

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Negative y2 larger than rounding noise relative to the solution scale.
bool materially_negative(double y2, double scale) { return y2 < -1e-12 * scale; }

}  // namespace

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::sparch_gaussian:
      return "sparch_gaussian";
    case Family::esparch:
      return "esparch";
    case Family::complex:
      return "complex";
    case Family::white_noise:
      return "white_noise";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "sparch_gaussian" || name == "gaussian" || name == "sparch") return Family::sparch_gaussian;
  if (name == "esparch" || name == "exp") return Family::esparch;
  if (name == "complex") return Family::complex;
  if (name == "white_noise" || name == "white-noise") return Family::white_noise;
  throw InvalidArgument("unknown family '" + std::string(name) + "'");
}

std::vector<double> sample_truncated_normal(double a, std::size_t count, std::uint64_t seed) {
  if (!(a > 0.0)) throw InvalidArgument("truncation bound must be > 0");
  CounterRng rng(seed);
  std::vector<double> out(count);
  if (std::isinf(a)) {
    for (double& x : out) x = normal::quantile(rng.uniform_open());
    return out;
  }
  const double lower = normal::survival(a);  // Phi(-a)
  const double width = 1.0 - 2.0 * lower;
  const double inside = std::nextafter(a, 0.0);
  for (double& x : out) {
    x = normal::quantile(lower + rng.uniform_open() * width);
    if (x >= a) x = inside;
    if (x <= -a) x = -inside;
  }
  return out;
}

SimulatedField sparch_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                        const WeightsMatrix& w, std::uint64_t seed) {
  check_errors(eps, w);
  SimulatedField field = solve_squared(eps, alpha, rho, w, seed);
  const double scale = std::max(1.0, field.y_squared.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    const double y2 = field.y_squared[i];
    if (materially_negative(y2, scale)) {
      throw RegularityViolation(
          "solved y^2 at location " + std::to_string(i + 1) + " is negative (" +
              std::to_string(y2) +
              "): (I - A^2)^{-1} is not entrywise nonnegative for this error draw, so the spatial "
              "ARCH process has no real solution (regularity condition violated; seed " +
              std::to_string(seed) + ")",
          seed);
    }
    field.y[i] = sign_of(eps[i]) * std::sqrt(std::max(y2, 0.0));
  }
  return field;
}

SimulatedField complex_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                         const WeightsMatrix& w, std::uint64_t seed) {
  check_errors(eps, w);
  SimulatedField field = solve_squared(eps, alpha, rho, w, seed);
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    const double y2 = field.y_squared[i];
    if (y2 >= 0.0) {
      field.y[i] = sign_of(eps[i]) * std::sqrt(y2);
    } else {
      field.y[i] = 0.0;
      field.y_imag[i] = sign_of(eps[i]) * std::sqrt(-y2);
    }
  }
  return field;
}

SimulatedField esparch_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                         double b, const WeightsMatrix& w) {
  check_errors(eps, w);
  std::vector<std::size_t> zeros;
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    if (eps[i] == 0.0) zeros.push_back(static_cast<std::size_t>(i));
  }
  if (!zeros.empty()) throw DomainError("ln|eps| undefined: some errors are exactly zero", zeros);

  const auto n = static_cast<std::size_t>(eps.size());
  const Eigen::VectorXd log_abs = eps.array().abs().log();
  Eigen::VectorXd log_h(eps.size());
  kernels::spmv_affine(w.csr(), {log_abs.data(), n}, alpha, rho * b, {log_h.data(), n});

  SimulatedField field;
  field.eps = eps;
  field.h = log_h.array().exp();
  field.y = field.h.array().sqrt() * eps.array();
  field.y_imag = Eigen::VectorXd::Zero(eps.size());
  field.y_squared = field.y.array().square();
  return field;
}

SimulatedField simulate_sparch(const SimulationSpec& spec, const WeightsMatrix& w) {
  check_common(spec, w);
  if (spec.family != Family::sparch_gaussian) throw InvalidArgument("simulate_sparch needs family sparch_gaussian");
  // Oriented processes (nilpotent W) need no truncation.
  double a = std::numeric_limits<double>::infinity();
  if (!spec.force_untruncated) a = truncation_bound(w, spec.rho);
  const Eigen::VectorXd eps = draw_errors(a, w.size(), spec.seed);
  SimulatedField field = sparch_field_from_errors(eps, spec.alpha, spec.rho, w, spec.seed);
  field.truncation = a;
  return field;
}

SimulatedField simulate_complex(const SimulationSpec& spec, const WeightsMatrix& w) {
  check_common(spec, w);
  if (spec.family != Family::complex) throw InvalidArgument("simulate_complex needs family complex");
  const Eigen::VectorXd eps =
      draw_errors(std::numeric_limits<double>::infinity(), w.size(), spec.seed);
  SimulatedField field = complex_field_from_errors(eps, spec.alpha, spec.rho, w, spec.seed);
  return field;
}

SimulatedField simulate_esparch(const SimulationSpec& spec, const WeightsMatrix& w) {
  check_common(spec, w);
  if (spec.family != Family::esparch) throw InvalidArgument("simulate_esparch needs family esparch");
  const std::size_t n = w.size();
  Eigen::VectorXd eps = draw_errors(std::numeric_limits<double>::infinity(), n, spec.seed);
  // eps_i == 0 has probability zero; redraw from the stream positions after
  // the first n so the other coordinates keep their values.
  CounterRng extra(spec.seed, n);
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    while (eps[i] == 0.0) {
      std::clog << "warning: redrawing zero error at location " << (i + 1) << " (seed "
                << spec.seed << ")\n";
      eps[i] = normal::quantile(extra.uniform_open());
    }
  }
  SimulatedField field = esparch_field_from_errors(eps, spec.alpha, spec.rho, spec.b, w);
  field.seed = spec.seed;
  return field;
}

SimulatedField simulate_white_noise(const SimulationSpec& spec, const WeightsMatrix& w) {
  check_common(spec, w);
  const Eigen::VectorXd eps =
      draw_errors(std::numeric_limits<double>::infinity(), w.size(), spec.seed);
  SimulatedField field;
  field.seed = spec.seed;
  field.eps = eps;
  field.h = Eigen::VectorXd::Constant(eps.size(), spec.alpha);
  field.y = std::sqrt(spec.alpha) * eps;
  field.y_imag = Eigen::VectorXd::Zero(eps.size());
  field.y_squared = field.y.array().square();
  return field;
}

SimulatedField simulate(const SimulationSpec& spec, const WeightsMatrix& w) {
  switch (spec.family) {
    case Family::sparch_gaussian:
      return simulate_sparch(spec, w);
    case Family::esparch:
      return simulate_esparch(spec, w);
    case Family::complex:
      return simulate_complex(spec, w);
    case Family::white_noise:
      return simulate_white_noise(spec, w);
  }
  throw InvalidArgument("unknown family");
}

}  // namespace sparch
