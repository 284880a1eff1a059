#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "sparch/weights.hpp"

namespace sparch {

/// Process family. `sparch_gaussian` is the original spatial ARCH process,
/// `esparch` the exponential variant, `complex` the spatial ARCH process
/// allowing negative h (complex observations).
enum class Family { sparch_gaussian, esparch, complex, white_noise };

std::string_view family_name(Family f) noexcept;
/// Accepts the canonical names plus the short forms "gaussian" and "exp".
Family parse_family(std::string_view name);

struct SimulationSpec {
  double alpha = 1.0;
  double rho = 0.0;
  double b = 2.0;
  Family family = Family::sparch_gaussian;
  std::uint64_t seed = 0;
  /// Only meaningful for sparch_gaussian on a cyclic W: draw untruncated
  /// normal errors anyway. Negative solved y^2 then raises RegularityViolation.
  bool force_untruncated = false;
};

/// Observations y = diag(h)^{1/2} eps. For the complex family each y_i is
/// either purely real (h_i >= 0) or purely imaginary (h_i < 0); y_imag is all
/// zero for the real families.
struct SimulatedField {
  Eigen::VectorXd y;
  Eigen::VectorXd y_imag;
  Eigen::VectorXd eps;
  Eigen::VectorXd h;
  /// The solved squared observations (spARCH and complex families), y_i^2 otherwise.
  Eigen::VectorXd y_squared;
  /// Truncation half-width used for eps (+inf when untruncated).
  double truncation = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

/// i.i.d. standard normal draws conditioned on (-a, a), by inverse-CDF
/// transform of uniforms: exactly one uniform per draw, so the stream is a
/// pure function of (seed, index) for every a. a = +inf gives plain normals.
std::vector<double> sample_truncated_normal(double a, std::size_t count, std::uint64_t seed);

/// Dispatches on spec.family.
SimulatedField simulate(const SimulationSpec& spec, const WeightsMatrix& w);

SimulatedField simulate_sparch(const SimulationSpec& spec, const WeightsMatrix& w);
SimulatedField simulate_esparch(const SimulationSpec& spec, const WeightsMatrix& w);
SimulatedField simulate_complex(const SimulationSpec& spec, const WeightsMatrix& w);
SimulatedField simulate_white_noise(const SimulationSpec& spec, const WeightsMatrix& w);

// Deterministic field construction from a given error vector. The simulate_*
// functions draw eps and delegate here; tests use these with hand-picked eps.

/// Solves (I - rho diag(eps^2) W) y2 = alpha eps^2. Throws SingularSystem when
/// the system is singular and RegularityViolation when some y2_i < 0.
SimulatedField sparch_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                        const WeightsMatrix& w, std::uint64_t seed = 0);
/// ln h = alpha + rho b W ln|eps|. Throws DomainError on eps_i == 0.
SimulatedField esparch_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                         double b, const WeightsMatrix& w);
/// Like sparch_field_from_errors but negative y2_i produce imaginary y_i.
SimulatedField complex_field_from_errors(const Eigen::VectorXd& eps, double alpha, double rho,
                                         const WeightsMatrix& w, std::uint64_t seed = 0);

}  // namespace sparch
