#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "sparch/diagnostics.hpp"
#include "sparch/error.hpp"
#include "sparch/likelihood.hpp"
#include "sparch/normal.hpp"
#include "sparch/simulate.hpp"
#include "sparch/weights.hpp"

using namespace sparch;

namespace {

WeightsMatrix two_cycle() {
  const std::vector<WeightsMatrix::Entry> e{{0, 1, 1.0}, {1, 0, 1.0}};
  return WeightsMatrix::from_entries(2, e);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("rho = 0 gives sqrt(alpha) eps for every family") {
    const auto w = row_standardize(build_lattice_contiguity({6, 6, Contiguity::queen}));
    for (auto fam : {Family::sparch_gaussian, Family::complex, Family::white_noise}) {
      const SimulationSpec spec{2.5, 0.0, 2.0, fam, 31};
      const auto f = simulate(spec, w);
      CHECK((f.y - std::sqrt(2.5) * f.eps).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK(f.y_imag.cwiseAbs().maxCoeff() == 0.0);
    }
    const SimulationSpec e{0.7, 0.0, 2.0, Family::esparch, 31};
    const auto f = simulate(e, w);
    for (Eigen::Index i = 0; i < f.h.size(); ++i) CHECK(f.h[i] == doctest::Approx(std::exp(0.7)).epsilon(1e-14));
  }

  TEST_CASE("2x2 spatial ARCH solve matches hand elimination") {
    const auto w = two_cycle();
    const double rho = 0.5;
    const double e1 = 0.3 * 0.3;
    const double e2 = 0.4 * 0.4;
    // (1, -rho e1; -rho e2, 1) y2 = (e1, e2).
    const double det = 1.0 - rho * rho * e1 * e2;
    const double y1 = (e1 + rho * e1 * e2) / det;
    const double y2 = (e2 + rho * e2 * e1) / det;
    const auto f = sparch_field_from_errors(vec({0.3, -0.4}), 1.0, rho, w);
    CHECK(f.y_squared[0] == doctest::Approx(y1).epsilon(1e-14));
    CHECK(f.y_squared[1] == doctest::Approx(y2).epsilon(1e-14));
    CHECK(f.y[0] == doctest::Approx(std::sqrt(y1)).epsilon(1e-14));
    CHECK(f.y[1] == doctest::Approx(-std::sqrt(y2)).epsilon(1e-14));
    CHECK(f.h[0] == doctest::Approx(1.0 + rho * y2).epsilon(1e-14));
    CHECK(f.h[1] == doctest::Approx(1.0 + rho * y1).epsilon(1e-14));
  }

  TEST_CASE("oriented process matches the location-by-location recursion") {
    std::mt19937_64 g(12);
    for (std::size_t n : {3u, 10u, 40u, 120u}) {
      const auto w = testing::random_weights(g, n, 0.2, true);
      REQUIRE(is_strictly_triangularizable(w));
      const SimulationSpec spec{1.3, 0.4, 2.0, Family::sparch_gaussian, n};
      const auto f = simulate(spec, w);
      CHECK(std::isinf(f.truncation));
      // Lower-triangular W: h_i depends only on y_j with j < i.
      const Eigen::MatrixXd d = w.to_dense();
      Eigen::VectorXd y2(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        double h = 1.3;
        for (Eigen::Index j = 0; j < i; ++j) h += 0.4 * d(i, j) * y2[j];
        y2[i] = h * f.eps[i] * f.eps[i];
        CHECK(f.h[i] == doctest::Approx(h).epsilon(1e-10));
      }
      CHECK((f.y_squared - y2).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, y2.maxCoeff()));
    }
  }

  TEST_CASE("truncated errors keep the squared solution nonnegative on a cyclic lattice") {
    const auto w = row_standardize(build_lattice_contiguity({10, 10, Contiguity::queen}));
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      const SimulationSpec spec{1.0, 0.9, 2.0, Family::sparch_gaussian, seed};
      const auto f = simulate(spec, w);
      REQUIRE(f.y_squared.minCoeff() >= 0.0);
      REQUIRE(f.eps.cwiseAbs().maxCoeff() < f.truncation);
    }
  }

  TEST_CASE("reconstruction y / sqrt(h) = eps for real families") {
    const auto w = row_standardize(build_lattice_contiguity({8, 8, Contiguity::rook}));
    for (auto fam : {Family::sparch_gaussian, Family::esparch, Family::white_noise}) {
      const SimulationSpec spec{1.0, 0.6, 2.0, fam, 77};
      const auto f = simulate(spec, w);
      CHECK(f.h.minCoeff() > 0.0);
      const Eigen::VectorXd back = f.y.array() / f.h.array().sqrt();
      CHECK((back - f.eps).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("untruncated draws on a strongly coupled lattice violate regularity") {
    const auto w = row_standardize(build_lattice_contiguity({10, 10, Contiguity::rook}));
    bool violated = false;
    for (std::uint64_t seed = 1; seed <= 20 && !violated; ++seed) {
      SimulationSpec spec{1.0, 0.95, 2.0, Family::sparch_gaussian, seed};
      spec.force_untruncated = true;
      try {
        simulate(spec, w);
      } catch (const RegularityViolation& e) {
        violated = true;
        CHECK(e.seed() == seed);
      }
    }
    CHECK(violated);
  }

  TEST_CASE("complex family: imaginary where h < 0 and y^2 reproduces the linear solve") {
    const auto w = row_standardize(build_lattice_contiguity({10, 10, Contiguity::rook}));
    bool saw_imaginary = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const SimulationSpec spec{1.0, 0.95, 2.0, Family::complex, seed};
      const auto f = simulate(spec, w);
      for (Eigen::Index i = 0; i < f.y.size(); ++i) {
        CHECK((f.y[i] == 0.0 || f.y_imag[i] == 0.0));
        const double sq = f.y[i] * f.y[i] - f.y_imag[i] * f.y_imag[i];
        CHECK(sq == doctest::Approx(f.y_squared[i]).epsilon(1e-10).scale(1.0));
        if (f.y_imag[i] != 0.0) {
          saw_imaginary = true;
          CHECK(f.h[i] < 0.0);
        }
      }
    }
    CHECK(saw_imaginary);
  }

  TEST_CASE("complex family equals the real family when every h is nonnegative") {
    const auto w = row_standardize(build_lattice_contiguity({5, 5, Contiguity::rook}));
    const Eigen::VectorXd eps = Eigen::VectorXd::LinSpaced(25, -0.5, 0.5);
    const auto r = sparch_field_from_errors(eps, 1.0, 0.5, w);
    const auto c = complex_field_from_errors(eps, 1.0, 0.5, w);
    CHECK(r.y == c.y);
    CHECK(c.y_imag.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("exponential field: hand example and round trip through the observation form") {
    const auto w = two_cycle();
    const double alpha = 0.3;
    const auto f = esparch_field_from_errors(vec({1.0, std::exp(1.0)}), alpha, 0.5, 2.0, w);
    CHECK(std::log(f.h[0]) == doctest::Approx(alpha + 1.0).epsilon(1e-14));
    CHECK(std::log(f.h[1]) == doctest::Approx(alpha).epsilon(1e-14));
    CHECK_THROWS_AS(esparch_field_from_errors(vec({0.0, 1.0}), alpha, 0.5, 2.0, w), DomainError);

    const auto lattice = row_standardize(build_lattice_contiguity({12, 12, Contiguity::queen}));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SimulationSpec spec{1.0, 0.5, 2.0, Family::esparch, seed};
      const auto s = simulate(spec, lattice);
      CHECK(s.h.minCoeff() > 0.0);
      const Eigen::VectorXd h = h_esparch(s.y, 1.0, 0.5, 2.0, lattice);
      CHECK((h.array().log() - s.h.array().log()).abs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("simulation is bit-identical for identical inputs") {
    const auto w = row_standardize(build_lattice_contiguity({7, 9, Contiguity::queen}));
    for (auto fam : {Family::sparch_gaussian, Family::esparch, Family::complex, Family::white_noise}) {
      const SimulationSpec spec{1.0, 0.4, 2.0, fam, 5515};
      const auto a = simulate(spec, w);
      const auto b = simulate(spec, w);
      CHECK(a.y == b.y);
      CHECK(a.y_imag == b.y_imag);
      CHECK(a.h == b.h);
      const SimulationSpec other{1.0, 0.4, 2.0, fam, 5516};
      CHECK(simulate(other, w).eps != a.eps);
    }
  }

  TEST_CASE("white noise variance and absence of spatial correlation") {
    const auto w = row_standardize(build_lattice_contiguity({300, 334, Contiguity::rook}));
    const SimulationSpec spec{2.0, 0.0, 2.0, Family::white_noise, 99};
    const auto f = simulate(spec, w);
    const double var = f.y.squaredNorm() / static_cast<double>(f.y.size()) -
                       std::pow(f.y.mean(), 2);
    CHECK(var == doctest::Approx(2.0).epsilon(0.02));

    const auto small = row_standardize(build_lattice_contiguity({20, 20, Contiguity::rook}));
    const auto g = simulate(SimulationSpec{1.0, 0.0, 2.0, Family::white_noise, 4}, small);
    const auto t = morans_i(g.y, small, Alternative::two_sided);
    CHECK(std::abs(t.z_score) < normal::quantile(0.995));
  }

  TEST_CASE("odd moments vanish: replicate means shrink like 1/sqrt(reps)") {
    const auto w = row_standardize(build_lattice_contiguity({5, 5, Contiguity::rook}));
    // Location-wise mean over reps and cross-moment y_0 y_1 both have zero
    // expectation; their scaled magnitudes stay bounded as reps grow.
    for (std::size_t reps : {400u, 1600u, 6400u}) {
      double mean = 0.0;
      double cross = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto f = simulate(SimulationSpec{1.0, 0.5, 2.0, Family::sparch_gaussian, 1000 + r}, w);
        mean += f.y[12];
        cross += f.y[12] * f.y[13];
      }
      mean /= static_cast<double>(reps);
      cross /= static_cast<double>(reps);
      CAPTURE(reps);
      CHECK(std::abs(mean) * std::sqrt(static_cast<double>(reps)) < 4.0 * 1.5);
      CHECK(std::abs(cross) * std::sqrt(static_cast<double>(reps)) < 4.0 * 2.0);
    }
  }

  TEST_CASE("invalid simulation settings are rejected") {
    const auto w = two_cycle();
    CHECK_THROWS_AS(simulate(SimulationSpec{0.0, 0.1, 2.0, Family::sparch_gaussian, 1}, w), InvalidArgument);
    CHECK_THROWS_AS(simulate(SimulationSpec{1.0, -0.1, 2.0, Family::sparch_gaussian, 1}, w), InvalidArgument);
    CHECK_THROWS_AS(simulate(SimulationSpec{1.0, 0.1, 0.0, Family::esparch, 1}, w), InvalidArgument);
    CHECK_THROWS_AS(sparch_field_from_errors(vec({0.1, 0.2, 0.3}), 1.0, 0.1, w), InvalidArgument);
    CHECK_THROWS_AS(parse_family("garch"), InvalidArgument);
    CHECK(parse_family("exp") == Family::esparch);
  }
}
