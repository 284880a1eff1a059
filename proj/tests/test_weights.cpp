#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "sparch/error.hpp"
#include "sparch/weights.hpp"

using namespace sparch;

namespace {

WeightsMatrix two_cycle() {
  const std::vector<WeightsMatrix::Entry> e{{0, 1, 1.0}, {1, 0, 1.0}};
  return WeightsMatrix::from_entries(2, e);
}

WeightsMatrix path3() {
  const std::vector<WeightsMatrix::Entry> e{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
  return WeightsMatrix::from_entries(3, e);
}

std::size_t count_neighbors(const WeightsMatrix& w, std::size_t i) {
  std::size_t c = 0;
  for (std::size_t j = 0; j < w.size(); ++j) c += w.coeff(i, j) > 0.0 ? 1 : 0;
  return c;
}

// Max absolute column sum of W^2, computed densely.
double dense_squared_l1(const WeightsMatrix& w) {
  const Eigen::MatrixXd d = w.to_dense();
  return (d * d).cwiseAbs().colwise().sum().maxCoeff();
}

void check_valid(const WeightsMatrix& w) {
  for (const auto& e : w.entries()) {
    CHECK(e.row != e.col);
    CHECK(e.value > 0.0);
  }
}

}  // namespace

TEST_SUITE("weights") {
  TEST_CASE("construction rejects invalid entries") {
    const std::vector<WeightsMatrix::Entry> diag{{0, 0, 1.0}};
    CHECK_THROWS_AS(WeightsMatrix::from_entries(2, diag), InvalidArgument);
    const std::vector<WeightsMatrix::Entry> neg{{0, 1, -0.5}};
    CHECK_THROWS_AS(WeightsMatrix::from_entries(2, neg), InvalidArgument);
    const std::vector<WeightsMatrix::Entry> out{{0, 2, 1.0}};
    CHECK_THROWS_AS(WeightsMatrix::from_entries(2, out), InvalidArgument);
    const std::vector<WeightsMatrix::Entry> dup{{0, 1, 1.0}, {0, 1, 2.0}};
    CHECK_THROWS_AS(WeightsMatrix::from_entries(2, dup), InvalidArgument);
    const std::vector<WeightsMatrix::Entry> nan{{0, 1, std::nan("")}};
    CHECK_THROWS_AS(WeightsMatrix::from_entries(2, nan), InvalidArgument);
    const std::vector<WeightsMatrix::Entry> zero{{0, 1, 0.0}};
    CHECK(WeightsMatrix::from_entries(2, zero).nonzeros() == 0);
  }

  TEST_CASE("1x1 lattice is the zero matrix") {
    const auto w = build_lattice_contiguity({1, 1, Contiguity::rook});
    CHECK(w.size() == 1);
    CHECK(w.nonzeros() == 0);
  }

  TEST_CASE("2x2 rook lattice: two neighbors per cell, eight nonzeros") {
    const auto w = build_lattice_contiguity({2, 2, Contiguity::rook});
    CHECK(w.nonzeros() == 8);
    for (std::size_t i = 0; i < 4; ++i) CHECK(count_neighbors(w, i) == 2);
    // Row-major: cell 0 = (0,0) touches 1 = (0,1) and 2 = (1,0), not 3 = (1,1).
    CHECK(w.coeff(0, 1) == 1.0);
    CHECK(w.coeff(0, 2) == 1.0);
    CHECK(w.coeff(0, 3) == 0.0);
  }

  TEST_CASE("3x3 queen lattice: center has eight neighbors") {
    const auto w = build_lattice_contiguity({3, 3, Contiguity::queen});
    CHECK(count_neighbors(w, 4) == 8);
    CHECK(count_neighbors(w, 0) == 3);
    CHECK(w.nonzeros() == 40);
  }

  TEST_CASE("lattice contiguity is symmetric, binary and matches hand enumeration") {
    for (auto scheme : {Contiguity::rook, Contiguity::queen}) {
      for (std::size_t r : {1u, 2u, 3u, 5u}) {
        for (std::size_t c : {1u, 4u, 6u}) {
          const auto w = build_lattice_contiguity({r, c, scheme});
          REQUIRE(w.size() == r * c);
          check_valid(w);
          for (std::size_t i = 0; i < r * c; ++i) {
            for (std::size_t j = 0; j < r * c; ++j) {
              const long dr = std::labs(static_cast<long>(i / c) - static_cast<long>(j / c));
              const long dc = std::labs(static_cast<long>(i % c) - static_cast<long>(j % c));
              const bool rook = dr + dc == 1;
              const bool queen = i != j && dr <= 1 && dc <= 1;
              const bool expect = scheme == Contiguity::rook ? rook : queen;
              CHECK(w.coeff(i, j) == (expect ? 1.0 : 0.0));
            }
          }
        }
      }
    }
  }

  TEST_CASE("row standardization") {
    const auto c = two_cycle();
    const auto s = row_standardize(c);
    CHECK(s.row_standardized());
    CHECK(s.to_dense() == c.to_dense());

    const auto rook = row_standardize(build_lattice_contiguity({3, 3, Contiguity::rook}));
    CHECK(rook.coeff(0, 1) == 0.5);
    CHECK(rook.coeff(0, 3) == 0.5);
    CHECK(rook.coeff(4, 1) == 0.25);
    CHECK(rook.rows_sum_to_one());

    const auto z = row_standardize(WeightsMatrix::zero(4));
    CHECK(z.nonzeros() == 0);
    CHECK(z.row_standardized());

    std::mt19937_64 g(3);
    for (int rep = 0; rep < 5; ++rep) {
      const auto w = testing::random_weights(g, 30, 0.1);
      const auto rs = row_standardize(w);
      check_valid(rs);
      CHECK(rs.rows_sum_to_one());
      const auto rows = rs.row_sums();
      for (Eigen::Index i = 0; i < rows.size(); ++i) {
        if (rows[i] != 0.0) CHECK(std::abs(rows[i] - 1.0) <= 1e-12);
      }
      // Idempotent.
      const auto twice = row_standardize(rs);
      CHECK((twice.to_dense() - rs.to_dense()).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  TEST_CASE("higher-order neighbor union") {
    const auto p = path3();
    CHECK(higher_order_sum(p, 1).to_dense() == p.to_dense());
    const auto p2 = higher_order_sum(p, 2);
    CHECK(p2.coeff(0, 2) == 1.0);
    CHECK(p2.coeff(2, 0) == 1.0);
    CHECK(p2.nonzeros() == 6);
    check_valid(p2);

    Eigen::MatrixXd full = Eigen::MatrixXd::Ones(5, 5);
    full.diagonal().setZero();
    const auto k5 = WeightsMatrix::from_dense(full);
    for (int lag : {1, 2, 4}) CHECK(higher_order_sum(k5, lag).to_dense() == full);
    CHECK_THROWS_AS(higher_order_sum(p, 0), InvalidArgument);
  }

  TEST_CASE("higher-order union equals shortest-path reachability on a lattice") {
    const auto w = build_lattice_contiguity({4, 5, Contiguity::rook});
    const auto h = higher_order_sum(w, 3);
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 20; ++j) {
        // Rook shortest path on a grid is the Manhattan distance.
        const long d = std::labs(static_cast<long>(i / 5) - static_cast<long>(j / 5)) +
                       std::labs(static_cast<long>(i % 5) - static_cast<long>(j % 5));
        CHECK(h.coeff(i, j) == ((d >= 1 && d <= 3) ? 1.0 : 0.0));
      }
    }
  }

  TEST_CASE("triangular ordering") {
    const std::vector<WeightsMatrix::Entry> lower{{1, 0, 1.0}, {2, 0, 0.5}, {2, 1, 0.5}};
    const auto lw = WeightsMatrix::from_entries(3, lower);
    const auto lo = triangular_order(lw);
    REQUIRE(lo.has_value());
    CHECK(*lo == std::vector<std::size_t>{0, 1, 2});

    CHECK_FALSE(triangular_order(two_cycle()).has_value());
    CHECK_FALSE(is_strictly_triangularizable(build_lattice_contiguity({3, 3, Contiguity::rook})));

    const std::vector<WeightsMatrix::Entry> upper{{0, 1, 1.0}, {0, 2, 0.5}, {1, 2, 0.5}};
    const auto uo = triangular_order(WeightsMatrix::from_entries(3, upper));
    REQUIRE(uo.has_value());
    CHECK(*uo == std::vector<std::size_t>{2, 1, 0});
  }

  TEST_CASE("triangularizable weights are nilpotent and reorder to strictly lower triangular") {
    std::mt19937_64 g(17);
    for (std::size_t n : {2u, 5u, 12u, 30u, 50u}) {
      const auto lower = testing::random_weights(g, n, 0.3, true);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), g);
      const auto w = lower.permuted(perm);
      const auto order = triangular_order(w);
      REQUIRE(order.has_value());
      const Eigen::MatrixXd d = w.to_dense();
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) CHECK(d((*order)[a], (*order)[b]) == 0.0);
      }
      Eigen::MatrixXd p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) p = p * d;
      CHECK(p.cwiseAbs().maxCoeff() == 0.0);
      CHECK(std::isinf(truncation_bound(w, 0.7)));
    }
  }

  TEST_CASE("truncation bound") {
    const auto rook = row_standardize(build_lattice_contiguity({5, 5, Contiguity::rook}));
    CHECK(squared_l1_norm(rook) == doctest::Approx(dense_squared_l1(rook)).epsilon(1e-14));
    const double rho = 0.5;
    const double expect = std::pow(rho * rho * dense_squared_l1(rook), -0.25);
    CHECK(truncation_bound(rook, rho) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(std::isinf(truncation_bound(rook, 0.0)));
    CHECK_THROWS_AS(truncation_bound(rook, -0.1), InvalidArgument);
    CHECK_THROWS_AS(truncation_bound(rook, std::nan("")), InvalidArgument);

    std::mt19937_64 g(23);
    for (int rep = 0; rep < 5; ++rep) {
      const auto w = testing::random_weights(g, 25, 0.15);
      CHECK(squared_l1_norm(w) == doctest::Approx(dense_squared_l1(w)).epsilon(1e-13));
      double prev = std::numeric_limits<double>::infinity();
      for (double r : {0.05, 0.1, 0.3, 0.6, 0.9}) {
        const double a = truncation_bound(w, r);
        CHECK(a <= prev);
        prev = a;
      }
    }
  }

  TEST_CASE("permutation relabels rows and columns consistently") {
    std::mt19937_64 g(8);
    const auto w = testing::random_weights(g, 9, 0.3);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    const auto p = w.permuted(perm);
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t j = 0; j < 9; ++j) CHECK(p.coeff(perm[i], perm[j]) == w.coeff(i, j));
    }
    CHECK(squared_l1_norm(p) == doctest::Approx(squared_l1_norm(w)).epsilon(1e-14));
  }

  TEST_CASE("spatiotemporal assembly") {
    const auto w1 = two_cycle();
    SpatioTemporalSpec one{{w1}, {}};
    const auto st1 = build_spatiotemporal_weights(one);
    CHECK(st1.spatial_part == w1);
    CHECK(st1.temporal_parts.empty());

    SpatioTemporalSpec two{{w1, w1}, {0.4}};
    const auto st = build_spatiotemporal_weights(two);
    REQUIRE(st.temporal_parts.size() == 1);
    const Eigen::MatrixXd c = st.combined(0.3).to_dense();
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
    expect.block(0, 0, 2, 2) = 0.3 * w1.to_dense();
    expect.block(2, 2, 2, 2) = 0.3 * w1.to_dense();
    expect.block(2, 0, 2, 2) = 0.4 * Eigen::MatrixXd::Identity(2, 2);
    CHECK((c - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK(respects_time_order(st.combined(0.3), 2, 2));

    const std::vector<WeightsMatrix::Entry> future{{0, 2, 1.0}};
    CHECK_FALSE(respects_time_order(WeightsMatrix::from_entries(4, future), 2, 2));

    SpatioTemporalSpec bad_dim{{w1, path3()}, {}};
    CHECK_THROWS_AS(build_spatiotemporal_weights(bad_dim), InvalidArgument);
    SpatioTemporalSpec bad_lag{{w1, w1}, {0.1, 0.2}};
    CHECK_THROWS_AS(build_spatiotemporal_weights(bad_lag), InvalidArgument);
  }

  TEST_CASE("spatiotemporal operators never look into the future") {
    std::mt19937_64 g(41);
    for (std::size_t t : {2u, 3u, 5u}) {
      SpatioTemporalSpec spec;
      for (std::size_t k = 0; k < t; ++k) spec.spatial.push_back(testing::random_weights(g, 4, 0.4));
      for (std::size_t k = 1; k < t; ++k) spec.temporal.push_back(0.1 * static_cast<double>(k));
      const auto st = build_spatiotemporal_weights(spec);
      const auto c = st.combined(0.5);
      CHECK(c.size() == 4 * t);
      check_valid(c);
      CHECK(respects_time_order(c, 4, t));
      for (const auto& e : c.entries()) {
        const std::size_t ti = e.row / 4;
        const std::size_t tj = e.col / 4;
        if (ti != tj) CHECK(tj < ti);
      }
    }
  }
}
