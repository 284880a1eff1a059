#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "sparch/diagnostics.hpp"
#include "sparch/error.hpp"
#include "sparch/normal.hpp"
#include "sparch/weights.hpp"

using namespace sparch;

namespace {

WeightsMatrix path(std::size_t n) {
  std::vector<WeightsMatrix::Entry> e;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    e.push_back({i, i + 1, 1.0});
    e.push_back({i + 1, i, 1.0});
  }
  return WeightsMatrix::from_entries(n, e);
}

// Moran's I and its normality-null moments by explicit double sums.
struct Brute {
  double i = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

Brute brute_moran(const Eigen::VectorXd& z, const Eigen::MatrixXd& w) {
  const auto n = z.size();
  const double nd = static_cast<double>(n);
  const double zbar = z.mean();
  double num = 0.0, den = 0.0, s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    den += (z[i] - zbar) * (z[i] - zbar);
    double row = 0.0, col = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      num += w(i, j) * (z[i] - zbar) * (z[j] - zbar);
      s0 += w(i, j);
      s1 += 0.5 * (w(i, j) + w(j, i)) * (w(i, j) + w(j, i));
      row += w(i, j);
      col += w(j, i);
    }
    s2 += (row + col) * (row + col);
  }
  Brute b;
  b.i = nd / s0 * num / den;
  b.mean = -1.0 / (nd - 1.0);
  const double e2 = (nd * nd * s1 - nd * s2 + 3.0 * s0 * s0) / ((nd * nd - 1.0) * s0 * s0);
  b.var = e2 - b.mean * b.mean;
  return b;
}

Eigen::VectorXd std_normals(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("n = 3 hand instance") {
    const auto w = path(3);
    Eigen::VectorXd z(3);
    z << 1.0, 2.0, 4.0;
    // d = (-4/3, -1/3, 5/3), S0 = 4, d'Wd = -2/9, d'd = 42/9.
    const auto t = morans_i(z, w);
    CHECK(t.statistic == doctest::Approx(-1.0 / 28.0).epsilon(1e-14));
    CHECK(t.null_mean == doctest::Approx(-0.5).epsilon(1e-15));
    const Brute b = brute_moran(z, w.to_dense());
    CHECK(t.null_variance == doctest::Approx(b.var).epsilon(1e-13));
    CHECK(t.z_score == doctest::Approx((t.statistic - t.null_mean) / std::sqrt(t.null_variance)).epsilon(1e-14));
  }

  TEST_CASE("statistic and null moments match explicit sums on random weights") {
    std::mt19937_64 g(3);
    for (std::size_t n : {3u, 7u, 25u, 60u}) {
      const auto w = testing::random_weights(g, n, 0.3);
      const Eigen::VectorXd z = std_normals(g, static_cast<Eigen::Index>(n));
      const auto t = morans_i(z, w);
      const Brute b = brute_moran(z, w.to_dense());
      CHECK(t.statistic == doctest::Approx(b.i).epsilon(1e-12));
      CHECK(t.null_variance == doctest::Approx(b.var).epsilon(1e-12));
    }
  }

  TEST_CASE("p-values follow the alternative") {
    const auto w = row_standardize(build_lattice_contiguity({6, 6, Contiguity::rook}));
    std::mt19937_64 g(4);
    const Eigen::VectorXd z = std_normals(g, 36);
    const auto two = morans_i(z, w, Alternative::two_sided);
    const auto gr = morans_i(z, w, Alternative::greater);
    const auto le = morans_i(z, w, Alternative::less);
    CHECK(gr.p_value == doctest::Approx(normal::survival(two.z_score)).epsilon(1e-14));
    CHECK(le.p_value == doctest::Approx(normal::cdf(two.z_score)).epsilon(1e-14));
    CHECK(two.p_value == doctest::Approx(2.0 * std::min(gr.p_value, le.p_value)).epsilon(1e-14));
    CHECK(parse_alternative("two-sided") == Alternative::two_sided);
    CHECK(parse_alternative("greater") == Alternative::greater);
    CHECK_THROWS_AS(parse_alternative("sideways"), InvalidArgument);
  }

  TEST_CASE("two-sided reading of a printed Moran test") {
    // I = -0.028568 at n = 400 with p = 0.31795 is a two-sided normal tail.
    const double z = normal::quantile(1.0 - 0.31795 / 2.0);
    CHECK(2.0 * normal::survival(z) == doctest::Approx(0.31795).epsilon(1e-10));
  }

  TEST_CASE("null calibration on a 20 x 20 rook lattice") {
    const auto w = row_standardize(build_lattice_contiguity({20, 20, Contiguity::rook}));
    std::mt19937_64 g(2024);
    const int reps = 10000;
    double sum = 0.0;
    int covered = 0;
    double var = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto t = morans_i(std_normals(g, 400), w);
      sum += t.statistic;
      covered += std::abs(t.z_score) < 1.959963984540054 ? 1 : 0;
      var = t.null_variance;
    }
    const double mean = sum / reps;
    CHECK(std::abs(mean - (-1.0 / 399.0)) < 4.0 * std::sqrt(var / reps));
    const double cover = static_cast<double>(covered) / reps;
    CHECK(std::abs(cover - 0.95) < 4.0 * std::sqrt(0.95 * 0.05 / reps));
  }

  TEST_CASE("perfect clustering gives a large positive I") {
    const auto w = path(20);
    Eigen::VectorXd z(20);
    for (Eigen::Index i = 0; i < 20; ++i) z[i] = i < 10 ? 1.0 : -1.0;
    const auto t = morans_i(z, w, Alternative::greater);
    // 18 of 19 edges join equal values: I = (20 / 38) * (2 * 17) / 20.
    CHECK(t.statistic == doctest::Approx(34.0 / 38.0).epsilon(1e-14));
    CHECK(t.p_value < 1e-4);
  }

  TEST_CASE("invariance under affine maps and joint permutation") {
    std::mt19937_64 g(12);
    const auto w = testing::random_weights(g, 40, 0.15);
    const Eigen::VectorXd z = std_normals(g, 40);
    const auto base = morans_i(z, w);
    const Eigen::VectorXd affine = (-3.5 * z.array() + 12.0).matrix();
    CHECK(morans_i(affine, w).statistic == doctest::Approx(base.statistic).epsilon(1e-12));

    std::vector<std::size_t> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    Eigen::VectorXd pz(40);
    for (std::size_t i = 0; i < 40; ++i) pz[static_cast<Eigen::Index>(perm[i])] = z[static_cast<Eigen::Index>(i)];
    const auto p = morans_i(pz, w.permuted(perm));
    CHECK(p.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(p.null_variance == doctest::Approx(base.null_variance).epsilon(1e-12));
  }

  TEST_CASE("degenerate inputs are rejected") {
    const auto w = path(5);
    CHECK_THROWS_AS(morans_i(Eigen::VectorXd::Constant(5, 2.0), w), InvalidArgument);
    CHECK_THROWS_AS(morans_i(Eigen::VectorXd::Ones(4), w), InvalidArgument);
    CHECK_THROWS_AS(morans_i(Eigen::VectorXd::LinSpaced(2, 0, 1), path(2)), InvalidArgument);
    CHECK_THROWS_AS(morans_i(Eigen::VectorXd::LinSpaced(5, 0, 1), WeightsMatrix::zero(5)), InvalidArgument);
  }

  TEST_CASE("information criteria") {
    const auto ic = information_criteria(-269.51, 2, 400.0);
    CHECK(std::abs(ic.aic - 543.0126) < 0.02);
    CHECK(ic.aic == doctest::Approx(543.02).epsilon(1e-12));
    CHECK(std::abs(ic.bic - 550.9956) < 0.02);
    CHECK(ic.bic == doctest::Approx(539.02 + 2.0 * std::log(400.0)).epsilon(1e-12));
    const auto unit = information_criteria(0.0, 1, std::exp(1.0));
    CHECK(unit.aic == 2.0);
    CHECK(unit.bic == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("Moran scatter: lag values and the slope identity") {
    const auto w = row_standardize(build_lattice_contiguity({9, 9, Contiguity::queen}));
    std::mt19937_64 g(5);
    const Eigen::VectorXd z = std_normals(g, 81);
    const auto s = moran_scatter_data(z, w);
    CHECK((s.lag - w.to_dense() * z).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(s.slope == doctest::Approx(morans_i(z, w).statistic).epsilon(1e-10));

    const auto c = moran_scatter_data(Eigen::VectorXd::Constant(81, 3.0), w);
    CHECK((c.lag.array() - 3.0).abs().maxCoeff() < 1e-14);

    const std::vector<WeightsMatrix::Entry> e{{0, 1, 1.0}, {1, 0, 1.0}};
    Eigen::VectorXd two(2);
    two << 4.0, -1.0;
    const auto sw = moran_scatter_data(two, WeightsMatrix::from_entries(2, e));
    CHECK(sw.lag[0] == -1.0);
    CHECK(sw.lag[1] == 4.0);
  }

  TEST_CASE("Q-Q data") {
    const Eigen::Index n = 50;
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = normal::quantile((static_cast<double>(i) + 0.5) / n);
    Eigen::VectorXd shuffled = q.reverse();
    const auto d = qq_data(shuffled);
    CHECK((d.sample - d.theoretical).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d.line_slope == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(d.line_intercept) < 1e-10);

    std::mt19937_64 g(6);
    std::student_t_distribution<double> t(2.0);
    Eigen::VectorXd heavy(400);
    for (Eigen::Index i = 0; i < 400; ++i) heavy[i] = t(g);
    const auto h = qq_data(heavy);
    const auto line = [&](double x) { return h.line_intercept + h.line_slope * x; };
    CHECK(h.sample[399] > line(h.theoretical[399]));
    CHECK(h.sample[0] < line(h.theoretical[0]));

    Eigen::VectorXd pair(2);
    pair << 1.0, -2.0;
    const auto p = qq_data(pair);
    CHECK(p.sample.size() == 2);
    CHECK(p.sample[0] == -2.0);
    CHECK(std::isfinite(p.line_slope));
    CHECK(std::isfinite(p.line_intercept));

    const auto s = qq_data(pair, true);
    CHECK(s.sample.sum() == doctest::Approx(0.0).scale(1.0));

    CHECK_THROWS_AS(qq_data(Eigen::VectorXd::Ones(5)), InvalidArgument);
    CHECK_THROWS_AS(qq_data(Eigen::VectorXd::Ones(1)), InvalidArgument);
  }

  TEST_CASE("type-7 sample quantiles") {
    Eigen::VectorXd s(5);
    s << 1.0, 2.0, 3.0, 4.0, 10.0;
    CHECK(sample_quantile(s, 0.0) == 1.0);
    CHECK(sample_quantile(s, 1.0) == 10.0);
    CHECK(sample_quantile(s, 0.5) == 3.0);
    CHECK(sample_quantile(s, 0.25) == 2.0);
    CHECK(sample_quantile(s, 0.9) == doctest::Approx(7.6));
  }
}
