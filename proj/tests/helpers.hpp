#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "sparch/weights.hpp"

namespace testing {

inline sparch::WeightsMatrix random_weights(std::mt19937_64& gen, std::size_t n, double density,
                                            bool lower_only = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<sparch::WeightsMatrix::Entry> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (lower_only && j > i)) continue;
      if (u(gen) < density) e.push_back({i, j, 0.1 + u(gen)});
    }
  }
  return sparch::WeightsMatrix::from_entries(n, e);
}

inline Eigen::VectorXd random_nonzero(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    do {
      v[i] = z(gen);
    } while (std::abs(v[i]) < 1e-3);
  }
  return v;
}

inline double log_abs_det(const Eigen::MatrixXd& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  double s = 0.0;
  const Eigen::MatrixXd& lu_m = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(std::abs(lu_m(i, i)));
  return s;
}

// Dense h for the spatial ARCH process: alpha + rho W y^2.
inline Eigen::VectorXd dense_h_sparch(const Eigen::VectorXd& y, double alpha, double rho,
                                      const Eigen::MatrixXd& w) {
  return (alpha + rho * (w * y.array().square().matrix()).array()).matrix();
}

// Dense h for the exponential process by an explicit inverse.
inline Eigen::VectorXd dense_h_esparch(const Eigen::VectorXd& y, double alpha, double rho, double b,
                                       const Eigen::MatrixXd& w) {
  const auto n = y.size();
  const Eigen::MatrixXd s = (Eigen::MatrixXd::Identity(n, n) + 0.5 * rho * b * w).inverse();
  const Eigen::VectorXd r = (alpha + rho * b * (w * y.array().abs().log().matrix()).array()).matrix();
  return (s * r).array().exp().matrix();
}

// Central-difference Jacobian J(i, j) = d g_j / d y_i.
template <class Map>
Eigen::MatrixXd fd_jacobian(const Map& g, const Eigen::VectorXd& y, double step = 1e-6) {
  const auto n = y.size();
  Eigen::MatrixXd j(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = y;
    Eigen::VectorXd m = y;
    const double h = step * std::max(1.0, std::abs(y[i]));
    p[i] += h;
    m[i] -= h;
    j.row(i) = ((g(p) - g(m)) / (2.0 * h)).transpose();
  }
  return j;
}

}  // namespace testing
