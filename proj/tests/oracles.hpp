#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// they check.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace rankshape::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Eigenvalues of the explicit d x d covariance (1/T) C^T C, descending.
inline std::vector<double> explicit_covariance_eigenvalues(const Eigen::MatrixXd& h) {
  const Eigen::RowVectorXd mean = h.colwise().sum() / static_cast<double>(h.rows());
  Eigen::MatrixXd c = h;
  for (Eigen::Index r = 0; r < c.rows(); ++r) c.row(r) -= mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(h.cols(), h.cols());
  for (Eigen::Index r = 0; r < c.rows(); ++r) cov += c.row(r).transpose() * c.row(r);
  cov /= static_cast<double>(h.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Fraction of k-subsets of n items (the first c correct) containing at
/// least one correct item, by enumerating bitmasks.
inline double pass_at_k_by_enumeration(int n, int c, int k) {
  const std::uint32_t correct_mask = c == 0 ? 0u : ((1u << c) - 1u);
  long total = 0;
  long hits = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    ++total;
    if (mask & correct_mask) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// Central finite-difference gradient.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, down = x;
    up(i) += step;
    down(i) -= step;
    g(i) = (f(up) - f(down)) / (2.0 * step);
  }
  return g;
}

/// log softmax(s * theta)[a], written out directly.
inline double log_softmax_at(const Eigen::VectorXd& theta, double scale, int a) {
  double m = -INFINITY;
  for (Eigen::Index i = 0; i < theta.size(); ++i) m = std::max(m, scale * theta(i));
  double z = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) z += std::exp(scale * theta(i) - m);
  return scale * theta(a) - m - std::log(z);
}

}  // namespace rankshape::testing
