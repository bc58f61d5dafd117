#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace hdconc {

// Gauss-Hermite rule for weight exp(-t^2) via Golub-Welsch.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussHermite(int n = 64) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      jac(i, i - 1) = jac(i - 1, i) = std::sqrt(0.5 * i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    nodes = es.eigenvalues();
    weights = std::sqrt(std::numbers::pi) * es.eigenvectors().row(0).transpose().array().square();
  }

  // E f(X) for X ~ N(0, sigma^2).
  template <class F>
  double normal_expectation(double sigma, F&& f) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      s += weights[i] * f(std::numbers::sqrt2 * sigma * nodes[i]);
    }
    return s / std::sqrt(std::numbers::pi);
  }
};

}  // namespace hdconc
