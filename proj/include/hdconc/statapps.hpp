#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdconc/error.hpp"
#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/mc.hpp"
#include "hdconc/rng.hpp"

// Least squares in the linear model Y = Psi v* + e and the prediction-norm
// confidence set {v : |Psi (v_hat - v)|^2 <= z^2} with z^2 = z^2(Var(Pi e), x).

namespace hdconc {

struct LinearModelSpec {
  Matrix design;  // n x p, full column rank
  NoiseFamily noise;
  double sigma = 1.0;
  Vector truth;  // p-vector
};

struct ConfidenceSetSpec {
  double x = 0.0;
  double radius_sq = 0.0;
  SpectralSummary summary;  // of B = Var(Pi e)
};

namespace detail {

inline void check_full_rank(const Matrix& design) {
  if (design.rows() < design.cols() || design.cols() < 1) {
    throw Error(ErrorCode::RankDeficient, "design must be n x p with n >= p >= 1");
  }
  const Matrix gram = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-10 * top)) {
    throw Error(ErrorCode::RankDeficient, "Psi^T Psi is singular at tolerance 1e-10");
  }
}

}  // namespace detail

// Pi = Psi (Psi^T Psi)^{-1} Psi^T, computed as Q Q^T from a thin QR.
inline SymMatrix projection(const Matrix& design) {
  detail::check_full_rank(design);
  Eigen::HouseholderQR<Matrix> qr(design);
  const Matrix q = qr.householderQ() * Matrix::Identity(design.rows(), design.cols());
  return SymMatrix(q * q.transpose());
}

inline Vector fit_ls(const Matrix& design, const Vector& y) {
  detail::check_full_rank(design);
  if (y.size() != design.rows()) throw Error(ErrorCode::DimMismatch, "response length != rows of design");
  return design.colPivHouseholderQr().solve(y);
}

inline ConfidenceSetSpec confset_radius(const Matrix& design, const SymMatrix& noise_cov, double x) {
  if (noise_cov.dim() != design.rows()) {
    throw Error(ErrorCode::DimMismatch, "noise covariance must be n x n");
  }
  const SymMatrix pi = projection(design);
  const SymMatrix b(pi.matrix() * noise_cov.matrix() * pi.matrix());
  ConfidenceSetSpec c;
  c.x = x;
  c.summary = spectral_summary(b);
  c.radius_sq = upper_quantile_sq(c.summary, x);
  return c;
}

inline constexpr std::uint64_t kMinCoverageReps = 1000;

// Per-replication indicator of |Psi (v_hat - v*)|^2 > radius_sq, in replication order.
inline std::vector<char> coverage_indicators(const LinearModelSpec& model, double radius_sq,
                                             std::uint64_t reps, const RngSpec& rng,
                                             unsigned threads = default_threads()) {
  detail::check_full_rank(model.design);
  const Eigen::Index n = model.design.rows();
  if (model.truth.size() != model.design.cols()) {
    throw Error(ErrorCode::DimMismatch, "truth length != columns of design");
  }
  if (!(model.sigma > 0.0)) throw Error(ErrorCode::NonPositiveInput, "sigma must be > 0");
  const Eigen::ColPivHouseholderQR<Matrix> qr(model.design);
  const Vector mean = model.design * model.truth;
  using Flags = std::vector<char>;
  return run_chunks<Flags>(
      reps, rng, threads, [] { return Flags{}; },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, Flags& acc) {
        acc.reserve(count);
        Vector y(n);
        for (std::uint64_t s = 0; s < count; ++s) {
          for (Eigen::Index i = 0; i < n; ++i) y[i] = mean[i] + model.sigma * model.noise.draw(r);
          const Vector fit = qr.solve(y);
          const double loss = (model.design * (fit - model.truth)).squaredNorm();
          acc.push_back(loss > radius_sq ? 1 : 0);
        }
      },
      [](Flags& total, const Flags& part) { total.insert(total.end(), part.begin(), part.end()); });
}

// Non-coverage frequency of the confidence set built from B = sigma^2 Pi; the
// noise covariance is exact (unit coordinate variance) for every family.
inline MCReport coverage_experiment(const LinearModelSpec& model, double x, std::uint64_t reps,
                                    const RngSpec& rng, unsigned threads = default_threads()) {
  if (reps < kMinCoverageReps) {
    throw Error(ErrorCode::TooFewSamples, "coverage needs reps >= 1000");
  }
  const Eigen::Index n = model.design.rows();
  const SymMatrix cov(Matrix::Identity(n, n) * (model.sigma * model.sigma));
  const ConfidenceSetSpec cs = confset_radius(model.design, cov, x);
  const auto flags = coverage_indicators(model, cs.radius_sq, reps, rng, threads);
  std::uint64_t misses = 0;
  for (char f : flags) misses += static_cast<std::uint64_t>(f);
  MCReport r = proportion_report("coverage_experiment",
                                 std::string(model.noise.name()) + "_non_coverage", misses, reps, rng);
  r.params = {{"x", x},
              {"n", double(n)},
              {"p", double(model.design.cols())},
              {"sigma", model.sigma},
              {"radius_sq", cs.radius_sq}};
  judge_at_most(r, std::exp(-x));
  return r;
}

}  // namespace hdconc
