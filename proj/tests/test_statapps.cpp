#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "hdconc/statapps.hpp"

using namespace hdconc;

namespace {

Matrix random_design(int n, int p, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Matrix d(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d(i, j) = z(gen);
  return d;
}

}  // namespace

TEST(Projection, IsSymmetricIdempotentRankP) {
  std::mt19937_64 gen(1);
  const Matrix psi = random_design(30, 4, gen);
  const Matrix pi = projection(psi).matrix();
  EXPECT_LE((pi * pi - pi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(pi.trace(), 4.0, 1e-12);
  // Normal-equations oracle.
  const Matrix ref = psi * (psi.transpose() * psi).inverse() * psi.transpose();
  EXPECT_LE((pi - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Projection, RankDeficient) {
  Matrix psi(5, 2);
  psi.col(0) = Vector::Ones(5);
  psi.col(1) = 2 * Vector::Ones(5);
  try {
    projection(psi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
  EXPECT_THROW(projection(Matrix::Identity(2, 3)), Error);
}

TEST(FitLs, RecoversExactSolution) {
  std::mt19937_64 gen(2);
  const Matrix psi = random_design(20, 3, gen);
  const Vector v{{1.0, -2.0, 0.5}};
  EXPECT_LE((fit_ls(psi, psi * v) - v).norm(), 1e-12);
  EXPECT_THROW(fit_ls(psi, Vector::Zero(19)), Error);
}

TEST(ConfsetRadius, IidNoiseIsChiSquaredQuantileBound) {
  std::mt19937_64 gen(3);
  const Matrix psi = random_design(100, 5, gen);
  const double sigma = 1.5;
  const auto cs = confset_radius(psi, SymMatrix(Matrix::Identity(100, 100) * sigma * sigma), 3.0);
  // B = sigma^2 Pi: trace 5 sigma^2, tr B^2 = 5 sigma^4, |B| = sigma^2.
  const double s2 = sigma * sigma;
  EXPECT_NEAR(cs.summary.trace, 5 * s2, 1e-10);
  EXPECT_NEAR(cs.summary.trace_sq, 5 * s2 * s2, 1e-10);
  EXPECT_NEAR(cs.summary.opnorm, s2, 1e-10);
  EXPECT_NEAR(cs.radius_sq, s2 * (5 + 2 * std::sqrt(15.0) + 6), 1e-9);
  const boost::math::chi_squared chi5(5.0);
  EXPECT_LE(boost::math::cdf(boost::math::complement(chi5, cs.radius_sq / s2)), std::exp(-3.0));
  EXPECT_THROW(confset_radius(psi, SymMatrix::identity(5), 3.0), Error);
}

TEST(Coverage, GaussianMatchesChiSquaredOracle) {
  std::mt19937_64 gen(4);
  LinearModelSpec model;
  model.design = random_design(40, 3, gen);
  model.truth = Vector{{1.0, 0.0, -1.0}};
  model.sigma = 0.7;
  const double x = 1.0;
  const MCReport r = coverage_experiment(model, x, 20000, RngSpec{77});
  const double z2 = 3 + 2 * std::sqrt(3.0) + 2;
  const double exact = boost::math::cdf(boost::math::complement(boost::math::chi_squared(3.0), z2));
  EXPECT_NEAR(r.estimate, exact, 4 * r.std_err);
  EXPECT_TRUE(*r.pass);
  EXPECT_EQ(r.label, "gaussian_non_coverage");
}

TEST(Coverage, SubGaussianFamiliesPass) {
  std::mt19937_64 gen(5);
  LinearModelSpec model;
  model.design = random_design(30, 4, gen);
  model.truth = Vector::Zero(4);
  for (const char* fam : {"rademacher", "uniform"}) {
    model.noise = NoiseFamily::parse(fam);
    EXPECT_TRUE(*coverage_experiment(model, 2.0, 5000, RngSpec{6}).pass) << fam;
  }
}

TEST(Coverage, DeterministicAcrossThreads) {
  std::mt19937_64 gen(6);
  LinearModelSpec model;
  model.design = random_design(25, 2, gen);
  model.truth = Vector::Zero(2);
  const auto a = coverage_indicators(model, 5.0, 3000, RngSpec{1, 0, 256}, 1);
  const auto b = coverage_indicators(model, 5.0, 3000, RngSpec{1, 0, 256}, 4);
  EXPECT_EQ(a, b);
}

TEST(Coverage, Errors) {
  std::mt19937_64 gen(7);
  LinearModelSpec model;
  model.design = random_design(10, 2, gen);
  model.truth = Vector::Zero(2);
  try {
    coverage_experiment(model, 1.0, 999, RngSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
  model.truth = Vector::Zero(3);
  EXPECT_THROW(coverage_experiment(model, 1.0, 1000, RngSpec{}), Error);
}
