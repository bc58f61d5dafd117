#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "hdconc/gauss_bounds.hpp"
#include "oracles.hpp"

using namespace hdconc;

namespace {

SpectralSummary summary_i4() { return spectral_summary(SymMatrix::identity(4)); }
SpectralSummary summary_diag12() { return spectral_summary(SymMatrix::diagonal(Vector{{1.0, 2.0}})); }

}  // namespace

TEST(UpperQuantile, Examples) {
  EXPECT_DOUBLE_EQ(upper_quantile_sq(summary_i4(), 1.0), 10.0);
  EXPECT_DOUBLE_EQ(upper_quantile_sq(summary_i4(), 0.0), 4.0);
  EXPECT_NEAR(upper_quantile_sq(summary_diag12(), 2.0), 17.32455532033676, 1e-12);
}

TEST(LowerQuantile, Examples) {
  EXPECT_DOUBLE_EQ(lower_quantile_sq(summary_i4(), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(lower_quantile_sq(summary_i4(), 0.0), 4.0);
  EXPECT_NEAR(lower_quantile_sq(summary_diag12(), 0.25), 0.7639320225002102, 1e-12);
}

TEST(Quantile, NegativeX) {
  for (double x : {-1e-12, -1.0}) {
    try {
      upper_quantile_sq(summary_i4(), x);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NegativeX);
    }
    EXPECT_THROW(lower_quantile_sq(summary_i4(), x), Error);
  }
  EXPECT_DOUBLE_EQ(quantile_sq(summary_i4(), {1.0, Side::Upper}), 10.0);
  EXPECT_DOUBLE_EQ(quantile_sq(summary_i4(), {1.0, Side::Lower}), 0.0);
}

TEST(Quantile, ChiSquaredAnchor) {
  // ||gamma||^2 ~ chi^2_4 for B = I_4; the analytic tail at 10 is 6 e^{-5}.
  const boost::math::chi_squared chi4(4.0);
  const double tail = boost::math::cdf(boost::math::complement(chi4, upper_quantile_sq(summary_i4(), 1.0)));
  EXPECT_NEAR(tail, 6.0 * std::exp(-5.0), 1e-14);
  EXPECT_LE(tail, std::exp(-1.0));
}

TEST(Quantile, ExactChiSquaredTailsBelowLevel) {
  // For B = I_p the bound is checked against exact chi-squared tails.
  for (int p : {1, 2, 5, 10, 50, 200}) {
    const auto s = spectral_summary(SymMatrix::identity(p));
    const boost::math::chi_squared chi(p);
    for (double x : {0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0}) {
      EXPECT_LE(boost::math::cdf(boost::math::complement(chi, upper_quantile_sq(s, x))), std::exp(-x));
      const double lo = lower_quantile_sq(s, x);
      if (lo > 0) EXPECT_LE(boost::math::cdf(chi, lo), std::exp(-x));
    }
  }
}

TEST(Quantile, Monotone) {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = spectral_summary(SymMatrix(oracle::random_psd(1 + rep % 15, gen)));
    double prev_u = -1, prev_l = 1e300;
    for (int i = 0; i <= 100; ++i) {
      const double x = 0.05 * i;
      const double u = upper_quantile_sq(s, x), l = lower_quantile_sq(s, x);
      EXPECT_GT(u, prev_u);
      EXPECT_LE(l, prev_l);
      EXPECT_GE(l, 0.0);
      prev_u = u;
      prev_l = l;
    }
  }
}

TEST(Quantile, Scaling) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix b = oracle::random_psd(2 + rep % 10, gen);
    const double c = 0.1 + rep;
    const auto s = spectral_summary(SymMatrix(b));
    const auto sc = spectral_summary(SymMatrix(c * b));
    for (double x : {0.0, 0.5, 3.0}) {
      const double ref = c * upper_quantile_sq(s, x);
      EXPECT_NEAR(upper_quantile_sq(sc, x), ref, 1e-12 * ref);
    }
  }
}

TEST(BoundImpliedX, Examples) {
  EXPECT_NEAR(bound_implied_x(summary_i4(), 10.0), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(bound_implied_x(summary_i4(), 4.0), 0.0);
  EXPECT_NEAR(bound_implied_x(summary_diag12(), 17.32456), 2.0, 1e-5);
  // Lower branch: (t - zsq)^2 / (4 v).
  EXPECT_NEAR(bound_implied_x(summary_i4(), 2.0), 4.0 / 16.0, 1e-15);
}

TEST(BoundImpliedX, RoundTrip) {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = spectral_summary(SymMatrix(oracle::random_psd(1 + rep % 12, gen)));
    for (double x : {0.0, 0.01, 0.7, 2.0, 9.0, 40.0}) {
      const double z = upper_quantile_sq(s, x);
      EXPECT_NEAR(upper_quantile_sq(s, bound_implied_x(s, z)), z, 1e-10 * z);
      EXPECT_NEAR(bound_implied_x(s, z), x, 1e-8 * (1 + x));
    }
  }
}

TEST(BoundImpliedX, Errors) {
  const auto zero = spectral_summary(SymMatrix(Matrix::Zero(3, 3)));
  try {
    bound_implied_x(zero, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSummary);
  }
  EXPECT_THROW(bound_implied_x(summary_i4(), -1.0), Error);
}

TEST(SubGaussian, Examples) {
  EXPECT_DOUBLE_EQ(subgaussian_upper_quantile_sq(summary_i4(), {1.0}, 1.0), 10.0);
  EXPECT_DOUBLE_EQ(subgaussian_upper_quantile_sq(summary_i4(), {2.0}, 1.0), 20.0);
  for (double g : {0.0, -1.0}) {
    try {
      subgaussian_upper_quantile_sq(summary_i4(), {g}, 1.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonPositiveG);
    }
  }
  EXPECT_THROW(subgaussian_upper_quantile_sq(summary_i4(), {1.0}, -1.0), Error);
}

TEST(Moments, Examples) {
  auto m = qf_moments(summary_i4());
  EXPECT_DOUBLE_EQ(m.mean, 4.0);
  EXPECT_DOUBLE_EQ(m.variance, 8.0);
  m = qf_moments(summary_diag12());
  EXPECT_NEAR(m.mean, 3.0, 1e-14);
  EXPECT_NEAR(m.variance, 10.0, 1e-13);
  m = qf_moments(spectral_summary(SymMatrix(Matrix::Zero(2, 2))));
  EXPECT_EQ(m.mean, 0.0);
  EXPECT_EQ(m.variance, 0.0);
  // chi^2_4 variance from the distribution itself.
  EXPECT_DOUBLE_EQ(boost::math::variance(boost::math::chi_squared(4.0)), 8.0);
}

TEST(CriticalDimension, Examples) {
  SpectralSummary s;
  s.trace = s.eff_dim = 4;
  auto r = critical_dimension_report(s, 1000);
  EXPECT_DOUBLE_EQ(r.ratio, 0.016);
  EXPECT_EQ(r.regime, DimensionRegime::Ok);
  s.trace = s.eff_dim = 10;
  r = critical_dimension_report(s, 100);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_EQ(r.regime, DimensionRegime::Marginal);
  r = critical_dimension_report(s, 10);
  EXPECT_DOUBLE_EQ(r.ratio, 10.0);
  EXPECT_EQ(r.regime, DimensionRegime::Violated);
  EXPECT_EQ(to_string(r.regime), "violated");
}
