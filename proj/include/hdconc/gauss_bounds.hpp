#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "hdconc/error.hpp"
#include "hdconc/linalg.hpp"

// Deviation quantiles of ||xi||^2 for xi ~ N(0, B) and sub-gaussian analogues.
//
// All formulas depend on B only through SpectralSummary {tr B, tr B^2, ||B||}.
// For any x >= 0
//
//   P(||xi||^2 > tr B + 2 sqrt(x tr B^2) + 2 x ||B||) <= exp(-x),
//   P(||xi||^2 < tr B - 2 sqrt(x tr B^2))              <= exp(-x).

namespace hdconc {

enum class Side { Upper, Lower };

constexpr std::string_view to_string(Side s) { return s == Side::Upper ? "upper" : "lower"; }

struct TailQuery {
  double x = 0.0;
  Side side = Side::Upper;
};

// Variance proxy g^2: E exp<u, xi> <= exp(g^2 u^T B u / 2).
struct SubGaussianSpec {
  double gsq = 1.0;
};

struct QuadraticFormMoments {
  double mean = 0.0;
  double variance = 0.0;
};

enum class DimensionRegime { Ok, Marginal, Violated };

constexpr std::string_view to_string(DimensionRegime r) {
  switch (r) {
    case DimensionRegime::Ok: return "ok";
    case DimensionRegime::Marginal: return "marginal";
    case DimensionRegime::Violated: return "violated";
  }
  return "unknown";
}

struct CriticalDimensionReport {
  double eff_dim = 0.0;
  double ratio = 0.0;  // eff_dim^2 / n
  DimensionRegime regime = DimensionRegime::Ok;
  // Tooling convention, not a theorem: ok <= 0.1 < marginal <= 1 < violated.
  static constexpr double kOkThreshold = 0.1;
  static constexpr double kMarginalThreshold = 1.0;
};

namespace detail {
inline void check_x(double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NegativeX, "x must be >= 0, got " + std::to_string(x));
}
}  // namespace detail

inline double upper_quantile_sq(const SpectralSummary& s, double x) {
  detail::check_x(x);
  return s.trace + 2.0 * std::sqrt(x * s.trace_sq) + 2.0 * x * s.opnorm;
}

inline double lower_quantile_sq(const SpectralSummary& s, double x) {
  detail::check_x(x);
  return std::max(0.0, s.trace - 2.0 * std::sqrt(x * s.trace_sq));
}

inline double quantile_sq(const SpectralSummary& s, TailQuery q) {
  return q.side == Side::Upper ? upper_quantile_sq(s, q.x) : lower_quantile_sq(s, q.x);
}

// Smallest x whose quantile reaches zsq: the upper branch above tr B, the lower
// branch below it. Both give 0 at zsq = tr B.
inline double bound_implied_x(const SpectralSummary& s, double zsq) {
  if (!(zsq >= 0.0)) throw Error(ErrorCode::NegativeX, "zsq must be >= 0");
  const double t = s.trace, v = s.trace_sq, b = s.opnorm;
  if (!(b > 0.0) || !(v > 0.0)) {
    throw Error(ErrorCode::DegenerateSummary, "zero covariance has no deviation quantiles");
  }
  if (zsq >= t) {
    const double sqrt_x = (std::sqrt(v + 2.0 * b * (zsq - t)) - std::sqrt(v)) / (2.0 * b);
    return sqrt_x * sqrt_x;
  }
  const double d = t - zsq;
  return d * d / (4.0 * v);
}

inline double subgaussian_upper_quantile_sq(const SpectralSummary& s, SubGaussianSpec sg,
                                            double x) {
  if (!(sg.gsq > 0.0)) throw Error(ErrorCode::NonPositiveG, "g^2 must be > 0");
  return sg.gsq * upper_quantile_sq(s, x);
}

// Gaussian moments of ||xi||^2. The variance is 2 tr B^2.
inline QuadraticFormMoments qf_moments(const SpectralSummary& s) {
  return {s.trace, 2.0 * s.trace_sq};
}

inline CriticalDimensionReport critical_dimension_report(const SpectralSummary& s, long long n) {
  if (n < 1) throw Error(ErrorCode::NonPositiveInput, "sample size n must be >= 1");
  CriticalDimensionReport r;
  r.eff_dim = s.eff_dim;
  r.ratio = s.eff_dim * s.eff_dim / static_cast<double>(n);
  if (r.ratio <= CriticalDimensionReport::kOkThreshold) {
    r.regime = DimensionRegime::Ok;
  } else if (r.ratio <= CriticalDimensionReport::kMarginalThreshold) {
    r.regime = DimensionRegime::Marginal;
  } else {
    r.regime = DimensionRegime::Violated;
  }
  return r;
}

}  // namespace hdconc
