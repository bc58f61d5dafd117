#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hdconc/error.hpp"
#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/mc.hpp"
#include "hdconc/quadrature.hpp"
#include "hdconc/rng.hpp"
#include "hdconc/tensor3.hpp"
#include "hdconc/tensor_bounds.hpp"

// Monte Carlo and quadrature checks of every implemented inequality.
// One-sided claims pass at estimate <= bound + 3 stderr; identities at 5 stderr.

namespace hdconc {

// ---------------------------------------------------------------------------
// Quadratic-form tails.

// Gaussian family: the Gaussian quantile. Other families: the g^2-scaled upper
// quantile; the lower side keeps the Gaussian lower quantile.
inline std::vector<MCReport> verify_quantile_bound(const SymMatrix& b, const NoiseFamily& family,
                                                   const std::vector<double>& x_grid, Side side,
                                                   std::uint64_t n, const RngSpec& rng,
                                                   unsigned threads = default_threads()) {
  const SpectralSummary s = spectral_summary(b);
  std::vector<TailThreshold> thresholds;
  for (double x : x_grid) {
    double t = 0.0;
    if (side == Side::Upper) {
      t = family.kind == NoiseKind::Gaussian
              ? upper_quantile_sq(s, x)
              : subgaussian_upper_quantile_sq(s, SubGaussianSpec{family.gsq()}, x);
    } else {
      t = lower_quantile_sq(s, x);
    }
    thresholds.push_back({t, side});
  }
  const VectorSampler sampler(family, sym_factor(b), rng);
  auto reports = estimate_tails(sampler, n, thresholds, threads);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto& r = reports[i];
    r.op = "verify_quantile_bound";
    r.label = std::string(family.name()) + "_" + std::string(to_string(side)) + "_tail";
    r.params = {{"x", x_grid[i]}, {"z_sq", thresholds[i].threshold}, {"p", double(b.dim())}};
    judge_at_most(r, std::exp(-x_grid[i]));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Gaussian tensor moments.

struct ColoredCheck {
  ColoredSpec spec;
  GammaCertificate cert;
};

inline constexpr std::uint64_t kMinTensorSamples = 100000;

// Identities for gamma ~ N(0, I):
//   E T^2 = 6|T|_Fr^2 + 9|M|^2,  E (T - 3<M,gamma>)^2 = 6|T|_Fr^2,
//   E grad T / 3 = M,  tr Var(grad T / 3) = 2|T|_Fr^2.
// With a colored check additionally E T(gamma_D)^2 <= 15 tau^2 |J|^2 tr^2 J^2.
inline std::vector<MCReport> verify_tensor_moments(const SymTensor3& t,
                                                   const std::optional<ColoredCheck>& colored,
                                                   std::uint64_t n, const RngSpec& rng,
                                                   unsigned threads = default_threads()) {
  if (n < kMinTensorSamples) {
    throw Error(ErrorCode::TooFewSamples, "tensor moments need n >= 100000");
  }
  const int p = t.dim();
  const Vector m = trace_vector(t);
  const GaussianTensorMoments exact = gaussian_moments_exact(t);

  // dev2 tracks |G - M|^2 per sample; its spread sets the stderr of the
  // covariance trace.
  struct Sums {
    RunningStats t2, centered2, dev2;
    std::vector<RunningStats> grad;
  };
  const Sums sums = run_chunks<Sums>(
      n, rng, threads, [p] { return Sums{{}, {}, {}, std::vector<RunningStats>(p)}; },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, Sums& acc) {
        Vector g(p);
        for (std::uint64_t s = 0; s < count; ++s) {
          for (int i = 0; i < p; ++i) g[i] = r.normal();
          const double tv = evaluate(t, g);
          const Vector grad = gradient(t, g) / 3.0;
          acc.t2.add(tv * tv);
          const double c = tv - 3.0 * m.dot(g);
          acc.centered2.add(c * c);
          acc.dev2.add((grad - m).squaredNorm());
          for (int i = 0; i < p; ++i) acc.grad[i].add(grad[i]);
        }
      },
      [](Sums& total, const Sums& part) {
        total.t2.merge(part.t2);
        total.centered2.merge(part.centered2);
        total.dev2.merge(part.dev2);
        for (std::size_t i = 0; i < total.grad.size(); ++i) total.grad[i].merge(part.grad[i]);
      });

  std::vector<MCReport> out;
  auto r = mean_report("verify_tensor_moments", "e_t2", sums.t2, rng);
  judge_equal(r, exact.e_t2);
  out.push_back(r);
  r = mean_report("verify_tensor_moments", "e_centered2", sums.centered2, rng);
  judge_equal(r, exact.e_centered2);
  out.push_back(r);
  for (int i = 0; i < p; ++i) {
    r = mean_report("verify_tensor_moments", "grad_mean[" + std::to_string(i + 1) + "]", sums.grad[i], rng);
    judge_equal(r, m[i]);
    out.push_back(r);
  }
  // Sample covariance trace: sum_i var_i, with the stderr of the per-sample |G - M|^2.
  {
    double tr = 0.0;
    for (const auto& g : sums.grad) tr += g.variance();
    r = mean_report("verify_tensor_moments", "trace_grad_cov", sums.dev2, rng);
    r.estimate = tr;
    judge_equal(r, 2.0 * frobenius_sq(t));
    out.push_back(r);
  }

  if (colored) {
    const Matrix dinv = spd_inverse(colored->spec.dmat, ErrorCode::SingularD);
    const BoundSheet sheet = gamma_bounds(colored->cert, colored->spec);
    const RngSpec crng = rng.substream(1);
    const RunningStats ct2 = run_chunks<RunningStats>(
        n, crng, threads, [] { return RunningStats{}; },
        [&](ChunkRng& rr, std::uint64_t, std::uint64_t count, RunningStats& acc) {
          Vector g(p);
          for (std::uint64_t s = 0; s < count; ++s) {
            for (int i = 0; i < p; ++i) g[i] = rr.normal();
            const double tv = evaluate(t, dinv * g);
            acc.add(tv * tv);
          }
        },
        [](RunningStats& total, const RunningStats& part) { total.merge(part); });
    r = mean_report("verify_tensor_moments", "colored_e_t2", ct2, crng);
    judge_at_most(r, sheet.e_t2_bound, kIdentitySigmas);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncated MGF (Herbst) checks for X = T(gamma_D) - E_U T(gamma_D),
// U = {u : |Gamma u| <= r}, r = z(J^2, x), eps = 3 tau r^2 |J|.

struct HerbstSetup {
  double radius = 0.0;
  double epsilon = 0.0;
  double opnorm_j = 0.0;
  double centering = 0.0;  // pilot estimate of E_U T(gamma_D)
};

inline constexpr double kEpsilonWarn = 5.0;

inline std::vector<MCReport> verify_truncated_mgf(const SymTensor3& t, const GammaCertificate& cert,
                                                  const ColoredSpec& colored, double x,
                                                  const std::vector<double>& mu_grid,
                                                  std::uint64_t n, const RngSpec& rng,
                                                  unsigned threads = default_threads(),
                                                  HerbstSetup* setup_out = nullptr) {
  const int p = t.dim();
  if (cert.gamma.dim() != p || colored.dmat.dim() != p) {
    throw Error(ErrorCode::DimMismatch, "Gamma, D and the tensor must share a dimension");
  }
  const ColoredSpec spec = colored.jsq ? colored : make_colored(colored.dmat, cert.gamma);
  const SpectralSummary j2 = spectral_summary(*spec.jsq);
  HerbstSetup setup;
  setup.radius = herbst_radius(j2, x);
  setup.opnorm_j = std::sqrt(j2.opnorm);
  // A zero tensor certifies with tau = 0 and has a zero gradient everywhere.
  setup.epsilon = cert.tau > 0.0 ? herbst_epsilon(cert.tau, setup.radius, setup.opnorm_j, EpsilonKind::Tensor)
                                 : 0.0;
  const Matrix dinv = spd_inverse(spec.dmat, ErrorCode::SingularD);
  const Matrix& gamma = cert.gamma.matrix();
  const double r2 = setup.radius * setup.radius;

  // Pilot pass on an independent stream: E_U T(gamma_D) = E[T 1(gamma_D in U)].
  const RngSpec pilot_rng = rng.substream(1);
  const RunningStats pilot = run_chunks<RunningStats>(
      n, pilot_rng, threads, [] { return RunningStats{}; },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, RunningStats& acc) {
        Vector g(p);
        for (std::uint64_t s = 0; s < count; ++s) {
          for (int i = 0; i < p; ++i) g[i] = r.normal();
          const Vector gd = dinv * g;
          const bool inside = (gamma * gd).squaredNorm() <= r2;
          acc.add(inside ? evaluate(t, gd) : 0.0);
        }
      },
      [](RunningStats& total, const RunningStats& part) { total.merge(part); });
  setup.centering = pilot.mean;
  const double c = setup.centering;
  const double tail_level = setup.epsilon * std::sqrt(2.0 * x);

  struct Sums {
    std::vector<RunningStats> mgf;
    std::uint64_t outside = 0;
    std::uint64_t tail = 0;
  };
  const std::size_t nm = mu_grid.size();
  const Sums sums = run_chunks<Sums>(
      n, rng, threads, [nm] { return Sums{std::vector<RunningStats>(nm), 0, 0}; },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, Sums& acc) {
        Vector g(p);
        for (std::uint64_t s = 0; s < count; ++s) {
          for (int i = 0; i < p; ++i) g[i] = r.normal();
          const Vector gd = dinv * g;
          const bool inside = (gamma * gd).squaredNorm() <= r2;
          const double xv = evaluate(t, gd) - c;
          if (!inside) ++acc.outside;
          if (xv > tail_level) ++acc.tail;
          for (std::size_t k = 0; k < nm; ++k) acc.mgf[k].add(inside ? std::exp(mu_grid[k] * xv) : 0.0);
        }
      },
      [](Sums& total, const Sums& part) {
        for (std::size_t k = 0; k < total.mgf.size(); ++k) total.mgf[k].merge(part.mgf[k]);
        total.outside += part.outside;
        total.tail += part.tail;
      });

  const std::string warn = setup.epsilon > kEpsilonWarn
                               ? "EpsilonTooLarge: eps > 5, MGF estimates are unstable"
                               : std::string();
  auto with_params = [&](MCReport r) {
    r.params.insert(r.params.begin(), {{"x", x}, {"radius", setup.radius}, {"epsilon", setup.epsilon},
                                       {"tau", cert.tau}, {"centering", c}});
    if (!warn.empty()) r.note = warn;
    return r;
  };

  std::vector<MCReport> out;
  auto trunc = proportion_report("verify_truncated_mgf", "truncation_probability", sums.outside, n, rng);
  judge_at_most(trunc, std::exp(-x));
  out.push_back(with_params(trunc));
  for (std::size_t k = 0; k < nm; ++k) {
    auto r = mean_report("verify_truncated_mgf", "truncated_mgf", sums.mgf[k], rng);
    r.params = {{"mu", mu_grid[k]}};
    const double bound = std::exp(0.5 * mu_grid[k] * mu_grid[k] * setup.epsilon * setup.epsilon);
    r.bound = bound;
    r.check = CheckKind::AtMost;
    r.sigmas = kOneSidedSigmas;
    // est <= bound * (1 + 3 stderr / est)
    const double rel = r.estimate > 0.0 ? r.std_err / r.estimate : 0.0;
    r.pass = r.estimate <= bound * (1.0 + kOneSidedSigmas * rel);
    out.push_back(with_params(r));
  }
  auto tail = proportion_report("verify_truncated_mgf", "deviation_tail", sums.tail, n, rng);
  tail.params = {{"level", tail_level}};
  judge_at_most(tail, 2.0 * std::exp(-x));
  out.push_back(with_params(tail));
  if (setup_out) *setup_out = setup;
  return out;
}

// ---------------------------------------------------------------------------
// Moment constants: X ~ N(0, eps^2) satisfies the MGF premise with equality.

inline double double_factorial_odd(int k) {  // (2k-1)!!
  double r = 1.0;
  for (int i = 1; i <= 2 * k - 1; i += 2) r *= i;
  return r;
}

inline std::vector<MCReport> verify_moment_constants(double eps, const std::vector<int>& k_grid,
                                                     std::uint64_t n, const RngSpec& rng,
                                                     unsigned threads = default_threads()) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "eps must be > 0");
  for (int k : k_grid) {
    if (k < 1) throw Error(ErrorCode::NonPositiveInput, "k must be >= 1");
  }
  const std::size_t nk = k_grid.size();
  using Acc = std::vector<RunningStats>;
  const Acc sums = run_chunks<Acc>(
      n, rng, threads, [nk] { return Acc(nk); },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, Acc& acc) {
        for (std::uint64_t s = 0; s < count; ++s) {
          const double x = eps * r.normal();
          for (std::size_t i = 0; i < nk; ++i) acc[i].add(std::pow(x * x, k_grid[i]));
        }
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i].merge(part[i]);
      });
  std::vector<MCReport> out;
  for (std::size_t i = 0; i < nk; ++i) {
    const int k = k_grid[i];
    const double c2 = moment_constant_sq(k);
    const double bound = c2 * std::pow(eps, 2 * k);
    auto r = mean_report("verify_moment_constants", "mc_moment", sums[i], rng);
    r.params = {{"k", double(k)}, {"eps", eps}};
    judge_at_most(r, bound, kIdentitySigmas);
    out.push_back(r);

    MCReport a;
    a.op = "verify_moment_constants";
    a.label = "analytic_moment";
    a.estimate = double_factorial_odd(k) * std::pow(eps, 2 * k);
    a.params = {{"k", double(k)}, {"eps", eps}, {"ratio", double_factorial_odd(k) / c2}};
    judge_at_most(a, bound, 0.0);
    out.push_back(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Taylor remainders for X ~ N(0, eps^2).
//
//   k = 2:  |E e^X - 1 - EX|                <= (C_2 / 2!) eps^2 e^{eps^2} = 2 eps^2 e^{eps^2}
//   k = 3:  |E e^X - 1 - EX - EX^2 / 2|     <= 2 eps^3 e^{eps^2}
//           |E X e^X - EX - EX^2|           <= 5 eps^3 e^{eps^2}
//
// Gauss-Hermite quadrature (64 nodes) gives the primary value; the closed forms
// e^{eps^2/2} - 1, e^{eps^2/2} - 1 - eps^2/2, eps^2 e^{eps^2/2} - eps^2 and an MC
// estimate are cross-checks.

struct TaylorCase {
  std::string label;
  double bound_constant = 0.0;
  int eps_power = 0;
  double (*integrand)(double) = nullptr;
  double (*closed_form)(double) = nullptr;
};

namespace detail {
inline double rem_k2(double x) { return std::expm1(x) - x; }
inline double rem_k3(double x) { return std::expm1(x) - x - 0.5 * x * x; }
inline double rem_xexp(double x) { return x * std::expm1(x) - x * x; }
inline double closed_k2(double e) { return std::expm1(0.5 * e * e); }
inline double closed_k3(double e) { return std::expm1(0.5 * e * e) - 0.5 * e * e; }
inline double closed_xexp(double e) { return e * e * std::expm1(0.5 * e * e); }

inline std::vector<TaylorCase> taylor_cases(int k) {
  if (k == 2) return {{"exp_minus_E2", 2.0, 2, &rem_k2, &closed_k2}};
  if (k == 3) {
    return {{"exp_minus_E3", 2.0, 3, &rem_k3, &closed_k3},
            {"xexp_minus_poly", 5.0, 3, &rem_xexp, &closed_xexp}};
  }
  throw Error(ErrorCode::NonPositiveInput, "Taylor remainder check supports k = 2 or 3");
}
}  // namespace detail

inline std::vector<MCReport> verify_taylor_remainder(double eps, int k, std::uint64_t n,
                                                     const RngSpec& rng,
                                                     unsigned threads = default_threads()) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "eps must be > 0");
  const auto cases = detail::taylor_cases(k);
  const GaussHermite gh(64);
  using Acc = std::vector<RunningStats>;
  const std::size_t nc = cases.size();
  const Acc mc = run_chunks<Acc>(
      n, rng, threads, [nc] { return Acc(nc); },
      [&](ChunkRng& r, std::uint64_t, std::uint64_t count, Acc& acc) {
        for (std::uint64_t s = 0; s < count; ++s) {
          const double x = eps * r.normal();
          for (std::size_t i = 0; i < nc; ++i) acc[i].add(cases[i].integrand(x));
        }
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i].merge(part[i]);
      });

  std::vector<MCReport> out;
  for (std::size_t i = 0; i < nc; ++i) {
    const auto& tc = cases[i];
    const double quad = gh.normal_expectation(eps, tc.integrand);
    const double bound = tc.bound_constant * std::pow(eps, tc.eps_power) * std::exp(eps * eps);

    MCReport q;
    q.op = "verify_taylor_remainder";
    q.label = tc.label + "_quadrature";
    q.estimate = std::abs(quad);
    q.params = {{"eps", eps}, {"k", double(k)}, {"closed_form", tc.closed_form(eps)}};
    judge_at_most(q, bound, 0.0);
    out.push_back(q);

    MCReport a = q;
    a.label = tc.label + "_closed_form_match";
    a.estimate = quad;
    a.params = {{"eps", eps}, {"k", double(k)}};
    a.bound = tc.closed_form(eps);
    a.check = CheckKind::Equals;
    a.pass = std::abs(quad - *a.bound) <= 1e-8 * std::abs(*a.bound) + 1e-15;
    out.push_back(a);

    auto m = mean_report("verify_taylor_remainder", tc.label + "_mc", mc[i], rng);
    m.params = {{"eps", eps}, {"k", double(k)}};
    judge_equal(m, quad);
    out.push_back(m);
  }
  return out;
}

}  // namespace hdconc
