#pragma once

#include <cassert>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "hdconc/error.hpp"
#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/tensor3.hpp"

// Constants attached to a symmetric 3-tensor T under the shape condition
//
//   |T(u)| <= tau ||Gamma u||^3   for all u,
//
// its pushforward to a colored Gaussian N(0, D^{-2}) with J^2 = D^{-1} Gamma^2 D^{-1},
// and the Herbst/Taylor constants built on top of them.

namespace hdconc {

struct GammaCertificate {
  SymMatrix gamma;
  double tau = 0.0;
  bool certified = false;
  std::string method;
};

// Colored Gaussian gamma_D ~ N(0, D^{-2}). jsq is set when a Gamma is attached.
struct ColoredSpec {
  SymMatrix dmat;
  std::optional<SymMatrix> jsq;
};

struct GaussianTensorMoments {
  double e_t2 = 0.0;          // E T(gamma)^2
  double e_centered2 = 0.0;   // E (T(gamma) - 3 <M, gamma>)^2
  double e_grad_norm2 = 0.0;  // E ||grad T(gamma) / 3||^2
};

// Numbers implied by (Gamma) for a shape matrix G (Gamma, or J in the colored case).
struct BoundSheet {
  double tau = 0.0;
  double shape_opnorm = 0.0;    // ||G||
  double shape_trace_sq = 0.0;  // tr G^2
  double shape_trace_4 = 0.0;   // tr G^4
  double grad_factor = 0.0;     // ||grad T(u)|| <= grad_factor * ||G u||^2
  double frobenius_sq_bound = 0.0;
  double trace_vec_bound = 0.0;
  double s_matrix_dominance_factor = 0.0;  // S^2 <= factor * G^2
  double e_t2_bound_fine = 0.0;            // 6 tau^2 trG^2 trG^4 + 9 tau^2 |G|^2 tr^2 G^2
  double e_t2_bound = 0.0;                 // 15 tau^2 |G|^2 tr^2 G^2
  bool colored = false;
};

struct PushforwardResult {
  SymTensor3 ttilde;
  SymMatrix jsq;
};

struct GammaVerification {
  double max_ratio = 0.0;  // max |T(u)| / ||Gamma u||^3 over the sampled directions
  bool pass = false;
};

// ---------------------------------------------------------------------------

inline GaussianTensorMoments gaussian_moments_exact(const SymTensor3& t) {
  const double fr = frobenius_sq(t);
  const double m2 = trace_vector(t).squaredNorm();
  GaussianTensorMoments m{6.0 * fr + 9.0 * m2, 6.0 * fr, m2 + 2.0 * fr};
  assert(m.e_grad_norm2 <= m.e_t2 / 3.0 * (1.0 + 1e-12));
  return m;
}

// Smallest tau with |T(u)| <= tau ||Gamma u||^3, i.e. the norm of u -> T(Gamma^{-1} u).
inline GammaCertificate certify_gamma(const SymTensor3& t, const SymMatrix& gamma,
                                      const NormOptions& opts = {}) {
  if (gamma.dim() != t.dim()) {
    throw Error(ErrorCode::DimMismatch, "Gamma must be p x p with p = tensor dimension");
  }
  const Matrix inv = spd_inverse(gamma, ErrorCode::SingularGamma);
  const NormResult nr = operator_norm(transform(t, inv), opts);
  GammaCertificate c;
  c.gamma = gamma;
  c.tau = nr.value;
  c.certified = nr.converged;
  c.method = "shifted symmetric power iteration on T(Gamma^-1 u), " +
             std::to_string(opts.restarts) + " restarts, " + std::to_string(opts.iters) +
             " iterations";
  return c;
}

// Checks a caller-supplied tau on random directions instead of computing it.
inline GammaVerification verify_gamma(const SymTensor3& t, const SymMatrix& gamma, double tau,
                                      int samples = 10000, std::uint64_t seed = 1) {
  if (gamma.dim() != t.dim()) throw Error(ErrorCode::DimMismatch, "Gamma size mismatch");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  GammaVerification out;
  Vector u(t.dim());
  for (int s = 0; s < samples; ++s) {
    for (auto& x : u) x = normal(gen);
    const double g = (gamma.matrix() * u).norm();
    if (g == 0.0) continue;
    out.max_ratio = std::max(out.max_ratio, std::abs(evaluate(t, u)) / (g * g * g));
  }
  out.pass = out.max_ratio <= tau * (1.0 + 1e-8);
  return out;
}

inline ColoredSpec make_colored(const SymMatrix& dmat, const std::optional<SymMatrix>& gamma) {
  const Matrix dinv = spd_inverse(dmat, ErrorCode::SingularD);
  ColoredSpec spec{dmat, std::nullopt};
  if (gamma) {
    if (gamma->dim() != dmat.dim()) throw Error(ErrorCode::DimMismatch, "Gamma and D differ in size");
    const Matrix g2 = gamma->matrix() * gamma->matrix();
    spec.jsq = SymMatrix(dinv * g2 * dinv);
  }
  return spec;
}

// Tensor of u -> T(D^{-1} u).
inline SymTensor3 pushforward_tensor(const SymTensor3& t, const SymMatrix& dmat) {
  if (dmat.dim() != t.dim()) throw Error(ErrorCode::DimMismatch, "D must be p x p");
  return transform(t, spd_inverse(dmat, ErrorCode::SingularD));
}

inline PushforwardResult colored_pushforward(const SymTensor3& t, const ColoredSpec& spec) {
  if (!spec.jsq) throw Error(ErrorCode::MissingGamma, "J^2 requested but no Gamma attached");
  return {pushforward_tensor(t, spec.dmat), *spec.jsq};
}

namespace detail {

inline BoundSheet sheet_from_shape(double tau, double g_norm, double tr_g2, double tr_g4) {
  BoundSheet b;
  b.tau = tau;
  b.shape_opnorm = g_norm;
  b.shape_trace_sq = tr_g2;
  b.shape_trace_4 = tr_g4;
  b.grad_factor = 3.0 * tau * g_norm;
  b.frobenius_sq_bound = tau * tau * tr_g2 * tr_g4;
  b.trace_vec_bound = tau * g_norm * tr_g2;
  b.s_matrix_dominance_factor = 2.0 * tau * tau * tr_g4;
  b.e_t2_bound_fine = 6.0 * tau * tau * tr_g2 * tr_g4 + 9.0 * tau * tau * g_norm * g_norm * tr_g2 * tr_g2;
  b.e_t2_bound = 15.0 * tau * tau * g_norm * g_norm * tr_g2 * tr_g2;
  return b;
}

}  // namespace detail

// Without a colored spec the shape is Gamma; with one it is J = (J^2)^{1/2}, and the
// sheet bounds the pushforward tensor T(D^{-1} .).
inline BoundSheet gamma_bounds(const GammaCertificate& cert,
                               const std::optional<ColoredSpec>& colored = std::nullopt) {
  if (!colored) {
    const SpectralSummary g2 = spectral_summary(SymMatrix(cert.gamma.matrix() * cert.gamma.matrix()));
    // Gamma^2 is PSD, so its summary yields ||Gamma||^2, tr Gamma^2, tr Gamma^4.
    return detail::sheet_from_shape(cert.tau, std::sqrt(g2.opnorm), g2.trace, g2.trace_sq);
  }
  const ColoredSpec spec = colored->jsq ? *colored : make_colored(colored->dmat, cert.gamma);
  const SpectralSummary j2 = spectral_summary(*spec.jsq);
  BoundSheet b = detail::sheet_from_shape(cert.tau, std::sqrt(j2.opnorm), j2.trace, j2.trace_sq);
  b.colored = true;
  return b;
}

// ---------------------------------------------------------------------------
// Herbst-argument constants.

enum class EpsilonKind { Tensor, Remainder };

// Gradient bound on the truncation set: 3 tau r^2 ||J|| for a tensor,
// tau_3 r^2 ||J|| / 2 for a third-order Taylor remainder.
inline double herbst_epsilon(double tau, double r, double opnorm_j, EpsilonKind kind) {
  if (!(tau > 0.0) || !(r > 0.0) || !(opnorm_j > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "tau, r and ||J|| must be > 0");
  }
  const double base = tau * r * r * opnorm_j;
  return kind == EpsilonKind::Tensor ? 3.0 * base : 0.5 * base;
}

// Truncation radius r = z(J^2, x), so that P(||J gamma|| > r) <= exp(-x).
inline double herbst_radius(const SpectralSummary& jsq_summary, double x) {
  return std::sqrt(upper_quantile_sq(jsq_summary, x));
}

inline constexpr int kMaxMomentConstantOrder = 150;

// C_k^2 = 2^{k+1} k!: E|X|^{2k} <= C_k^2 eps^{2k} when E exp(mu X) <= exp(mu^2 eps^2 / 2).
// Exact in double arithmetic for k <= 20, log-gamma beyond.
inline double moment_constant_sq(int k) {
  if (k < 1) throw Error(ErrorCode::NonPositiveInput, "k must be >= 1");
  if (k > kMaxMomentConstantOrder) {
    throw Error(ErrorCode::Overflow, "C_k^2 overflows double for k > 150");
  }
  if (k <= 20) {
    double c2 = std::ldexp(1.0, k + 1);
    for (int i = 2; i <= k; ++i) c2 *= i;
    return c2;
  }
  return std::exp((k + 1) * std::log(2.0) + std::lgamma(k + 1.0));
}

inline double moment_constant(int k) { return std::sqrt(moment_constant_sq(k)); }

struct BoundedXi {};  // |xi| <= 1
struct MomentXi {
  double m2k2 = 0.0;  // E xi^{2k+2}
};
using XiControl = std::variant<BoundedXi, MomentXi>;

// Bound on |E (e^X - E_k(X)) xi| where E_k is the Taylor polynomial of degree k-1.
inline double taylor_truncation_bound(double eps, int k, const XiControl& xi) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "eps must be > 0");
  if (k < 1) throw Error(ErrorCode::NonPositiveInput, "k must be >= 1");
  const double k_fact = std::tgamma(k + 1.0);
  const double tail = std::pow(eps, k) * std::exp(eps * eps);
  if (std::holds_alternative<BoundedXi>(xi)) return moment_constant(k) / k_fact * tail;
  const double m = std::get<MomentXi>(xi).m2k2;
  if (!(m >= 0.0)) throw Error(ErrorCode::NonPositiveInput, "E xi^{2k+2} must be >= 0");
  const double rho = static_cast<double>(k) / (k + 1);
  return std::pow(moment_constant(k + 1), rho) / k_fact * tail * std::pow(m, 1.0 / (2.0 * k + 2.0));
}

// Rounded constants quoted alongside the exact ones for k = 2, 3.
inline constexpr double kRoundedTaylorConstantK3 = 5.0 / 3.0;

}  // namespace hdconc
