#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdconc/error.hpp"
#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/rng.hpp"

namespace hdconc {

// Coordinate laws with unit variance. Each satisfies E exp(l eta) <= exp(l^2 gsq / 2):
//   Gaussian             gsq = 1 (equality)
//   Rademacher           gsq = 1 (cosh l <= exp(l^2 / 2))
//   uniform [-sqrt3, sqrt3] gsq = 1 (sinh(a)/a <= exp(a^2 / 6), a = sqrt(3) l)
enum class NoiseKind { Gaussian, Rademacher, UniformSym };

struct NoiseFamily {
  NoiseKind kind = NoiseKind::Gaussian;

  double gsq() const { return 1.0; }

  std::string_view name() const {
    switch (kind) {
      case NoiseKind::Gaussian: return "gaussian";
      case NoiseKind::Rademacher: return "rademacher";
      case NoiseKind::UniformSym: return "uniform";
    }
    return "unknown";
  }

  static NoiseFamily parse(std::string_view s) {
    if (s == "gaussian") return {NoiseKind::Gaussian};
    if (s == "rademacher") return {NoiseKind::Rademacher};
    if (s == "uniform") return {NoiseKind::UniformSym};
    throw Error(ErrorCode::Parse, "unknown noise family '" + std::string(s) + "'");
  }

  double draw(ChunkRng& rng) const {
    switch (kind) {
      case NoiseKind::Gaussian: return rng.normal();
      case NoiseKind::Rademacher: return rng.rademacher();
      case NoiseKind::UniformSym: return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    }
    return 0.0;
  }
};

// Mean and variance with Chan's pairwise merge.
struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double tot = na + nb;
    mean += d * nb / tot;
    m2 += o.m2 + d * d * na * nb / tot;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

enum class CheckKind {
  None,    // informational
  AtMost,  // estimate <= bound + k * stderr (one-sided claim)
  Equals,  // |estimate - bound| <= k * stderr (identity)
};

struct MCReport {
  std::string op;
  std::string label;
  double estimate = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
  std::optional<double> bound;
  std::optional<bool> pass;
  CheckKind check = CheckKind::None;
  double sigmas = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<std::pair<std::string, double>> params;
  std::string note;
};

inline constexpr double kOneSidedSigmas = 3.0;
inline constexpr double kIdentitySigmas = 5.0;

inline void judge_at_most(MCReport& r, double bound, double sigmas = kOneSidedSigmas) {
  r.bound = bound;
  r.check = CheckKind::AtMost;
  r.sigmas = sigmas;
  r.pass = r.estimate <= bound + sigmas * r.std_err;
}

// A zero-variance estimate must match to rounding.
inline void judge_equal(MCReport& r, double exact, double sigmas = kIdentitySigmas) {
  r.bound = exact;
  r.check = CheckKind::Equals;
  r.sigmas = sigmas;
  r.pass = std::abs(r.estimate - exact) <= sigmas * r.std_err + 1e-12 * (1.0 + std::abs(exact));
}

inline bool all_pass(const std::vector<MCReport>& rs) {
  for (const auto& r : rs)
    if (r.pass && !*r.pass) return false;
  return true;
}

inline MCReport mean_report(std::string op, std::string label, const RunningStats& s,
                            const RngSpec& rng) {
  MCReport r;
  r.op = std::move(op);
  r.label = std::move(label);
  r.estimate = s.mean;
  r.std_err = s.stderr_mean();
  r.n = s.n;
  r.seed = rng.master_seed;
  r.stream = rng.stream;
  return r;
}

inline MCReport proportion_report(std::string op, std::string label, std::uint64_t hits,
                                  std::uint64_t n, const RngSpec& rng) {
  MCReport r;
  r.op = std::move(op);
  r.label = std::move(label);
  r.n = n;
  r.estimate = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  r.std_err = n ? std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(n)) : 0.0;
  r.seed = rng.master_seed;
  r.stream = rng.stream;
  return r;
}

// ---------------------------------------------------------------------------
// Vector samplers: xi = L eta with eta iid from a NoiseFamily.

class VectorSampler {
 public:
  VectorSampler(NoiseFamily family, Factor factor, RngSpec rng)
      : family_(family), factor_(std::move(factor)), rng_(rng) {}

  const NoiseFamily& family() const { return family_; }
  const Factor& factor() const { return factor_; }
  const RngSpec& rng() const { return rng_; }
  Eigen::Index dim() const { return factor_.dim(); }

  // consume(block, acc) sees each chunk as a p x m matrix of samples (one per column).
  template <class Acc, class Init, class Consume, class Merge>
  Acc run(std::uint64_t n, unsigned threads, Init init, Consume consume, Merge merge) const {
    const Eigen::Index p = dim();
    return run_chunks<Acc>(
        n, rng_, threads, init,
        [&](ChunkRng& rng, std::uint64_t, std::uint64_t count, Acc& acc) {
          Matrix eta(p, static_cast<Eigen::Index>(count));
          for (Eigen::Index c = 0; c < eta.cols(); ++c)
            for (Eigen::Index i = 0; i < p; ++i) eta(i, c) = family_.draw(rng);
          const Matrix block = factor_.root * eta;
          consume(block, acc);
        },
        merge);
  }

 private:
  NoiseFamily family_;
  Factor factor_;
  RngSpec rng_;
};

// All n samples as columns of a p x n matrix; meant for small n.
inline Matrix sample_vectors(const NoiseFamily& family, const Factor& factor, std::uint64_t n,
                             const RngSpec& rng, unsigned threads = 1) {
  const VectorSampler sampler(family, factor, rng);
  using Blocks = std::vector<Matrix>;
  const Blocks blocks = sampler.run<Blocks>(
      n, threads, [] { return Blocks{}; },
      [](const Matrix& b, Blocks& acc) { acc.push_back(b); },
      [](Blocks& total, const Blocks& part) { total.insert(total.end(), part.begin(), part.end()); });
  Matrix out(sampler.dim(), static_cast<Eigen::Index>(n));
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    out.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return out;
}

inline constexpr std::uint64_t kMinTailSamples = 1000;

struct TailThreshold {
  double threshold = 0.0;
  Side side = Side::Upper;  // Upper counts ||xi||^2 > t, Lower counts ||xi||^2 < t
};

// Tail frequencies of ||xi||^2 for several thresholds from one pass over the samples.
inline std::vector<MCReport> estimate_tails(const VectorSampler& sampler, std::uint64_t n,
                                            const std::vector<TailThreshold>& thresholds,
                                            unsigned threads = default_threads()) {
  if (n < kMinTailSamples) {
    throw Error(ErrorCode::TooFewSamples, "tail estimates need n >= 1000, got " + std::to_string(n));
  }
  using Counts = std::vector<std::uint64_t>;
  const std::size_t m = thresholds.size();
  const Counts hits = sampler.run<Counts>(
      n, threads, [m] { return Counts(m, 0); },
      [&](const Matrix& block, Counts& acc) {
        const Vector norms = block.colwise().squaredNorm().transpose();
        for (std::size_t t = 0; t < m; ++t) {
          const auto& th = thresholds[t];
          for (double v : norms) {
            if (th.side == Side::Upper ? v > th.threshold : v < th.threshold) ++acc[t];
          }
        }
      },
      [](Counts& total, const Counts& part) {
        for (std::size_t t = 0; t < total.size(); ++t) total[t] += part[t];
      });
  std::vector<MCReport> out;
  out.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    MCReport r = proportion_report("estimate_tail",
                                   std::string(to_string(thresholds[t].side)) + "_tail", hits[t], n,
                                   sampler.rng());
    r.params = {{"threshold", thresholds[t].threshold}};
    out.push_back(std::move(r));
  }
  return out;
}

inline MCReport estimate_tail(const VectorSampler& sampler, std::uint64_t n, double threshold,
                              unsigned threads = default_threads()) {
  return estimate_tails(sampler, n, {{threshold, Side::Upper}}, threads).front();
}

}  // namespace hdconc
