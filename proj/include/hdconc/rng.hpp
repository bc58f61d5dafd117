#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace hdconc {

// Reproducible random streams.
//
// A run is keyed by (master_seed, stream). The sample range [0, n) is cut into
// fixed chunks of chunk_size; chunk c draws from its own generator seeded with
//
//   splitmix64(splitmix64(master_seed ^ splitmix64(stream)) + c * 0x9E3779B97F4A7C15)
//
// Chunk results are merged in chunk order, so estimates depend on
// (master_seed, stream, chunk_size, n) and never on the number of threads.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t chunk_size = 4096;

  // Same seed, different stream: statistically independent runs (e.g. pilots).
  RngSpec substream(std::uint64_t s) const { return {master_seed, stream + s, chunk_size}; }
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t chunk_seed(const RngSpec& spec, std::uint64_t chunk) {
  const std::uint64_t base = splitmix64(spec.master_seed ^ splitmix64(spec.stream));
  return splitmix64(base + chunk * 0x9E3779B97F4A7C15ULL);
}

// xoshiro256** (Blackman & Vigna), state filled by splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9E3779B97F4A7C15ULL;
      w = splitmix64(x);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Per-chunk generator with the variates the samplers need. Normals use the
// Marsaglia polar method; the spare variate is kept, so the sequence is fixed
// for a given seed on any IEEE-754 platform.
class ChunkRng {
 public:
  explicit ChunkRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double rademacher() { return (gen_() >> 63) ? 1.0 : -1.0; }

  Xoshiro256& engine() { return gen_; }

 private:
  Xoshiro256 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Deterministic chunked map-reduce over n samples.
//
//   body(rng, begin, count, acc)  fills acc from `count` samples of one chunk
//   merge(total, acc)             folds a chunk result into the total
//
// Chunks are processed by `threads` workers in any order; merging is in chunk order.
template <class Acc, class Init, class Body, class Merge>
Acc run_chunks(std::uint64_t n, const RngSpec& spec, unsigned threads, Init init, Body body,
               Merge merge) {
  const std::uint64_t chunk = std::max<std::uint64_t>(1, spec.chunk_size);
  const std::uint64_t chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> partial;
  partial.reserve(chunks);
  for (std::uint64_t c = 0; c < chunks; ++c) partial.push_back(init());

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::uint64_t c = next++; c < chunks; c = next++) {
        ChunkRng rng(chunk_seed(spec, c));
        const std::uint64_t begin = c * chunk;
        body(rng, begin, std::min(chunk, n - begin), partial[c]);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), std::max<std::uint64_t>(1, chunks)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = init();
  for (auto& p : partial) merge(total, p);
  return total;
}

}  // namespace hdconc
