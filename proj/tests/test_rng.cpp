#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hdconc/mc.hpp"
#include "hdconc/rng.hpp"

using namespace hdconc;

TEST(SplitMix, KnownValues) {
  // Reference outputs of splitmix64 seeded with 0 (first three draws).
  std::uint64_t state = 0;
  auto next = [&] {
    const std::uint64_t out = splitmix64(state);
    state += 0x9E3779B97F4A7C15ULL;
    return out;
  };
  EXPECT_EQ(next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(next(), 0x06C45D188009454FULL);
}

TEST(ChunkSeed, DistinctAcrossChunksStreamsSeeds) {
  const RngSpec a{1, 0}, b{1, 1}, c{2, 0};
  EXPECT_NE(chunk_seed(a, 0), chunk_seed(a, 1));
  EXPECT_NE(chunk_seed(a, 0), chunk_seed(b, 0));
  EXPECT_NE(chunk_seed(a, 0), chunk_seed(c, 0));
  EXPECT_EQ(a.substream(1).stream, 1u);
  EXPECT_EQ(a.substream(1).master_seed, 1u);
}

TEST(ChunkRng, UniformAndNormalMoments) {
  ChunkRng r(42);
  RunningStats u, n, n2, rad;
  for (int i = 0; i < 200000; ++i) {
    const double x = r.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    u.add(x);
    const double z = r.normal();
    n.add(z);
    n2.add(z * z);
    rad.add(r.rademacher());
  }
  EXPECT_NEAR(u.mean, 0.5, 5 * u.stderr_mean());
  EXPECT_NEAR(n.mean, 0.0, 5 * n.stderr_mean());
  EXPECT_NEAR(n2.mean, 1.0, 5 * n2.stderr_mean());
  EXPECT_NEAR(rad.mean, 0.0, 5 * rad.stderr_mean());
}

TEST(NoiseFamily, UnitVarianceAndNames) {
  for (const char* name : {"gaussian", "rademacher", "uniform"}) {
    const NoiseFamily f = NoiseFamily::parse(name);
    EXPECT_EQ(f.name(), name);
    EXPECT_EQ(f.gsq(), 1.0);
    ChunkRng r(7);
    RunningStats s;
    for (int i = 0; i < 200000; ++i) {
      const double x = f.draw(r);
      s.add(x * x);
    }
    EXPECT_NEAR(s.mean, 1.0, 5 * s.stderr_mean()) << name;
  }
  EXPECT_THROW(NoiseFamily::parse("cauchy"), Error);
}

TEST(RunningStats, MergeMatchesSequential) {
  std::vector<double> xs(1000);
  for (int i = 0; i < 1000; ++i) xs[i] = std::sin(i * 0.37) * 3 + i * 0.001;
  RunningStats all, a, b;
  for (int i = 0; i < 1000; ++i) {
    all.add(xs[i]);
    (i < 313 ? a : b).add(xs[i]);
  }
  a.merge(b);
  EXPECT_EQ(a.n, all.n);
  EXPECT_NEAR(a.mean, all.mean, 1e-13);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-12);
  RunningStats empty;
  empty.merge(all);
  EXPECT_EQ(empty.mean, all.mean);
}

namespace {

std::vector<double> sums_by_chunk(std::uint64_t n, const RngSpec& spec, unsigned threads) {
  using Acc = std::vector<double>;
  return run_chunks<Acc>(
      n, spec, threads, [] { return Acc{}; },
      [](ChunkRng& r, std::uint64_t, std::uint64_t count, Acc& acc) {
        for (std::uint64_t i = 0; i < count; ++i) acc.push_back(r.normal());
      },
      [](Acc& total, const Acc& part) { total.insert(total.end(), part.begin(), part.end()); });
}

}  // namespace

TEST(RunChunks, IdenticalAcrossThreadCounts) {
  const RngSpec spec{123, 4, 1000};
  const auto one = sums_by_chunk(10500, spec, 1);
  ASSERT_EQ(one.size(), 10500u);
  for (unsigned t : {2u, 3u, 4u, 8u}) EXPECT_EQ(sums_by_chunk(10500, spec, t), one) << t << " threads";
  EXPECT_NE(sums_by_chunk(10500, RngSpec{124, 4, 1000}, 1), one);
}

TEST(RunChunks, BeginIndicesAreContiguous) {
  using Acc = std::vector<std::uint64_t>;
  const Acc begins = run_chunks<Acc>(
      2500, RngSpec{1, 0, 1000}, 3, [] { return Acc{}; },
      [](ChunkRng&, std::uint64_t begin, std::uint64_t count, Acc& acc) {
        acc.push_back(begin);
        acc.push_back(count);
      },
      [](Acc& total, const Acc& part) { total.insert(total.end(), part.begin(), part.end()); });
  EXPECT_EQ(begins, (Acc{0, 1000, 1000, 1000, 2000, 500}));
}

TEST(RunChunks, PropagatesExceptions) {
  EXPECT_THROW(run_chunks<int>(
                   5000, RngSpec{1, 0, 100}, 4, [] { return 0; },
                   [](ChunkRng&, std::uint64_t begin, std::uint64_t, int&) {
                     if (begin == 2000) throw std::runtime_error("boom");
                   },
                   [](int&, const int&) {}),
               std::runtime_error);
}

TEST(RunChunks, ZeroSamples) {
  EXPECT_EQ(sums_by_chunk(0, RngSpec{}, 4).size(), 0u);
}
