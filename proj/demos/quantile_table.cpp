// Prints the deviation bound for |xi|^2, xi ~ N(0, B), next to a Monte Carlo tail estimate.
//
//   quantile_table [matrix.csv] [seed]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "hdconc/hdconc.hpp"

int main(int argc, char** argv) {
  using namespace hdconc;
  try {
    const SymMatrix b = argc > 1 ? read_sym_matrix(argv[1]) : SymMatrix::identity(4);
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    const SpectralSummary s = spectral_summary(b);
    std::printf("p = %ld  tr B = %.6g  tr B^2 = %.6g  |B| = %.6g\n", static_cast<long>(b.dim()), s.trace, s.trace_sq, s.opnorm);
    const std::vector<double> xs = {0.5, 1, 2, 3, 4};
    const auto upper = verify_quantile_bound(b, NoiseFamily{}, xs, Side::Upper, 200000, RngSpec{seed});
    std::printf("%6s %14s %14s %12s %12s\n", "x", "z^2 upper", "z^2 lower", "P(>upper)", "e^-x");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::printf("%6.2f %14.6g %14.6g %12.4g %12.4g\n", xs[i], upper_quantile_sq(s, xs[i]),
                  lower_quantile_sq(s, xs[i]), upper[i].estimate, std::exp(-xs[i]));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
