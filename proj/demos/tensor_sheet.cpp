// Certifies a shape matrix for a sparse symmetric 3-tensor and prints the implied constants
// against the exact Gaussian moments.
//
//   tensor_sheet [tensor.tsv] [gamma.csv]

#include <cstdio>

#include "hdconc/hdconc.hpp"

int main(int argc, char** argv) {
  using namespace hdconc;
  try {
    const SymTensor3 t = argc > 1 ? read_tensor(argv[1]) : SymTensor3(2, {{0, 0, 0, 3.0}, {1, 1, 1, 4.0}});
    const SymMatrix gamma = argc > 2 ? read_sym_matrix(argv[2]) : SymMatrix::identity(t.dim());
    const auto norm = operator_norm(t);
    std::printf("p = %d, %zu entries, |T| = %.8g (converged %d)\n", t.dim(), t.entries().size(), norm.value,
                static_cast<int>(norm.converged));

    const auto cert = certify_gamma(t, gamma);
    const auto sheet = gamma_bounds(cert);
    const auto exact = gaussian_moments_exact(t);
    std::printf("tau = %.8g\n", cert.tau);
    std::printf("%-20s %14s %14s\n", "", "value", "bound");
    std::printf("%-20s %14.6g %14.6g\n", "|T|_Fr^2", frobenius_sq(t), sheet.frobenius_sq_bound);
    std::printf("%-20s %14.6g %14.6g\n", "|M|", trace_vector(t).norm(), sheet.trace_vec_bound);
    std::printf("%-20s %14.6g %14.6g\n", "E T(gamma)^2", exact.e_t2, sheet.e_t2_bound);
    std::printf("%-20s %14s %14.6g\n", "  finer form", "", sheet.e_t2_bound_fine);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
