#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdconc/error.hpp"
#include "hdconc/linalg.hpp"

namespace hdconc {

// One stored entry of a symmetric 3-tensor; indices are 0-based and canonical
// (i <= j <= k).
struct TensorEntry {
  int i = 0, j = 0, k = 0;
  double value = 0.0;

  // Number of index permutations that share this value: 1, 3 or 6.
  int multiplicity() const {
    if (i == j && j == k) return 1;
    if (i == j || j == k) return 3;
    return 6;
  }
};

// Raw (not necessarily canonical) entry as supplied by a caller or a file.
struct TripleValue {
  int i = 0, j = 0, k = 0;
  double value = 0.0;
};

// Symmetric third-order tensor T on R^p in sparse canonical storage. Every
// permutation of (i,j,k) reads the same stored value; exact zeros are pruned.
class SymTensor3 {
 public:
  SymTensor3() = default;

  explicit SymTensor3(int dim) : dim_(dim) {
    if (dim < 1) throw Error(ErrorCode::DimMismatch, "tensor dimension must be >= 1");
  }

  // Canonicalizes each triple. Two inputs that land on the same canonical triple
  // are an error.
  SymTensor3(int dim, const std::vector<TripleValue>& entries) : SymTensor3(dim) {
    std::map<std::array<int, 3>, double> seen;
    for (const auto& e : entries) {
      std::array<int, 3> key{e.i, e.j, e.k};
      for (int idx : key) {
        if (idx < 0 || idx >= dim) {
          throw Error(ErrorCode::DimMismatch, "tensor index " + std::to_string(idx) +
                                                  " outside [0, " + std::to_string(dim) + ")");
        }
      }
      std::sort(key.begin(), key.end());
      if (!seen.emplace(key, e.value).second) {
        throw Error(ErrorCode::Parse, "duplicate canonical triple (" + std::to_string(key[0] + 1) +
                                          "," + std::to_string(key[1] + 1) + "," +
                                          std::to_string(key[2] + 1) + ")");
      }
    }
    for (const auto& [key, v] : seen) {
      if (v != 0.0) entries_.push_back({key[0], key[1], key[2], v});
    }
  }

  // Reads the canonical entries of a dense p^3 array (row-major, index i*p*p+j*p+k).
  // The array is assumed symmetric; only i <= j <= k positions are consulted.
  static SymTensor3 from_dense(int dim, const std::vector<double>& dense) {
    if (dense.size() != static_cast<std::size_t>(dim) * dim * dim) {
      throw Error(ErrorCode::DimMismatch, "dense tensor size does not match p^3");
    }
    SymTensor3 t(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        for (int k = j; k < dim; ++k) {
          const double v = dense[(static_cast<std::size_t>(i) * dim + j) * dim + k];
          if (v != 0.0) t.entries_.push_back({i, j, k, v});
        }
    return t;
  }

  int dim() const { return dim_; }
  const std::vector<TensorEntry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  // Logical entry T_{i,j,k} for any index order.
  double operator()(int i, int j, int k) const {
    std::array<int, 3> key{i, j, k};
    std::sort(key.begin(), key.end());
    const auto it = std::lower_bound(
        entries_.begin(), entries_.end(), key, [](const TensorEntry& e, const std::array<int, 3>& k3) {
          return std::array<int, 3>{e.i, e.j, e.k} < k3;
        });
    if (it != entries_.end() && it->i == key[0] && it->j == key[1] && it->k == key[2]) {
      return it->value;
    }
    return 0.0;
  }

 private:
  int dim_ = 0;
  std::vector<TensorEntry> entries_;  // sorted lexicographically by (i, j, k)
};

namespace detail {

inline void check_dim(const SymTensor3& t, const Vector& u) {
  if (u.size() != t.dim()) {
    throw Error(ErrorCode::DimMismatch, "vector length " + std::to_string(u.size()) +
                                            " does not match tensor dimension " +
                                            std::to_string(t.dim()));
  }
}

// Calls f(a, b, c) once for every distinct ordered permutation of a canonical entry.
template <class F>
void for_each_permutation(const TensorEntry& e, F&& f) {
  std::array<int, 3> idx{e.i, e.j, e.k};
  do {
    f(idx[0], idx[1], idx[2]);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

}  // namespace detail

// T(u) = sum_{i,j,k} T_ijk u_i u_j u_k.
inline double evaluate(const SymTensor3& t, const Vector& u) {
  detail::check_dim(t, u);
  double s = 0.0;
  for (const auto& e : t.entries()) s += e.multiplicity() * e.value * u[e.i] * u[e.j] * u[e.k];
  return s;
}

// Gradient of T(u): 3 * (sum_{j,k} T_ijk u_j u_k)_i.
inline Vector gradient(const SymTensor3& t, const Vector& u) {
  detail::check_dim(t, u);
  Vector g = Vector::Zero(t.dim());
  for (const auto& e : t.entries()) {
    const double c = e.multiplicity() * e.value;
    g[e.i] += c * u[e.j] * u[e.k];
    g[e.j] += c * u[e.i] * u[e.k];
    g[e.k] += c * u[e.i] * u[e.j];
  }
  return g;
}

// T[u] = sum_i u_i T_i; the Hessian of T(u) equals 6 T[u].
inline SymMatrix slice(const SymTensor3& t, const Vector& u) {
  detail::check_dim(t, u);
  Matrix h = Matrix::Zero(t.dim(), t.dim());
  for (const auto& e : t.entries()) {
    const double c = e.multiplicity() * e.value;
    h(e.i, e.j) += c * u[e.k];
    h(e.j, e.i) += c * u[e.k];
    h(e.i, e.k) += c * u[e.j];
    h(e.k, e.i) += c * u[e.j];
    h(e.j, e.k) += c * u[e.i];
    h(e.k, e.j) += c * u[e.i];
  }
  return SymMatrix(h / 6.0);
}

// ||T||_Fr^2 over all p^3 index triples.
inline double frobenius_sq(const SymTensor3& t) {
  double s = 0.0;
  for (const auto& e : t.entries()) s += e.multiplicity() * e.value * e.value;
  return s;
}

// M_i = tr T_i = sum_j T_ijj.
inline Vector trace_vector(const SymTensor3& t) {
  Vector m = Vector::Zero(t.dim());
  for (const auto& e : t.entries()) {
    detail::for_each_permutation(e, [&](int a, int b, int c) {
      if (b == c) m[a] += e.value;
    });
  }
  return m;
}

// S^2 = (2 <T_i, T_i'>)_{i,i'}, the covariance of grad T(gamma) / 3.
inline SymMatrix s_matrix(const SymTensor3& t) {
  // Group the expanded tensor by its trailing pair (j, k).
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> by_pair;
  for (const auto& e : t.entries()) {
    detail::for_each_permutation(e, [&](int a, int b, int c) {
      by_pair[{b, c}].emplace_back(a, e.value);
    });
  }
  Matrix s = Matrix::Zero(t.dim(), t.dim());
  for (const auto& [jk, column] : by_pair) {
    for (const auto& [a, va] : column)
      for (const auto& [b, vb] : column) s(a, b) += 2.0 * va * vb;
  }
  return SymMatrix(s);
}

// Tensor of u -> T(A u): entries sum_{ijk} T_ijk A_ia A_jb A_kc.
inline SymTensor3 transform(const SymTensor3& t, const Matrix& a) {
  const int p = t.dim();
  if (a.rows() != p || a.cols() != p) {
    throw Error(ErrorCode::DimMismatch, "transform matrix must be p x p");
  }
  std::vector<double> dense(static_cast<std::size_t>(p) * p * p, 0.0);
  auto at = [&](int x, int y, int z) -> double& {
    return dense[(static_cast<std::size_t>(x) * p + y) * p + z];
  };
  for (const auto& e : t.entries()) {
    detail::for_each_permutation(e, [&](int i, int j, int k) {
      for (int x = 0; x < p; ++x) {
        const double ax = e.value * a(i, x);
        if (ax == 0.0) continue;
        for (int y = x; y < p; ++y) {
          const double axy = ax * a(j, y);
          if (axy == 0.0) continue;
          for (int z = y; z < p; ++z) at(x, y, z) += axy * a(k, z);
        }
      }
    });
  }
  return SymTensor3::from_dense(p, dense);
}

// ---------------------------------------------------------------------------
// Operator norm sup_{|u|=1} |T(u)| by multi-start shifted symmetric power iteration.

struct NormOptions {
  int restarts = 32;
  int iters = 500;
  double tol = 1e-10;
  std::uint64_t seed = 0x9E3779B97F4A7C15ULL;
};

struct NormResult {
  double value = 0.0;  // always a lower bound on ||T||
  Vector maximizer;
  bool converged = true;  // the restart that produced value met the tolerance
};

namespace detail {

// Ascent on T(u) over the unit sphere: u <- normalize(grad T(u) + shift * u).
// The shift starts at zero and doubles whenever a step fails to increase T,
// up to 6 ||T||_Fr, beyond which every step is monotone.
inline std::pair<Vector, bool> ascend(const SymTensor3& t, Vector u, const NormOptions& opts,
                                      double safe_shift) {
  double f = evaluate(t, u);
  if (f < 0.0) {
    u = -u;
    f = -f;
  }
  double shift = 0.0;
  for (int it = 0; it < opts.iters; ++it) {
    const Vector g = gradient(t, u);
    Vector next;
    double fn = 0.0;
    while (true) {
      next = g + shift * u;
      const double nrm = next.norm();
      if (nrm == 0.0) return {u, true};
      next /= nrm;
      fn = evaluate(t, next);
      if (fn >= f - 1e-15 * std::abs(f) || shift >= safe_shift) break;
      shift = std::min(safe_shift, std::max(2.0 * shift, 1e-3 * safe_shift));
    }
    const double change = std::abs(fn - f);
    u = next;
    f = fn;
    if (change <= opts.tol * std::max(1.0, std::abs(f))) return {u, true};
  }
  return {u, false};
}

}  // namespace detail

inline NormResult operator_norm(const SymTensor3& t, const NormOptions& opts = {}) {
  const int p = t.dim();
  NormResult best;
  best.maximizer = Vector::Unit(p, 0);
  if (t.nnz() == 0) return best;
  const double safe_shift = 6.0 * std::sqrt(frobenius_sq(t));
  std::mt19937_64 gen(opts.seed);
  std::normal_distribution<double> normal;
  best.value = -1.0;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Vector u(p);
    for (int i = 0; i < p; ++i) u[i] = normal(gen);
    if (u.norm() == 0.0) u = Vector::Unit(p, 0);
    u.normalize();
    auto [v, ok] = detail::ascend(t, u, opts, safe_shift);
    const double val = std::abs(evaluate(t, v));
    if (val > best.value) {
      best.value = val;
      best.maximizer = v;
      best.converged = ok;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Tensor file format: one "i j k value" per line, 1-based indices in any order.
// Blank lines and lines starting with '#' are ignored.

inline SymTensor3 parse_tensor(std::istream& in, std::optional<int> dim = std::nullopt,
                               const std::string& name = "<tensor>") {
  std::vector<TripleValue> raw;
  int max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream ls{std::string(body)};
    const std::string where = name + ":" + std::to_string(lineno);
    long long i = 0, j = 0, k = 0;
    std::string value_tok, extra;
    if (!(ls >> i >> j >> k >> value_tok) || (ls >> extra)) {
      throw Error(ErrorCode::Parse, where + ": expected 'i j k value'");
    }
    if (i < 1 || j < 1 || k < 1) throw Error(ErrorCode::Parse, where + ": indices are 1-based");
    const double v = detail::parse_double(value_tok, where);
    max_index = static_cast<int>(std::max({static_cast<long long>(max_index), i, j, k}));
    raw.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), static_cast<int>(k - 1), v});
  }
  const int p = dim.value_or(std::max(1, max_index));
  if (max_index > p) {
    throw Error(ErrorCode::DimMismatch, name + ": index " + std::to_string(max_index) +
                                            " exceeds dimension " + std::to_string(p));
  }
  return SymTensor3(p, raw);
}

inline SymTensor3 read_tensor(const std::string& path, std::optional<int> dim = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_tensor(in, dim, path);
}

inline void write_tensor(std::ostream& out, const SymTensor3& t) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : t.entries()) {
    os << e.i + 1 << ' ' << e.j + 1 << ' ' << e.k + 1 << ' ' << e.value << '\n';
  }
  out << os.str();
}

}  // namespace hdconc
