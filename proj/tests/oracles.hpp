#pragma once

// Independent reference implementations used only by the tests. They work on
// dense p x p x p arrays with plain loops and share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hdconc/linalg.hpp"
#include "hdconc/tensor3.hpp"

namespace oracle {

using hdconc::Matrix;
using hdconc::Vector;

struct Dense3 {
  int p = 0;
  std::vector<double> a;  // a[(i * p + j) * p + k]

  explicit Dense3(int dim) : p(dim), a(std::size_t(dim) * dim * dim, 0.0) {}
  double& operator()(int i, int j, int k) { return a[(std::size_t(i) * p + j) * p + k]; }
  double operator()(int i, int j, int k) const { return a[(std::size_t(i) * p + j) * p + k]; }
};

inline Dense3 densify(const hdconc::SymTensor3& t) {
  Dense3 d(t.dim());
  for (int i = 0; i < d.p; ++i)
    for (int j = 0; j < d.p; ++j)
      for (int k = 0; k < d.p; ++k) d(i, j, k) = t(i, j, k);
  return d;
}

inline double cubic(const Dense3& d, const Vector& u) {
  double s = 0.0;
  for (int i = 0; i < d.p; ++i)
    for (int j = 0; j < d.p; ++j)
      for (int k = 0; k < d.p; ++k) s += d(i, j, k) * u[i] * u[j] * u[k];
  return s;
}

inline double trilinear(const Dense3& d, const Vector& u, const Vector& v, const Vector& w) {
  double s = 0.0;
  for (int i = 0; i < d.p; ++i)
    for (int j = 0; j < d.p; ++j)
      for (int k = 0; k < d.p; ++k) s += d(i, j, k) * u[i] * v[j] * w[k];
  return s;
}

inline Vector fd_gradient(const Dense3& d, const Vector& u, double h = 1e-5) {
  Vector g(d.p);
  for (int i = 0; i < d.p; ++i) {
    Vector a = u, b = u;
    a[i] += h;
    b[i] -= h;
    g[i] = (cubic(d, a) - cubic(d, b)) / (2 * h);
  }
  return g;
}

// Contraction with one vector: M(j, k) = sum_i T_ijk u_i.
inline Matrix contract(const Dense3& d, const Vector& u) {
  Matrix m = Matrix::Zero(d.p, d.p);
  for (int i = 0; i < d.p; ++i)
    for (int j = 0; j < d.p; ++j)
      for (int k = 0; k < d.p; ++k) m(j, k) += d(i, j, k) * u[i];
  return m;
}

inline double frobenius_sq(const Dense3& d) {
  double s = 0.0;
  for (double v : d.a) s += v * v;
  return s;
}

inline Vector trace_vector(const Dense3& d) {
  Vector m = Vector::Zero(d.p);
  for (int i = 0; i < d.p; ++i)
    for (int j = 0; j < d.p; ++j) m[i] += d(i, j, j);
  return m;
}

// S^2_{ii'} = 2 <T_i, T_i'> with T_i the i-th matrix slice.
inline Matrix s_matrix(const Dense3& d) {
  Matrix s = Matrix::Zero(d.p, d.p);
  for (int i = 0; i < d.p; ++i)
    for (int l = 0; l < d.p; ++l)
      for (int j = 0; j < d.p; ++j)
        for (int k = 0; k < d.p; ++k) s(i, l) += 2.0 * d(i, j, k) * d(l, j, k);
  return s;
}

// Dense form of u -> T(A u): T'_abc = sum T_ijk A_ia A_jb A_kc.
inline Dense3 transform(const Dense3& d, const Matrix& a) {
  Dense3 out(d.p);
  for (int x = 0; x < d.p; ++x)
    for (int y = 0; y < d.p; ++y)
      for (int z = 0; z < d.p; ++z) {
        double s = 0.0;
        for (int i = 0; i < d.p; ++i)
          for (int j = 0; j < d.p; ++j)
            for (int k = 0; k < d.p; ++k) s += d(i, j, k) * a(i, x) * a(j, y) * a(k, z);
        out(x, y, z) = s;
      }
  return out;
}

inline Vector random_unit(int p, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Vector u(p);
  do {
    for (int i = 0; i < p; ++i) u[i] = n(gen);
  } while (u.norm() == 0.0);
  return u.normalized();
}

// Projected gradient ascent of |f| on the sphere with finite-difference
// gradients and a step that grows on success and halves on failure.
template <class F>
Vector polish(F f, Vector u, int iters = 4000) {
  const int p = static_cast<int>(u.size());
  double step = 0.1;
  double val = std::abs(f(u));
  for (int it = 0; it < iters && step > 1e-12; ++it) {
    Vector g(p);
    const double h = 1e-6;
    for (int i = 0; i < p; ++i) {
      Vector a = u, b = u;
      a[i] += h;
      b[i] -= h;
      g[i] = (std::abs(f(a.normalized())) - std::abs(f(b.normalized()))) / (2 * h);
    }
    const Vector cand = (u + step * g).normalized();
    const double cv = std::abs(f(cand));
    if (cv > val) {
      u = cand;
      val = cv;
      step *= 1.2;
    } else {
      step *= 0.5;
    }
  }
  return u;
}

// sup over the unit sphere of |T(u)|: random directions plus polishing.
inline double cubic_sup(const Dense3& d, int directions, std::mt19937_64& gen) {
  auto f = [&](const Vector& u) { return cubic(d, u); };
  std::vector<std::pair<double, Vector>> cands;
  for (int s = 0; s < directions; ++s) {
    Vector u = random_unit(d.p, gen);
    cands.emplace_back(std::abs(f(u)), u);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0;
  for (int s = 0; s < std::min<int>(8, static_cast<int>(cands.size())); ++s) {
    best = std::max(best, std::abs(f(polish(f, cands[s].second))));
  }
  return best;
}

// sup over three unit vectors of |T(u, v, w)| by alternating maximization:
// for fixed (v, w) the best u is the normalized contraction.
inline double trilinear_sup(const Dense3& d, int directions, std::mt19937_64& gen) {
  double best = 0.0;
  for (int s = 0; s < directions; ++s) {
    Vector u = random_unit(d.p, gen), v = random_unit(d.p, gen), w = random_unit(d.p, gen);
    for (int it = 0; it < 200; ++it) {
      Vector nu = contract(d, v) * w;  // sum_jk T_ijk v_j w_k
      if (nu.norm() == 0.0) break;
      u = nu.normalized();
      Vector nv = contract(d, u) * w;
      if (nv.norm() == 0.0) break;
      v = nv.normalized();
      Vector nw = contract(d, u) * v;
      if (nw.norm() == 0.0) break;
      w = nw.normalized();
    }
    best = std::max(best, std::abs(trilinear(d, u, v, w)));
  }
  return best;
}

inline hdconc::SymTensor3 random_sparse_tensor(int p, int entries, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> idx(0, p - 1);
  std::normal_distribution<double> val;
  std::vector<hdconc::TripleValue> tv;
  std::vector<std::array<int, 3>> seen;
  for (int e = 0; e < entries; ++e) {
    std::array<int, 3> ijk{idx(gen), idx(gen), idx(gen)};
    std::sort(ijk.begin(), ijk.end());
    if (std::find(seen.begin(), seen.end(), ijk) != seen.end()) continue;
    seen.push_back(ijk);
    tv.push_back({ijk[0], ijk[1], ijk[2], val(gen)});
  }
  return hdconc::SymTensor3(p, tv);
}

inline Matrix random_psd(int p, std::mt19937_64& gen, int rank = -1) {
  std::normal_distribution<double> n;
  const int r = rank > 0 ? rank : p;
  Matrix g(p, r);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = n(gen);
  return g * g.transpose() / r;
}

inline Matrix random_spd(int p, std::mt19937_64& gen) {
  return random_psd(p, gen) + 0.5 * Matrix::Identity(p, p);
}

}  // namespace oracle
