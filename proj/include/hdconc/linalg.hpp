#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hdconc/error.hpp"

namespace hdconc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Eigenvalues in [-kPsdTol * |B|, 0) are treated as rounding noise and clamped.
inline constexpr double kPsdTol = 1e-10;

// Dense symmetric matrix. Symmetry is exact: the constructor stores (A + A^T) / 2
// and remembers how far the input was from symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& a) {
    if (a.rows() != a.cols()) {
      throw Error(ErrorCode::DimMismatch, "matrix is " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + ", expected square");
    }
    if (a.rows() < 1) throw Error(ErrorCode::DimMismatch, "matrix dimension must be >= 1");
    defect_ = (a - a.transpose()).cwiseAbs().maxCoeff();
    m_ = 0.5 * (a + a.transpose());
  }

  static SymMatrix identity(Eigen::Index p) { return SymMatrix(Matrix::Identity(p, p)); }

  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double symmetric_defect() const { return defect_; }

 private:
  Matrix m_;
  double defect_ = 0.0;
};

struct SpectralSummary {
  double trace = 0.0;     // tr B
  double trace_sq = 0.0;  // tr B^2
  double opnorm = 0.0;    // largest eigenvalue
  double eff_dim = 0.0;   // effective dimension, equal to tr B
};

struct PsdDiagnostics {
  double min_eig = 0.0;
  double symmetric_defect = 0.0;
};

// Square root L of a PSD matrix, L * L^T = B.
struct Factor {
  Matrix root;
  Eigen::Index dim() const { return root.rows(); }
};

namespace detail {

inline Vector eigenvalues(const SymMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Clamps small negative eigenvalues and rejects genuinely indefinite input.
inline void clamp_psd(Vector& lambda, const char* what) {
  const double scale = lambda.cwiseAbs().maxCoeff();
  const double floor = -kPsdTol * scale;
  for (auto& l : lambda) {
    if (l < floor) {
      throw Error(ErrorCode::NotPSD, std::string(what) + ": eigenvalue " + std::to_string(l) +
                                         " below tolerance " + std::to_string(floor));
    }
    l = std::max(l, 0.0);
  }
}

}  // namespace detail

inline PsdDiagnostics validate_psd(const SymMatrix& b) {
  const Vector lambda = detail::eigenvalues(b);
  return {lambda.minCoeff(), b.symmetric_defect()};
}

inline SpectralSummary spectral_summary(const SymMatrix& b) {
  Vector lambda = detail::eigenvalues(b);
  detail::clamp_psd(lambda, "spectral_summary");
  SpectralSummary s;
  s.trace = lambda.sum();
  s.trace_sq = lambda.squaredNorm();
  s.opnorm = lambda.maxCoeff();
  s.eff_dim = s.trace;
  return s;
}

// Symmetric eigen square root; works for rank-deficient B (e.g. projectors).
inline Factor sym_factor(const SymMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix());
  Vector lambda = es.eigenvalues();
  detail::clamp_psd(lambda, "sym_factor");
  const Matrix& v = es.eigenvectors();
  return {v * lambda.cwiseSqrt().asDiagonal() * v.transpose()};
}

// Matrix function f applied to the spectrum of a symmetric matrix.
template <class F>
Matrix spectral_apply(const SymMatrix& b, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix());
  const Vector mapped = es.eigenvalues().unaryExpr(std::forward<F>(f));
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
}

// Inverse of a symmetric positive definite matrix. Throws `code` when the smallest
// eigenvalue is not above rel_tol * largest.
inline Matrix spd_inverse(const SymMatrix& b, ErrorCode code, double rel_tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix());
  const Vector& lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (!(lambda.minCoeff() > rel_tol * top)) {
    throw Error(code, "matrix is not positive definite (min eigenvalue " +
                          std::to_string(lambda.minCoeff()) + ")");
  }
  const Matrix& v = es.eigenvectors();
  return v * lambda.cwiseInverse().asDiagonal() * v.transpose();
}

// ---------------------------------------------------------------------------
// CSV matrices: dense, row-major, no header, comma separated, strict.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view tok, const std::string& where) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::Parse, where + ": cannot parse '" + std::string(tok) + "' as a number");
  }
  return v;
}

}  // namespace detail

inline Matrix parse_csv_matrix(std::istream& in, const std::string& name = "<csv>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    const std::string where = name + ":" + std::to_string(lineno);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(detail::parse_double(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(rows.front().size()) +
                                        " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, name + ": empty matrix file");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_csv_matrix(in, path);
}

// Square p x p matrix; a non-square file is a parse error.
inline SymMatrix read_sym_matrix(const std::string& path) {
  Matrix m = read_csv_matrix(path);
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::Parse, path + ": " + std::to_string(m.rows()) + " rows but " +
                                      std::to_string(m.cols()) + " columns");
  }
  return SymMatrix(m);
}

inline void write_csv_matrix(std::ostream& out, const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
  out << os.str();
}

}  // namespace hdconc
