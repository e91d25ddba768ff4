// Dense matrices, SVD, Moore-Penrose pseudoinverse and least squares.
// The decomposition is delegated to Eigen's JacobiSVD; everything downstream
// (rank cutoff, pseudoinverse assembly, least squares) is defined here so the
// contracts stay local.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace mrbf {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;  // row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimensions");
  }

  double& operator()(int r, int c) { return entries[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return entries[static_cast<std::size_t>(r) * cols + c]; }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int r = 0; r < a.rows; ++r)
    for (int c = 0; c < a.cols; ++c) t(c, r) = a(r, c);
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("multiply: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int k = 0; k < a.cols; ++k) {
      const double arc = a(r, k);
      if (arc == 0.0) continue;
      for (int c = 0; c < b.cols; ++c) out(r, c) += arc * b(k, c);
    }
  }
  return out;
}

inline Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("subtract: shape mismatch");
  Matrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    out.entries[i] = a.entries[i] - b.entries[i];
  return out;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.entries) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.entries) m = std::max(m, std::abs(v));
  return m;
}

// Thin SVD: A = U * diag(s) * V^T with k = min(rows, cols) columns,
// singular values nonnegative and descending.
struct SvdFactors {
  Matrix u;
  std::vector<double> singular_values;
  Matrix v;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows, a.cols);
  for (int r = 0; r < a.rows; ++r)
    for (int c = 0; c < a.cols; ++c) m(r, c) = a(r, c);
  return m;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace detail

inline SvdFactors svd(const Matrix& a) {
  if (a.rows <= 0 || a.cols <= 0) throw std::invalid_argument("svd: empty matrix");
  for (double v : a.entries)
    if (!std::isfinite(v)) throw std::domain_error("svd: non-finite entry");

  Eigen::JacobiSVD<Eigen::MatrixXd> dec(detail::to_eigen(a),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f;
  f.u = detail::from_eigen(dec.matrixU());
  f.v = detail::from_eigen(dec.matrixV());
  const auto& s = dec.singularValues();
  f.singular_values.assign(s.data(), s.data() + s.size());
  return f;
}

// A+ = V * diag(1/s_i where s_i > rel_tol * s_max, else 0) * U^T
inline Matrix pinv(const Matrix& a, double rel_tol = 1e-12) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("pinv: rel_tol outside (0,1)");
  SvdFactors f = svd(a);
  const int k = static_cast<int>(f.singular_values.size());
  const double s_max = k > 0 ? f.singular_values[0] : 0.0;
  const double cutoff = rel_tol * s_max;

  // V * diag(inv_s) * U^T, assembled column-scaled to avoid a temporary diag.
  Matrix vs(f.v.rows, k);
  for (int i = 0; i < k; ++i) {
    const double si = f.singular_values[i];
    const double inv = (si > cutoff && si > 0.0) ? 1.0 / si : 0.0;
    for (int r = 0; r < f.v.rows; ++r) vs(r, i) = f.v(r, i) * inv;
  }
  return multiply(vs, transpose(f.u));
}

// Minimum-norm least squares solution X = pinv(A) * B.
inline Matrix solve_least_squares(const Matrix& a, const Matrix& b, double rel_tol = 1e-12) {
  if (a.rows != b.rows) throw std::invalid_argument("solve_least_squares: row count mismatch");
  return multiply(pinv(a, rel_tol), b);
}

}  // namespace mrbf
