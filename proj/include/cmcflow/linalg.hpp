#pragma once

// Small dense linear algebra for frame-sized problems (dims <= ~8):
// LU solve / inverse with partial pivoting, null-space extraction, and
// Jacobi eigenvalues for symmetric matrices. No external dependencies.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cmcflow/jb.hpp"

namespace cmcflow {

class Mat {
 public:
  Mat() : r_(0), c_(0) {}
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : r_(r), c_(c), a_(r * c, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }

  Mat operator*(const Mat& o) const {
    Mat out(r_, o.c_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t k = 0; k < c_; ++k) {
        double v = (*this)(i, k);
        if (v == 0.0) continue;
        for (std::size_t j = 0; j < o.c_; ++j) out(i, j) += v * o(k, j);
      }
    return out;
  }
  Mat operator+(const Mat& o) const {
    Mat out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += o.a_[i];
    return out;
  }
  Mat operator-(const Mat& o) const {
    Mat out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= o.a_[i];
    return out;
  }
  Mat operator*(double s) const {
    Mat out = *this;
    for (double& v : out.a_) v *= s;
    return out;
  }
  Mat transposed() const {
    Mat out(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }
  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::size_t r_, c_;
  std::vector<double> a_;
};

// Solve A x = b in place (A square). Throws on (numerically) singular A.
inline std::vector<double> lu_solve(Mat a, std::vector<double> b) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) < 1e-300) throw domain_error("lu_solve: singular matrix");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(k, j));
      std::swap(b[p], b[k]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
    b[i] = s / a(i, i);
  }
  return b;
}

inline Mat inverse(const Mat& a) {
  const std::size_t n = a.rows();
  Mat inv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    auto x = lu_solve(a, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  return inv;
}

// One-dimensional null space of a (m x n) matrix with m = n-1 (full row
// rank assumed): Gaussian elimination with column pivot tracking.
inline std::vector<double> null_vector(Mat a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<std::size_t> col(n);
  for (std::size_t j = 0; j < n; ++j) col[j] = j;
  std::size_t row = 0;
  for (std::size_t k = 0; k < n && row < m; ++k) {
    std::size_t pr = row, pc = k;
    double best = 0.0;
    for (std::size_t i = row; i < m; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a(i, j)) > best) { best = std::abs(a(i, j)); pr = i; pc = j; }
    if (best < 1e-300) break;
    if (pr != row)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pr, j), a(row, j));
    if (pc != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(a(i, pc), a(i, k));
      std::swap(col[pc], col[k]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = a(i, k) / a(row, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(row, j);
    }
    ++row;
  }
  // free variable = last permuted column
  std::vector<double> x(n, 0.0);
  x[col[n - 1]] = 1.0;
  for (std::size_t i = row; i-- > 0;) {
    double s = -a(i, n - 1);
    x[col[i]] = s / a(i, i);
  }
  return x;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(Mat a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += sqr(a(i, j));
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  return ev;
}

}  // namespace cmcflow
