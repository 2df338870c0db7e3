#pragma once

/// Small dense linear algebra: row-major matrices, Gauss-Jordan inversion
/// over any field-like scalar (doubles or jets), a Cholesky-based SPD test,
/// and a cyclic Jacobi eigensolver for symmetric matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/jets.hpp"

namespace ahlab {

inline double scalar_value(double v) { return v; }
template <int Order>
double scalar_value(const Jet<Order>& j) {
  return j.value();
}

template <class T = double>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T(0.0))
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  std::vector<T> column(int c) const {
    std::vector<T> v(static_cast<std::size_t>(rows_));
    for (int r = 0; r < rows_; ++r) v[static_cast<std::size_t>(r)] = (*this)(r, c);
    return v;
  }
  void set_column(int c, const std::vector<T>& v) {
    for (int r = 0; r < rows_; ++r) (*this)(r, c) = v[static_cast<std::size_t>(r)];
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] += b.data_[k];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] -= b.data_[k];
    return a;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

inline double max_abs(const Matrix<double>& m) {
  double r = 0.0;
  for (double v : m.data()) r = std::max(r, std::abs(v));
  return r;
}

/// Gauss-Jordan inverse with partial pivoting on the scalar value; works for
/// jets because pivots only need an invertible constant term.
template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionError("inverse of a non-square matrix");
  Matrix<T> m = a;
  Matrix<T> inv = Matrix<T>::identity(n);
  double scale = 0.0;
  for (const T& v : a.data()) scale = std::max(scale, std::abs(scalar_value(v)));
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(scalar_value(m(r, col))) > std::abs(scalar_value(m(pivot, col)))) pivot = r;
    }
    if (std::abs(scalar_value(m(pivot, col))) <= 1e-14 * std::max(scale, 1e-300)) {
      throw DomainError("singular matrix");
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(m(pivot, c), m(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const T p = T(1.0) / m(col, col);
    for (int c = 0; c < n; ++c) {
      m(col, c) = m(col, c) * p;
      inv(col, c) = inv(col, c) * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = m(r, col);
      if (scalar_value(f) == 0.0 && f == T(0.0)) continue;
      for (int c = 0; c < n; ++c) {
        m(r, c) -= f * m(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

/// True when `a` is symmetric (to `tol`, relative) and Cholesky succeeds.
inline bool is_spd(const Matrix<double>& a, double tol = 1e-10) {
  const int n = a.rows();
  if (a.cols() != n) return false;
  const double scale = std::max(1.0, max_abs(a));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
  Matrix<double> l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

struct EigenSystem {
  std::vector<double> values;  // ascending
  Matrix<double> vectors;      // column k belongs to values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal mass is below
/// `tol` times the Frobenius norm.
inline EigenSystem jacobi_eigen(const Matrix<double>& a, double tol = 1e-15, int max_sweeps = 100) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionError("eigenproblem of a non-square matrix");
  Matrix<double> m = a;
  Matrix<double> v = Matrix<double>::identity(n);
  double frob = 0.0;
  for (double x : m.data()) frob += x * x;
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (std::sqrt(off) <= tol * frob || off == 0.0) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return m(x, x) < m(y, y); });
  EigenSystem out{std::vector<double>(static_cast<std::size_t>(n)), Matrix<double>(n, n)};
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.values[static_cast<std::size_t>(k)] = m(src, src);
    for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, src);
  }
  return out;
}

}  // namespace ahlab
