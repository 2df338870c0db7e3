#pragma once

/// Dense point tensors in coordinates or orthonormal frames.
///
/// `Tensor<T>` stores dim^rank components row-major, with one variance flag
/// per slot. T is `double` for tensors at a point and `Jet<K>` for tensor
/// fields known to order K about a point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/jets.hpp"
#include "ahlab/linalg.hpp"

namespace ahlab {

enum class Variance : unsigned char { covariant, contravariant };

template <class T = double>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> variance, T fill = T(0.0)) : dim_(dim), variance_(std::move(variance)) {
    if (dim <= 0) throw DimensionError("tensor dimension must be positive");
    std::size_t size = 1;
    for (std::size_t k = 0; k < variance_.size(); ++k) size *= static_cast<std::size_t>(dim);
    data_.assign(size, fill);
  }

  static Tensor covariant(int dim, int rank, T fill = T(0.0)) {
    return Tensor(dim, std::vector<Variance>(static_cast<std::size_t>(rank), Variance::covariant), fill);
  }
  static Tensor scalar(T v) {
    Tensor t(1, {}, v);
    return t;
  }

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(variance_.size()); }
  Variance variance(int slot) const { return variance_.at(static_cast<std::size_t>(slot)); }
  const std::vector<Variance>& variances() const noexcept { return variance_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t stride(int slot) const {
    std::size_t s = 1;
    for (int k = slot + 1; k < rank(); ++k) s *= static_cast<std::size_t>(dim_);
    return s;
  }

  std::size_t flat(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw DimensionError("tensor index has wrong rank");
    std::size_t f = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim_) throw DimensionError("tensor index out of range");
      f = f * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    }
    return f;
  }

  T& operator()(std::initializer_list<int> idx) { return data_[flat({idx.begin(), idx.size()})]; }
  const T& operator()(std::initializer_list<int> idx) const { return data_[flat({idx.begin(), idx.size()})]; }
  T& operator[](std::size_t f) { return data_[f]; }
  const T& operator[](std::size_t f) const { return data_[f]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  /// Multi-index of flat position f.
  std::vector<int> unflatten(std::size_t f) const {
    std::vector<int> idx(variance_.size());
    for (int k = rank() - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(f % static_cast<std::size_t>(dim_));
      f /= static_cast<std::size_t>(dim_);
    }
    return idx;
  }

 private:
  int dim_ = 1;
  std::vector<Variance> variance_;
  std::vector<T> data_{T(0.0)};
};

/// Largest absolute component (of constant terms, for fields).
template <class T>
double max_abs(const Tensor<T>& t) {
  double m = 0.0;
  for (const T& v : t.data()) m = std::max(m, std::abs(scalar_value(v)));
  return m;
}

/// Largest absolute component-wise difference.
inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.size() != b.size()) throw DimensionError("tensor shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

template <class T>
Matrix<T> as_matrix(const Tensor<T>& t) {
  if (t.rank() != 2) throw DimensionError("matrix view requires rank 2");
  Matrix<T> m(t.dim(), t.dim());
  m.data() = t.data();
  return m;
}

template <class T>
Tensor<T> from_matrix(const Matrix<T>& m, std::vector<Variance> variance) {
  Tensor<T> t(m.rows(), std::move(variance));
  t.data() = m.data();
  return t;
}

namespace detail {

// Contracts slot `slot` of t with the first index of the dim x dim matrix m:
// out[..a..] = sum_i t[..i..] m(i, a).
template <class T, class M>
Tensor<T> transform_slot(const Tensor<T>& t, int slot, const Matrix<M>& m, Variance result) {
  auto var = t.variances();
  var[static_cast<std::size_t>(slot)] = result;
  Tensor<T> out(t.dim(), var);
  const std::size_t stride = t.stride(slot);
  const std::size_t n = static_cast<std::size_t>(t.dim());
  const std::size_t block = stride * n;
  for (std::size_t outer = 0; outer < t.size(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      for (std::size_t a = 0; a < n; ++a) {
        T acc = T(0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const auto& mia = m(static_cast<int>(i), static_cast<int>(a));
          if (scalar_value(mia) == 0.0 && mia == M(0.0)) continue;
          acc += t[outer + i * stride + inner] * mia;
        }
        out[outer + a * stride + inner] = acc;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Trace over two slots. Mixed-variance pairs are traced directly; two
/// covariant slots need the inverse metric, two contravariant slots the metric.
template <class T>
Tensor<T> contract(const Tensor<T>& t, int slot_a, int slot_b, const Tensor<T>* metric = nullptr) {
  if (slot_a == slot_b) throw DimensionError("contraction slots must differ");
  if (slot_a < 0 || slot_b < 0 || slot_a >= t.rank() || slot_b >= t.rank()) {
    throw DimensionError("contraction slot out of range");
  }
  if (slot_a > slot_b) std::swap(slot_a, slot_b);
  const Variance va = t.variance(slot_a);
  const Variance vb = t.variance(slot_b);
  const Tensor<T>* pairing = nullptr;
  if (va == vb) {
    if (metric == nullptr) {
      throw DimensionError(va == Variance::covariant ? "contraction of two covariant slots needs the inverse metric"
                                                     : "contraction of two contravariant slots needs the metric");
    }
    const Variance needed = va == Variance::covariant ? Variance::contravariant : Variance::covariant;
    if (metric->rank() != 2 || metric->variance(0) != needed || metric->variance(1) != needed ||
        metric->dim() != t.dim()) {
      throw DimensionError("contraction metric has the wrong variance or dimension");
    }
    pairing = metric;
  }

  std::vector<Variance> var;
  for (int k = 0; k < t.rank(); ++k)
    if (k != slot_a && k != slot_b) var.push_back(t.variance(k));
  Tensor<T> out(t.dim(), var);
  const int n = t.dim();
  std::vector<int> full(static_cast<std::size_t>(t.rank()));
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto rest = out.unflatten(f);
    for (int k = 0, r = 0; k < t.rank(); ++k)
      if (k != slot_a && k != slot_b) full[static_cast<std::size_t>(k)] = rest[static_cast<std::size_t>(r++)];
    T acc = T(0.0);
    for (int i = 0; i < n; ++i) {
      full[static_cast<std::size_t>(slot_a)] = i;
      if (pairing == nullptr) {
        full[static_cast<std::size_t>(slot_b)] = i;
        acc += t[t.flat(full)];
      } else {
        for (int j = 0; j < n; ++j) {
          full[static_cast<std::size_t>(slot_b)] = j;
          acc += (*pairing)({i, j}) * t[t.flat(full)];
        }
      }
    }
    out[f] = acc;
  }
  return out;
}

/// Raises a covariant slot with g^{-1} or lowers a contravariant slot with g.
/// `metric` must be the contravariant inverse metric to raise and the
/// covariant metric to lower; its scalar part must be SPD.
template <class T>
Tensor<T> raise_lower(const Tensor<T>& t, int slot, const Tensor<T>& metric) {
  if (slot < 0 || slot >= t.rank()) throw DimensionError("slot out of range");
  if (metric.rank() != 2 || metric.dim() != t.dim()) throw DimensionError("metric shape mismatch");
  const Variance v = t.variance(slot);
  const Variance needed = v == Variance::covariant ? Variance::contravariant : Variance::covariant;
  if (metric.variance(0) != needed || metric.variance(1) != needed) {
    throw DimensionError("metric variance does not match the slot being moved");
  }
  Matrix<double> scalar(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) scalar(i, j) = scalar_value(metric({i, j}));
  if (!is_spd(scalar)) throw DomainError("metric is not symmetric positive definite");
  return detail::transform_slot(t, slot, as_matrix(metric), needed);
}

/// Lowers every contravariant slot.
inline Tensor<double> lower_all(const Tensor<double>& t, const Tensor<double>& g) {
  Tensor<double> out = t;
  for (int s = 0; s < t.rank(); ++s)
    if (out.variance(s) == Variance::contravariant) out = raise_lower(out, s, g);
  return out;
}

/// Components T(e_a, e_b, ...) of a fully covariant tensor in the frame whose
/// vectors are the columns of `frame`.
inline Tensor<double> to_frame(const Tensor<double>& t, const Matrix<double>& frame) {
  Tensor<double> out = t;
  for (int s = 0; s < t.rank(); ++s) {
    if (t.variance(s) != Variance::covariant) throw DimensionError("to_frame expects covariant slots");
    out = detail::transform_slot(out, s, frame, Variance::covariant);
  }
  return out;
}

/// Constant terms of a jet-valued field.
template <int Order>
Tensor<double> evaluate(const Tensor<Jet<Order>>& t) {
  Tensor<double> out(t.dim(), t.variances());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k].value();
  return out;
}

/// Orthonormal frame with e_{m+i} = J e_i; columns of `vectors` are the frame
/// vectors in coordinate components.
struct AdaptedFrame {
  int m = 0;
  Matrix<double> vectors;

  int dim() const noexcept { return 2 * m; }
};

/// Checks J^2 = -I and g(J., J.) = g, both to `tol` relative to the scale of
/// g. `j` is the matrix J^i_j (column j is J applied to the j-th basis vector).
inline void validate_almost_hermitian(const Matrix<double>& g, const Matrix<double>& j, double tol = 1e-8) {
  const int n = g.rows();
  if (n % 2 != 0) throw GeometryError("almost Hermitian structure needs even dimension, got " + std::to_string(n));
  if (j.rows() != n || j.cols() != n || g.cols() != n) throw DimensionError("g and J shapes differ");
  if (!is_spd(g)) throw GeometryError("metric is not symmetric positive definite");
  const double jsq = max_abs(j * j + Matrix<double>::identity(n));
  if (jsq > tol * std::max(1.0, max_abs(j) * max_abs(j))) {
    throw GeometryError("J is not almost complex: |J^2 + I| = " + std::to_string(jsq));
  }
  const double compat = max_abs(j.transposed() * g * j - g);
  if (compat > tol * std::max(1.0, max_abs(g)) * std::max(1.0, max_abs(j) * max_abs(j))) {
    throw GeometryError("g is not J-compatible: |J^T g J - g| = " + std::to_string(compat));
  }
}

/// Greedy Gram-Schmidt over J-invariant planes. The seed for each new plane is
/// the first coordinate direction whose component orthogonal to the planes
/// already built exceeds 1e-6 of its length.
inline AdaptedFrame adapted_frame(const Matrix<double>& g, const Matrix<double>& j) {
  validate_almost_hermitian(g, j);
  const int n = g.rows();
  const int m = n / 2;
  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s += a[static_cast<std::size_t>(r)] * g(r, c) * b[static_cast<std::size_t>(c)];
    return s;
  };
  auto apply_j = [&](const std::vector<double>& v) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) w[static_cast<std::size_t>(r)] += j(r, c) * v[static_cast<std::size_t>(c)];
    return w;
  };
  auto project_out = [&](std::vector<double> v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) {
        const double c = inner(v, u);
        for (int r = 0; r < n; ++r) v[static_cast<std::size_t>(r)] -= c * u[static_cast<std::size_t>(r)];
      }
    }
    return v;
  };

  std::vector<std::vector<double>> built;
  AdaptedFrame frame{m, Matrix<double>(n, n)};
  int next_seed = 0;
  for (int k = 0; k < m; ++k) {
    std::vector<double> e;
    for (; next_seed < n; ++next_seed) {
      std::vector<double> seed(static_cast<std::size_t>(n), 0.0);
      seed[static_cast<std::size_t>(next_seed)] = 1.0;
      const double len = std::sqrt(inner(seed, seed));
      std::vector<double> w = project_out(seed, built);
      const double wl = std::sqrt(std::max(0.0, inner(w, w)));
      if (wl > 1e-6 * len) {
        for (double& x : w) x /= wl;
        e = std::move(w);
        ++next_seed;
        break;
      }
    }
    if (e.empty()) throw GeometryError("could not complete an adapted frame");
    built.push_back(e);
    std::vector<double> je = project_out(apply_j(e), built);
    const double jl = std::sqrt(inner(je, je));
    if (std::abs(jl - 1.0) > 1e-6) throw GeometryError("J e is not a unit vector orthogonal to the frame");
    for (double& x : je) x /= jl;
    built.push_back(je);
    frame.vectors.set_column(k, e);
    frame.vectors.set_column(m + k, je);
  }
  return frame;
}

}  // namespace ahlab
