#pragma once

/// Truncated multivariate Taylor arithmetic.
///
/// A `Jet<Order>` in n variables holds every Taylor coefficient
/// f^(alpha)(p) / alpha! with |alpha| <= Order of a scalar function about a
/// point p. Arithmetic is closed under truncation, so evaluating an expression
/// on jets seeded with `Jet::variable` yields all of its partial derivatives up
/// to `Order` at once, exactly up to rounding.
///
/// Coefficients are stored densely over a graded monomial basis (degree 0
/// first, then degree 1, ...). The ordering within a degree does not depend on
/// the truncation order, so the basis of order K is a prefix of the basis of
/// order K + 1 and truncation is a resize.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ahlab/error.hpp"

namespace ahlab {

inline constexpr int kMaxVariables = 8;
inline constexpr int kMaxJetOrder = 5;
inline constexpr int kChartJetOrder = 4;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int n) : n_(n) {
    if (n < 0 || n > kMaxVariables) {
      throw DimensionError("multi-index dimension " + std::to_string(n) +
                           " outside [0, " + std::to_string(kMaxVariables) + "]");
    }
  }
  MultiIndex(std::initializer_list<int> exponents) : MultiIndex(static_cast<int>(exponents.size())) {
    int i = 0;
    for (int e : exponents) set(i++, e);
  }

  int size() const noexcept { return n_; }
  int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
  void set(int i, int value) {
    if (i < 0 || i >= n_) throw DimensionError("multi-index slot out of range");
    if (value < 0 || value > 255) throw DimensionError("multi-index exponent out of range");
    e_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value);
  }

  int degree() const noexcept {
    int d = 0;
    for (int i = 0; i < n_; ++i) d += e_[static_cast<std::size_t>(i)];
    return d;
  }

  /// alpha! = prod alpha_i!
  double factorial() const noexcept {
    double f = 1.0;
    for (int i = 0; i < n_; ++i) {
      for (int k = 2; k <= e_[static_cast<std::size_t>(i)]; ++k) f *= k;
    }
    return f;
  }

  std::uint64_t key() const noexcept {
    std::uint64_t k = 0;
    for (int i = 0; i < n_; ++i) k |= std::uint64_t{e_[static_cast<std::size_t>(i)]} << (8 * i);
    return k;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.n_ == b.n_ && a.key() == b.key();
  }

 private:
  int n_ = 0;
  std::array<std::uint8_t, kMaxVariables> e_{};
};

/// Graded basis of monomials of degree <= order in n variables, with the
/// product and shift tables used by jet arithmetic. Instances are immutable
/// and cached for the lifetime of the program.
class MonomialBasis {
 public:
  struct Product {
    int left;
    int right;
    int out;
  };

  static const MonomialBasis& get(int n, int order) {
    if (n < 0 || n > kMaxVariables) {
      throw DimensionError("jet dimension " + std::to_string(n) + " outside [0, " +
                           std::to_string(kMaxVariables) + "]");
    }
    if (order < 0 || order > kMaxJetOrder) throw DimensionError("jet order out of range");
    static std::array<std::array<std::once_flag, kMaxJetOrder + 1>, kMaxVariables + 1> flags;
    static std::array<std::array<std::unique_ptr<MonomialBasis>, kMaxJetOrder + 1>, kMaxVariables + 1>
        cache;
    auto nn = static_cast<std::size_t>(n);
    auto oo = static_cast<std::size_t>(order);
    std::call_once(flags[nn][oo], [&] { cache[nn][oo].reset(new MonomialBasis(n, order)); });
    return *cache[nn][oo];
  }

  /// Number of monomials of degree <= order, i.e. C(n + order, order).
  static int count(int n, int order) {
    long long c = 1;
    for (int k = 1; k <= order; ++k) c = c * (n + k) / k;
    return static_cast<int>(c);
  }

  int variables() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  int size() const noexcept { return static_cast<int>(terms_.size()); }
  const MultiIndex& term(int k) const { return terms_[static_cast<std::size_t>(k)]; }
  double factorial(int k) const { return factorials_[static_cast<std::size_t>(k)]; }
  std::span<const Product> products() const noexcept { return products_; }

  /// Index of `alpha` in this basis, or -1 if its degree exceeds the order.
  int index_of(const MultiIndex& alpha) const {
    if (alpha.size() != n_) throw DimensionError("multi-index dimension mismatch");
    auto it = index_.find(alpha.key());
    return it == index_.end() ? -1 : it->second;
  }

  /// Index of term k + e_i, or -1 when that exceeds the order.
  int shifted(int i, int k) const {
    return shift_[static_cast<std::size_t>(i) * terms_.size() + static_cast<std::size_t>(k)];
  }

 private:
  MonomialBasis(int n, int order) : n_(n), order_(order) {
    for (int d = 0; d <= order; ++d) {
      MultiIndex alpha(n);
      emit_degree(alpha, 0, d);
    }
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      index_.emplace(terms_[k].key(), static_cast<int>(k));
      factorials_.push_back(terms_[k].factorial());
    }
    const int size = static_cast<int>(terms_.size());
    for (int a = 0; a < size; ++a) {
      for (int b = 0; b < size; ++b) {
        if (terms_[a].degree() + terms_[b].degree() > order) continue;
        MultiIndex sum(n);
        for (int i = 0; i < n; ++i) sum.set(i, terms_[a][i] + terms_[b][i]);
        products_.push_back({a, b, index_.at(sum.key())});
      }
    }
    shift_.assign(static_cast<std::size_t>(n) * terms_.size(), -1);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < size; ++k) {
        if (terms_[k].degree() + 1 > order) continue;
        MultiIndex up = terms_[k];
        up.set(i, up[i] + 1);
        shift_[static_cast<std::size_t>(i) * terms_.size() + k] = index_.at(up.key());
      }
    }
  }

  // Exponents of slot `slot` onward must sum to `remaining`; earlier slots get
  // larger exponents first, so x0^2 precedes x0 x1 precedes x1^2.
  void emit_degree(MultiIndex& alpha, int slot, int remaining) {
    if (slot == n_ - 1 || n_ == 0) {
      if (n_ == 0) {
        if (remaining == 0) terms_.push_back(alpha);
        return;
      }
      alpha.set(slot, remaining);
      terms_.push_back(alpha);
      alpha.set(slot, 0);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      alpha.set(slot, e);
      emit_degree(alpha, slot + 1, remaining - e);
    }
    alpha.set(slot, 0);
  }

  int n_;
  int order_;
  std::vector<MultiIndex> terms_;
  std::vector<double> factorials_;
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<Product> products_;
  std::vector<int> shift_;
};

/// Truncated Taylor expansion of a scalar about a point.
///
/// A jet with zero variables is a plain constant and combines with jets of any
/// dimension; all other mixed-dimension arithmetic throws DimensionError.
template <int Order>
class Jet {
  static_assert(Order >= 0 && Order <= kMaxJetOrder);

 public:
  static constexpr int order = Order;

  Jet() : basis_(&MonomialBasis::get(0, Order)), c_(1, 0.0) {}
  Jet(double value) : basis_(&MonomialBasis::get(0, Order)), c_(1, value) {}  // NOLINT

  static Jet constant(int n, double value) {
    Jet j(MonomialBasis::get(n, Order));
    j.c_[0] = value;
    return j;
  }

  /// The coordinate function x_i about a point whose i-th coordinate is `value`.
  static Jet variable(int n, int i, double value) {
    if (i < 0 || i >= n) {
      throw DimensionError("jet variable index " + std::to_string(i) + " outside [0, " +
                           std::to_string(n) + ")");
    }
    Jet j = constant(n, value);
    if (Order >= 1) j.c_[static_cast<std::size_t>(1 + i)] = 1.0;
    return j;
  }

  /// Builds a jet from raw Taylor coefficients laid out in basis order.
  static Jet from_coefficients(int n, std::vector<double> coeffs) {
    Jet j(MonomialBasis::get(n, Order));
    if (coeffs.size() != j.c_.size()) throw DimensionError("coefficient count does not match basis");
    j.c_ = std::move(coeffs);
    return j;
  }

  int variables() const noexcept { return basis_->variables(); }
  const MonomialBasis& basis() const noexcept { return *basis_; }
  double value() const noexcept { return c_[0]; }
  std::span<const double> coefficients() const noexcept { return c_; }
  std::span<double> coefficients() noexcept { return c_; }

  /// Taylor coefficient of x^alpha.
  double coeff(const MultiIndex& alpha) const {
    check_degree(alpha);
    return c_[static_cast<std::size_t>(basis_->index_of(alpha))];
  }

  /// The mixed partial derivative d^alpha f at the expansion point.
  double derivative(const MultiIndex& alpha) const {
    check_degree(alpha);
    const int k = basis_->index_of(alpha);
    return c_[static_cast<std::size_t>(k)] * basis_->factorial(k);
  }

  Jet operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
  }

  Jet& operator+=(const Jet& b) {
    if (b.variables() == 0) {
      c_[0] += b.c_[0];
      return *this;
    }
    if (variables() == 0) {
      const double v = c_[0];
      *this = b;
      c_[0] += v;
      return *this;
    }
    require_same(b);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += b.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& b) { return *this += -b; }

  Jet& operator*=(const Jet& b) {
    *this = *this * b;
    return *this;
  }
  Jet& operator/=(const Jet& b) {
    *this = *this / b;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.variables() == 0) return b.scaled(a.c_[0]);
    if (b.variables() == 0) return a.scaled(b.c_[0]);
    a.require_same(b);
    Jet r(*a.basis_);
    const double* pa = a.c_.data();
    const double* pb = b.c_.data();
    double* pr = r.c_.data();
    for (const auto& p : a.basis_->products()) pr[p.out] += pa[p.left] * pb[p.right];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.variables() == 0) {
      if (b.c_[0] == 0.0) throw DomainError("division by a jet with zero constant term");
      return a.scaled(1.0 / b.c_[0]);
    }
    return a * reciprocal(b);
  }

  friend Jet reciprocal(const Jet& b) {
    const double b0 = b.c_[0];
    if (b0 == 0.0) throw DomainError("division by a jet with zero constant term");
    std::array<double, Order + 1> t{};
    double inv = 1.0 / b0;
    double term = inv;
    for (int k = 0; k <= Order; ++k) {
      t[static_cast<std::size_t>(k)] = term;
      term *= -inv;
    }
    return compose(b, t);
  }

  /// sum_k t[k] (a - a0)^k, i.e. the composition f(a) where t holds the
  /// univariate Taylor coefficients of f about a0 = a.value().
  friend Jet compose(const Jet& a, const std::array<double, Order + 1>& t) {
    if (a.variables() == 0) return Jet(t[0]);
    Jet h = a;
    h.c_[0] = 0.0;
    Jet r = Jet::constant(a.variables(), t[Order]);
    for (int k = Order - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += t[static_cast<std::size_t>(k)];
    }
    return r;
  }

  friend bool operator==(const Jet& a, const Jet& b) {
    return a.variables() == b.variables() && a.c_ == b.c_;
  }

 private:
  template <int>
  friend class Jet;

  explicit Jet(const MonomialBasis& basis)
      : basis_(&basis), c_(static_cast<std::size_t>(basis.size()), 0.0) {}

  Jet scaled(double s) const {
    Jet r = *this;
    for (double& v : r.c_) v *= s;
    return r;
  }

  void require_same(const Jet& b) const {
    if (variables() != b.variables()) {
      throw DimensionError("jet dimension mismatch: " + std::to_string(variables()) + " vs " +
                           std::to_string(b.variables()));
    }
  }

  void check_degree(const MultiIndex& alpha) const {
    if (alpha.size() != variables()) throw DimensionError("multi-index dimension mismatch");
    if (alpha.degree() > Order) {
      throw DimensionError("derivative of degree " + std::to_string(alpha.degree()) +
                           " exceeds jet order " + std::to_string(Order));
    }
  }

  const MonomialBasis* basis_;
  std::vector<double> c_;
};

namespace detail {

template <int Order>
std::array<double, Order + 1> divide_by_factorials(std::array<double, Order + 1> d) {
  double f = 1.0;
  for (int k = 1; k <= Order; ++k) {
    f *= k;
    d[static_cast<std::size_t>(k)] /= f;
  }
  return d;
}

// Generalized binomial coefficients times a0^(r-k): Taylor series of x^r.
template <int Order>
std::array<double, Order + 1> power_series(double a0, double r) {
  std::array<double, Order + 1> t{};
  double binom = 1.0;
  for (int k = 0; k <= Order; ++k) {
    t[static_cast<std::size_t>(k)] = binom * std::pow(a0, r - k);
    binom *= (r - k) / (k + 1);
  }
  return t;
}

}  // namespace detail

template <int Order>
Jet<Order> exp(const Jet<Order>& a) {
  std::array<double, Order + 1> d{};
  d.fill(std::exp(a.value()));
  return compose(a, detail::divide_by_factorials<Order>(d));
}

template <int Order>
Jet<Order> sin(const Jet<Order>& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cycle{s, c, -s, -c};
  std::array<double, Order + 1> d{};
  for (int k = 0; k <= Order; ++k) d[static_cast<std::size_t>(k)] = cycle[static_cast<std::size_t>(k % 4)];
  return compose(a, detail::divide_by_factorials<Order>(d));
}

template <int Order>
Jet<Order> cos(const Jet<Order>& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cycle{c, -s, -c, s};
  std::array<double, Order + 1> d{};
  for (int k = 0; k <= Order; ++k) d[static_cast<std::size_t>(k)] = cycle[static_cast<std::size_t>(k % 4)];
  return compose(a, detail::divide_by_factorials<Order>(d));
}

template <int Order>
Jet<Order> log(const Jet<Order>& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("log of non-positive value " + std::to_string(a0));
  std::array<double, Order + 1> t{};
  t[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= Order; ++k) {
    p *= a0;
    t[static_cast<std::size_t>(k)] = ((k % 2 == 1) ? 1.0 : -1.0) / (k * p);
  }
  return compose(a, t);
}

/// a^r for a real exponent; requires a positive constant term.
template <int Order>
Jet<Order> pow(const Jet<Order>& a, double r) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) {
    throw DomainError("non-integer power of non-positive value " + std::to_string(a0));
  }
  return compose(a, detail::power_series<Order>(a0, r));
}

template <int Order>
Jet<Order> sqrt(const Jet<Order>& a) {
  if (!(a.value() > 0.0)) throw DomainError("sqrt of non-positive value " + std::to_string(a.value()));
  return pow(a, 0.5);
}

/// Integer power by repeated squaring; negative exponents go through the
/// reciprocal.
template <int Order>
Jet<Order> ipow(const Jet<Order>& a, long long k) {
  if (k < 0) return ipow(reciprocal(a), -k);
  Jet<Order> result = Jet<Order>::constant(a.variables(), 1.0);
  Jet<Order> base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

/// d/dx_i of a jet; one order of accuracy is consumed.
template <int Order>
Jet<Order - 1> partial(const Jet<Order>& a, int i) {
  static_assert(Order >= 1);
  const int n = a.variables();
  if (n == 0) return Jet<Order - 1>(0.0);
  if (i < 0 || i >= n) throw DimensionError("partial derivative index out of range");
  const MonomialBasis& in = a.basis();
  const auto& out = MonomialBasis::get(n, Order - 1);
  std::vector<double> c(static_cast<std::size_t>(out.size()), 0.0);
  auto src = a.coefficients();
  for (int k = 0; k < out.size(); ++k) {
    c[static_cast<std::size_t>(k)] =
        (out.term(k)[i] + 1) * src[static_cast<std::size_t>(in.shifted(i, k))];
  }
  return Jet<Order - 1>::from_coefficients(n, std::move(c));
}

/// Drops all coefficients above degree `To`.
template <int To, int From>
Jet<To> truncate(const Jet<From>& a) {
  static_assert(To <= From);
  if constexpr (To == From) {
    return a;
  } else {
    const int n = a.variables();
    if (n == 0) return Jet<To>(a.value());
    auto src = a.coefficients();
    const auto size = static_cast<std::size_t>(MonomialBasis::count(n, To));
    return Jet<To>::from_coefficients(n, std::vector<double>(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(size)));
  }
}

}  // namespace ahlab
