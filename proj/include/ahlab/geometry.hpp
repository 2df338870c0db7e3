#pragma once

/// Charts and the curvature pipeline.
///
/// Every quantity is computed in coordinates as a jet-valued field about the
/// evaluation point p, so each covariant derivative consumes one jet order:
/// g (order 4) -> Gamma (3) -> R, S, tau, S' (2) -> nabla S, nabla R (1)
/// -> nabla nabla S (0). Values at p are then converted to components in an
/// adapted orthonormal frame. No frame field is ever differentiated.
///
/// Conventions:
///   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
///   R(X,Y,Z,U) = g(R(X,Y)Z, U), sectional curvature R(X,Y,Y,X)
///   S(Y,Z) = sum_i R(E_i,Y,Z,E_i), tau = sum_i S(E_i,E_i)
///   S'(X,Y) = sum_i R(X,E_i,JE_i,JY)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/expr.hpp"
#include "ahlab/jets.hpp"
#include "ahlab/linalg.hpp"
#include "ahlab/tensor.hpp"

namespace ahlab {

struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Bilinear product table on R^N: (u x v)_k = sum_ij table[(i*N + j)*N + k] u_i v_j.
struct AmbientProduct {
  struct Triple {
    int i, j, k, sign;  // 0-based; e_i x e_j = sign * e_k
  };

  std::string name;  // built-in table name, empty for inline triples
  int dim = 0;
  std::vector<Triple> triples;
  std::vector<double> table;

  double operator()(int i, int j, int k) const {
    return table[(static_cast<std::size_t>(i) * dim + j) * dim + k];
  }

  /// Completes each triple cyclically and antisymmetrically.
  static AmbientProduct from_triples(int dim, std::vector<Triple> triples, std::string name = {}) {
    AmbientProduct p{std::move(name), dim, std::move(triples), {}};
    p.table.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
    auto put = [&](int a, int b, int c, double s) {
      if (a < 0 || b < 0 || c < 0 || a >= dim || b >= dim || c >= dim) {
        throw DimensionError("ambient product index out of range");
      }
      p.table[(static_cast<std::size_t>(a) * dim + b) * dim + c] = s;
    };
    for (const auto& t : p.triples) {
      const double s = t.sign;
      put(t.i, t.j, t.k, s);
      put(t.j, t.k, t.i, s);
      put(t.k, t.i, t.j, s);
      put(t.j, t.i, t.k, -s);
      put(t.k, t.j, t.i, -s);
      put(t.i, t.k, t.j, -s);
    }
    return p;
  }

  /// Imaginary-octonion cross product on R^7 with the Fano-plane lines
  /// 123, 145, 176, 246, 257, 347, 365 (1-based).
  static AmbientProduct octonion() {
    const std::vector<std::array<int, 3>> lines = {{1, 2, 3}, {1, 4, 5}, {1, 7, 6}, {2, 4, 6},
                                                   {2, 5, 7}, {3, 4, 7}, {3, 6, 5}};
    std::vector<Triple> t;
    for (const auto& l : lines) t.push_back({l[0] - 1, l[1] - 1, l[2] - 1, 1});
    return from_triples(7, std::move(t), "octonion");
  }

  static AmbientProduct builtin(const std::string& name) {
    if (name == "octonion") return octonion();
    throw DomainError("unknown ambient product table '" + name + "'");
  }
};

/// g and J given directly by expressions. Row-major n x n:
/// metric[i*n+j] = g_ij, complex_structure[i*n+j] = J^i_j (component i of J d_j).
struct DirectPresentation {
  std::vector<Expr> metric;
  std::vector<Expr> complex_structure;
};

/// A map phi into Euclidean R^N; g is the pullback and J v = P(phi, v)
/// projected back onto the chart.
struct EmbeddedPresentation {
  int ambient_dim = 0;
  std::vector<Expr> map;
  AmbientProduct product;
};

struct Chart {
  std::string name;
  int dim = 0;
  std::variant<DirectPresentation, EmbeddedPresentation> presentation;
  Bindings params;
  DomainBox domain;

  bool is_direct() const noexcept { return std::holds_alternative<DirectPresentation>(presentation); }
  const DirectPresentation& direct() const { return std::get<DirectPresentation>(presentation); }
  const EmbeddedPresentation& embedded() const { return std::get<EmbeddedPresentation>(presentation); }
};

/// Structural checks that need no evaluation point.
inline void validate_structure(const Chart& chart) {
  const int n = chart.dim;
  if (n <= 0 || n % 2 != 0) throw GeometryError("chart dimension must be even and positive, got " + std::to_string(n));
  if (n > kMaxVariables) throw DimensionError("chart dimension exceeds " + std::to_string(kMaxVariables));
  const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (chart.is_direct()) {
    if (chart.direct().metric.size() != nn || chart.direct().complex_structure.size() != nn) {
      throw DimensionError("direct chart needs n x n metric and J");
    }
  } else {
    const auto& e = chart.embedded();
    if (e.ambient_dim <= 0 || e.map.size() != static_cast<std::size_t>(e.ambient_dim) || e.product.dim != e.ambient_dim) {
      throw DimensionError("embedding map and ambient product must match ambient_dim");
    }
  }
  if (chart.domain.lo.size() != static_cast<std::size_t>(n) || chart.domain.hi.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("domain box must have one interval per coordinate");
  }
  for (int i = 0; i < n; ++i) {
    if (!(chart.domain.lo[static_cast<std::size_t>(i)] <= chart.domain.hi[static_cast<std::size_t>(i)])) {
      throw DomainError("domain box has lo > hi");
    }
  }
}

template <int K>
using JetField = Tensor<Jet<K>>;

/// g and J about p as order-4 fields. J has slots (input, output):
/// J[b][c] = J^c_b.
struct ChartFields {
  JetField<4> metric;
  JetField<4> complex_structure;
};

namespace detail {

inline std::vector<Variance> slots(std::initializer_list<Variance> v) { return v; }
constexpr Variance co = Variance::covariant;
constexpr Variance contra = Variance::contravariant;

inline Matrix<double> value_matrix(const JetField<4>& t) {
  Matrix<double> m(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) m(i, j) = t({i, j}).value();
  return m;
}

inline void check_point(const Chart& chart, std::span<const double> p) {
  if (static_cast<int>(p.size()) != chart.dim) {
    throw DimensionError("point has " + std::to_string(p.size()) + " coordinates, chart dimension is " +
                         std::to_string(chart.dim));
  }
}

}  // namespace detail

inline ChartFields chart_fields(const Chart& chart, std::span<const double> p) {
  validate_structure(chart);
  detail::check_point(chart, p);
  const int n = chart.dim;
  using detail::co;
  using detail::contra;
  ChartFields f{JetField<4>(n, {co, co}), JetField<4>(n, {co, contra})};

  if (chart.is_direct()) {
    const auto& d = chart.direct();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto ij = static_cast<std::size_t>(i * n + j);
        f.metric({i, j}) = eval_jet<4>(d.metric[ij], p, chart.params);
        // J^i_j goes to slot (in = j, out = i).
        f.complex_structure({j, i}) = eval_jet<4>(d.complex_structure[ij], p, chart.params);
      }
    }
    const Matrix<double> g = detail::value_matrix(f.metric);
    const double scale = std::max(1.0, max_abs(g));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(g(i, j) - g(j, i)) > 1e-10 * scale) {
          throw GeometryError("metric is not symmetric at g[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]");
        }
  } else {
    const auto& e = chart.embedded();
    const int big = e.ambient_dim;
    std::vector<Jet<4>> phi;
    std::vector<std::vector<Jet<4>>> dphi(static_cast<std::size_t>(big));
    for (int k = 0; k < big; ++k) {
      const Jet<5> full = eval_jet<5>(e.map[static_cast<std::size_t>(k)], p, chart.params);
      phi.push_back(truncate<4>(full));
      for (int a = 0; a < n; ++a) dphi[static_cast<std::size_t>(k)].push_back(partial(full, a));
    }
    auto d = [&](int k, int a) -> const Jet<4>& { return dphi[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)]; };
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) {
        Jet<4> s = Jet<4>::constant(n, 0.0);
        for (int k = 0; k < big; ++k) s += d(k, a) * d(k, b);
        f.metric({a, b}) = s;
        f.metric({b, a}) = s;
      }
    Matrix<Jet<4>> gmat(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) gmat(a, b) = f.metric({a, b});
    Matrix<Jet<4>> ginv;
    try {
      ginv = inverse(gmat);
    } catch (const DomainError&) {
      throw GeometryError("embedding differential is not injective at the point");
    }
    // w_b = P(phi, d_b phi) in R^N
    std::vector<std::vector<Jet<4>>> w(static_cast<std::size_t>(big), std::vector<Jet<4>>(static_cast<std::size_t>(n)));
    for (int k = 0; k < big; ++k)
      for (int b = 0; b < n; ++b) {
        Jet<4> s = Jet<4>::constant(n, 0.0);
        for (int i = 0; i < big; ++i)
          for (int j = 0; j < big; ++j) {
            const double pijk = e.product(i, j, k);
            if (pijk != 0.0) s += (phi[static_cast<std::size_t>(i)] * d(j, b)) * pijk;
          }
        w[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = s;
      }
    for (int b = 0; b < n; ++b) {
      std::vector<Jet<4>> proj(static_cast<std::size_t>(n), Jet<4>::constant(n, 0.0));
      for (int c = 0; c < n; ++c)
        for (int k = 0; k < big; ++k) proj[static_cast<std::size_t>(c)] += d(k, c) * w[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
      for (int a = 0; a < n; ++a) {
        Jet<4> s = Jet<4>::constant(n, 0.0);
        for (int c = 0; c < n; ++c) s += ginv(a, c) * proj[static_cast<std::size_t>(c)];
        f.complex_structure({b, a}) = s;
      }
    }
    // The ambient product must map the tangent space into itself.
    double residual = 0.0;
    double scale = 1.0;
    for (int k = 0; k < big; ++k)
      for (int b = 0; b < n; ++b) {
        double tangent = 0.0;
        for (int a = 0; a < n; ++a) tangent += d(k, a).value() * f.complex_structure({b, a}).value();
        const double wv = w[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)].value();
        residual = std::max(residual, std::abs(wv - tangent));
        scale = std::max(scale, std::abs(wv));
      }
    if (residual > 1e-8 * scale) {
      throw GeometryError("ambient product does not preserve the tangent space (residual " + std::to_string(residual) + ")");
    }
  }

  Matrix<double> jmat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jmat(i, j) = f.complex_structure({j, i}).value();
  validate_almost_hermitian(detail::value_matrix(f.metric), jmat);
  return f;
}

/// Covariant derivative of a jet field. The new derivative slot is slot 0:
/// out[a, I] = d_a t[I] - sum over covariant slots of Gamma^e_{a i_s} t[..e..]
///                      + sum over contravariant slots of Gamma^{i_s}_{a e} t[..e..].
/// `gamma` holds Gamma^k_ij at index (k, i, j).
template <int K, int G>
JetField<K - 1> covariant_derivative(const JetField<K>& t, const JetField<G>& gamma) {
  static_assert(K >= 1 && G >= K - 1);
  const int n = t.dim();
  std::vector<Variance> var{Variance::covariant};
  var.insert(var.end(), t.variances().begin(), t.variances().end());
  JetField<K - 1> out(n, var);

  std::vector<Jet<K - 1>> low;
  low.reserve(t.size());
  for (const auto& v : t.data()) low.push_back(truncate<K - 1>(v));
  std::vector<Jet<K - 1>> gam;
  std::vector<char> gzero;
  for (const auto& v : gamma.data()) {
    gam.push_back(truncate<K - 1>(v));
    const auto c = gam.back().coefficients();
    gzero.push_back(std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; }) ? 1 : 0);
  }
  const auto nn = static_cast<std::size_t>(n);
  auto gidx = [nn](std::size_t k, std::size_t i, std::size_t j) { return (k * nn + i) * nn + j; };

  const int r = t.rank();
  std::vector<std::size_t> strides(static_cast<std::size_t>(r));
  for (int s = 0; s < r; ++s) strides[static_cast<std::size_t>(s)] = t.stride(s);

  for (std::size_t a = 0; a < nn; ++a) {
    for (std::size_t f = 0; f < t.size(); ++f) {
      Jet<K - 1> acc = partial(t[f], static_cast<int>(a));
      std::size_t rem = f;
      for (int s = 0; s < r; ++s) {
        const std::size_t st = strides[static_cast<std::size_t>(s)];
        const std::size_t is = (rem / st);
        rem %= st;
        const std::size_t base = f - is * st;
        for (std::size_t e = 0; e < nn; ++e) {
          const Jet<K - 1>& tv = low[base + e * st];
          if (t.variance(s) == Variance::covariant) {
            const std::size_t gi = gidx(e, a, is);
            if (!gzero[gi]) acc -= gam[gi] * tv;
          } else {
            const std::size_t gi = gidx(is, a, e);
            if (!gzero[gi]) acc += gam[gi] * tv;
          }
        }
      }
      out[a * t.size() + f] = std::move(acc);
    }
  }
  return out;
}

namespace detail {

struct Connection {
  JetField<4> metric;
  JetField<4> inverse_metric;
  JetField<3> christoffel;
};

inline Connection connection(const JetField<4>& g) {
  const int n = g.dim();
  Matrix<Jet<4>> gm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gm(i, j) = g({i, j});
  Matrix<Jet<4>> gi;
  try {
    gi = inverse(gm);
  } catch (const DomainError&) {
    throw DomainError("singular metric");
  }
  Connection c{g, JetField<4>(n, {contra, contra}), JetField<3>(n, {contra, co, co})};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.inverse_metric({i, j}) = gi(i, j);

  // dg[(a*n + i)*n + j] = d_a g_ij
  std::vector<Jet<3>> dg;
  dg.reserve(static_cast<std::size_t>(n * n * n));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg.push_back(partial(g({i, j}), a));
  auto D = [&](int a, int i, int j) -> const Jet<3>& { return dg[static_cast<std::size_t>((a * n + i) * n + j)]; };

  std::vector<Jet<3>> gi3;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) gi3.push_back(truncate<3>(gi(k, l)));

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::vector<Jet<3>> lowered;
      for (int l = 0; l < n; ++l) lowered.push_back((D(i, j, l) + D(j, i, l) - D(l, i, j)) * 0.5);
      for (int k = 0; k < n; ++k) {
        Jet<3> s = Jet<3>::constant(n, 0.0);
        for (int l = 0; l < n; ++l) s += gi3[static_cast<std::size_t>(k * n + l)] * lowered[static_cast<std::size_t>(l)];
        c.christoffel({k, i, j}) = s;
        c.christoffel({k, j, i}) = s;
      }
    }
  return c;
}

// R(d_a, d_b, d_c, d_u) as an order-2 field.
inline JetField<2> riemann_field(const Connection& c) {
  const int n = c.metric.dim();
  const auto& gam3 = c.christoffel;
  std::vector<Jet<2>> gam;
  for (const auto& v : gam3.data()) gam.push_back(truncate<2>(v));
  auto G = [&](int k, int i, int j) -> const Jet<2>& { return gam[static_cast<std::size_t>((k * n + i) * n + j)]; };
  // dG[a][k][i][j] = d_a Gamma^k_ij
  std::vector<Jet<2>> dgam;
  for (int a = 0; a < n; ++a)
    for (const auto& v : gam3.data()) dgam.push_back(partial(v, a));
  auto DG = [&](int a, int k, int i, int j) -> const Jet<2>& {
    return dgam[static_cast<std::size_t>(((a * n + k) * n + i) * n + j)];
  };

  // R^d_{c a b} = d_a G^d_bc - d_b G^d_ac + G^d_ae G^e_bc - G^d_be G^e_ac
  JetField<2> up(n, {contra, co, co, co});
  for (int d = 0; d < n; ++d)
    for (int cc = 0; cc < n; ++cc)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          Jet<2> s = DG(a, d, b, cc) - DG(b, d, a, cc);
          for (int e = 0; e < n; ++e) s += G(d, a, e) * G(e, b, cc) - G(d, b, e) * G(e, a, cc);
          up({d, cc, a, b}) = s;
          up({d, cc, b, a}) = -s;
        }

  JetField<2> low = JetField<2>::covariant(n, 4);
  std::vector<Jet<2>> g2;
  for (const auto& v : c.metric.data()) g2.push_back(truncate<2>(v));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int u = 0; u < n; ++u) {
          Jet<2> s = Jet<2>::constant(n, 0.0);
          for (int d = 0; d < n; ++d) s += g2[static_cast<std::size_t>(u * n + d)] * up({d, cc, a, b});
          low({a, b, cc, u}) = s;
        }
  return low;
}

template <int K, int From>
JetField<K> truncated(const JetField<From>& t) {
  JetField<K> out(t.dim(), t.variances());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = truncate<K>(t[k]);
  return out;
}

}  // namespace detail

/// Gamma^k_ij at p, stored at index (k, i, j).
inline Tensor<double> christoffel(const Chart& chart, std::span<const double> p) {
  const auto f = chart_fields(chart, p);
  return evaluate(detail::connection(f.metric).christoffel);
}

/// Fully covariant components in an orthonormal adapted frame. In such a
/// frame raising and lowering are trivial, so (1,1) tensors Q appear as
/// Q(a,b) = g(Q e_a, e_b).
struct FrameComponents {
  int dim = 0;
  Tensor<double> J;          // g(J e_a, e_b)
  Tensor<double> R;          // R(e_a, e_b, e_c, e_d)
  Tensor<double> S;          // Ricci
  double tau = 0.0;
  Tensor<double> C;          // Weyl
  Tensor<double> Sprime;     // S'
  Tensor<double> DJ;         // g((nabla_a J) e_b, e_c)
  Tensor<double> K;          // g(K(e_a, e_b), e_c)
  Tensor<double> DS;         // (nabla_a S)(e_b, e_c)
  Tensor<double> DDS;        // (nabla_a (nabla_b S))(e_c, e_d)
  Tensor<double> DDJ;        // g((nabla_a (nabla_b J)) e_c, e_d)
  Tensor<double> DR;         // (nabla_a R)(e_b, ..., e_e)
  Tensor<double> DSprime;    // (nabla_a S')(e_b, e_c)
  Tensor<double> dtau;       // e_a(tau)
};

namespace detail {

// K(a, b, c) = DJ(a, b, c) - DJ(b, a, c); exactly antisymmetric in (a, b).
inline Tensor<double> k_from_dj(const Tensor<double>& dj) {
  const int n = dj.dim();
  Tensor<double> k = Tensor<double>::covariant(n, 3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) k({a, b, c}) = dj({a, b, c}) - dj({b, a, c});
  return k;
}

}  // namespace detail

/// Re-expresses frame components in another orthonormal frame whose vectors
/// are the columns of `q` (in components of the current frame).
inline FrameComponents rotate(const FrameComponents& f, const Matrix<double>& q) {
  FrameComponents r;
  r.dim = f.dim;
  r.tau = f.tau;
  r.J = to_frame(f.J, q);
  r.R = to_frame(f.R, q);
  r.S = to_frame(f.S, q);
  r.C = to_frame(f.C, q);
  r.Sprime = to_frame(f.Sprime, q);
  r.DJ = to_frame(f.DJ, q);
  r.K = detail::k_from_dj(r.DJ);
  r.DS = to_frame(f.DS, q);
  r.DDS = to_frame(f.DDS, q);
  r.DDJ = to_frame(f.DDJ, q);
  r.DR = to_frame(f.DR, q);
  r.DSprime = to_frame(f.DSprime, q);
  r.dtau = to_frame(f.dtau, q);
  return r;
}

/// Weyl tensor from R, S, tau and g (all fully covariant, any basis).
/// Identically zero in dimension 2, where the formula degenerates.
inline Tensor<double> weyl_tensor(const Tensor<double>& R, const Tensor<double>& S, double tau, const Tensor<double>& g) {
  const int n = R.dim();
  if (n <= 2) return Tensor<double>::covariant(n, 4);
  const double a = 1.0 / (n - 2);
  const double b = tau / ((n - 1.0) * (n - 2.0));
  Tensor<double> C = Tensor<double>::covariant(n, 4);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int u = 0; u < n; ++u) {
          const double gxu = g({x, u}), gxz = g({x, z}), gyz = g({y, z}), gyu = g({y, u});
          C({x, y, z, u}) = R({x, y, z, u}) -
                            a * (gxu * S({y, z}) - gxz * S({y, u}) + gyz * S({x, u}) - gyu * S({x, z})) +
                            b * (gxu * gyz - gxz * gyu);
        }
  return C;
}

/// Everything the identity checkers need at one point.
struct CurvatureBundle {
  std::vector<double> point;
  int dim = 0;
  // Coordinate components at p.
  Tensor<double> metric;             // g_ij
  Tensor<double> inverse_metric;     // g^ij
  Tensor<double> complex_structure;  // slots (in, out): J^c_b at (b, c)
  Tensor<double> christoffel;        // Gamma^k_ij at (k, i, j)
  Tensor<double> riemann;            // R_abcd
  Tensor<double> ricci;              // S_ab
  double scalar = 0.0;               // tau
  Tensor<double> weyl;               // C_abcd
  Tensor<double> ricci_prime;        // S'_ab
  Tensor<double> nabla_j;            // (nabla_a J)^c_b at (a, b, c)
  Tensor<double> k_tensor;           // K(d_a, d_b)^c at (a, b, c)
  Tensor<double> nabla_ricci;        // (nabla_a S)_bc
  Tensor<double> nabla2_ricci;       // (nabla_a nabla_b S)_cd
  Tensor<double> nabla2_j;           // (nabla_a nabla_b J)^d_c at (a, b, c, d)
  Tensor<double> nabla_riemann;      // (nabla_a R)_bcde
  Tensor<double> nabla_ricci_prime;  // (nabla_a S')_bc
  std::vector<double> scalar_gradient;  // d_a tau
  AdaptedFrame frame;
  FrameComponents in_frame;
};

inline CurvatureBundle curvature_bundle(const Chart& chart, std::span<const double> p) {
  using detail::co;
  using detail::contra;
  const auto fields = chart_fields(chart, p);
  const int n = chart.dim;
  const auto conn = detail::connection(fields.metric);
  const JetField<2> R = detail::riemann_field(conn);

  // Ricci and scalar curvature as order-2 fields.
  JetField<2> gi2 = detail::truncated<2>(conn.inverse_metric);
  JetField<2> S = JetField<2>::covariant(n, 2);
  for (int b = 0; b < n; ++b)
    for (int c = b; c < n; ++c) {
      Jet<2> s = Jet<2>::constant(n, 0.0);
      for (int a = 0; a < n; ++a)
        for (int u = 0; u < n; ++u) s += gi2({a, u}) * R({a, b, c, u});
      S({b, c}) = s;
      S({c, b}) = s;
    }
  Jet<2> tau = Jet<2>::constant(n, 0.0);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) tau += gi2({b, c}) * S({b, c});

  // S'_xy = g^{ab} R_{x a c d} J^c_b J^d_y, with J stored as J[in][out].
  const JetField<2> J2 = detail::truncated<2>(fields.complex_structure);
  JetField<2> T1 = JetField<2>::covariant(n, 4);  // T1(x,a,c,y) = sum_d R(x,a,c,d) J^d_y
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        for (int y = 0; y < n; ++y) {
          Jet<2> s = Jet<2>::constant(n, 0.0);
          for (int d = 0; d < n; ++d) s += R({x, a, c, d}) * J2({y, d});
          T1({x, a, c, y}) = s;
        }
  JetField<2> T2 = JetField<2>::covariant(n, 4);  // T2(x,a,b,y) = sum_c T1(x,a,c,y) J^c_b
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int y = 0; y < n; ++y) {
          Jet<2> s = Jet<2>::constant(n, 0.0);
          for (int c = 0; c < n; ++c) s += T1({x, a, c, y}) * J2({b, c});
          T2({x, a, b, y}) = s;
        }
  JetField<2> Sp = JetField<2>::covariant(n, 2);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      Jet<2> s = Jet<2>::constant(n, 0.0);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += gi2({a, b}) * T2({x, a, b, y});
      Sp({x, y}) = s;
    }

  const JetField<1> DS1 = covariant_derivative(S, conn.christoffel);
  const JetField<0> DDS = covariant_derivative(DS1, conn.christoffel);
  const JetField<0> DR = covariant_derivative(detail::truncated<1>(R), conn.christoffel);
  const JetField<0> DSp = covariant_derivative(detail::truncated<1>(Sp), conn.christoffel);
  const JetField<3> DJ3 = covariant_derivative(fields.complex_structure, conn.christoffel);
  const JetField<0> DDJ = covariant_derivative(detail::truncated<1>(DJ3), conn.christoffel);

  CurvatureBundle b;
  b.point.assign(p.begin(), p.end());
  b.dim = n;
  b.metric = evaluate(fields.metric);
  b.inverse_metric = evaluate(conn.inverse_metric);
  b.complex_structure = evaluate(fields.complex_structure);
  b.christoffel = evaluate(conn.christoffel);
  b.riemann = evaluate(R);
  b.ricci = evaluate(S);
  b.scalar = tau.value();
  b.weyl = weyl_tensor(b.riemann, b.ricci, b.scalar, b.metric);
  b.ricci_prime = evaluate(Sp);
  b.nabla_j = evaluate(DJ3);
  b.k_tensor = Tensor<double>(n, {co, co, contra});
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int c = 0; c < n; ++c) b.k_tensor({x, y, c}) = b.nabla_j({x, y, c}) - b.nabla_j({y, x, c});
  b.nabla_ricci = evaluate(DS1);
  b.nabla2_ricci = evaluate(DDS);
  b.nabla2_j = evaluate(DDJ);
  b.nabla_riemann = evaluate(DR);
  b.nabla_ricci_prime = evaluate(DSp);
  b.scalar_gradient.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) b.scalar_gradient[static_cast<std::size_t>(a)] = partial(tau, a).value();

  Matrix<double> gmat = as_matrix(b.metric);
  Matrix<double> jmat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jmat(i, j) = b.complex_structure({j, i});
  b.frame = adapted_frame(gmat, jmat);

  const Matrix<double>& E = b.frame.vectors;
  auto frame_of = [&](const Tensor<double>& t) { return to_frame(lower_all(t, b.metric), E); };
  FrameComponents& F = b.in_frame;
  F.dim = n;
  F.J = frame_of(b.complex_structure);
  F.R = frame_of(b.riemann);
  F.S = frame_of(b.ricci);
  F.tau = b.scalar;
  F.C = frame_of(b.weyl);
  F.Sprime = frame_of(b.ricci_prime);
  F.DJ = frame_of(b.nabla_j);
  F.K = detail::k_from_dj(F.DJ);
  F.DS = frame_of(b.nabla_ricci);
  F.DDS = frame_of(b.nabla2_ricci);
  F.DDJ = frame_of(b.nabla2_j);
  F.DR = frame_of(b.nabla_riemann);
  F.DSprime = frame_of(b.nabla_ricci_prime);
  Tensor<double> dtau = Tensor<double>::covariant(n, 1);
  for (int a = 0; a < n; ++a) dtau[static_cast<std::size_t>(a)] = b.scalar_gradient[static_cast<std::size_t>(a)];
  F.dtau = to_frame(dtau, E);
  return b;
}

/// nabla J, the K tensor and the rough Laplacian sum_i (nabla_{E_i} nabla_{E_i} J),
/// all as frame components: dj(a,b,c) = g((nabla_a J) e_b, e_c),
/// k(a,b,c) = g(K(e_a,e_b), e_c), rough_laplacian(b,c) = g((sum_i nabla^2_{i,i} J) e_b, e_c).
struct NablaJ {
  Tensor<double> dj;
  Tensor<double> k;
  Tensor<double> rough_laplacian;
};

inline NablaJ nabla_J(const CurvatureBundle& b) {
  const auto& F = b.in_frame;
  const int n = b.dim;
  NablaJ out{F.DJ, F.K, Tensor<double>::covariant(n, 2)};
  for (int y = 0; y < n; ++y)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += F.DDJ({i, i, y, c});
      out.rough_laplacian({y, c}) = s;
    }
  return out;
}

inline NablaJ nabla_J(const Chart& chart, std::span<const double> p) { return nabla_J(curvature_bundle(chart, p)); }

/// (nabla S)(a; b, c) and (nabla_a nabla_b S)(c, d) in coordinates.
struct RicciDerivatives {
  Tensor<double> first;
  Tensor<double> second;
};

inline RicciDerivatives covariant_derivatives_S(const Chart& chart, std::span<const double> p) {
  auto b = curvature_bundle(chart, p);
  return {std::move(b.nabla_ricci), std::move(b.nabla2_ricci)};
}

/// d omega for the Kaehler form omega(X, Y) = g(JX, Y), in coordinates:
/// (d omega)_abc = d_a omega_bc + d_b omega_ca + d_c omega_ab.
inline Tensor<double> kahler_form_differential(const Chart& chart, std::span<const double> p) {
  const auto f = chart_fields(chart, p);
  const int n = chart.dim;
  std::vector<Jet<4>> omega(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet<4> s = Jet<4>::constant(n, 0.0);
      for (int c = 0; c < n; ++c) s += f.complex_structure({a, c}) * f.metric({c, b});
      omega[static_cast<std::size_t>(a * n + b)] = s;
    }
  auto dw = [&](int a, int b, int c) { return partial(omega[static_cast<std::size_t>(b * n + c)], a).value(); };
  Tensor<double> out = Tensor<double>::covariant(n, 3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) out({a, b, c}) = dw(a, b, c) + dw(b, c, a) + dw(c, a, b);
  return out;
}

/// Sectional curvature R(X,Y,Y,X) / (|X|^2 |Y|^2 - g(X,Y)^2) for coordinate vectors.
inline double sectional_curvature(const CurvatureBundle& b, std::span<const double> x, std::span<const double> y) {
  const int n = b.dim;
  double r = 0.0;
  double gxx = 0.0, gyy = 0.0, gxy = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double gij = b.metric({i, j});
      gxx += gij * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
      gyy += gij * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
      gxy += gij * x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    }
  for (std::size_t f = 0; f < b.riemann.size(); ++f) {
    const auto idx = b.riemann.unflatten(f);
    r += b.riemann[f] * x[static_cast<std::size_t>(idx[0])] * y[static_cast<std::size_t>(idx[1])] *
         y[static_cast<std::size_t>(idx[2])] * x[static_cast<std::size_t>(idx[3])];
  }
  const double area = gxx * gyy - gxy * gxy;
  if (!(area > 0.0)) throw DomainError("sectional curvature of a degenerate plane");
  return r / area;
}

}  // namespace ahlab
