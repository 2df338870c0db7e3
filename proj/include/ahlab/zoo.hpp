#pragma once

/// Built-in charts, the product combinator and synthetic curvature summaries.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ahlab/analysis.hpp"
#include "ahlab/error.hpp"
#include "ahlab/expr.hpp"
#include "ahlab/geometry.hpp"

namespace ahlab::zoo {

/// Named numeric parameters; list-valued ones (dims=4,2) have several entries.
using Params = std::map<std::string, std::vector<double>, std::less<>>;

namespace detail {

inline double scalar_param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw DomainError("parameter '" + key + "' must be a single number");
  return it->second[0];
}

inline int int_param(const Params& p, const std::string& key, int fallback) {
  const double v = scalar_param(p, key, fallback);
  if (std::floor(v) != v) throw DomainError("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

inline std::vector<double> list_param(const Params& p, const std::string& key, std::vector<double> fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void allow_only(const Params& p, std::initializer_list<const char*> keys, const std::string& entry) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw DomainError("entry '" + entry + "' has no parameter '" + k + "'");
  }
}

inline Expr num(double v) { return Expr::constant(v); }
inline Expr x(int i) { return Expr::coordinate(i); }

inline Expr radius_squared(int n, int offset = 0) {
  Expr r = x(offset) * x(offset);
  for (int i = 1; i < n; ++i) r = r + x(offset + i) * x(offset + i);
  return r;
}

inline Expr square(const Expr& e) { return Expr::binary(Expr::Binary::pow, e, num(2)); }

// J d_i = d_{m+i}: J^{m+i}_i = 1, J^i_{m+i} = -1.
inline std::vector<Expr> standard_j(int n) {
  const int m = n / 2;
  std::vector<Expr> j(static_cast<std::size_t>(n * n), num(0));
  for (int i = 0; i < m; ++i) {
    j[static_cast<std::size_t>((m + i) * n + i)] = num(1);
    j[static_cast<std::size_t>(i * n + m + i)] = num(-1);
  }
  return j;
}

inline DomainBox cube(int n, double half) {
  return {std::vector<double>(static_cast<std::size_t>(n), -half), std::vector<double>(static_cast<std::size_t>(n), half)};
}

inline Chart conformal_ball(const std::string& name, int n, double c, bool sphere) {
  if (!(c > 0.0)) throw DomainError(name + " needs c > 0");
  if (n < 2 || n % 2 != 0 || n > kMaxVariables) throw DomainError(name + " needs an even dimension in [2, 8]");
  const Expr cr = Expr::parameter("c") * radius_squared(n);
  const Expr f = num(4) / square(sphere ? num(1) + cr : num(1) - cr);
  DirectPresentation d;
  d.metric.assign(static_cast<std::size_t>(n * n), num(0));
  for (int i = 0; i < n; ++i) d.metric[static_cast<std::size_t>(i * n + i)] = f;
  d.complex_structure = standard_j(n);
  // Keeps c r^2 <= 0.72 on the hyperbolic ball.
  const double half = (sphere ? 0.8 : 0.3) / std::sqrt(c);
  return Chart{name, n, d, {{"c", c}}, cube(n, half)};
}

}  // namespace detail

inline Chart flat_kahler(int m) {
  if (m < 1 || 2 * m > kMaxVariables) throw DomainError("flat_kahler needs 1 <= m <= 4");
  const int n = 2 * m;
  DirectPresentation d;
  d.metric.assign(static_cast<std::size_t>(n * n), detail::num(0));
  for (int i = 0; i < n; ++i) d.metric[static_cast<std::size_t>(i * n + i)] = detail::num(1);
  d.complex_structure = detail::standard_j(n);
  return Chart{"flat_kahler", n, d, {}, detail::cube(n, 1.0)};
}

/// Stereographic round sphere 4 delta / (1 + c r^2)^2, curvature c.
inline Chart sphere2(double c) { return detail::conformal_ball("sphere2", 2, c, true); }

/// Poincare ball 4 delta / (1 - c r^2)^2, curvature -c, with the standard J.
inline Chart hyperbolic(int n, double c) { return detail::conformal_ball("hyperbolic", n, c, false); }

/// Fubini-Study metric on the affine chart z_k = x_k + i x_{k+2} of CP^2.
inline Chart fubini_study_cp2() {
  using detail::num;
  using detail::x;
  const int n = 4;
  const Expr q = num(1) + detail::radius_squared(4);
  const Expr q2 = detail::square(q);
  // h_jk = delta_jk / q - conj(z_j) z_k / q^2 = A + i B, g(u, v) = Re(u^T h conj(v))
  auto A = [&](int j, int k) {
    Expr e = (x(j) * x(k) + x(j + 2) * x(k + 2)) / q2;
    return j == k ? num(1) / q - e : -e;
  };
  auto B = [&](int j, int k) { return (x(j + 2) * x(k) - x(j) * x(k + 2)) / q2; };
  DirectPresentation d;
  d.metric.assign(16, num(0));
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      d.metric[static_cast<std::size_t>(j * n + k)] = A(j, k);
      d.metric[static_cast<std::size_t>((j + 2) * n + k + 2)] = A(j, k);
      d.metric[static_cast<std::size_t>(j * n + k + 2)] = B(j, k);
      d.metric[static_cast<std::size_t>((j + 2) * n + k)] = -B(j, k);
    }
  d.complex_structure = detail::standard_j(n);
  return Chart{"fubini_study_cp2", n, d, {}, detail::cube(n, 1.0)};
}

/// Left-invariant structure on the nilpotent model of the Kodaira-Thurston
/// manifold: coframe dx1, dx2, dx3, dx4 - x1 dx3 orthonormal, J e1 = e2, J e3 = e4.
inline Chart kodaira_thurston() {
  using detail::num;
  using detail::x;
  const int n = 4;
  DirectPresentation d;
  d.metric.assign(16, num(0));
  d.metric[0] = num(1);
  d.metric[5] = num(1);
  d.metric[10] = num(1) + x(0) * x(0);
  d.metric[11] = -x(0);
  d.metric[14] = -x(0);
  d.metric[15] = num(1);
  // Column j is J d_j.
  std::vector<Expr> j(16, num(0));
  auto set = [&](int row, int col, const Expr& e) { j[static_cast<std::size_t>(row * n + col)] = e; };
  set(1, 0, num(1));
  set(0, 1, num(-1));
  set(2, 2, x(0));
  set(3, 2, num(1) + x(0) * x(0));
  set(2, 3, num(-1));
  set(3, 3, -x(0));
  d.complex_structure = j;
  return Chart{"kodaira_thurston", n, d, {}, detail::cube(n, 1.0)};
}

/// Upper hemisphere of the unit S^6 in Im(O), orthographic chart, with J
/// given by the octonion cross product.
inline Chart s6_nearly_kahler() {
  using detail::num;
  using detail::x;
  EmbeddedPresentation e;
  e.ambient_dim = 7;
  for (int i = 0; i < 6; ++i) e.map.push_back(x(i));
  e.map.push_back(Expr::unary(Expr::Unary::sqrt, num(1) - detail::radius_squared(6)));
  e.product = AmbientProduct::octonion();
  return Chart{"s6_nearly_kahler", 6, e, {}, detail::cube(6, 0.3)};
}

/// Block-diagonal product; the second chart's coordinates follow the first's.
/// Clashing parameter names with different values are renamed with a suffix.
inline Chart product(const Chart& a, const Chart& b) {
  if (!a.is_direct() || !b.is_direct()) throw DomainError("product needs two directly presented charts");
  validate_structure(a);
  validate_structure(b);
  const int na = a.dim;
  const int nb = b.dim;
  const int n = na + nb;
  if (n > kMaxVariables) throw DimensionError("product dimension exceeds " + std::to_string(kMaxVariables));

  Bindings params = a.params;
  std::map<std::string, std::string> renamed;
  for (const auto& [k, v] : b.params) {
    auto it = params.find(k);
    if (it == params.end() || it->second == v) {
      params[k] = v;
      continue;
    }
    std::string fresh = k + "_2";
    while (params.count(fresh) != 0 || b.params.count(fresh) != 0) fresh += "_";
    params[fresh] = v;
    renamed[k] = fresh;
  }
  auto lift = [&](const Expr& e) {
    Expr r = shift_coordinates(e, na);
    for (const auto& [from, to] : renamed) r = rename_parameter(r, from, to);
    return r;
  };

  DirectPresentation d;
  d.metric.assign(static_cast<std::size_t>(n * n), Expr::constant(0));
  d.complex_structure.assign(static_cast<std::size_t>(n * n), Expr::constant(0));
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) {
      d.metric[static_cast<std::size_t>(i * n + j)] = a.direct().metric[static_cast<std::size_t>(i * na + j)];
      d.complex_structure[static_cast<std::size_t>(i * n + j)] = a.direct().complex_structure[static_cast<std::size_t>(i * na + j)];
    }
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      const auto dst = static_cast<std::size_t>((na + i) * n + na + j);
      d.metric[dst] = lift(b.direct().metric[static_cast<std::size_t>(i * nb + j)]);
      d.complex_structure[dst] = lift(b.direct().complex_structure[static_cast<std::size_t>(i * nb + j)]);
    }
  DomainBox box = a.domain;
  box.lo.insert(box.lo.end(), b.domain.lo.begin(), b.domain.lo.end());
  box.hi.insert(box.hi.end(), b.domain.hi.begin(), b.domain.hi.end());
  return Chart{a.name + "*" + b.name, n, d, params, box};
}

inline Chart product_s2_h2(double c) {
  Chart p = product(sphere2(c), hyperbolic(2, c));
  p.name = "product_s2_h2";
  return p;
}

/// Curvature of a product of space forms at a model point, in an orthonormal
/// frame ordered so that e_{m+i} = J e_i: the first halves of every factor
/// come first, then their J-partners in the same order.
inline CurvatureSample synthetic_product(const std::vector<int>& dims, const std::vector<double>& curvs) {
  if (dims.empty() || dims.size() != curvs.size()) throw DomainError("dims and curvs must be non-empty lists of equal length");
  int n = 0;
  for (int d : dims) {
    if (d < 2 || d % 2 != 0) throw DomainError("every factor dimension must be even and >= 2");
    n += d;
  }
  if (n > kMaxVariables) throw DimensionError("total dimension exceeds " + std::to_string(kMaxVariables));
  const int m = n / 2;
  std::vector<int> owner(static_cast<std::size_t>(n));
  int start = 0;
  for (std::size_t f = 0; f < dims.size(); ++f) {
    for (int k = 0; k < dims[f] / 2; ++k) {
      owner[static_cast<std::size_t>(start + k)] = static_cast<int>(f);
      owner[static_cast<std::size_t>(m + start + k)] = static_cast<int>(f);
    }
    start += dims[f] / 2;
  }
  Tensor<double> g = Tensor<double>::covariant(n, 2);
  Tensor<double> J = Tensor<double>::covariant(n, 2);
  for (int i = 0; i < n; ++i) g({i, i}) = 1.0;
  for (int i = 0; i < m; ++i) {
    J({i, m + i}) = 1.0;
    J({m + i, i}) = -1.0;
  }
  // R = kappa (g(X,U) g(Y,Z) - g(X,Z) g(Y,U)) on each factor
  Tensor<double> R = Tensor<double>::covariant(n, 4);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || owner[static_cast<std::size_t>(a)] != owner[static_cast<std::size_t>(b)]) continue;
      const double k = curvs[static_cast<std::size_t>(owner[static_cast<std::size_t>(a)])];
      R({a, b, b, a}) = k;
      R({a, b, a, b}) = -k;
    }
  Tensor<double> S = Tensor<double>::covariant(n, 2);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += R({i, b, c, i});
      S({b, c}) = s;
    }
  return {R, S, J};
}

inline CurvatureSample synthetic_space_form(int dim, double curv) { return synthetic_product({dim}, {curv}); }

/// tau and the Weyl tensor of a synthetic sample, by the same formulas as the
/// curvature pipeline.
inline double scalar_curvature(const CurvatureSample& s) {
  double t = 0.0;
  for (int i = 0; i < s.S.dim(); ++i) t += s.S({i, i});
  return t;
}

inline Tensor<double> weyl(const CurvatureSample& s) {
  const int n = s.R.dim();
  Tensor<double> g = Tensor<double>::covariant(n, 2);
  for (int i = 0; i < n; ++i) g({i, i}) = 1.0;
  return weyl_tensor(s.R, s.S, scalar_curvature(s), g);
}

/// Summary with the conformal flatness flag measured and the AK flags taken
/// as given.
inline CurvatureSummary synthetic_summary(const CurvatureSample& s, double tol, bool ak_flags = true) {
  CurvatureSummary out;
  out.dim = s.R.dim();
  out.conformally_flat = max_abs(weyl(s)) / (1.0 + max_abs(s.R)) <= tol;
  out.almost_kahler = ak_flags;
  out.class2 = ak_flags;
  out.samples = {s};
  return out;
}

/// What the analysis module is expected to find for an entry.
struct Expected {
  std::optional<std::string> verdict;  // ClassReport::verdict()
  std::optional<bool> conformally_flat;
  std::optional<std::vector<double>> ricci_clusters;
  std::optional<double> sectional_curvature;
  bool universal_identities = true;
  std::string provenance;
};

struct Entry {
  std::string name;
  std::string signature;
  bool synthetic = false;
  Params defaults;
  Expected expected;
};

inline const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"flat_kahler", "flat_kahler(m)", false, {{"m", {3}}},
       {"kahler", true, std::vector<double>{0.0}, 0.0, true, "classical: flat C^m"}},
      {"sphere2", "sphere2(c)", false, {{"c", {1}}},
       {"kahler", true, std::vector<double>{1.0}, 1.0, true, "classical: round 2-sphere of curvature c"}},
      {"hyperbolic", "hyperbolic(n, c)", false, {{"n", {2}}, {"c", {1}}},
       {std::nullopt, true, std::vector<double>{-1.0}, -1.0, true,
        "classical: Poincare ball of curvature -c; J constant, Kaehler only for n = 2"}},
      {"fubini_study_cp2", "fubini_study_cp2", false, {},
       {"kahler", false, std::vector<double>{6.0}, std::nullopt, true,
        "classical: Kaehler-Einstein; Weyl tensor nonzero, measured by the pipeline"}},
      {"kodaira_thurston", "kodaira_thurston", false, {},
       {"almost_kahler", std::nullopt, std::nullopt, std::nullopt, true,
        "derived: closed Kaehler form with non-integrable J on the nilpotent model"}},
      {"s6_nearly_kahler", "s6_nearly_kahler", false, {},
       {"nearly_kahler", true, std::vector<double>{5.0}, 1.0, true,
        "classical: unit S^6 with the octonion structure"}},
      {"product_s2_h2", "product_s2_h2(c)", false, {{"c", {1}}},
       {"kahler", true, std::vector<double>{-1.0, 1.0}, std::nullopt, true,
        "derived: product of curvature c and -c surfaces, block curvature formula"}},
      {"synthetic_space_form", "synthetic_space_form(dim, curv)", true, {{"dim", {6}}, {"curv", {-1}}},
       {std::nullopt, true, std::nullopt, std::nullopt, false, "space-form block formula"}},
      {"synthetic_product", "synthetic_product(dims, curvs)", true, {{"dims", {4, 2}}, {"curvs", {-1, 1}}},
       {std::nullopt, std::nullopt, std::nullopt, std::nullopt, false, "block sum of space-form curvatures"}},
  };
  return table;
}

inline const Entry& entry(const std::string& name) {
  for (const auto& e : entries())
    if (e.name == name) return e;
  throw DomainError("unknown zoo entry '" + name + "'");
}

inline bool is_synthetic(const std::string& name) { return entry(name).synthetic; }

/// Chart for a non-synthetic entry.
inline Chart build(const std::string& name, const Params& p = {}) {
  const Entry& e = entry(name);
  if (e.synthetic) throw DomainError("'" + name + "' is a synthetic curvature profile, not a chart");
  if (name == "flat_kahler") {
    detail::allow_only(p, {"m"}, name);
    return flat_kahler(detail::int_param(p, "m", 3));
  }
  if (name == "sphere2") {
    detail::allow_only(p, {"c"}, name);
    return sphere2(detail::scalar_param(p, "c", 1.0));
  }
  if (name == "hyperbolic") {
    detail::allow_only(p, {"n", "c"}, name);
    return hyperbolic(detail::int_param(p, "n", 2), detail::scalar_param(p, "c", 1.0));
  }
  if (name == "product_s2_h2") {
    detail::allow_only(p, {"c"}, name);
    return product_s2_h2(detail::scalar_param(p, "c", 1.0));
  }
  detail::allow_only(p, {}, name);
  if (name == "fubini_study_cp2") return fubini_study_cp2();
  if (name == "kodaira_thurston") return kodaira_thurston();
  return s6_nearly_kahler();
}

/// Curvature sample for a synthetic entry.
inline CurvatureSample synthetic_curvature(const std::string& name, const Params& p = {}) {
  const Entry& e = entry(name);
  if (!e.synthetic) throw DomainError("'" + name + "' is a chart, not a synthetic curvature profile");
  if (name == "synthetic_space_form") {
    detail::allow_only(p, {"dim", "curv"}, name);
    return synthetic_space_form(detail::int_param(p, "dim", 6), detail::scalar_param(p, "curv", -1.0));
  }
  detail::allow_only(p, {"dims", "curvs"}, name);
  const auto dd = detail::list_param(p, "dims", {4, 2});
  std::vector<int> dims;
  for (double d : dd) {
    if (std::floor(d) != d) throw DomainError("dims must be integers");
    dims.push_back(static_cast<int>(d));
  }
  return synthetic_product(dims, detail::list_param(p, "curvs", {-1, 1}));
}

}  // namespace ahlab::zoo
