#pragma once

/// Classification residuals, identity suites, the J-adapted Ricci spectrum and
/// the case matcher for conformally flat AK2 manifolds.
///
/// Everything here works on components in an orthonormal adapted frame
/// (e_{m+i} = J e_i), where raising an index is the identity and every
/// vector-argument identity is checked exhaustively over frame tuples.
///
/// Suites are conditional contracts: hypotheses are measured first, and a
/// conclusion is asserted only when its hypotheses hold at the tolerance.
/// Otherwise the residual is still reported but marked informational.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/geometry.hpp"
#include "ahlab/linalg.hpp"
#include "ahlab/tensor.hpp"

namespace ahlab {

namespace detail {

// max |lhs - rhs| / (1 + scale), where scale covers both sides and any
// participating input tensors.
class Residual {
 public:
  void add(double lhs, double rhs) {
    diff_ = std::max(diff_, std::abs(lhs - rhs));
    scale_ = std::max({scale_, std::abs(lhs), std::abs(rhs)});
  }
  Residual& include(const Tensor<double>& t) {
    scale_ = std::max(scale_, max_abs(t));
    return *this;
  }
  Residual& include(double v) {
    scale_ = std::max(scale_, std::abs(v));
    return *this;
  }
  double value() const { return diff_ / (1.0 + scale_); }

 private:
  double diff_ = 0.0;
  double scale_ = 0.0;
};

// T with slot `slot` fed J e_a instead of e_a.
inline Tensor<double> apply_j(const Tensor<double>& t, int slot, const Tensor<double>& J) {
  return transform_slot(t, slot, as_matrix(J).transposed(), Variance::covariant);
}

inline int half(int n) { return n / 2; }

}  // namespace detail

/// Class residuals at one point. The three nabla-J class residuals are raw
/// magnitudes of frame components; curvature residuals are normalized.
struct ClassReport {
  std::vector<double> point;
  double tol = 1e-6;
  double kahler = 0.0;           // max |g((nabla_a J) e_b, e_c)|
  double nearly_kahler = 0.0;    // max |(nabla_X J)Y + (nabla_Y J)X| / 2 over frame pairs
  double almost_kahler = 0.0;    // max |cyclic sum| / 3 over frame triples
  double identity_12 = 0.0;      // max |(nabla_X J)Y + (nabla_JX J)JY|
  std::array<double, 3> curvature_class{};  // identities 1), 2), 3)
  double conformal_flat = 0.0;   // max |C| / (1 + max |R|)

  bool is_kahler() const { return kahler <= tol; }
  bool is_nearly_kahler() const { return nearly_kahler <= tol; }
  bool is_almost_kahler() const { return almost_kahler <= tol; }
  bool in_class(int i) const { return curvature_class.at(static_cast<std::size_t>(i - 1)) <= tol; }
  bool is_conformally_flat() const { return conformal_flat <= tol; }
  bool is_ak2() const { return is_almost_kahler() && in_class(2); }

  std::string verdict() const {
    if (is_kahler()) return "kahler";
    if (is_nearly_kahler()) return "nearly_kahler";
    if (is_almost_kahler()) return "almost_kahler";
    return "almost_hermitian";
  }
};

inline ClassReport classify(const CurvatureBundle& b, double tol) {
  const auto& F = b.in_frame;
  const int n = F.dim;
  ClassReport r;
  r.point = b.point;
  r.tol = tol;
  r.kahler = max_abs(F.DJ);
  const Tensor<double> jj = detail::apply_j(detail::apply_j(F.DJ, 0, F.J), 1, F.J);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb)
      for (int c = 0; c < n; ++c) {
        const double x = F.DJ({a, bb, c});
        r.nearly_kahler = std::max(r.nearly_kahler, std::abs(x + F.DJ({bb, a, c})) / 2.0);
        r.almost_kahler = std::max(r.almost_kahler, std::abs(x + F.DJ({bb, c, a}) + F.DJ({c, a, bb})) / 3.0);
        r.identity_12 = std::max(r.identity_12, std::abs(x + jj({a, bb, c})));
      }

  const Tensor<double>& R = F.R;
  const Tensor<double> jx = detail::apply_j(R, 0, F.J);
  const Tensor<double> jxjy = detail::apply_j(jx, 1, F.J);
  const Tensor<double> jxjz = detail::apply_j(jx, 2, F.J);
  const Tensor<double> jxju = detail::apply_j(jx, 3, F.J);
  const Tensor<double> all = detail::apply_j(detail::apply_j(jxjy, 2, F.J), 3, F.J);
  detail::Residual c1, c2, c3;
  for (std::size_t k = 0; k < R.size(); ++k) {
    c1.add(R[k], jxjy[k]);
    c2.add(R[k], jxjy[k] + jxjz[k] + jxju[k]);
    c3.add(R[k], all[k]);
  }
  c1.include(R);
  c2.include(R);
  c3.include(R);
  r.curvature_class = {c1.value(), c2.value(), c3.value()};
  r.conformal_flat = max_abs(F.C) / (1.0 + max_abs(R));
  return r;
}

inline std::vector<ClassReport> classify(const Chart& chart, const std::vector<std::vector<double>>& points, double tol) {
  std::vector<ClassReport> out;
  for (const auto& p : points) out.push_back(classify(curvature_bundle(chart, p), tol));
  return out;
}

enum class Status { asserted, informational, not_applicable };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::asserted:
      return "asserted";
    case Status::informational:
      return "informational";
    case Status::not_applicable:
      return "not_applicable";
  }
  return "?";
}

struct EquationResult {
  std::string id;
  std::optional<double> residual;  // empty when the equation could not be evaluated
  Status status = Status::asserted;
  std::string note;

  bool passed(double tol) const { return residual.has_value() && *residual <= tol; }
};

/// Residuals of one identity suite at one point, with the hypothesis
/// measurements that decide which results are asserted.
struct IdentityReport {
  std::vector<double> point;
  double tol = 1e-6;
  bool applicable = true;
  std::optional<double> hypothesis_conformal_flat;
  std::optional<double> hypothesis_almost_kahler;
  std::optional<double> hypothesis_class2;
  std::vector<EquationResult> equations;
  std::string note;

  const EquationResult* find(std::string_view id) const {
    for (const auto& e : equations)
      if (e.id == id) return &e;
    return nullptr;
  }
  double residual(std::string_view id) const {
    const auto* e = find(id);
    if (e == nullptr || !e->residual) throw Error("no residual for equation " + std::string(id));
    return *e->residual;
  }
  /// True when some asserted equation exceeds the tolerance.
  bool failed() const {
    return std::any_of(equations.begin(), equations.end(),
                       [&](const EquationResult& e) { return e.status == Status::asserted && !e.passed(tol); });
  }
};

/// Ricci identity for Q = Ricci operator and Q = J, the contracted second
/// Bianchi identity, and the divergence of S. Unconditional.
inline IdentityReport check_universal(const CurvatureBundle& b, double tol) {
  const auto& F = b.in_frame;
  const int n = F.dim;
  IdentityReport rep;
  rep.point = b.point;
  rep.tol = tol;

  detail::Residual ricci, bianchi, divergence;
  ricci.include(F.R).include(F.S).include(F.J).include(F.DDS).include(F.DDJ);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double rs = 0.0, rj = 0.0;
          for (int e = 0; e < n; ++e) {
            rs += F.S({c, e}) * F.R({a, bb, e, d}) - F.R({a, bb, c, e}) * F.S({e, d});
            rj += F.J({c, e}) * F.R({a, bb, e, d}) + F.J({d, e}) * F.R({a, bb, c, e});
          }
          ricci.add(F.DDS({a, bb, c, d}) - F.DDS({bb, a, c, d}), rs);
          ricci.add(F.DDJ({a, bb, c, d}) - F.DDJ({bb, a, c, d}), rj);
        }

  bianchi.include(F.DR).include(F.DS);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        double lhs = 0.0;
        for (int i = 0; i < n; ++i) lhs += F.DR[((((static_cast<std::size_t>(i) * n + x) * n + y) * n + z) * n + i)];
        bianchi.add(lhs, F.DS({x, y, z}) - F.DS({y, x, z}));
      }

  divergence.include(F.DS).include(F.dtau);
  for (int x = 0; x < n; ++x) {
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) lhs += F.DS({i, x, i});
    divergence.add(lhs, 0.5 * F.dtau[static_cast<std::size_t>(x)]);
  }

  rep.equations = {{"2.1", ricci.value(), Status::asserted, {}},
                   {"2.2", bianchi.value(), Status::asserted, {}},
                   {"2.3", divergence.value(), Status::asserted, {}}};
  return rep;
}

namespace detail {

inline void record_ak2_hypotheses(IdentityReport& rep, const ClassReport& cls) {
  rep.hypothesis_almost_kahler = cls.almost_kahler;
  rep.hypothesis_class2 = cls.curvature_class[1];
  rep.applicable = cls.is_ak2();
  if (!rep.applicable) rep.note = "AK2 hypothesis fails at this point; residuals are informational";
}

inline Status status_for(bool applicable) { return applicable ? Status::asserted : Status::informational; }

}  // namespace detail

/// Identities valid on AK2 manifolds. Asserted only where the almost Kaehler
/// residual and the identity 2) residual are within tolerance.
inline IdentityReport check_ak2(const CurvatureBundle& b, double tol) {
  const auto& F = b.in_frame;
  const int n = F.dim;
  IdentityReport rep;
  rep.point = b.point;
  rep.tol = tol;
  detail::record_ak2_hypotheses(rep, classify(b, tol));

  // 2 nabla_X(S - S')(Y,Z) = (S - S')((nabla_X J)Y, JZ) + (S - S')(JY, (nabla_X J)Z)
  detail::Residual r24;
  r24.include(F.S).include(F.Sprime).include(F.DS).include(F.DSprime).include(F.DJ);
  Tensor<double> D = F.S;
  for (std::size_t k = 0; k < D.size(); ++k) D[k] -= F.Sprime[k];
  for (int a = 0; a < n; ++a)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        double rhs = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            rhs += F.DJ({a, y, p}) * F.J({z, q}) * D({p, q}) + F.J({y, p}) * F.DJ({a, z, q}) * D({p, q});
        r24.add(2.0 * (F.DS({a, y, z}) - F.DSprime({a, y, z})), rhs);
      }

  // sum_i (nabla_i nabla_i J) Y = sum_i J (nabla_i J)(nabla_i J) Y, composed left to right
  detail::Residual r25;
  r25.include(F.DDJ).include(F.DJ);
  for (int y = 0; y < n; ++y)
    for (int c = 0; c < n; ++c) {
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < n; ++i) {
        lhs += F.DDJ({i, i, y, c});
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) rhs += F.DJ({i, y, p}) * F.DJ({i, p, q}) * F.J({q, c});
      }
      r25.add(lhs, rhs);
    }

  // R(X,Y,Z,U) - R(X,Y,JZ,JU) = g(K(X,Y), K(Z,U)) / 2
  detail::Residual r26;
  r26.include(F.R).include(F.K);
  const Tensor<double> rj = detail::apply_j(detail::apply_j(F.R, 2, F.J), 3, F.J);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double kk = 0.0;
          for (int p = 0; p < n; ++p) kk += F.K({a, bb, p}) * F.K({c, d, p});
          r26.add(F.R({a, bb, c, d}) - rj({a, bb, c, d}), 0.5 * kk);
        }

  const Status s = detail::status_for(rep.applicable);
  rep.equations = {{"2.4", r24.value(), s, {}}, {"2.5", r25.value(), s, {}}, {"2.6", r26.value(), s, {}}};
  return rep;
}

struct RicciCluster {
  double value = 0.0;
  std::vector<int> indices;  // i in [0, m): e_i and J e_i span the cluster
  int multiplicity() const { return 2 * static_cast<int>(indices.size()); }
};

/// J-adapted eigenframe of the Ricci operator.
struct RicciSpectrum {
  Matrix<double> frame;             // columns e_1..e_2m in components of the input frame
  std::optional<Matrix<double>> coordinate_frame;
  std::vector<double> eigenvalues;  // lambda_1 <= ... <= lambda_m
  std::vector<RicciCluster> clusters;
  double j_invariance = 0.0;        // max |S(J., J.) - S| / (1 + max |S|)
  double eigen_residual = 0.0;      // max |S e_a - lambda_a e_a|
};

/// `S` and `J` are frame components g(J e_a, e_b) in an orthonormal frame.
inline RicciSpectrum ricci_spectrum(const Tensor<double>& S, const Tensor<double>& J, double tol) {
  const int n = S.dim();
  if (n % 2 != 0 || S.rank() != 2 || J.rank() != 2 || J.dim() != n) throw DimensionError("ricci_spectrum needs even-dimensional S and J");
  const int m = n / 2;
  RicciSpectrum out;

  const Tensor<double> sjj = detail::apply_j(detail::apply_j(S, 0, J), 1, J);
  detail::Residual inv;
  inv.include(S);
  for (std::size_t k = 0; k < S.size(); ++k) inv.add(sjj[k], S[k]);
  out.j_invariance = inv.value();
  if (out.j_invariance > tol) {
    throw GeometryError("Ricci tensor is not J-invariant (residual " + std::to_string(out.j_invariance) + ")");
  }

  const Matrix<double> smat = as_matrix(S);
  const EigenSystem es = jacobi_eigen(smat);
  // Je for a frame vector e: (Je)_b = sum_a e_a J(a, b)
  auto apply = [&](const std::vector<double>& e) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) w[static_cast<std::size_t>(b)] += e[static_cast<std::size_t>(a)] * J({a, b});
    return w;
  };
  auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += u[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
    return s;
  };

  std::vector<std::vector<int>> groups;
  for (int k = 0; k < n; ++k) {
    const double lam = es.values[static_cast<std::size_t>(k)];
    if (groups.empty() || lam - es.values[static_cast<std::size_t>(groups.back().back())] > 1e-6 * (1.0 + std::abs(lam))) {
      groups.emplace_back();
    }
    groups.back().push_back(k);
  }

  const double pair_tol = std::max(1e-6, std::sqrt(tol));
  out.frame = Matrix<double>(n, n);
  int next = 0;
  for (const auto& g : groups) {
    const int d = static_cast<int>(g.size());
    if (d % 2 != 0) throw GeometryError("Ricci eigenvalue cluster of odd multiplicity; cannot pair by J");
    std::vector<std::vector<double>> space;
    for (int k : g) space.push_back(es.vectors.column(k));
    std::vector<std::vector<double>> chosen;
    RicciCluster cluster;
    double lam_sum = 0.0;
    for (const auto& cand : space) {
      if (static_cast<int>(chosen.size()) == d) break;
      std::vector<double> e = cand;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : chosen) {
          const double c = dot(e, u);
          for (int k = 0; k < n; ++k) e[static_cast<std::size_t>(k)] -= c * u[static_cast<std::size_t>(k)];
        }
      const double len = std::sqrt(dot(e, e));
      if (len <= 1e-6) continue;
      for (double& x : e) x /= len;
      const std::vector<double> je = apply(e);
      std::vector<double> leak = je;
      for (const auto& u : space) {
        const double c = dot(je, u);
        for (int k = 0; k < n; ++k) leak[static_cast<std::size_t>(k)] -= c * u[static_cast<std::size_t>(k)];
      }
      if (std::sqrt(dot(leak, leak)) > pair_tol) {
        throw GeometryError("Ricci eigenspace is not J-invariant; J-pairing failed");
      }
      if (next >= m) throw GeometryError("J-pairing produced too many vectors");
      chosen.push_back(e);
      chosen.push_back(je);
      out.frame.set_column(next, e);
      out.frame.set_column(m + next, je);
      cluster.indices.push_back(next);
      lam_sum += dot(e, [&] {
        std::vector<double> se(static_cast<std::size_t>(n), 0.0);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) se[static_cast<std::size_t>(a)] += smat(a, b) * e[static_cast<std::size_t>(b)];
        return se;
      }());
      ++next;
    }
    if (static_cast<int>(chosen.size()) != d) throw GeometryError("J-pairing failed within a Ricci eigenvalue cluster");
    cluster.value = lam_sum / static_cast<double>(cluster.indices.size());
    out.clusters.push_back(std::move(cluster));
  }

  out.eigenvalues.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const auto e = out.frame.column(i);
    double lam = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) lam += e[static_cast<std::size_t>(a)] * smat(a, b) * e[static_cast<std::size_t>(b)];
    out.eigenvalues[static_cast<std::size_t>(i)] = lam;
  }
  for (int col = 0; col < n; ++col) {
    const auto e = out.frame.column(col);
    const double lam = out.eigenvalues[static_cast<std::size_t>(col % m)];
    for (int a = 0; a < n; ++a) {
      double se = 0.0;
      for (int b = 0; b < n; ++b) se += smat(a, b) * e[static_cast<std::size_t>(b)];
      out.eigen_residual = std::max(out.eigen_residual, std::abs(se - lam * e[static_cast<std::size_t>(a)]));
    }
  }
  return out;
}

inline RicciSpectrum ricci_spectrum(const CurvatureBundle& b, double tol) {
  RicciSpectrum s = ricci_spectrum(b.in_frame.S, b.in_frame.J, tol);
  s.coordinate_frame = b.frame.vectors * s.frame;
  return s;
}

/// Every step of the conformally flat AK2 argument at one point: the S'
/// relation, the gradient of tau, the first-derivative identities for S, the
/// rough-Laplacian identities in the Ricci eigenframe, the eigenvalue
/// dichotomy, the mixed-plane relation for two clusters, and nabla S = 0.
inline IdentityReport check_cf_ak2_chain(const CurvatureBundle& b, double tol) {
  const auto& F = b.in_frame;
  const int n = F.dim;
  const int m = detail::half(n);
  IdentityReport rep;
  rep.point = b.point;
  rep.tol = tol;
  const ClassReport cls = classify(b, tol);
  detail::record_ak2_hypotheses(rep, cls);
  rep.hypothesis_conformal_flat = cls.conformal_flat;
  if (!cls.is_conformally_flat()) {
    rep.applicable = false;
    rep.note = "not conformally flat at this point (normalized |C| = " + std::to_string(cls.conformal_flat) +
               "); chain not applicable, residuals are informational";
  }
  if (m < 2) {
    rep.applicable = false;
    rep.note = "chain needs dimension >= 4";
  }
  const Status s = detail::status_for(rep.applicable);
  auto add = [&](const std::string& id, double value) { rep.equations.push_back({id, value, s, {}}); };
  auto missing = [&](const std::string& id, const std::string& why) {
    rep.equations.push_back({id, std::nullopt, Status::not_applicable, why});
  };

  if (m >= 2) {
    detail::Residual sp;
    sp.include(F.Sprime).include(F.S).include(F.tau);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        const double rhs = F.S({x, y}) / (m - 1.0) - (x == y ? F.tau / (2.0 * (m - 1.0) * (2.0 * m - 1.0)) : 0.0);
        sp.add(F.Sprime({x, y}), rhs);
      }
    add("sprime", sp.value());
  } else {
    missing("sprime", "needs dimension >= 4");
  }

  const auto& dtau = F.dtau;
  auto sjd = [&](int a, int y, int z) {  // S((nabla_a J) e_y, J e_z) + S(J e_y, (nabla_a J) e_z)
    double v = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) v += (F.DJ({a, y, p}) * F.J({z, q}) + F.J({y, p}) * F.DJ({a, z, q})) * F.S({p, q});
    return v;
  };
  detail::Residual r31, r32, r33, r34;
  for (auto* r : {&r31, &r32, &r33, &r34}) r->include(F.DS).include(dtau);
  r32.include(F.S).include(F.DJ);
  r34.include(F.S).include(F.DJ);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const double skew = F.DS({x, y, z}) - F.DS({y, x, z});
        const double grad = ((y == z ? dtau[static_cast<std::size_t>(x)] : 0.0) - (x == z ? dtau[static_cast<std::size_t>(y)] : 0.0)) /
                            (2.0 * (2.0 * m - 1.0));
        r31.add(skew, grad);
        r33.add(F.DS({x, y, z}), F.DS({y, x, z}));
        const double twice = 2.0 * F.DS({x, y, z});
        const double rot = sjd(x, y, z);
        const double trace = m >= 2 && y == z ? dtau[static_cast<std::size_t>(x)] / ((m - 1.0) * (2.0 * m - 1.0)) : 0.0;
        r32.add(twice, rot - trace);
        r34.add(twice, rot);
      }
  add("3.1", r31.value());
  if (m >= 2) {
    add("3.2", r32.value());
  } else {
    missing("3.2", "needs dimension >= 4");
  }
  double grad_norm = 0.0;
  for (std::size_t a = 0; a < dtau.size(); ++a) grad_norm += dtau[a] * dtau[a];
  add("dtau", std::sqrt(grad_norm) / (1.0 + std::abs(F.tau)));
  add("3.3", r33.value());
  add("3.4", r34.value());

  std::optional<RicciSpectrum> spec;
  std::string spec_error;
  try {
    spec = ricci_spectrum(F.S, F.J, tol);
  } catch (const Error& e) {
    spec_error = e.what();
  }
  const std::vector<std::string> eigen_ids = {"3.5", "3.6", "3.7", "3.8", "3.9", "3.10", "3.11"};
  if (!spec) {
    for (const auto& id : eigen_ids) missing(id, "Ricci spectrum unavailable: " + spec_error);
  } else {
    const FrameComponents G = rotate(F, spec->frame);
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) lam[static_cast<std::size_t>(a)] = spec->eigenvalues[static_cast<std::size_t>(a % m)];
    auto L = [&](int a) { return lam[static_cast<std::size_t>(a)]; };
    auto dj = [&](int i, int j, int i2, int j2) {  // g((nabla_i J) e_j, (nabla_i2 J) e_j2)
      double v = 0.0;
      for (int p = 0; p < n; ++p) v += G.DJ({i, j, p}) * G.DJ({i2, j2, p});
      return v;
    };
    detail::Residual r35, r36, r37, r38, r39;
    for (auto* r : {&r35, &r36, &r37, &r38, &r39}) r->include(G.DDS).include(G.R).include(G.DJ).include(G.S);
    for (int j = 0; j < n; ++j) {
      double lap = 0.0, rhs5 = 0.0, rhs6 = 0.0, sum9 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dl = L(j) - L(i);
        lap += G.DDS({i, i, j, j});
        rhs5 += 0.5 * dl * (dj(i, j, j, i) - dj(i, j, i, j));
        rhs6 += dl * G.R({i, j, j, i});
        sum9 += dl * dj(i, j, j, i);
        r37.add(dl * G.R({i, j, j, i}), 0.5 * dl * (dj(i, j, j, i) - dj(i, i, j, j)));
        r38.add(dl * G.R({i, j, j, i}), 0.5 * dl * dj(i, j, j, i));
      }
      r35.add(lap, rhs5);
      r36.add(lap, rhs6);
      r39.add(sum9, 0.0);
    }
    add("3.5", r35.value());
    add("3.6", r36.value());
    add("3.7", r37.value());
    add("3.8", r38.value());
    add("3.9", r39.value());

    // lambda_i = lambda_1 or (nabla_{e_i} J) e_1 = 0, and likewise for lambda_m
    double r310 = 0.0;
    for (int i = 0; i < m; ++i) {
      r310 = std::max(r310, std::min(std::abs(L(i) - L(0)), std::sqrt(dj(i, 0, i, 0))));
      r310 = std::max(r310, std::min(std::abs(L(i) - L(m - 1)), std::sqrt(dj(i, m - 1, i, m - 1))));
    }
    add("3.10", r310);

    if (spec->clusters.size() == 2) {
      // R(x,y,y,x) + R(z,Jz,Jz,z) = 0 for x, y orthonormal in one eigenspace, z in the other
      detail::Residual r311;
      r311.include(G.R);
      auto members = [&](const RicciCluster& c) {
        std::vector<int> v;
        for (int i : c.indices) {
          v.push_back(i);
          v.push_back(m + i);
        }
        return v;
      };
      for (int side = 0; side < 2; ++side) {
        const auto A = members(spec->clusters[static_cast<std::size_t>(side)]);
        const auto B = members(spec->clusters[static_cast<std::size_t>(1 - side)]);
        for (int x : A)
          for (int y : A) {
            if (x == y) continue;
            for (int z : B) {
              const int jz = z < m ? z + m : z - m;
              r311.add(G.R({x, y, y, x}), -G.R({z, jz, jz, z}));
            }
          }
      }
      add("3.11", r311.value());
    } else {
      missing("3.11", "needs exactly two Ricci eigenvalue clusters, found " + std::to_string(spec->clusters.size()));
    }
  }
  add("nablaS", max_abs(F.DS) / (1.0 + max_abs(F.S)));
  return rep;
}

/// Frame components of R, S and J at one point.
struct CurvatureSample {
  Tensor<double> R;
  Tensor<double> S;
  Tensor<double> J;
};

/// Input of the case matcher.
struct CurvatureSummary {
  int dim = 0;
  bool conformally_flat = false;
  bool almost_kahler = false;
  bool class2 = false;
  std::vector<CurvatureSample> samples;
};

inline CurvatureSample sample_of(const CurvatureBundle& b) { return {b.in_frame.R, b.in_frame.S, b.in_frame.J}; }

inline CurvatureSummary summarize(const Chart& chart, const std::vector<std::vector<double>>& points, double tol) {
  CurvatureSummary s;
  s.dim = chart.dim;
  s.conformally_flat = s.almost_kahler = s.class2 = true;
  for (const auto& p : points) {
    const auto b = curvature_bundle(chart, p);
    const auto c = classify(b, tol);
    s.conformally_flat = s.conformally_flat && c.is_conformally_flat();
    s.almost_kahler = s.almost_kahler && c.is_almost_kahler();
    s.class2 = s.class2 && c.in_class(2);
    s.samples.push_back(sample_of(b));
  }
  return s;
}

enum class TheoremCase { case_a, case_b, case_c, case_d, einstein_space_form, not_applicable };

inline const char* to_string(TheoremCase c) {
  switch (c) {
    case TheoremCase::case_a:
      return "case_a";
    case TheoremCase::case_b:
      return "case_b";
    case TheoremCase::case_c:
      return "case_c";
    case TheoremCase::case_d:
      return "case_d";
    case TheoremCase::einstein_space_form:
      return "einstein_space_form";
    case TheoremCase::not_applicable:
      return "not_applicable";
  }
  return "?";
}

struct CaseMatch {
  TheoremCase label = TheoremCase::not_applicable;
  bool inconsistent = false;          // the summary contradicts a known consequence
  std::optional<double> c;            // curvature constant of the matched profile
  std::optional<double> mixed_plane;  // max |R(x,y,y,x) + R(z,Jz,Jz,z)| / (1 + max |R|)
  std::vector<int> factor_dims;
  std::vector<double> factor_curvatures;
  std::vector<std::string> diagnostics;
};

namespace detail {

// Sectional curvature of an eigenspace if R restricted to it is a space form.
inline std::optional<double> block_curvature(const Tensor<double>& R, const std::vector<int>& idx, double tol) {
  double sum = 0.0;
  int count = 0;
  for (int x : idx)
    for (int y : idx)
      if (x != y) {
        sum += R({x, y, y, x});
        ++count;
      }
  if (count == 0) return std::nullopt;
  const double kappa = sum / count;
  double dev = 0.0;
  for (int x : idx)
    for (int y : idx)
      for (int z : idx)
        for (int u : idx) {
          const double model = kappa * ((x == u && y == z ? 1.0 : 0.0) - (x == z && y == u ? 1.0 : 0.0));
          dev = std::max(dev, std::abs(R({x, y, z, u}) - model));
        }
  if (dev > tol * (1.0 + max_abs(R))) return std::nullopt;
  return kappa;
}

inline CaseMatch match_sample(const CurvatureSample& s, int dim, double tol) {
  CaseMatch out;
  const int m = dim / 2;
  RicciSpectrum spec;
  try {
    spec = ricci_spectrum(s.S, s.J, tol);
  } catch (const Error& e) {
    out.diagnostics.push_back(std::string("Ricci spectrum: ") + e.what());
    return out;
  }
  const Tensor<double> R = to_frame(s.R, spec.frame);
  const double scale = 1.0 + max_abs(R);
  auto members = [&](const RicciCluster& c) {
    std::vector<int> v;
    for (int i : c.indices) {
      v.push_back(i);
      v.push_back(m + i);
    }
    return v;
  };

  if (spec.clusters.size() == 1) {
    const double kappa = spec.clusters[0].value / (dim - 1.0);
    std::vector<int> all(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) all[static_cast<std::size_t>(k)] = k;
    const auto block = block_curvature(R, all, tol);
    if (!block) {
      out.diagnostics.push_back("Einstein but not of constant sectional curvature");
      return out;
    }
    out.factor_dims = {dim};
    out.factor_curvatures = {*block};
    if (std::abs(*block) <= tol * scale) {
      out.label = TheoremCase::case_a;
      out.c = 0.0;
      return out;
    }
    out.c = -kappa;
    if (kappa > 0.0) {
      out.label = TheoremCase::einstein_space_form;
      out.inconsistent = true;
      out.diagnostics.push_back("an almost Kaehler space form of dimension >= 4 has non-positive curvature");
    } else if (dim == 6) {
      out.label = TheoremCase::case_b;
    } else {
      out.label = TheoremCase::einstein_space_form;
      out.inconsistent = true;
      out.diagnostics.push_back("an almost Kaehler space form of dimension >= 8 is Kaehler, hence flat");
    }
    return out;
  }

  if (spec.clusters.size() != 2) {
    out.diagnostics.push_back("Ricci spectrum has " + std::to_string(spec.clusters.size()) + " clusters; expected 1 or 2");
    return out;
  }

  std::vector<std::vector<int>> blocks = {members(spec.clusters[0]), members(spec.clusters[1])};
  std::vector<int> owner(static_cast<std::size_t>(dim), 0);
  for (int x : blocks[1]) owner[static_cast<std::size_t>(x)] = 1;
  double mixed = 0.0;
  for (std::size_t f = 0; f < R.size(); ++f) {
    const auto idx = R.unflatten(f);
    const int o = owner[static_cast<std::size_t>(idx[0])];
    bool same = true;
    for (int k : idx) same = same && owner[static_cast<std::size_t>(k)] == o;
    if (!same) mixed = std::max(mixed, std::abs(R[f]));
  }
  if (mixed > tol * scale) {
    out.diagnostics.push_back("curvature does not split along the Ricci eigenspaces (max mixed component " +
                              std::to_string(mixed) + ")");
    return out;
  }
  std::vector<double> kappas;
  for (const auto& bl : blocks) {
    const auto k = block_curvature(R, bl, tol);
    if (!k) {
      out.diagnostics.push_back("an eigenspace factor is not of constant sectional curvature");
      return out;
    }
    kappas.push_back(*k);
  }
  // Larger factor first.
  if (blocks[1].size() > blocks[0].size()) {
    std::swap(blocks[0], blocks[1]);
    std::swap(kappas[0], kappas[1]);
  }
  out.factor_dims = {static_cast<int>(blocks[0].size()), static_cast<int>(blocks[1].size())};
  out.factor_curvatures = kappas;

  double rel = 0.0;
  for (int x : blocks[0])
    for (int y : blocks[0]) {
      if (x == y) continue;
      for (int z : blocks[1]) {
        const int jz = z < m ? z + m : z - m;
        rel = std::max(rel, std::abs(R({x, y, y, x}) + R({z, jz, jz, z})));
      }
    }
  out.mixed_plane = rel / scale;

  const int big = out.factor_dims[0];
  const int small = out.factor_dims[1];
  if (small != 2) {
    out.diagnostics.push_back("both factors have dimension >= 4");
    return out;
  }
  if (*out.mixed_plane > tol) {
    out.diagnostics.push_back("factor curvatures do not cancel on mixed planes");
    return out;
  }
  const double c = kappas[1];
  if (!(c > tol * scale)) {
    out.diagnostics.push_back("sign pattern of factor curvatures is not (-c, +c) with c > 0");
    return out;
  }
  out.c = c;
  if (big == 4) {
    out.label = TheoremCase::case_c;
  } else if (big == 6) {
    out.label = TheoremCase::case_d;
  } else {
    out.diagnostics.push_back("product split " + std::to_string(big) + "+2 matches no case");
    out.c.reset();
  }
  return out;
}

}  // namespace detail

/// Decides which case of the classification a curvature summary fits.
inline CaseMatch theorem_case_match(const CurvatureSummary& s, double tol = 1e-6) {
  CaseMatch out;
  if (s.dim < 6) {
    out.diagnostics.push_back("needs dimension >= 6, got " + std::to_string(s.dim));
    return out;
  }
  if (!s.conformally_flat) out.diagnostics.push_back("not conformally flat");
  if (!s.almost_kahler) out.diagnostics.push_back("not almost Kaehler");
  if (!s.class2) out.diagnostics.push_back("curvature identity 2) fails");
  if (!out.diagnostics.empty()) return out;
  if (s.samples.empty()) {
    out.diagnostics.push_back("no curvature samples");
    return out;
  }
  for (std::size_t k = 0; k < s.samples.size(); ++k) {
    CaseMatch here = detail::match_sample(s.samples[k], s.dim, tol);
    if (k == 0) {
      out = std::move(here);
      continue;
    }
    if (here.label != out.label) {
      CaseMatch bad;
      bad.diagnostics.push_back(std::string("samples disagree: ") + to_string(out.label) + " vs " + to_string(here.label));
      return bad;
    }
    if (here.mixed_plane && out.mixed_plane) out.mixed_plane = std::max(*out.mixed_plane, *here.mixed_plane);
  }
  return out;
}

}  // namespace ahlab
