#pragma once

#include <naba/chain.hpp>
#include <naba/ratfun.hpp>

#include <string>
#include <vector>

namespace naba {

// t̄ = {t̄^(1),..,t̄^(n-1)}
struct BetheParameters {
  std::vector<ParamSet> levels;

  BetheParameters() = default;
  explicit BetheParameters(std::vector<ParamSet> l) : levels(std::move(l)) {}
  static BetheParameters gl2(ParamSet u) { return BetheParameters({std::move(u)}); }
  static BetheParameters gl3(ParamSet u, ParamSet v) {
    return BetheParameters({std::move(u), std::move(v)});
  }
  static BetheParameters empty(int n) { return BetheParameters(std::vector<ParamSet>(n - 1)); }

  std::vector<int> cardinalities() const {
    std::vector<int> a;
    for (const auto &l : levels)
      a.push_back(static_cast<int>(l.size()));
    return a;
  }
  int total() const {
    int s = 0;
    for (const auto &l : levels)
      s += static_cast<int>(l.size());
    return s;
  }
  // Level i (1-based); levels 0 and n are empty.
  const ParamSet &level(int i) const {
    static const ParamSet none;
    if (i < 1 || i > static_cast<int>(levels.size()))
      return none;
    return levels[i - 1];
  }

  void validate(const ChainSpec &spec) const {
    if (static_cast<int>(levels.size()) != spec.n - 1)
      throw ArgumentError("expected " + std::to_string(spec.n - 1) + " parameter levels, got " +
                          std::to_string(levels.size()));
    for (const auto &l : levels) {
      for (std::size_t a = 0; a < l.size(); ++a) {
        for (std::size_t b = a + 1; b < l.size(); ++b)
          if (std::abs(l[a] - l[b]) <= spec.sep_tol)
            throw PoleError(l[a], l[b], "Bethe parameters of one level");
        for (Cx z : spec.inhom)
          if (std::abs(l[a] - z) <= spec.sep_tol)
            throw PoleError(l[a], z, "Bethe parameter at an inhomogeneity");
      }
    }
  }

  // Is the weight subspace these cardinalities land in nonempty?
  bool weight_fits(int L) const {
    int prev = L;
    for (const auto &l : levels) {
      if (static_cast<int>(l.size()) > prev)
        return false;
      prev = static_cast<int>(l.size());
    }
    return true;
  }
};

struct BetheVector {
  BetheParameters params;
  StateVector vec;
  std::vector<std::string> warnings;
};

// One factor T_ij(x) of a monomial.
struct OpFactor {
  int i, j;
  Cx x;
};

// coef · T_{i1 j1}(x1) ⋯ T_{ik jk}(xk), acting on |0⟩ (rightmost first).
struct Monomial {
  Cx coef;
  std::vector<OpFactor> ops;
};

inline StateVector apply_monomials(const ChainModel &model, const std::vector<Monomial> &monos) {
  StateVector out = StateVector::Zero(model.dim());
  for (const auto &m : monos) {
    StateVector w = model.vacuum();
    for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it)
      w = (*model.monodromy(it->x))(it->i, it->j) * w;
    out += m.coef * w;
  }
  return out;
}

// Image under ψ(T_ij) = T_ji: ⟨0| T_{jk ik}(xk) ⋯ T_{j1 i1}(x1), stored as a
// co-vector for the bilinear pairing.
inline StateVector dual_monomials(const ChainModel &model, const std::vector<Monomial> &monos) {
  StateVector out = StateVector::Zero(model.dim());
  for (const auto &m : monos) {
    StateVector w = model.vacuum();
    for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it)
      w = (*model.monodromy(it->x))(it->j, it->i).transpose() * w;
    out += m.coef * w;
  }
  return out;
}

inline Cx prod_lambda(const ChainModel &model, int j, const ParamSet &xs) {
  Cx p = 1.0;
  for (Cx x : xs)
    p *= model.lambda(j, x);
  return p;
}

// Coefficient of the main monomial T_12(t̄^1) T_23(t̄^2) ⋯ |0⟩ under the
// main-term normalization.
inline Cx main_term_coefficient(const ChainModel &model, const BetheParameters &t) {
  Cx p = 1.0;
  const int levels = static_cast<int>(t.levels.size());
  for (int j = 1; j <= levels; ++j) {
    p /= prod_lambda(model, j + 1, t.level(j));
    if (j < levels)
      p /= prod_f(t.level(j + 1), t.level(j), model.c(), model.spec().sep_tol);
  }
  return p;
}

inline std::vector<Monomial> gl2_monomials(const ChainModel &model, const ParamSet &u) {
  Monomial m{1.0 / prod_lambda(model, 2, u), {}};
  for (Cx x : u)
    m.ops.push_back({1, 2, x});
  return {m};
}

// Explicit partition sum for gl3.
inline std::vector<Monomial> gl3_explicit_monomials(const ChainModel &model, const ParamSet &u,
                                                    const ParamSet &v) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  const int a = static_cast<int>(u.size()), b = static_cast<int>(v.size());
  const Cx norm = prod_lambda(model, 3, v) * prod_lambda(model, 2, u);
  std::vector<Monomial> out;
  for (int k = 0; k <= std::min(a, b); ++k)
    for (const auto &pu : enumerate_partitions(a, k))
      for (const auto &pv : enumerate_partitions(b, k)) {
        ParamSet uI = select(u, pu.I), uII = select(u, pu.II);
        ParamSet vI = select(v, pv.I), vII = select(v, pv.II);
        Cx coef = prod_lambda(model, 2, vI) * izergin_korepin(vI, uI, c, tol) / norm;
        coef *= prod_f(vII, vI, c, tol) * prod_f(uII, uI, c, tol) /
                (prod_f(vII, u, c, tol) * prod_f(vI, uI, c, tol));
        Monomial m{coef, {}};
        for (Cx x : uII)
          m.ops.push_back({1, 2, x});
        for (Cx x : uI)
          m.ops.push_back({1, 3, x});
        for (Cx x : vII)
          m.ops.push_back({2, 3, x});
        out.push_back(std::move(m));
      }
  return out;
}

// Recursion in u first (removing the last u), then in v, down to |0⟩.
inline std::vector<Monomial> gl3_recursion_monomials(const ChainModel &model, const ParamSet &u,
                                                     const ParamSet &v) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  if (u.empty()) {
    if (v.empty())
      return {Monomial{1.0, {}}};
    const Cx vk = v.back();
    ParamSet rest(v.begin(), v.end() - 1);
    auto sub = gl3_recursion_monomials(model, u, rest);
    for (auto &m : sub) {
      m.coef /= model.lambda(3, vk);
      m.ops.insert(m.ops.begin(), OpFactor{2, 3, vk});
    }
    return sub;
  }
  const Cx uk = u.back();
  ParamSet ur(u.begin(), u.end() - 1);
  const Cx den = model.lambda(2, uk) * prod_f(v, {uk}, c, tol);
  std::vector<Monomial> out;
  for (auto m : gl3_recursion_monomials(model, ur, v)) {
    m.coef /= den;
    m.ops.insert(m.ops.begin(), OpFactor{1, 2, uk});
    out.push_back(std::move(m));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Cx vi = v[i];
    ParamSet vr = without(v, i);
    const Cx w = model.r(2, vi) * g(vi, uk, c, tol) * prod_f(vr, {vi}, c, tol) / den;
    for (auto m : gl3_recursion_monomials(model, ur, vr)) {
      m.coef *= w;
      m.ops.insert(m.ops.begin(), OpFactor{1, 3, uk});
      out.push_back(std::move(m));
    }
  }
  return out;
}

// Sum of coefficients of monomials built only from T_{j,j+1} operators.
inline Cx extract_main_term(const std::vector<Monomial> &monos) {
  Cx s = 0.0;
  for (const auto &m : monos) {
    bool main = true;
    for (const auto &op : m.ops)
      main = main && op.j == op.i + 1;
    if (main)
      s += m.coef;
  }
  return s;
}

namespace detail {

inline void check_rank(const ChainModel &model, int n, const char *what) {
  if (model.n() != n)
    throw ArgumentError(std::string(what) + " needs rank " + std::to_string(n) + ", chain has " +
                        std::to_string(model.n()));
}

inline BetheVector finish(const ChainModel &model, const BetheParameters &p, StateVector vec) {
  BetheVector bv{p, std::move(vec), {}};
  if (!p.weight_fits(model.L()))
    bv.warnings.push_back("cardinalities exceed the available weight; the vector vanishes");
  return bv;
}

} // namespace detail

inline BetheVector bv_gl2(const ChainModel &model, const ParamSet &u) {
  detail::check_rank(model, 2, "bv_gl2");
  BetheParameters p = BetheParameters::gl2(u);
  p.validate(model.spec());
  return detail::finish(model, p, apply_monomials(model, gl2_monomials(model, u)));
}

inline BetheVector bv_gl3_explicit(const ChainModel &model, const ParamSet &u, const ParamSet &v) {
  detail::check_rank(model, 3, "bv_gl3_explicit");
  BetheParameters p = BetheParameters::gl3(u, v);
  p.validate(model.spec());
  return detail::finish(model, p, apply_monomials(model, gl3_explicit_monomials(model, u, v)));
}

inline BetheVector bv_gl3_recursion(const ChainModel &model, const ParamSet &u,
                                    const ParamSet &v) {
  detail::check_rank(model, 3, "bv_gl3_recursion");
  BetheParameters p = BetheParameters::gl3(u, v);
  p.validate(model.spec());
  return detail::finish(model, p, apply_monomials(model, gl3_recursion_monomials(model, u, v)));
}

inline constexpr int kMaxTraceSlots = 4;

// Trace formula. Auxiliary slots 0..a+b-1 precede the quantum slots. Only the
// basis state with e_21 / e_32 acting nontrivially survives the trace, so a
// single pass suffices.
inline BetheVector bv_gl3_trace(const ChainModel &model, const ParamSet &u, const ParamSet &v) {
  detail::check_rank(model, 3, "bv_gl3_trace");
  BetheParameters p = BetheParameters::gl3(u, v);
  p.validate(model.spec());
  const ChainSpec &spec = model.spec();
  const int n = 3, a = static_cast<int>(u.size()), b = static_cast<int>(v.size()), m = a + b;
  const int L = spec.L(), N = m + L;
  const Cx c = spec.c;
  if (m > kMaxTraceSlots)
    throw CapacityError("trace formula limited to " + std::to_string(kMaxTraceSlots) +
                        " auxiliary slots, requested " + std::to_string(m));
  const long D = spec.dim(), total = ipow(n, N);
  require_dim(total, "trace formula");

  // start: aux digits 1 (first a slots) and 2 (rest), i.e. E applied to |α0⟩
  long in = 0, out_idx = 0;
  for (int s = 0; s < m; ++s) {
    in = in * n + (s < a ? 1 : 2);
    out_idx = out_idx * n + (s < a ? 0 : 1);
  }
  StateVector w = StateVector::Zero(total);
  w(in * D) = 1.0;

  for (int i = 0; i < a; ++i)
    for (int j = b - 1; j >= 0; --j)
      SlotKernel(n, N, {i, a + j}).apply(build_R(n, v[j], u[i], c, spec.sep_tol), w);

  OperatorSlice M = OperatorSlice::Zero(n, n);
  for (int i = 0; i < n; ++i)
    M(i, i) = spec.twist.kappa[i];
  for (int s = m - 1; s >= 0; --s) {
    const Cx x = s < a ? u[s] : v[s - a];
    for (int l = 0; l < L; ++l)
      SlotKernel(n, N, {s, m + l}).apply(build_R(n, x, spec.inhom[l], c, spec.sep_tol), w);
    SlotKernel(n, N, {s}).apply(M, w);
  }
  StateVector vec = w.segment(out_idx * D, D);
  vec /= prod_lambda(model, 2, u) * prod_lambda(model, 3, v) * prod_f(v, u, c, spec.sep_tol);
  return detail::finish(model, p, std::move(vec));
}

enum class Route { Explicit, Trace, Recursion };

inline const char *route_name(Route r) {
  switch (r) {
  case Route::Explicit:
    return "explicit";
  case Route::Trace:
    return "trace";
  case Route::Recursion:
    return "recursion";
  }
  return "?";
}

inline std::vector<Monomial> bethe_monomials(const ChainModel &model, const BetheParameters &t,
                                             Route route = Route::Explicit) {
  if (model.n() == 2)
    return gl2_monomials(model, t.level(1));
  if (model.n() == 3) {
    if (route == Route::Recursion)
      return gl3_recursion_monomials(model, t.level(1), t.level(2));
    return gl3_explicit_monomials(model, t.level(1), t.level(2));
  }
  throw UnsupportedError("Bethe vectors are implemented for n = 2, 3 only");
}

inline BetheVector bethe_vector(const ChainModel &model, const BetheParameters &t,
                                Route route = Route::Explicit) {
  if (model.n() == 2)
    return bv_gl2(model, t.level(1));
  if (model.n() != 3)
    throw UnsupportedError("Bethe vectors are implemented for n = 2, 3 only");
  switch (route) {
  case Route::Trace:
    return bv_gl3_trace(model, t.level(1), t.level(2));
  case Route::Recursion:
    return bv_gl3_recursion(model, t.level(1), t.level(2));
  default:
    return bv_gl3_explicit(model, t.level(1), t.level(2));
  }
}

// ℂ(s̄) as a co-vector: the ψ-image of the monomial expansion.
inline StateVector dual_bv(const ChainModel &model, const BetheParameters &s,
                           Route route = Route::Explicit) {
  s.validate(model.spec());
  return dual_monomials(model, bethe_monomials(model, s, route));
}

// T_{j,j+1}[0] ℬ for Bethe level j (the w → ∞ limit of a parameter added there).
inline StateVector zero_mode_augment(const ChainModel &model, const BetheVector &B, int level) {
  if (level < 1 || level >= model.n())
    throw ArgumentError("zero_mode_augment: level out of range");
  return apply_zero_mode(model.n(), model.L(), level, level + 1, B.vec, 1, model.L());
}

inline BetheParameters with_added(const BetheParameters &t, int level, Cx w) {
  BetheParameters p = t;
  p.levels.at(level - 1).push_back(w);
  return p;
}

// (w/c) ℬ(t̄ with w added to `level`), the finite-w side of the zero-mode limit.
inline StateVector zero_mode_augment_finite_w(const ChainModel &model, const BetheParameters &t,
                                              int level, Cx w, Route route = Route::Explicit) {
  return (w / model.c()) * bethe_vector(model, with_added(t, level, w), route).vec;
}

// Eigenvalues of the Cartan zero modes T_kk[0] on a vector, NaN when it is not
// an eigenvector.
inline std::vector<double> cartan_weights(const ChainModel &model, const StateVector &v,
                                          double tol = 1e-10) {
  std::vector<double> out;
  const double nv = v.norm();
  for (int k = 1; k <= model.n(); ++k) {
    StateVector w = apply_zero_mode(model.n(), model.L(), k, k, v, 1, model.L());
    const Cx mu = nv == 0 ? Cx(0) : v.dot(w) / (nv * nv);
    const bool eig = (w - mu * v).norm() <= tol * std::max(1.0, nv);
    out.push_back(eig ? mu.real() : std::nan(""));
  }
  return out;
}

} // namespace naba
