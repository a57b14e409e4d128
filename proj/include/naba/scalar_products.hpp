#pragma once

#include <naba/bae.hpp>
#include <naba/bethe.hpp>

#include <functional>
#include <numbers>
#include <optional>

namespace naba {

// ℂ(s̄)ℬ(t̄) by explicit vectors.
inline Cx brute_inner(const ChainModel &model, const BetheParameters &s, const BetheParameters &t,
                      Route route = Route::Explicit) {
  return inner(dual_bv(model, s, route), bethe_vector(model, t, route).vec);
}

// Twisted dual from `bra_model` paired with a ket on `ket_model` (same quantum space).
inline Cx brute_inner(const ChainModel &bra_model, const BetheParameters &s,
                      const ChainModel &ket_model, const BetheParameters &t) {
  return inner(dual_bv(bra_model, s), bethe_vector(ket_model, t).vec);
}

// Z(s̄|t̄) for matching nested sets.
using HighestCoefficient = std::function<Cx(const BetheParameters &, const BetheParameters &)>;

// gl2: Z(s̄|t̄) = K(t̄|s̄).
inline HighestCoefficient izergin_korepin_gl2(Cx c, double tol = kSepTol) {
  return [c, tol](const BetheParameters &s, const BetheParameters &t) {
    return izergin_korepin(t.level(1), s.level(1), c, tol);
  };
}

struct SumFormulaResult {
  Cx value = 0.0;
  double magnitude = 0; // Σ|term|, the scale when the terms cancel
  std::size_t terms = 0;
};

// Sum over per-level partitions #s̄_I = #t̄_I of W_part · r(s̄_I) r(t̄_II).
inline SumFormulaResult sum_formula(const ChainModel &model, const BetheParameters &s,
                                    const BetheParameters &t,
                                    std::optional<HighestCoefficient> Z = std::nullopt) {
  const int n = model.n();
  if (s.cardinalities() != t.cardinalities())
    throw ArgumentError("sum_formula: cardinalities of s̄ and t̄ differ");
  if (static_cast<int>(s.levels.size()) != n - 1)
    throw ArgumentError("sum_formula: wrong number of levels");
  if (!Z) {
    if (n != 2)
      throw UnsupportedError("sum_formula: no built-in highest coefficient for n = " +
                             std::to_string(n) + "; supply one");
    Z = izergin_korepin_gl2(model.c(), model.spec().sep_tol);
  }
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  const int levels = n - 1;
  SumFormulaResult res;
  BetheParameters sI, sII, tI, tII;
  sI.levels.resize(levels);
  sII.levels.resize(levels);
  tI.levels.resize(levels);
  tII.levels.resize(levels);

  std::function<void(int)> rec = [&](int j) {
    if (j == levels) {
      Cx w = (*Z)(sI, tI) * (*Z)(tII, sII);
      for (int k = 1; k <= levels; ++k) {
        w *= prod_f(sII.level(k), sI.level(k), c, tol) * prod_f(tI.level(k), tII.level(k), c, tol);
        for (Cx x : sI.level(k))
          w *= model.r(k, x);
        for (Cx x : tII.level(k))
          w *= model.r(k, x);
      }
      for (int k = 1; k < levels; ++k)
        w /= prod_f(sII.level(k + 1), sI.level(k), c, tol) *
             prod_f(tI.level(k + 1), tII.level(k), c, tol);
      res.value += w;
      res.magnitude += std::abs(w);
      ++res.terms;
      return;
    }
    const int a = static_cast<int>(s.levels[j].size());
    for (int k = 0; k <= a; ++k)
      for (const auto &ps : enumerate_partitions(a, k))
        for (const auto &pt : enumerate_partitions(a, k)) {
          sI.levels[j] = select(s.levels[j], ps.I);
          sII.levels[j] = select(s.levels[j], ps.II);
          tI.levels[j] = select(t.levels[j], pt.I);
          tII.levels[j] = select(t.levels[j], pt.II);
          rec(j + 1);
        }
  };
  rec(0);
  return res;
}

// ∏_j Σ_k C(a_j,k)^2
inline std::size_t sum_formula_term_count(const std::vector<int> &card) {
  std::size_t total = 1;
  for (int a : card) {
    std::size_t s = 0;
    for (int k = 0; k <= a; ++k) {
      std::size_t b = 1;
      for (int i = 0; i < k; ++i)
        b = b * (a - i) / (i + 1);
      s += b * b;
    }
    total *= s;
  }
  return total;
}

// S(t̄) = ∏_i ∏_k f(t̄^(i)_k,t^(i)_k)/f(t̄^(i+1),t^(i)_k) · det G, unchecked.
inline Cx norm_det_unchecked(const ChainModel &model, const BetheParameters &t) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  Cx pre = 1.0;
  for (int i = 1; i <= static_cast<int>(t.levels.size()); ++i) {
    const ParamSet &lv = t.level(i);
    for (std::size_t k = 0; k < lv.size(); ++k)
      pre *= prod_f(without(lv, k), {lv[k]}, c, tol) / prod_f(t.level(i + 1), {lv[k]}, c, tol);
  }
  return pre * determinant(gaudin_matrix(model, t));
}

inline Cx norm_det(const ChainModel &model, const OnShellCertificate &cert) {
  ChainModel m = model_for(model, cert);
  require_on_shell(m, cert);
  return norm_det_unchecked(m, cert.params);
}

struct OrthogonalityResult {
  Cx pairing, norm_a, norm_b;
  double residual; // |pairing| / sqrt(|S_a||S_b|)
};

inline OrthogonalityResult orthogonality_check(const ChainModel &model,
                                               const OnShellCertificate &A,
                                               const OnShellCertificate &B) {
  ChainModel m = model_for(model, A);
  if (A.twist.kappa != B.twist.kappa)
    throw PreconditionError("orthogonality needs both states on the same twisted chain");
  require_on_shell(m, A);
  require_on_shell(m, B);
  if (A.params.cardinalities() != B.params.cardinalities())
    throw PreconditionError("orthogonality needs equal cardinalities");
  OrthogonalityResult r;
  r.pairing = brute_inner(m, A.params, B.params);
  r.norm_a = norm_det_unchecked(m, A.params);
  r.norm_b = norm_det_unchecked(m, B.params);
  r.residual = std::abs(r.pairing) / std::sqrt(std::abs(r.norm_a) * std::abs(r.norm_b));
  return r;
}

namespace detail {

// Column ξ of the twisted determinant matrix in pole-free form. Base weights λ
// belong to the ket's chain; κ is the extra diag(1,κ,1) twist of the bra.
inline Eigen::VectorXcd detrep_column(const ChainModel &base, const ParamSet &uC,
                                      const ParamSet &vC, Cx kappa, const ParamSet &uB,
                                      const ParamSet &vB, Cx x) {
  const Cx c = base.c();
  const std::size_t a = uC.size(), b = vB.size();
  Eigen::VectorXcd col(a + b);
  const Cx l12 = base.lambda(1, x) / base.lambda(2, x);
  const Cx l32 = base.lambda(3, x) / base.lambda(2, x);
  for (std::size_t j = 0; j < a; ++j) {
    ParamSet rest = without(uC, j);
    Cx t1 = l12 * prod_ginv(vC, {x}, c);
    for (Cx u : rest)
      t1 *= -h(u, x, c);
    Cx t2 = kappa * prod_h({x}, rest, c) * prod_h(vC, {x}, c);
    col(j) = (c / (uC[j] - x)) * (t1 - t2);
  }
  for (std::size_t j = 0; j < b; ++j) {
    ParamSet rest = without(vB, j);
    Cx t1 = prod_h({x}, uB, c) * prod_h(rest, {x}, c);
    Cx t2 = l32 * prod_ginv({x}, uB, c);
    for (Cx v : rest)
      t2 *= -h(x, v, c);
    col(a + j) = (c / (vB[j] - x)) * (t1 - t2);
  }
  return col;
}

} // namespace detail

struct DetrepOptions {
  double near_tol = 1e-3; // relative to |c|: closer than this, average over a circle
  int circle_points = 32;
};

// ℂ^κ(ū^C,v̄^C) ℬ(ū^B,v̄^B) by the twisted determinant representation, given
// raw parameter sets. `base` is the ket's chain.
inline Cx twisted_det_sp_gl3_unchecked(const ChainModel &base, const ParamSet &uC,
                                       const ParamSet &vC, Cx kappa, const ParamSet &uB,
                                       const ParamSet &vB, const DetrepOptions &opt = {}) {
  if (base.n() != 3)
    throw ArgumentError("twisted determinant representation needs n = 3");
  if (uC.size() != uB.size() || vC.size() != vB.size())
    throw ArgumentError("twisted determinant representation needs matching cardinalities");
  const Cx c = base.c();
  const double tol = base.spec().sep_tol;
  const std::size_t a = uC.size(), b = vC.size();
  ParamSet xi = uB;
  xi.insert(xi.end(), vC.begin(), vC.end());
  for (std::size_t p = 0; p < xi.size(); ++p)
    for (std::size_t q = p + 1; q < xi.size(); ++q)
      if (std::abs(xi[p] - xi[q]) <= tol)
        throw PoleError(xi[p], xi[q], "column points of the determinant");

  // removable singular points of the entries, and the true poles
  ParamSet removable = uC;
  removable.insert(removable.end(), vB.begin(), vB.end());
  const double near = opt.near_tol * std::abs(c);

  Eigen::MatrixXcd M(a + b, a + b);
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const Cx x = xi[k];
    double dmin = std::numeric_limits<double>::infinity();
    for (Cx p : removable)
      dmin = std::min(dmin, std::abs(x - p));
    if (dmin >= near) {
      M.col(k) = detail::detrep_column(base, uC, vC, kappa, uB, vB, x);
      continue;
    }
    double far = std::abs(c);
    for (Cx z : base.spec().inhom)
      far = std::min(far, std::abs(x - z));
    for (Cx p : removable)
      if (std::abs(x - p) >= near)
        far = std::min(far, std::abs(x - p));
    const double rho = std::max(0.25 * far, 10 * dmin);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(a + b);
    for (int m = 0; m < opt.circle_points; ++m) {
      const double th = 2 * std::numbers::pi * (m + 0.5) / opt.circle_points;
      acc += detail::detrep_column(base, uC, vC, kappa, uB, vB, x + std::polar(rho, th));
    }
    M.col(k) = acc / static_cast<double>(opt.circle_points);
  }
  const Cx pre = prod_g(vC, uB, c, tol) * prod_g(vC, uB, c, tol) * delta_prime(uC, c, tol) *
                 delta(uB, c, tol) * delta_prime(vC, c, tol) * delta(vB, c, tol) /
                 (std::pow(kappa, static_cast<double>(b)) * prod_f(vC, uB, c, tol) *
                  prod_f(vC, uC, c, tol) * prod_f(vB, uB, c, tol));
  return pre * determinant(M);
}

// Certificate-checked version: `bra` must be on-shell on the chain twisted by
// diag(1,κ,1) relative to `base`, `ket` on-shell on `base`.
inline Cx twisted_det_sp_gl3(const ChainModel &base, const OnShellCertificate &bra, Cx kappa,
                             const OnShellCertificate &ket, const DetrepOptions &opt = {}) {
  const TwistVector want = base.spec().twist * TwistVector::single(3, 2, kappa);
  if (ket.twist.kappa != base.spec().twist.kappa)
    throw PreconditionError("ket certificate is not for the untwisted chain");
  if (bra.twist.kappa != want.kappa)
    throw PreconditionError("bra certificate is not for the chain twisted by diag(1,κ,1)");
  require_on_shell(base, ket);
  require_on_shell(model_for(base, bra), bra);
  return twisted_det_sp_gl3_unchecked(base, bra.params.level(1), bra.params.level(2), kappa,
                                      ket.params.level(1), ket.params.level(2), opt);
}

} // namespace naba
