#pragma once

#include <naba/bae.hpp>
#include <naba/bethe.hpp>
#include <naba/scalar_products.hpp>

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace naba {

struct FormFactorRequest {
  int i = 1, j = 1;
  Cx z = 0.0;
  OnShellCertificate bra, ket;
};

struct FFResult {
  Cx value = 0.0;
  bool selection_zero = false; // cardinalities forbid a nonzero value
  double bound = 0.0;          // ||ℂ(s̄)|| ||T_ij(z)ℬ(t̄)||
};

// Matrix elements below this fraction of their Cauchy-Schwarz bound are zero
// (selection rules, or symmetry zeros such as adjoint operators between singlets).
inline constexpr double kVanishing = 1e-12;

// Denominator for a residual: the largest magnitude, or the bound when all of
// them vanish against it.
inline double residual_scale(std::initializer_list<double> mags, double bound) {
  double m = 0;
  for (double x : mags)
    m = std::max(m, x);
  if (m <= kVanishing * bound)
    return bound > 0 ? bound : std::max(m, 1e-300);
  return m;
}

// Deviation of an approximate route from the exact value; whether the value
// vanishes is decided by the exact route alone.
inline double route_deviation(Cx exact, Cx approx, double bound) {
  const double d = std::abs(exact - approx);
  if (std::abs(exact) <= kVanishing * bound)
    return bound > 0 ? d / bound : d;
  return d / std::max(std::abs(exact), std::abs(approx));
}

// Cardinality shift T_ij produces on a ket: +1 on levels i..j-1 for i<j,
// -1 on levels j..i-1 for i>j.
inline std::vector<int> weight_shift(int n, int i, int j) {
  std::vector<int> d(n - 1, 0);
  for (int l = std::min(i, j); l < std::max(i, j); ++l)
    d[l - 1] = i < j ? 1 : -1;
  return d;
}

inline bool selection_allows(int n, int i, int j, const BetheParameters &s,
                             const BetheParameters &t) {
  std::vector<int> want = t.cardinalities(), d = weight_shift(n, i, j);
  for (std::size_t l = 0; l < want.size(); ++l)
    want[l] += d[l];
  return want == s.cardinalities();
}

// ℂ(s̄) T_ij(z) ℬ(t̄) without certificate checks.
inline Cx ff_unchecked(const ChainModel &model, int i, int j, Cx z, const BetheParameters &s,
                       const BetheParameters &t) {
  return inner(dual_bv(model, s), (*model.monodromy(z))(i, j) * bethe_vector(model, t).vec);
}

inline FFResult ff_direct(const ChainModel &model, const FormFactorRequest &req) {
  require_on_shell(model, req.bra);
  require_on_shell(model, req.ket);
  if (req.bra.twist.kappa != model.spec().twist.kappa ||
      req.ket.twist.kappa != model.spec().twist.kappa)
    throw PreconditionError("form factor states must live on the model's own twist");
  if (req.i < 1 || req.i > model.n() || req.j < 1 || req.j > model.n())
    throw ArgumentError("form factor entry out of range");
  if (!selection_allows(model.n(), req.i, req.j, req.bra.params, req.ket.params))
    return {0.0, true, 0.0};
  const StateVector C = dual_bv(model, req.bra.params);
  const StateVector XB =
      (*model.monodromy(req.z))(req.i, req.j) * bethe_vector(model, req.ket.params).vec;
  return {inner(C, XB), false, C.norm() * XB.norm()};
}

struct TwistDerivativeOptions {
  double step = 1e-5;
  int max_iters = 60;
  bool use_determinant = true; // gl3, j = 2: twisted scalar product via the determinant
};

namespace detail {

struct TwistedBranch {
  ChainModel model;
  BetheParameters s;
  Cx kappa;
};

// Bra roots continued to the chain twisted by κ at entry j.
inline TwistedBranch continue_bra(const ChainModel &model, int j, Cx kappa,
                                  const BetheParameters &s, int max_iters) {
  ChainModel tw(model.spec().with_twist(model.spec().twist *
                                        TwistVector::single(model.n(), j, kappa)));
  BetheParameters cont;
  try {
    cont = newton_iterate(tw, s, max_iters);
  } catch (const Error &e) {
    throw ConvergenceError(std::string("twisted root continuation failed at kappa = ") +
                           shortest(kappa.real()) + ": " + e.what());
  }
  const double res = bae_residual(tw, cont).max_abs();
  if (res > 1e-10)
    throw ConvergenceError("twisted root continuation left BAE residual " + shortest(res));
  if (!detail::same_roots(s, cont, 10 * std::sqrt(std::abs(kappa - 1.0)) + 1e-3))
    throw ConvergenceError("twisted roots jumped to another branch at kappa = " +
                           shortest(kappa.real()));
  return {tw, cont, kappa};
}

inline Cx twisted_sp(const ChainModel &model, int j, const TwistedBranch &br,
                     const BetheParameters &t, bool use_det) {
  if (use_det && model.n() == 3 && j == 2)
    return twisted_det_sp_gl3_unchecked(model, br.s.level(1), br.s.level(2), br.kappa,
                                        t.level(1), t.level(2));
  return brute_inner(br.model, br.s, model, t);
}

} // namespace detail

// 𝔉_jj(z) = d/dκ_j [(τ_κ(z;s̄) - τ(z;t̄)) S^κ(s̄|t̄)] at κ = 1, central differences.
inline Cx ff_diagonal_via_twist(const ChainModel &model, int j, Cx z,
                                const OnShellCertificate &bra, const OnShellCertificate &ket,
                                const TwistDerivativeOptions &opt = {}) {
  require_on_shell(model, bra);
  require_on_shell(model, ket);
  if (bra.params.cardinalities() != ket.params.cardinalities())
    return 0.0;
  const double hstep = opt.step;
  const Cx tau_t = eigenvalue(model, ket.params, z);
  Cx val[2];
  for (int side = 0; side < 2; ++side) {
    const Cx kappa = side == 0 ? 1.0 + hstep : 1.0 - hstep;
    auto br = detail::continue_bra(model, j, kappa, bra.params, opt.max_iters);
    const Cx S = detail::twisted_sp(model, j, br, ket.params, opt.use_determinant);
    val[side] = (eigenvalue(br.model, br.s, z) - tau_t) * S;
  }
  return (val[0] - val[1]) / (2 * hstep);
}

// 𝔽_jj(s̄;t̄) = d/dκ_j S^κ(s̄|t̄) at κ = 1.
inline Cx universal_ff_via_twist(const ChainModel &model, int j, const OnShellCertificate &bra,
                                 const OnShellCertificate &ket,
                                 const TwistDerivativeOptions &opt = {}) {
  require_on_shell(model, bra);
  require_on_shell(model, ket);
  Cx val[2];
  for (int side = 0; side < 2; ++side) {
    const Cx kappa = side == 0 ? 1.0 + opt.step : 1.0 - opt.step;
    auto br = detail::continue_bra(model, j, kappa, bra.params, opt.max_iters);
    val[side] = detail::twisted_sp(model, j, br, ket.params, opt.use_determinant);
  }
  return (val[0] - val[1]) / (2 * opt.step);
}

struct UniversalFF {
  Cx value = 0.0;
  double z_spread = 0.0; // max |ratio(z) - value| over the probes used
  int probes_used = 0;
  double bound = 0.0; // mean of bound(z)/|τ(z;s̄) - τ(z;t̄)|
};

inline UniversalFF universal_ff(const ChainModel &model, int i, int j,
                                const OnShellCertificate &bra, const OnShellCertificate &ket,
                                const std::vector<Cx> &probes) {
  require_on_shell(model, bra);
  require_on_shell(model, ket);
  std::vector<Cx> ratios;
  double bound = 0.0;
  for (Cx z : probes) {
    const Cx ds = eigenvalue(model, bra.params, z) - eigenvalue(model, ket.params, z);
    const double scale = std::abs(eigenvalue(model, ket.params, z)) + 1.0;
    if (std::abs(ds) <= 1e-10 * scale)
      continue;
    FFResult f = ff_direct(model, {i, j, z, bra, ket});
    ratios.push_back(std::abs(f.value) <= kVanishing * f.bound ? Cx(0.0) : f.value / ds);
    bound += f.bound / std::abs(ds);
  }
  if (ratios.empty())
    throw PreconditionError("degenerate pair: eigenvalues coincide at every probe");
  UniversalFF u;
  for (Cx r : ratios)
    u.value += r;
  u.value /= static_cast<double>(ratios.size());
  for (Cx r : ratios)
    u.z_spread = std::max(u.z_spread, std::abs(r - u.value));
  u.probes_used = static_cast<int>(ratios.size());
  u.bound = bound / static_cast<double>(ratios.size());
  return u;
}

// The zero-mode relations between form factors, gl3. Index j as in 𝔉_jj.
//  KetDiagonal:      lim (w/c) 𝔉_jj(z|s̄;{w,t̄})        = 𝔉_{j-1,j}       (w at ket level j-1)
//  BraDiagonal:      lim (w/c) 𝔉_jj(z|{w,s̄};t̄)        = σ 𝔉_{j,j-1}     (w at bra level j-1)
//  KetOffDiagonal:   lim (w/c) 𝔉_{j-1,j}(z|s̄;{w,t̄})   = 𝔉_{j-2,j}       (w at ket level j-2)
//  BraOffDiagonal:   lim (w/c) 𝔉_{j,j-1}(z|{w,s̄};t̄)   = σ 𝔉_{j,j-2}     (w at bra level j-2)
//  BraDiagonalDifference: lim (w/c) 𝔉_{j-1,j}(z|{w,s̄};t̄) = σ (𝔉_jj - 𝔉_{j-1,j-1}) (w at bra level j-1)
// The chain realizes σ = +1, +1, -1 for the three bra-side lines; the
// displayed form of the relations carries σ = -1, -1, +1.
enum class ZeroModeRelation {
  KetDiagonal,
  BraDiagonal,
  KetOffDiagonal,
  BraOffDiagonal,
  BraDiagonalDifference
};

inline const char *relation_name(ZeroModeRelation r) {
  switch (r) {
  case ZeroModeRelation::KetDiagonal:
    return "ket-diagonal";
  case ZeroModeRelation::BraDiagonal:
    return "bra-diagonal";
  case ZeroModeRelation::KetOffDiagonal:
    return "ket-off-diagonal";
  case ZeroModeRelation::BraOffDiagonal:
    return "bra-off-diagonal";
  case ZeroModeRelation::BraDiagonalDifference:
    return "bra-diagonal-difference";
  }
  return "?";
}

struct ZeroModeCheck {
  Cx lhs = 0.0;           // exact zero-mode insertion
  Cx rhs = 0.0;           // realized right side
  Cx rhs_displayed = 0.0; // right side with the displayed sign
  double bound = 0.0;     // Cauchy-Schwarz bound of the left side (||zero mode|| <= L)
  double residual = 0.0;
  double displayed_residual = 0.0;
  std::vector<Cx> w_values;  // finite w used
  std::vector<Cx> finite_w;  // (w/c) 𝔉 with the augmented state
  Cx extrapolated = 0.0;     // linear in 1/w through the last two points
  double finite_w_residual = 0.0; // at the largest w, relative to lhs
  double extrapolated_residual = 0.0;
};

namespace detail {

struct RelationShape {
  bool bra_side;
  int level;      // Bethe level receiving w
  int fi, fj;     // entry of the form factor on the left
  int zi, zj;     // zero mode inserted (T_{zi zj}[0])
  double sign;    // realized sign on the right side
};

inline RelationShape relation_shape(ZeroModeRelation r, int j) {
  switch (r) {
  case ZeroModeRelation::KetDiagonal:
    return {false, j - 1, j, j, j - 1, j, 1.0};
  case ZeroModeRelation::BraDiagonal:
    return {true, j - 1, j, j, j, j - 1, 1.0};
  case ZeroModeRelation::KetOffDiagonal:
    return {false, j - 2, j - 1, j, j - 2, j - 1, 1.0};
  case ZeroModeRelation::BraOffDiagonal:
    return {true, j - 2, j, j - 1, j - 1, j - 2, 1.0};
  case ZeroModeRelation::BraDiagonalDifference:
    return {true, j - 1, j - 1, j, j, j - 1, -1.0};
  }
  throw ArgumentError("unknown relation");
}

} // namespace detail

inline ZeroModeCheck zero_mode_relation_check(const ChainModel &model, ZeroModeRelation rel, int j,
                                              Cx z, const OnShellCertificate &bra,
                                              const OnShellCertificate &ket,
                                              std::vector<Cx> w_values = {1e3, 1e4, 1e5}) {
  if (model.n() != 3)
    throw ArgumentError("zero-mode relations are implemented for gl3");
  const bool off = rel == ZeroModeRelation::KetOffDiagonal || rel == ZeroModeRelation::BraOffDiagonal;
  if (j < (off ? 3 : 2) || j > 3)
    throw ArgumentError("relation index j out of range");
  require_on_shell(model, bra);
  require_on_shell(model, ket);
  const auto sh = detail::relation_shape(rel, j);
  const int n = 3, L = model.L();
  const Cx c = model.c();

  // cardinalities the left side needs
  BetheParameters sa = bra.params, ta = ket.params;
  (sh.bra_side ? sa : ta).levels.at(sh.level - 1).push_back(0.0);
  if (!selection_allows(n, sh.fi, sh.fj, sa, ta))
    throw PreconditionError(std::string("cardinalities do not fit relation ") +
                            relation_name(rel));

  ZeroModeCheck out;
  const StateVector C = dual_bv(model, bra.params);
  const StateVector B = bethe_vector(model, ket.params).vec;
  const auto m = model.monodromy(z);
  if (sh.bra_side) {
    StateVector Cz = covector_zero_mode(n, L, sh.zi, sh.zj, C, 1, L);
    StateVector XB = (*m)(sh.fi, sh.fj) * B;
    out.lhs = inner(Cz, XB);
    out.bound = C.norm() * L * XB.norm();
  } else {
    out.lhs = inner(C, (*m)(sh.fi, sh.fj) * apply_zero_mode(n, L, sh.zi, sh.zj, B, 1, L));
    out.bound = ((*m)(sh.fi, sh.fj).transpose() * C).norm() * L * B.norm();
  }

  Cx rhs;
  switch (rel) {
  case ZeroModeRelation::KetDiagonal:
    rhs = inner(C, (*m)(j - 1, j) * B);
    break;
  case ZeroModeRelation::BraDiagonal:
    rhs = inner(C, (*m)(j, j - 1) * B);
    break;
  case ZeroModeRelation::KetOffDiagonal:
    rhs = inner(C, (*m)(j - 2, j) * B);
    break;
  case ZeroModeRelation::BraOffDiagonal:
    rhs = inner(C, (*m)(j, j - 2) * B);
    break;
  case ZeroModeRelation::BraDiagonalDifference:
    rhs = inner(C, ((*m)(j, j) - (*m)(j - 1, j - 1)) * B);
    break;
  }
  out.rhs = sh.sign * rhs;
  out.rhs_displayed = (sh.bra_side ? -sh.sign : sh.sign) * rhs;
  const double scale = residual_scale({std::abs(out.lhs), std::abs(out.rhs)}, out.bound);
  out.residual = std::abs(out.lhs - out.rhs) / scale;
  out.displayed_residual = std::abs(out.lhs - out.rhs_displayed) / scale;

  // finite-w route: the augmented state is off-shell but the product is defined
  for (Cx w : w_values) {
    Cx v;
    if (sh.bra_side) {
      StateVector Cw = dual_bv(model, with_added(bra.params, sh.level, w));
      v = (w / c) * inner(Cw, (*m)(sh.fi, sh.fj) * B);
    } else {
      StateVector Bw = bethe_vector(model, with_added(ket.params, sh.level, w)).vec;
      v = (w / c) * inner(C, (*m)(sh.fi, sh.fj) * Bw);
    }
    out.w_values.push_back(w);
    out.finite_w.push_back(v);
  }
  if (!out.finite_w.empty()) {
    const std::size_t k = out.finite_w.size() - 1;
    out.finite_w_residual = std::abs(out.finite_w[k] - out.lhs) / scale;
    out.extrapolated = out.finite_w[k];
    if (k >= 1) {
      const Cx w1 = out.w_values[k - 1], w2 = out.w_values[k];
      out.extrapolated = (w2 * out.finite_w[k] - w1 * out.finite_w[k - 1]) / (w2 - w1);
    }
    out.extrapolated_residual = std::abs(out.extrapolated - out.lhs) / scale;
  }
  return out;
}

struct CompositeCheck {
  Cx lhs = 0.0;      // ℂ(s̄) T^(1)_ij[0] ℬ(t̄)
  Cx rhs = 0.0;      // (∏ r^(1) ratios - 1) 𝔽_ij
  Cx universal = 0.0;
  double bound = 0.0; // Cauchy-Schwarz bound of the left side
  double residual = 0.0;
  std::vector<Cx> local; // ℂ(s̄)(ℒ_l)_ij[0]ℬ(t̄), l = 1..L
  double telescoping_residual = 0.0; // |Σ_l local - ℂ T_ij[0] ℬ|, relative
};

inline CompositeCheck composite_ff_check(const ChainModel &model, int m, int i, int j,
                                         const OnShellCertificate &bra,
                                         const OnShellCertificate &ket,
                                         const std::vector<Cx> &probes) {
  if (model.n() != 3)
    throw ArgumentError("composite identity is implemented for gl3");
  CompositeSplit split = composite_split(model.spec(), m);
  require_on_shell(model, bra);
  require_on_shell(model, ket);
  const int n = 3, L = model.L();
  const StateVector C = dual_bv(model, bra.params);
  const StateVector B = bethe_vector(model, ket.params).vec;
  CompositeCheck out;
  out.lhs = inner(C, apply_zero_mode(n, L, i, j, B, 1, m));
  out.bound = C.norm() * m * B.norm();
  Cx ratio = 1.0;
  for (int k = 1; k <= 2; ++k) {
    for (Cx x : bra.params.level(k))
      ratio *= split.r1(k, x);
    for (Cx x : ket.params.level(k))
      ratio /= split.r1(k, x);
  }
  out.universal = universal_ff(model, i, j, bra, ket, probes).value;
  out.rhs = (ratio - 1.0) * out.universal;
  out.residual = std::abs(out.lhs - out.rhs) /
                 residual_scale({std::abs(out.lhs), std::abs(out.rhs)}, out.bound);
  Cx sum = 0.0;
  double mag = 0.0;
  for (int l = 1; l <= L; ++l) {
    out.local.push_back(inner(C, apply_zero_mode(n, L, i, j, B, l, l)));
    sum += out.local.back();
    mag = std::max(mag, std::abs(out.local.back()));
  }
  const Cx full = inner(C, apply_zero_mode(n, L, i, j, B, 1, L));
  out.telescoping_residual =
      std::abs(sum - full) / residual_scale({mag, std::abs(full)}, C.norm() * L * B.norm());
  return out;
}

} // namespace naba
