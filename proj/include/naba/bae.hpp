#pragma once

#include <naba/bethe.hpp>
#include <naba/chain.hpp>
#include <naba/random.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace naba {

// τ(z|t̄) = Σ_i λ_i(z) f(z,t̄^(i-1)) f(t̄^(i),z)
inline Cx eigenvalue(const ChainModel &model, const BetheParameters &t, Cx z) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  Cx s = 0.0;
  for (int i = 1; i <= model.n(); ++i)
    s += model.lambda(i, z) * prod_f({z}, t.level(i - 1), c, tol) *
         prod_f(t.level(i), {z}, c, tol);
  return s;
}

// Φ^(i)_k = r_i(t) f(t̄_k,t)/f(t,t̄_k) · f(t,t̄^(i-1))/f(t̄^(i+1),t) for t = t^(i)_k.
inline Cx bae_phi(const ChainModel &model, const BetheParameters &t, int i, int k) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  const ParamSet &lv = t.level(i);
  const Cx x = lv[k];
  ParamSet rest = without(lv, k);
  return model.r(i, x) * prod_f(rest, {x}, c, tol) / prod_f({x}, rest, c, tol) *
         prod_f({x}, t.level(i - 1), c, tol) / prod_f(t.level(i + 1), {x}, c, tol);
}

struct BAEResidual {
  std::vector<std::vector<Cx>> values; // Φ^(i)_k - 1

  double max_abs() const {
    double m = 0;
    for (const auto &l : values)
      for (Cx v : l)
        m = std::max(m, std::abs(v));
    return m;
  }
};

inline BAEResidual bae_residual(const ChainModel &model, const BetheParameters &t) {
  BAEResidual r;
  for (int i = 1; i <= static_cast<int>(t.levels.size()); ++i) {
    std::vector<Cx> lv;
    for (int k = 0; k < static_cast<int>(t.level(i).size()); ++k)
      lv.push_back(bae_phi(model, t, i, k) - 1.0);
    r.values.push_back(std::move(lv));
  }
  return r;
}

// Subset form of the level-i equations for a subset I of t̄^(i):
// r_i(t̄_I) f(t̄_II,t̄_I)/f(t̄_I,t̄_II) · f(t̄_I,t̄^(i-1))/f(t̄^(i+1),t̄_I) - 1.
inline Cx bae_subset_residual(const ChainModel &model, const BetheParameters &t, int i,
                              const SetPartition &part) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  ParamSet tI = select(t.level(i), part.I), tII = select(t.level(i), part.II);
  Cx r = 1.0;
  for (Cx x : tI)
    r *= model.r(i, x);
  return r * prod_f(tII, tI, c, tol) / prod_f(tI, tII, c, tol) *
             prod_f(tI, t.level(i - 1), c, tol) / prod_f(t.level(i + 1), tI, c, tol) -
         1.0;
}

// The twisted gl3 equations with diag(1,κ,1) on top of the model's own twist.
inline BAEResidual twisted_bae_residual_gl3(const ChainModel &model, const ParamSet &u,
                                            const ParamSet &v, Cx kappa) {
  if (model.n() != 3)
    throw ArgumentError("twisted_bae_residual_gl3 needs n = 3");
  if (kappa == Cx(0.0))
    throw ArgumentError("twist parameter must be nonzero");
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  BAEResidual r;
  r.values.resize(2);
  for (std::size_t j = 0; j < u.size(); ++j) {
    ParamSet rest = without(u, j);
    Cx lhs = model.r(1, u[j]) * prod_f(rest, {u[j]}, c, tol) / prod_f({u[j]}, rest, c, tol) /
             prod_f(v, {u[j]}, c, tol);
    r.values[0].push_back(lhs / kappa - 1.0);
  }
  for (std::size_t j = 0; j < v.size(); ++j) {
    ParamSet rest = without(v, j);
    Cx lhs = model.r(2, v[j]) * prod_f(rest, {v[j]}, c, tol) / prod_f({v[j]}, rest, c, tol) *
             prod_f({v[j]}, u, c, tol);
    r.values[1].push_back(kappa * lhs - 1.0);
  }
  return r;
}

// τ_κ(z) = λ1 f(ū,z) + κ λ2 f(z,ū) f(v̄,z) + λ3 f(z,v̄)
inline Cx tau_kappa_gl3(const ChainModel &model, const ParamSet &u, const ParamSet &v, Cx kappa,
                        Cx z) {
  const Cx c = model.c();
  const double tol = model.spec().sep_tol;
  return model.lambda(1, z) * prod_f(u, {z}, c, tol) +
         kappa * model.lambda(2, z) * prod_f({z}, u, c, tol) * prod_f(v, {z}, c, tol) +
         model.lambda(3, z) * prod_f({z}, v, c, tol);
}

// φ(d) = c/(d(d+c)), so ∂_x log f(x,y) = -φ(x-y) and ∂_y log f(x,y) = φ(x-y).
inline Cx dlogf_kernel(Cx d, Cx c) { return c / (d * (d + c)); }

// G^(i,j)_{k,l} = -c ∂ log Φ^(i)_k / ∂ t^(j)_l, in closed form. Rows and
// columns run over the flattened levels.
inline Eigen::MatrixXcd gaudin_matrix(const ChainModel &model, const BetheParameters &t) {
  const Cx c = model.c();
  const int levels = static_cast<int>(t.levels.size());
  std::vector<int> offset(levels + 2, 0);
  for (int i = 1; i <= levels; ++i)
    offset[i + 1] = offset[i] + static_cast<int>(t.level(i).size());
  const int N = offset[levels + 1];
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N, N);
  for (int i = 1; i <= levels; ++i) {
    const ParamSet &lv = t.level(i);
    for (int k = 0; k < static_cast<int>(lv.size()); ++k) {
      const Cx x = lv[k];
      const int row = offset[i] + k;
      Cx diag = model.weights().dlog_r(i, x);
      for (int l = 0; l < static_cast<int>(lv.size()); ++l) {
        if (l == k)
          continue;
        Cx s = dlogf_kernel(lv[l] - x, c) + dlogf_kernel(x - lv[l], c);
        diag += s;
        G(row, offset[i] + l) = c * s;
      }
      if (i > 1)
        for (int m = 0; m < static_cast<int>(t.level(i - 1).size()); ++m) {
          Cx s = dlogf_kernel(x - t.level(i - 1)[m], c);
          diag -= s;
          G(row, offset[i - 1] + m) = -c * s;
        }
      if (i < levels)
        for (int m = 0; m < static_cast<int>(t.level(i + 1).size()); ++m) {
          Cx s = dlogf_kernel(t.level(i + 1)[m] - x, c);
          diag -= s;
          G(row, offset[i + 1] + m) = -c * s;
        }
      G(row, row) = -c * diag;
    }
  }
  return G;
}

inline std::vector<Cx> flatten(const BetheParameters &t) {
  std::vector<Cx> x;
  for (const auto &l : t.levels)
    x.insert(x.end(), l.begin(), l.end());
  return x;
}

inline BetheParameters unflatten(const std::vector<Cx> &x, const std::vector<int> &card) {
  BetheParameters t;
  std::size_t pos = 0;
  for (int a : card) {
    t.levels.emplace_back(x.begin() + pos, x.begin() + pos + a);
    pos += a;
  }
  return t;
}

// log Φ, principal branch per component, flattened.
inline Eigen::VectorXcd log_bae(const ChainModel &model, const BetheParameters &t) {
  std::vector<Cx> out;
  for (int i = 1; i <= static_cast<int>(t.levels.size()); ++i)
    for (int k = 0; k < static_cast<int>(t.level(i).size()); ++k)
      out.push_back(std::log(bae_phi(model, t, i, k)));
  return Eigen::Map<Eigen::VectorXcd>(out.data(), out.size());
}

// Shortest round-trip decimal of a double.
inline std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// FNV-1a digest of rank, coupling and inhomogeneities. The twist is not part of
// it: twisted and untwisted states of one chain share the digest.
inline std::string chain_digest(const ChainSpec &spec) {
  std::string s = "n=" + std::to_string(spec.n) + ";c=" + shortest(spec.c.real()) + "," +
                  shortest(spec.c.imag()) + ";z=";
  for (Cx z : spec.inhom)
    s += shortest(z.real()) + "," + shortest(z.imag()) + ";";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct OnShellThresholds {
  double bae = 1e-11;
  double eigen = 1e-9;
};

struct OnShellCertificate {
  BetheParameters params;
  double max_bae_residual = std::numeric_limits<double>::infinity();
  double eigencheck_residual = std::numeric_limits<double>::infinity();
  TwistVector twist;
  std::string chain_digest;

  bool valid(const OnShellThresholds &th = {}) const {
    return max_bae_residual <= th.bae && eigencheck_residual <= th.eigen;
  }
};

// Fixed probe points around the chain, away from the real axis.
inline std::vector<Cx> probe_points(const ChainSpec &spec, int count = 3) {
  static const Cx base[] = {{0.73, 0.41}, {-0.58, 0.93}, {0.21, -0.77}, {1.17, 0.63},
                            {-0.94, -0.36}, {0.48, 1.22}, {-1.31, 0.57}};
  Cx center = 0.0;
  for (Cx z : spec.inhom)
    center += z;
  center /= static_cast<double>(spec.inhom.size());
  const double scale = 1.0 + std::abs(spec.c);
  std::vector<Cx> out;
  for (int k = 0; k < count; ++k)
    out.push_back(center + scale * base[k % 7] * (1.0 + 0.1 * (k / 7)));
  return out;
}

// max_z ||𝔱(z)B - τ(z)B|| / ||B||; infinity for a null vector.
inline double eigencheck(const ChainModel &model, const BetheParameters &t,
                         const std::vector<Cx> &probes) {
  const StateVector B = bethe_vector(model, t).vec;
  const double nb = B.norm();
  if (!(nb > 1e-300))
    return std::numeric_limits<double>::infinity();
  double res = 0;
  for (Cx z : probes) {
    const auto m = model.monodromy(z);
    StateVector tb = StateVector::Zero(B.size());
    for (int i = 1; i <= model.n(); ++i)
      tb += (*m)(i, i) * B;
    res = std::max(res, (tb - eigenvalue(model, t, z) * B).norm() / nb);
  }
  return res;
}

// Co-vector version: ||ℂ𝔱(z) - τ(z)ℂ|| / ||ℂ||.
inline double dual_eigencheck(const ChainModel &model, const BetheParameters &s,
                              const std::vector<Cx> &probes) {
  const StateVector C = dual_bv(model, s);
  const double nc = C.norm();
  if (!(nc > 1e-300))
    return std::numeric_limits<double>::infinity();
  double res = 0;
  for (Cx z : probes) {
    StateVector ct = model.transfer(z).transpose() * C;
    res = std::max(res, (ct - eigenvalue(model, s, z) * C).norm() / nc);
  }
  return res;
}

inline OnShellCertificate certify(const ChainModel &model, const BetheParameters &t) {
  t.validate(model.spec());
  OnShellCertificate cert;
  cert.params = t;
  cert.twist = model.spec().twist;
  cert.chain_digest = chain_digest(model.spec());
  cert.max_bae_residual = bae_residual(model, t).max_abs();
  if (model.n() <= 3)
    cert.eigencheck_residual = eigencheck(model, t, probe_points(model.spec()));
  return cert;
}

// The chain a certificate belongs to: same rank, coupling and inhomogeneities,
// with the certificate's twist.
inline ChainModel model_for(const ChainModel &base, const OnShellCertificate &cert) {
  if (cert.chain_digest != chain_digest(base.spec()))
    throw DigestError("certificate digest " + cert.chain_digest + " does not match chain " +
                      chain_digest(base.spec()));
  if (cert.twist.kappa == base.spec().twist.kappa)
    return base;
  return ChainModel(base.spec().with_twist(cert.twist));
}

inline void require_on_shell(const ChainModel &model, const OnShellCertificate &cert,
                             const OnShellThresholds &th = {}) {
  if (cert.chain_digest != chain_digest(model.spec()))
    throw DigestError("certificate belongs to a different chain");
  if (!cert.valid(th))
    throw PreconditionError("state is not certified on-shell (BAE residual " +
                            shortest(cert.max_bae_residual) + ", eigencheck " +
                            shortest(cert.eigencheck_residual) + ")");
}

struct SolveOptions {
  int max_iters = 200;
  int auto_seeds = 0; // extra seeds drawn around the inhomogeneities
  std::uint64_t rng_seed = 0;
  double dedup_tol = 1e-6;
  double collision_tol = 1e-6;
  OnShellThresholds thresholds;
};

struct SolveFailure {
  int seed_index;
  std::string reason;
};

struct SolveResult {
  std::vector<OnShellCertificate> certificates;
  std::vector<OnShellCertificate> uncertified; // converged BAE, eigencheck unavailable (n > 3)
  std::vector<SolveFailure> failures;
};

namespace detail {

inline bool cx_less(Cx a, Cx b) {
  if (a.real() != b.real())
    return a.real() < b.real();
  return a.imag() < b.imag();
}

inline BetheParameters sorted_levels(BetheParameters t) {
  for (auto &l : t.levels)
    std::sort(l.begin(), l.end(), cx_less);
  return t;
}

// Same sets up to within-level permutation.
inline bool same_roots(const BetheParameters &a, const BetheParameters &b, double tol) {
  if (a.cardinalities() != b.cardinalities())
    return false;
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    std::vector<bool> used(b.levels[i].size(), false);
    for (Cx x : a.levels[i]) {
      bool found = false;
      for (std::size_t k = 0; k < b.levels[i].size() && !found; ++k)
        if (!used[k] && std::abs(x - b.levels[i][k]) <= tol)
          used[k] = found = true;
      if (!found)
        return false;
    }
  }
  return true;
}

inline bool lex_less(const BetheParameters &a, const BetheParameters &b) {
  std::vector<Cx> x = flatten(a), y = flatten(b);
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(), cx_less);
}

// Collisions within a level, with inhomogeneities, or across neighbouring
// levels (poles of f).
inline std::optional<std::string> collision(const ChainSpec &spec, const BetheParameters &t,
                                            double tol) {
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const ParamSet &l = t.levels[i];
    for (std::size_t a = 0; a < l.size(); ++a) {
      for (std::size_t b = a + 1; b < l.size(); ++b)
        if (std::abs(l[a] - l[b]) <= tol)
          return "roots collide within level " + std::to_string(i + 1);
      for (Cx z : spec.inhom)
        if (std::abs(l[a] - z) <= tol)
          return "root hits an inhomogeneity";
      if (i + 1 < t.levels.size())
        for (Cx y : t.levels[i + 1])
          if (std::abs(l[a] - y) <= tol)
            return "roots of neighbouring levels collide";
    }
  }
  return std::nullopt;
}

} // namespace detail

namespace detail {

// One linear factor a·x_p + b·x_q + k of the cleared equations (p, q < 0: absent).
struct LinFactor {
  int p;
  Cx a;
  int q;
  Cx b;
  Cx k;
  Cx value(const std::vector<Cx> &x) const {
    return (p >= 0 ? a * x[p] : 0.0) + (q >= 0 ? b * x[q] : 0.0) + k;
  }
};

// Value and gradient of a product of linear factors.
inline Cx product_with_gradient(const std::vector<LinFactor> &fs, const std::vector<Cx> &x,
                                Eigen::Ref<Eigen::RowVectorXcd> grad) {
  const std::size_t m = fs.size();
  std::vector<Cx> v(m), pre(m + 1, 1.0), suf(m + 1, 1.0);
  for (std::size_t f = 0; f < m; ++f)
    v[f] = fs[f].value(x);
  for (std::size_t f = 0; f < m; ++f)
    pre[f + 1] = pre[f] * v[f];
  for (std::size_t f = m; f-- > 0;)
    suf[f] = suf[f + 1] * v[f];
  for (std::size_t f = 0; f < m; ++f) {
    const Cx others = pre[f] * suf[f + 1];
    if (fs[f].p >= 0)
      grad(fs[f].p) += fs[f].a * others;
    if (fs[f].q >= 0)
      grad(fs[f].q) += fs[f].b * others;
  }
  return pre[m];
}

// Φ^(i)_k = N_k / D_k with both sides cleared of denominators; returns
// (N - D)/∏_{l≠k}(t_k - t_l) and its Jacobian. Unlike log Φ this does not
// flatten out at infinity.
inline Eigen::VectorXcd cleared_bae(const ChainModel &model, const std::vector<Cx> &x,
                                    const std::vector<int> &card, Eigen::MatrixXcd &J) {
  const Cx c = model.c();
  const auto &spec = model.spec();
  const int N = static_cast<int>(x.size());
  std::vector<int> offset(card.size() + 1, 0);
  for (std::size_t i = 0; i < card.size(); ++i)
    offset[i + 1] = offset[i] + card[i];
  Eigen::VectorXcd F(N);
  J = Eigen::MatrixXcd::Zero(N, N);
  const int levels = static_cast<int>(card.size());
  for (int i = 1; i <= levels; ++i)
    for (int k = 0; k < card[i - 1]; ++k) {
      const int p = offset[i - 1] + k;
      std::vector<LinFactor> num, den;
      num.push_back({-1, 0.0, -1, 0.0, spec.twist.kappa[i - 1]});
      den.push_back({-1, 0.0, -1, 0.0, spec.twist.kappa[i]});
      if (i == 1)
        for (Cx z : spec.inhom) {
          num.push_back({p, 1.0, -1, 0.0, c - z});
          den.push_back({p, 1.0, -1, 0.0, -z});
        }
      for (int l = 0; l < card[i - 1]; ++l) {
        if (l == k)
          continue;
        const int q = offset[i - 1] + l;
        num.push_back({p, 1.0, q, -1.0, -c});
        den.push_back({p, 1.0, q, -1.0, c});
      }
      if (i > 1)
        for (int l = 0; l < card[i - 2]; ++l) {
          const int q = offset[i - 2] + l;
          num.push_back({p, 1.0, q, -1.0, c});
          den.push_back({p, 1.0, q, -1.0, 0.0});
        }
      if (i < levels)
        for (int l = 0; l < card[i]; ++l) {
          const int q = offset[i] + l;
          num.push_back({p, -1.0, q, 1.0, 0.0});
          den.push_back({p, -1.0, q, 1.0, c});
        }
      Eigen::RowVectorXcd gn = Eigen::RowVectorXcd::Zero(N), gd = Eigen::RowVectorXcd::Zero(N);
      F(p) = product_with_gradient(num, x, gn) - product_with_gradient(den, x, gd);
      J.row(p) = gn - gd;
      // divide out coinciding roots, which solve the cleared equations spuriously
      Cx P = 1.0;
      Eigen::RowVectorXcd dlogP = Eigen::RowVectorXcd::Zero(N);
      for (int l = 0; l < card[i - 1]; ++l) {
        if (l == k)
          continue;
        const int q = offset[i - 1] + l;
        const Cx d = x[p] - x[q];
        P *= d;
        dlogP(p) += 1.0 / d;
        dlogP(q) -= 1.0 / d;
      }
      J.row(p) = (J.row(p) - F(p) * dlogP) / P;
      F(p) /= P;
    }
  return F;
}

inline void damp(Eigen::VectorXcd &dx) {
  const double step = dx.cwiseAbs().maxCoeff();
  if (step > 1.0)
    dx *= 0.5 / step;
}

} // namespace detail

// Newton iteration on log Φ = 0 from one starting point. Returns the converged
// parameters or throws ConvergenceError.
inline BetheParameters newton_iterate(const ChainModel &model, BetheParameters t, int max_iters,
                                      double target = 1e-13) {
  const std::vector<int> card = t.cardinalities();
  std::vector<Cx> x = flatten(t);
  if (x.empty())
    return t;
  const Cx c = model.c();
  // coarse phase on the cleared equations
  int it = 0;
  for (; it < max_iters; ++it) {
    Eigen::MatrixXcd J;
    Eigen::VectorXcd F = detail::cleared_bae(model, x, card, J);
    if (!F.allFinite())
      throw ConvergenceError("non-finite Bethe equations during iteration");
    Eigen::VectorXcd dx = J.fullPivLu().solve(-F);
    if (!dx.allFinite())
      throw ConvergenceError("singular Jacobian");
    detail::damp(dx);
    for (std::size_t k = 0; k < x.size(); ++k)
      x[k] += dx(k);
    double mag = 1.0;
    for (Cx v : x)
      mag = std::max(mag, std::abs(v));
    if (dx.cwiseAbs().maxCoeff() <= 1e-9 * mag)
      break;
  }
  // polish on log Φ, which measures the equations the way they are certified
  int polish = 0;
  for (int p = 0; p < 30; ++p) {
    BetheParameters cur = unflatten(x, card);
    Eigen::VectorXcd F = log_bae(model, cur);
    if (!F.allFinite())
      throw ConvergenceError("non-finite Bethe equations during iteration");
    if (F.cwiseAbs().maxCoeff() <= target && ++polish >= 2)
      return cur;
    Eigen::MatrixXcd J = -gaudin_matrix(model, cur) / c;
    Eigen::VectorXcd dx = J.fullPivLu().solve(-F);
    if (!dx.allFinite())
      throw ConvergenceError("singular Jacobian");
    detail::damp(dx);
    for (std::size_t k = 0; k < x.size(); ++k)
      x[k] += dx(k);
  }
  BetheParameters cur = unflatten(x, card);
  if (log_bae(model, cur).cwiseAbs().maxCoeff() <= 1e3 * target)
    return cur;
  throw ConvergenceError("no convergence after " + std::to_string(max_iters) + " iterations");
}

// Seeds around the inhomogeneities, radius |c|.
inline std::vector<BetheParameters> seed_cloud(const ChainSpec &spec, const std::vector<int> &card,
                                               int count, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::vector<BetheParameters> seeds;
  const double radius = std::abs(spec.c);
  for (int s = 0; s < count; ++s) {
    BetheParameters t;
    for (int a : card) {
      ParamSet l;
      for (int k = 0; k < a; ++k)
        l.push_back(spec.inhom[rng.index(spec.L())] + rng.disk(radius));
      t.levels.push_back(std::move(l));
    }
    seeds.push_back(std::move(t));
  }
  return seeds;
}

inline SolveResult solve_newton(const ChainModel &model, const std::vector<int> &card,
                                std::vector<BetheParameters> seeds, const SolveOptions &opt = {}) {
  if (static_cast<int>(card.size()) != model.n() - 1)
    throw ArgumentError("cardinalities must list one entry per level");
  auto cloud = seed_cloud(model.spec(), card, opt.auto_seeds, opt.rng_seed);
  seeds.insert(seeds.end(), cloud.begin(), cloud.end());
  if (seeds.empty())
    throw ArgumentError("solve_newton needs at least one seed");
  SolveResult out;
  for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
    if (seeds[s].cardinalities() != card) {
      out.failures.push_back({s, "seed cardinalities do not match"});
      continue;
    }
    BetheParameters t;
    try {
      t = detail::sorted_levels(newton_iterate(model, seeds[s], opt.max_iters));
    } catch (const Error &e) {
      out.failures.push_back({s, e.what()});
      continue;
    }
    if (auto why = detail::collision(model.spec(), t, opt.collision_tol)) {
      out.failures.push_back({s, *why});
      continue;
    }
    auto &bucket = model.n() <= 3 ? out.certificates : out.uncertified;
    bool dup = false;
    for (const auto &c : out.certificates)
      dup = dup || detail::same_roots(c.params, t, opt.dedup_tol);
    for (const auto &c : out.uncertified)
      dup = dup || detail::same_roots(c.params, t, opt.dedup_tol);
    if (dup)
      continue;
    OnShellCertificate cert;
    try {
      cert = certify(model, t);
    } catch (const Error &e) {
      out.failures.push_back({s, e.what()});
      continue;
    }
    if (cert.max_bae_residual > opt.thresholds.bae) {
      out.failures.push_back({s, "BAE residual " + shortest(cert.max_bae_residual)});
      continue;
    }
    if (model.n() <= 3 && cert.eigencheck_residual > opt.thresholds.eigen) {
      out.failures.push_back({s, "eigenvector check failed: " + shortest(cert.eigencheck_residual)});
      continue;
    }
    bucket.push_back(std::move(cert));
  }
  auto order = [](const OnShellCertificate &a, const OnShellCertificate &b) {
    return detail::lex_less(a.params, b.params);
  };
  std::sort(out.certificates.begin(), out.certificates.end(), order);
  std::sort(out.uncertified.begin(), out.uncertified.end(), order);
  return out;
}

// Same, on the chain twisted by κ on top of the model's own twist.
inline SolveResult solve_newton(const ChainModel &model, const std::vector<int> &card,
                                std::vector<BetheParameters> seeds, const TwistVector &kappa,
                                const SolveOptions &opt = {}) {
  ChainModel twisted(model.spec().with_twist(model.spec().twist * kappa));
  return solve_newton(twisted, card, std::move(seeds), opt);
}

} // namespace naba
