#pragma once

#include <naba/errors.hpp>
#include <naba/ratfun.hpp>
#include <naba/tensor.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace naba {

// Diagonal twist M = diag(κ_1..κ_n).
struct TwistVector {
  std::vector<Cx> kappa;

  static TwistVector identity(int n) { return {std::vector<Cx>(n, 1.0)}; }
  // diag(1,..,κ at position j (1-based),..,1)
  static TwistVector single(int n, int j, Cx k) {
    TwistVector t = identity(n);
    t.kappa.at(j - 1) = k;
    return t;
  }
  int size() const { return static_cast<int>(kappa.size()); }
  bool is_identity() const {
    for (Cx k : kappa)
      if (k != Cx(1.0))
        return false;
    return true;
  }
  void validate(int n) const {
    if (size() != n)
      throw ArgumentError("twist has " + std::to_string(size()) + " entries, expected " +
                          std::to_string(n));
    for (Cx k : kappa)
      if (k == Cx(0.0))
        throw ArgumentError("twist entries must be nonzero");
  }
  TwistVector operator*(const TwistVector &o) const {
    TwistVector t = *this;
    for (std::size_t i = 0; i < kappa.size(); ++i)
      t.kappa[i] *= o.kappa.at(i);
    return t;
  }
};

struct ChainSpec {
  int n = 2;
  Cx c = 1.0;
  ParamSet inhom; // z_1..z_L
  TwistVector twist;
  double sep_tol = kSepTol;

  ChainSpec() = default;
  ChainSpec(int n_, Cx c_, ParamSet z, TwistVector tw = {})
      : n(n_), c(c_), inhom(std::move(z)), twist(std::move(tw)) {
    if (twist.kappa.empty())
      twist = TwistVector::identity(n);
    validate();
  }

  int L() const { return static_cast<int>(inhom.size()); }
  long dim() const { return ipow(n, L()); }

  void validate() const {
    if (n < 2)
      throw ArgumentError("rank n must be at least 2, got " + std::to_string(n));
    if (inhom.empty())
      throw ArgumentError("chain length L must be at least 1");
    if (c == Cx(0.0))
      throw ArgumentError("coupling c must be nonzero");
    // coinciding inhomogeneities are allowed: no weight or R-matrix product
    // divides by z_a - z_b, and the homogeneous chain is the common test case
    twist.validate(n);
    require_dim(dim(), "chain");
  }

  ChainSpec with_twist(TwistVector tw) const {
    ChainSpec s = *this;
    s.twist = std::move(tw);
    s.validate();
    return s;
  }

  // Sites first..last (1-based, inclusive) as a chain of their own.
  ChainSpec sub_chain(int first, int last, TwistVector tw) const {
    ChainSpec s = *this;
    s.inhom.assign(inhom.begin() + (first - 1), inhom.begin() + last);
    s.twist = std::move(tw);
    return s;
  }
};

// λ_j and r_j of the fundamental chain, including the twist factors.
class VacuumWeights {
public:
  explicit VacuumWeights(ChainSpec spec) : spec_(std::move(spec)) {}

  Cx lambda(int j, Cx z) const {
    Cx v = spec_.twist.kappa.at(j - 1);
    if (j == 1)
      for (Cx zl : spec_.inhom)
        v *= f(z, zl, spec_.c, spec_.sep_tol);
    return v;
  }
  Cx r(int j, Cx z) const { return lambda(j, z) / lambda(j + 1, z); }

  // d/dz log λ_j(z)
  Cx dlog_lambda(int j, Cx z) const {
    Cx s = 0.0;
    if (j == 1)
      for (Cx zl : spec_.inhom) {
        Cx d = z - zl;
        s -= spec_.c / (d * (d + spec_.c));
      }
    return s;
  }
  Cx dlog_r(int j, Cx z) const { return dlog_lambda(j, z) - dlog_lambda(j + 1, z); }

private:
  ChainSpec spec_;
};

inline OperatorSlice permutation(int n) {
  OperatorSlice P = OperatorSlice::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      P(i * n + j, j * n + i) = 1.0;
  return P;
}

// R(z1,z2) = I + g(z1,z2) P on C^n ⊗ C^n.
inline OperatorSlice build_R(int n, Cx z1, Cx z2, Cx c, double tol = kSepTol) {
  return OperatorSlice::Identity(n * n, n * n) + g(z1, z2, c, tol) * permutation(n);
}

inline double check_ybe(int n, Cx z1, Cx z2, Cx z3, Cx c) {
  OperatorSlice R12 = embed_at_sites(build_R(n, z1, z2, c), {1, 2}, n, 3);
  OperatorSlice R13 = embed_at_sites(build_R(n, z1, z3, c), {1, 3}, n, 3);
  OperatorSlice R23 = embed_at_sites(build_R(n, z2, z3, c), {2, 3}, n, 3);
  return max_abs(R12 * R13 * R23 - R23 * R13 * R12);
}

// Auxiliary blocks T_ij(z), each an operator on the quantum space.
struct MonodromyBlocks {
  int n = 0;
  std::vector<OperatorSlice> blocks;
  const OperatorSlice &operator()(int i, int j) const { return blocks[(i - 1) * n + (j - 1)]; }
};

using BlocksPtr = std::shared_ptr<const MonodromyBlocks>;

namespace detail {

// Applies L_last...L_first (first applied first) and the twist on aux slot 0 of
// vectors in C^n ⊗ (C^n)^{⊗L}. Returns the blocks on the quantum space.
inline MonodromyBlocks monodromy_blocks(const ChainSpec &spec, Cx z, int first, int last,
                                        const TwistVector *twist) {
  const int n = spec.n, L = spec.L();
  const long D = spec.dim();
  require_dim(n * D, "monodromy");
  std::vector<OperatorSlice> R;
  std::vector<SlotKernel> kernels;
  for (int l = first; l <= last; ++l) {
    R.push_back(build_R(n, z, spec.inhom[l - 1], spec.c, spec.sep_tol));
    kernels.emplace_back(n, L + 1, std::vector<int>{0, l});
  }
  MonodromyBlocks out;
  out.n = n;
  out.blocks.assign(n * n, OperatorSlice::Zero(D, D));
  StateVector v(n * D);
  for (int j = 0; j < n; ++j)
    for (long b = 0; b < D; ++b) {
      v.setZero();
      v(j * D + b) = 1.0;
      for (std::size_t q = 0; q < kernels.size(); ++q)
        kernels[q].apply(R[q], v);
      for (int i = 0; i < n; ++i) {
        Cx k = twist ? twist->kappa[i] : Cx(1.0);
        out.blocks[i * n + j].col(b) = k * v.segment(i * D, D);
      }
    }
  return out;
}

} // namespace detail

// A chain plus a memo cache of monodromy blocks keyed by z. Copies share the
// cache; the spec never changes after construction.
class ChainModel {
public:
  explicit ChainModel(ChainSpec spec)
      : spec_(std::move(spec)), weights_(spec_), cache_(std::make_shared<Cache>()) {
    spec_.validate();
  }

  const ChainSpec &spec() const { return spec_; }
  const VacuumWeights &weights() const { return weights_; }
  int n() const { return spec_.n; }
  int L() const { return spec_.L(); }
  Cx c() const { return spec_.c; }
  long dim() const { return spec_.dim(); }

  Cx lambda(int j, Cx z) const { return weights_.lambda(j, z); }
  Cx r(int j, Cx z) const { return weights_.r(j, z); }

  StateVector vacuum() const {
    StateVector v = StateVector::Zero(dim());
    v(0) = 1.0;
    return v;
  }

  BlocksPtr monodromy(Cx z) const {
    const Key key{z.real(), z.imag()};
    {
      std::shared_lock lock(cache_->mutex);
      auto it = cache_->map.find(key);
      if (it != cache_->map.end())
        return it->second;
    }
    for (Cx zl : spec_.inhom)
      if (std::abs(z - zl) <= spec_.sep_tol)
        throw PoleError(z, zl, "monodromy at an inhomogeneity");
    auto blocks = std::make_shared<const MonodromyBlocks>(
        detail::monodromy_blocks(spec_, z, 1, L(), &spec_.twist));
    std::unique_lock lock(cache_->mutex);
    if (cache_->map.size() >= kCacheEntries)
      cache_->map.clear();
    cache_->map.emplace(key, blocks);
    return blocks;
  }

  // T_ij(z) as a dense quantum-space operator.
  OperatorSlice T(int i, int j, Cx z) const { return (*monodromy(z))(i, j); }

  OperatorSlice transfer(Cx z) const { return twisted_transfer(z, TwistVector::identity(n())); }

  OperatorSlice twisted_transfer(Cx z, const TwistVector &kappa) const {
    kappa.validate(n());
    auto m = monodromy(z);
    OperatorSlice t = OperatorSlice::Zero(dim(), dim());
    for (int i = 1; i <= n(); ++i)
      t += kappa.kappa[i - 1] * (*m)(i, i);
    return t;
  }

  void clear_cache() const {
    std::unique_lock lock(cache_->mutex);
    cache_->map.clear();
  }

private:
  using Key = std::pair<double, double>;
  static constexpr std::size_t kCacheEntries = 64;
  struct Cache {
    std::shared_mutex mutex;
    std::map<Key, BlocksPtr> map;
  };

  ChainSpec spec_;
  VacuumWeights weights_;
  std::shared_ptr<Cache> cache_;
};

// Full monodromy on C^n (aux, most significant) ⊗ quantum space.
inline OperatorSlice assemble(const MonodromyBlocks &m) {
  const long D = m.blocks.front().rows();
  OperatorSlice out(m.n * D, m.n * D);
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      out.block((i - 1) * D, (j - 1) * D, D, D) = m(i, j);
  return out;
}

inline OperatorSlice build_monodromy(const ChainModel &model, Cx z) {
  return assemble(*model.monodromy(z));
}

// max-norm of R12 T1(z1) T2(z2) - T2(z2) T1(z1) R12 on aux ⊗ aux ⊗ quantum.
inline double check_rtt(const ChainSpec &spec, Cx z1, Cx z2) {
  const int n = spec.n, L = spec.L(), N = L + 2;
  const long D = ipow(n, N);
  require_dim(D, "check_rtt");
  SlotKernel r12(n, N, {0, 1});
  OperatorSlice R = build_R(n, z1, z2, spec.c, spec.sep_tol);
  OperatorSlice M = OperatorSlice::Zero(n, n);
  for (int i = 0; i < n; ++i)
    M(i, i) = spec.twist.kappa[i];
  SlotKernel tw1(n, N, {0}), tw2(n, N, {1});
  std::vector<SlotKernel> k1, k2;
  std::vector<OperatorSlice> L1, L2;
  for (int l = 1; l <= L; ++l) {
    k1.emplace_back(n, N, std::vector<int>{0, l + 1});
    k2.emplace_back(n, N, std::vector<int>{1, l + 1});
    L1.push_back(build_R(n, z1, spec.inhom[l - 1], spec.c, spec.sep_tol));
    L2.push_back(build_R(n, z2, spec.inhom[l - 1], spec.c, spec.sep_tol));
  }
  auto T1 = [&](StateVector &v) {
    for (int l = 0; l < L; ++l)
      k1[l].apply(L1[l], v);
    tw1.apply(M, v);
  };
  auto T2 = [&](StateVector &v) {
    for (int l = 0; l < L; ++l)
      k2[l].apply(L2[l], v);
    tw2.apply(M, v);
  };
  double res = 0;
  StateVector a(D), b(D);
  for (long col = 0; col < D; ++col) {
    a.setZero();
    a(col) = 1.0;
    b = a;
    T2(a); // R12 T1 T2: T2 acts first
    T1(a);
    r12.apply(R, a);
    r12.apply(R, b);
    T1(b);
    T2(b);
    res = std::max(res, (a - b).cwiseAbs().maxCoeff());
  }
  return res;
}

// Σ_{ℓ=first..last} e_ji^{(ℓ)}, acting directly on a vector.
inline StateVector apply_zero_mode(int n, int L, int i, int j, const StateVector &v, int first,
                                   int last) {
  StateVector out = StateVector::Zero(v.size());
  for (int l = first; l <= last; ++l) {
    const long stride = ipow(n, L - l);
    for (long b = 0; b < v.size(); ++b) {
      const long digit = (b / stride) % n;
      if (digit == i - 1) // e_ji maps e_i to e_j
        out(b + (j - i) * stride) += v(b);
    }
  }
  return out;
}

// Co-vector times zero mode: (w^T M)_b.
inline StateVector covector_zero_mode(int n, int L, int i, int j, const StateVector &w, int first,
                                      int last) {
  // w^T e_ji = (e_ij w)^T
  return apply_zero_mode(n, L, j, i, w, first, last);
}

inline OperatorSlice partial_zero_mode(const ChainSpec &spec, int i, int j, int first, int last) {
  if (i < 1 || i > spec.n || j < 1 || j > spec.n)
    throw ArgumentError("zero mode indices out of range");
  if (first < 1 || last > spec.L() || first > last + 1)
    throw ArgumentError("zero mode site range out of range");
  const long D = spec.dim();
  OperatorSlice out(D, D);
  StateVector e(D);
  for (long b = 0; b < D; ++b) {
    e.setZero();
    e(b) = 1.0;
    out.col(b) = apply_zero_mode(spec.n, spec.L(), i, j, e, first, last);
  }
  return out;
}

// T_ij[0] = Σ_ℓ e_ji^{(ℓ)}.
inline OperatorSlice zero_mode(const ChainSpec &spec, int i, int j) {
  return partial_zero_mode(spec, i, j, 1, spec.L());
}

// (w/c)(T_ij(w) - δ_ij); the limit definition, kept for validation.
inline OperatorSlice zero_mode_finite_w(const ChainModel &model, int i, int j, Cx w) {
  if (!model.spec().twist.is_identity())
    throw ArgumentError("finite-w zero modes need an untwisted chain");
  OperatorSlice t = model.T(i, j, w);
  if (i == j)
    t -= OperatorSlice::Identity(model.dim(), model.dim());
  return (w / model.c()) * t;
}

// T = T^(2) T^(1), sites 1..m in T^(1), the twist carried by T^(2).
struct CompositeSplit {
  int m;
  ChainSpec first, second;
  VacuumWeights first_weights;

  Cx r1(int k, Cx u) const { return first_weights.r(k, u); }
};

inline CompositeSplit composite_split(const ChainSpec &spec, int m) {
  if (m < 1 || m >= spec.L())
    throw ArgumentError("composite split m=" + std::to_string(m) + " must lie in 1.." +
                        std::to_string(spec.L() - 1));
  ChainSpec a = spec.sub_chain(1, m, TwistVector::identity(spec.n));
  ChainSpec b = spec.sub_chain(m + 1, spec.L(), spec.twist);
  return {m, a, b, VacuumWeights(a)};
}

// Partial monodromy blocks embedded in the full quantum space.
inline MonodromyBlocks partial_monodromy(const ChainSpec &spec, int m, Cx z, bool first) {
  if (m < 1 || m >= spec.L())
    throw ArgumentError("composite split m out of range");
  return first ? detail::monodromy_blocks(spec, z, 1, m, nullptr)
               : detail::monodromy_blocks(spec, z, m + 1, spec.L(), &spec.twist);
}

// max |T_ij(z) - Σ_k T^(2)_ik(z) T^(1)_kj(z)|
inline double check_composite_factorization(const ChainModel &model, int m, Cx z) {
  auto full = model.monodromy(z);
  MonodromyBlocks t1 = partial_monodromy(model.spec(), m, z, true);
  MonodromyBlocks t2 = partial_monodromy(model.spec(), m, z, false);
  double res = 0;
  for (int i = 1; i <= model.n(); ++i)
    for (int j = 1; j <= model.n(); ++j) {
      OperatorSlice p = OperatorSlice::Zero(model.dim(), model.dim());
      for (int k = 1; k <= model.n(); ++k)
        p += t2(i, k) * t1(k, j);
      res = std::max(res, max_abs((*full)(i, j) - p));
    }
  return res;
}

} // namespace naba
