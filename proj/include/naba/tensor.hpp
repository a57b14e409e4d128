#pragma once

#include <naba/errors.hpp>

#include <Eigen/Dense>

#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

namespace naba {

using Cx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using OperatorSlice = Eigen::MatrixXcd;

inline constexpr long kDefaultDimCap = 2187; // 3^7

// NABA_DIM_CAP overrides the default cap on any dense space we build.
inline long dimension_cap() {
  if (const char *s = std::getenv("NABA_DIM_CAP")) {
    char *end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0)
      return v;
  }
  return kDefaultDimCap;
}

inline long ipow(long base, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i)
    r *= base;
  return r;
}

inline void require_dim(long dim, const char *what) {
  if (dim > dimension_cap())
    throw CapacityError(std::string(what) + ": dimension " + std::to_string(dim) +
                        " exceeds cap " + std::to_string(dimension_cap()));
}

inline OperatorSlice kron(const OperatorSlice &A, const OperatorSlice &B) {
  require_dim(A.rows() * B.rows(), "kron");
  OperatorSlice out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

inline StateVector kron(const StateVector &x, const StateVector &y) {
  StateVector out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out.segment(i * y.size(), y.size()) = x(i) * y;
  return out;
}

// Elementary matrix e_ij (1-based), n x n.
inline OperatorSlice elementary(int n, int i, int j) {
  OperatorSlice e = OperatorSlice::Zero(n, n);
  e(i - 1, j - 1) = 1.0;
  return e;
}

// Applies a k-slot operator to the slots `sites` (0-based, slot 0 most significant)
// of a vector living on N slots of dimension n. Avoids building the embedding.
class SlotKernel {
public:
  SlotKernel(int n, int N, std::vector<int> sites) : n_(n), N_(N), sites_(std::move(sites)) {
    const int k = static_cast<int>(sites_.size());
    std::vector<long> stride(N);
    for (int s = 0; s < N; ++s)
      stride[s] = ipow(n, N - 1 - s);
    std::vector<bool> used(N, false);
    for (int s : sites_) {
      if (s < 0 || s >= N || used[s])
        throw ArgumentError("slot list has a duplicate or out-of-range entry");
      used[s] = true;
    }
    local_.resize(ipow(n, k));
    for (long a = 0; a < static_cast<long>(local_.size()); ++a) {
      long rem = a, off = 0;
      for (int q = k - 1; q >= 0; --q) {
        off += (rem % n) * stride[sites_[q]];
        rem /= n;
      }
      local_[a] = off;
    }
    std::vector<int> rest;
    for (int s = 0; s < N; ++s)
      if (!used[s])
        rest.push_back(s);
    base_.resize(ipow(n, N - k));
    for (long b = 0; b < static_cast<long>(base_.size()); ++b) {
      long rem = b, off = 0;
      for (int q = static_cast<int>(rest.size()) - 1; q >= 0; --q) {
        off += (rem % n) * stride[rest[q]];
        rem /= n;
      }
      base_[b] = off;
    }
  }

  long local_dim() const { return static_cast<long>(local_.size()); }
  long total_dim() const { return ipow(n_, N_); }

  void apply(const OperatorSlice &M, StateVector &v) const {
    const long m = local_dim();
    if (M.rows() != m || M.cols() != m)
      throw ArgumentError("slot operator has the wrong size");
    if (v.size() != total_dim())
      throw ArgumentError("vector has the wrong size for the slot kernel");
    StateVector tmp(m), out(m);
    for (long b : base_) {
      for (long a = 0; a < m; ++a)
        tmp(a) = v(b + local_[a]);
      out.noalias() = M * tmp;
      for (long a = 0; a < m; ++a)
        v(b + local_[a]) = out(a);
    }
  }

private:
  int n_, N_;
  std::vector<int> sites_;
  std::vector<long> local_, base_;
};

inline StateVector apply_at_slots(const OperatorSlice &M, const std::vector<int> &slots,
                                  StateVector v, int n, int N) {
  SlotKernel(n, N, slots).apply(M, v);
  return v;
}

// Operator on (C^n)^{⊗L} acting as M on the 1-based `sites`, identity elsewhere.
inline OperatorSlice embed_at_sites(const OperatorSlice &M, const std::vector<int> &sites,
                                    int n, int L) {
  std::vector<int> slots;
  for (int s : sites) {
    if (s < 1 || s > L)
      throw ArgumentError("site " + std::to_string(s) + " out of range 1.." +
                          std::to_string(L));
    slots.push_back(s - 1);
  }
  const long D = ipow(n, L);
  require_dim(D, "embed_at_sites");
  SlotKernel kernel(n, L, slots);
  OperatorSlice out(D, D);
  StateVector col(D);
  for (long b = 0; b < D; ++b) {
    col.setZero();
    col(b) = 1.0;
    kernel.apply(M, col);
    out.col(b) = col;
  }
  return out;
}

inline StateVector apply(const OperatorSlice &M, const StateVector &v) {
  if (M.cols() != v.size())
    throw ArgumentError("apply: dimension mismatch");
  return M * v;
}

// Bilinear pairing sum_k u_k v_k (no conjugation).
inline Cx inner(const StateVector &u, const StateVector &v) {
  if (u.size() != v.size())
    throw ArgumentError("inner: dimension mismatch");
  Cx s = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k)
    s += u(k) * v(k);
  return s;
}

inline double max_abs(const OperatorSlice &M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

// ||x - y|| / max(||x||, ||y||), falling back to absolute error against `scale`
// when both vectors are negligible there.
inline double relative_deviation(const StateVector &x, const StateVector &y, double scale = 0) {
  const double d = (x - y).norm();
  const double m = std::max(x.norm(), y.norm());
  const double floor = 1e-13 * scale;
  if (m <= floor)
    return scale > 0 ? d / scale : d;
  return m == 0 ? 0.0 : d / m;
}

inline double relative_deviation(Cx a, Cx b, double scale = 0) {
  const double d = std::abs(a - b);
  const double m = std::max(std::abs(a), std::abs(b));
  if (m <= 1e-13 * scale)
    return scale > 0 ? d / scale : d;
  return m == 0 ? 0.0 : d / m;
}

} // namespace naba
