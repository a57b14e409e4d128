#pragma once

#include <naba/errors.hpp>
#include <naba/tensor.hpp>

#include <Eigen/LU>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace naba {

inline constexpr double kSepTol = 1e-8;

using ParamSet = std::vector<Cx>;

// Scalar types usable by the rational functions. Exact types specialize this
// elsewhere (see exact.hpp).
template <class T> struct ScalarTraits;

template <> struct ScalarTraits<Cx> {
  static bool is_pole(const Cx &d, double tol) { return std::abs(d) <= tol; }
  static Cx to_cx(const Cx &x) { return x; }
  static double magnitude(const Cx &x) { return std::abs(x); }
};

template <class T> T g(const T &z1, const T &z2, const T &c, double tol = kSepTol) {
  T d = z1 - z2;
  if (ScalarTraits<T>::is_pole(d, tol))
    throw PoleError(ScalarTraits<T>::to_cx(z1), ScalarTraits<T>::to_cx(z2), "g");
  return c / d;
}

template <class T> T f(const T &z1, const T &z2, const T &c, double tol = kSepTol) {
  T d = z1 - z2;
  if (ScalarTraits<T>::is_pole(d, tol))
    throw PoleError(ScalarTraits<T>::to_cx(z1), ScalarTraits<T>::to_cx(z2), "f");
  return (d + c) / d;
}

// f/g = (z1 - z2 + c)/c, pole free.
template <class T> T h(const T &z1, const T &z2, const T &c) { return (z1 - z2 + c) / c; }

// 1/g = (z1 - z2)/c, pole free.
template <class T> T ginv(const T &z1, const T &z2, const T &c) { return (z1 - z2) / c; }

inline Cx g_xxz(Cx z1, Cx z2, Cx q, double tol = kSepTol) {
  if (std::abs(q) == 0.0)
    throw ArgumentError("g_xxz: q = 0");
  if (std::abs(z1 - z2) <= tol)
    throw PoleError(z1, z2, "g_xxz");
  return (q - 1.0 / q) / (z1 - z2);
}

inline Cx f_xxz(Cx z1, Cx z2, Cx q, double tol = kSepTol) {
  if (std::abs(q) == 0.0)
    throw ArgumentError("f_xxz: q = 0");
  if (std::abs(z1 - z2) <= tol)
    throw PoleError(z1, z2, "f_xxz");
  return (q * z1 - z2 / q) / (z1 - z2);
}

// Double products over sets; empty products are 1.
template <class T>
T prod_f(std::span<const T> X, std::span<const T> Y, const T &c, double tol = kSepTol) {
  T p(1);
  for (const T &x : X)
    for (const T &y : Y)
      p = p * f(x, y, c, tol);
  return p;
}

template <class T>
T prod_g(std::span<const T> X, std::span<const T> Y, const T &c, double tol = kSepTol) {
  T p(1);
  for (const T &x : X)
    for (const T &y : Y)
      p = p * g(x, y, c, tol);
  return p;
}

template <class T> T prod_h(std::span<const T> X, std::span<const T> Y, const T &c) {
  T p(1);
  for (const T &x : X)
    for (const T &y : Y)
      p = p * h(x, y, c);
  return p;
}

template <class T> T prod_ginv(std::span<const T> X, std::span<const T> Y, const T &c) {
  T p(1);
  for (const T &x : X)
    for (const T &y : Y)
      p = p * ginv(x, y, c);
  return p;
}

// Cx convenience overloads taking vectors or single values.
inline Cx prod_f(const ParamSet &X, const ParamSet &Y, Cx c, double tol = kSepTol) {
  return prod_f<Cx>(std::span<const Cx>(X), std::span<const Cx>(Y), c, tol);
}
inline Cx prod_g(const ParamSet &X, const ParamSet &Y, Cx c, double tol = kSepTol) {
  return prod_g<Cx>(std::span<const Cx>(X), std::span<const Cx>(Y), c, tol);
}
inline Cx prod_h(const ParamSet &X, const ParamSet &Y, Cx c) {
  return prod_h<Cx>(std::span<const Cx>(X), std::span<const Cx>(Y), c);
}
inline Cx prod_ginv(const ParamSet &X, const ParamSet &Y, Cx c) {
  return prod_ginv<Cx>(std::span<const Cx>(X), std::span<const Cx>(Y), c);
}

// Product of a single-argument function over a set, e.g. r_1(s̄).
template <class T, class Fn> T prod_r(std::span<const T> X, Fn &&fn) {
  T p(1);
  for (const T &x : X)
    p = p * fn(x);
  return p;
}
template <class Fn> Cx prod_r(const ParamSet &X, Fn &&fn) {
  return prod_r<Cx>(std::span<const Cx>(X), std::forward<Fn>(fn));
}

template <class T> T delta(std::span<const T> X, const T &c, double tol = kSepTol) {
  T p(1);
  for (std::size_t l = 0; l < X.size(); ++l)
    for (std::size_t m = l + 1; m < X.size(); ++m)
      p = p * g(X[l], X[m], c, tol);
  return p;
}

template <class T> T delta_prime(std::span<const T> Y, const T &c, double tol = kSepTol) {
  T p(1);
  for (std::size_t l = 0; l < Y.size(); ++l)
    for (std::size_t m = l + 1; m < Y.size(); ++m)
      p = p * g(Y[m], Y[l], c, tol);
  return p;
}

inline Cx delta(const ParamSet &X, Cx c, double tol = kSepTol) {
  return delta<Cx>(std::span<const Cx>(X), c, tol);
}
inline Cx delta_prime(const ParamSet &Y, Cx c, double tol = kSepTol) {
  return delta_prime<Cx>(std::span<const Cx>(Y), c, tol);
}

// Determinant of a dense square matrix stored row-major in `a` (size k*k).
// Gaussian elimination with largest-magnitude pivoting; exact for exact types.
template <class T> T determinant(std::vector<T> a, std::size_t k) {
  T det(1);
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    double best = ScalarTraits<T>::magnitude(a[col * k + col]);
    for (std::size_t r = col + 1; r < k; ++r) {
      double m = ScalarTraits<T>::magnitude(a[r * k + col]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best == 0.0)
      return T(0);
    if (piv != col) {
      for (std::size_t j = 0; j < k; ++j)
        std::swap(a[piv * k + j], a[col * k + j]);
      det = T(0) - det;
    }
    const T p = a[col * k + col];
    det = det * p;
    for (std::size_t r = col + 1; r < k; ++r) {
      const T factor = a[r * k + col] / p;
      for (std::size_t j = col; j < k; ++j)
        a[r * k + j] = a[r * k + j] - factor * a[col * k + j];
    }
  }
  return det;
}

// Float determinants go through Eigen's partial-pivot LU.
inline Cx determinant(const Eigen::MatrixXcd &M) {
  if (M.rows() == 0)
    return 1.0;
  return M.partialPivLu().determinant();
}

template <> inline Cx determinant<Cx>(std::vector<Cx> a, std::size_t k) {
  Eigen::MatrixXcd M(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      M(i, j) = a[i * k + j];
  return determinant(M);
}

// K_k(x̄|ȳ) = Δ(x̄) Δ'(ȳ) f(x̄,ȳ)/g(x̄,ȳ) det[g(x_i,y_j)^2 / f(x_i,y_j)].
template <class T>
T izergin_korepin(std::span<const T> X, std::span<const T> Y, const T &c,
                  double tol = kSepTol) {
  if (X.size() != Y.size())
    throw ArgumentError("izergin_korepin: cardinality mismatch " + std::to_string(X.size()) +
                        " vs " + std::to_string(Y.size()));
  const std::size_t k = X.size();
  if (k == 0)
    return T(1);
  std::vector<T> m(k * k);
  T fg(1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      T gij = g(X[i], Y[j], c, tol);
      T fij = f(X[i], Y[j], c, tol);
      m[i * k + j] = gij * gij / fij;
      fg = fg * (fij / gij);
    }
  return delta(X, c, tol) * delta_prime(Y, c, tol) * fg * determinant(std::move(m), k);
}

inline Cx izergin_korepin(const ParamSet &X, const ParamSet &Y, Cx c, double tol = kSepTol) {
  return izergin_korepin<Cx>(std::span<const Cx>(X), std::span<const Cx>(Y), c, tol);
}

// A split of {0,..,size-1} into I (sorted) and its complement II.
struct SetPartition {
  std::vector<int> I, II;
};

// All C(size,k) partitions with #I = k, lexicographic in I.
inline std::vector<SetPartition> enumerate_partitions(int size, int k) {
  if (size < 0 || k < 0 || k > size)
    throw ArgumentError("enumerate_partitions: k=" + std::to_string(k) +
                        " out of range for size " + std::to_string(size));
  std::vector<SetPartition> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i)
    idx[i] = i;
  while (true) {
    SetPartition p;
    p.I = idx;
    std::vector<bool> in(size, false);
    for (int i : idx)
      in[i] = true;
    for (int i = 0; i < size; ++i)
      if (!in[i])
        p.II.push_back(i);
    out.push_back(std::move(p));
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == size - k + pos)
      --pos;
    if (pos < 0)
      break;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i)
      idx[i] = idx[i - 1] + 1;
  }
  return out;
}

template <class T> std::vector<T> select(const std::vector<T> &xs, const std::vector<int> &idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (int i : idx)
    out.push_back(xs[i]);
  return out;
}

// xs with element i removed.
template <class T> std::vector<T> without(const std::vector<T> &xs, std::size_t i) {
  std::vector<T> out;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (k != i)
      out.push_back(xs[k]);
  return out;
}

} // namespace naba
