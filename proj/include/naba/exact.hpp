#pragma once

// Exact Gaussian-rational scalars (a + b i with a, b in Q) for re-evaluating
// the rational functions without rounding. Needs GMP.

#include <naba/ratfun.hpp>

#include <gmpxx.h>

#include <complex>

namespace naba {

struct GaussRational {
  mpq_class re, im;

  GaussRational() : re(0), im(0) {}
  GaussRational(int r) : re(r), im(0) {}
  GaussRational(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

  // Exact conversion of the binary doubles.
  static GaussRational from(Cx z) { return {mpq_class(z.real()), mpq_class(z.imag())}; }

  Cx to_cx() const { return {re.get_d(), im.get_d()}; }
  bool is_zero() const { return re == 0 && im == 0; }

  friend GaussRational operator+(const GaussRational &a, const GaussRational &b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussRational operator-(const GaussRational &a, const GaussRational &b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussRational operator*(const GaussRational &a, const GaussRational &b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussRational operator/(const GaussRational &a, const GaussRational &b) {
    mpq_class den = b.re * b.re + b.im * b.im;
    if (den == 0)
      throw PoleError(a.to_cx(), 0.0, "exact division");
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  friend bool operator==(const GaussRational &a, const GaussRational &b) {
    return a.re == b.re && a.im == b.im;
  }
};

template <> struct ScalarTraits<GaussRational> {
  static bool is_pole(const GaussRational &d, double) { return d.is_zero(); }
  static Cx to_cx(const GaussRational &x) { return x.to_cx(); }
  // Pivot choice only needs "nonzero"; magnitude in double is enough.
  static double magnitude(const GaussRational &x) {
    return x.is_zero() ? 0.0 : std::max(1e-300, std::abs(x.to_cx()));
  }
};

inline std::vector<GaussRational> to_exact(const ParamSet &xs) {
  std::vector<GaussRational> out;
  for (Cx x : xs)
    out.push_back(GaussRational::from(x));
  return out;
}

} // namespace naba
