#include <naba/random.hpp>
#include <naba/tensor.hpp>

#include <gtest/gtest.h>

#include <cstdlib>

using namespace naba;

namespace {

OperatorSlice eye(int d) { return OperatorSlice::Identity(d, d); }

OperatorSlice random_matrix(Rng &rng, int rows, int cols) {
  OperatorSlice M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      M(i, j) = rng.box(1.0);
  return M;
}

StateVector random_vector(Rng &rng, int n) {
  StateVector v(n);
  for (int i = 0; i < n; ++i)
    v(i) = rng.box(1.0);
  return v;
}

// Index-by-index construction of M acting on slots (s1, s2) of (C^n)^{⊗L}.
OperatorSlice embed_by_hand(const OperatorSlice &M, int s1, int s2, int n, int L) {
  const long D = ipow(n, L);
  OperatorSlice out = OperatorSlice::Zero(D, D);
  auto digit = [&](long idx, int site) { return (idx / ipow(n, L - site)) % n; };
  for (long r = 0; r < D; ++r)
    for (long col = 0; col < D; ++col) {
      bool others_equal = true;
      for (int s = 1; s <= L; ++s)
        if (s != s1 && s != s2 && digit(r, s) != digit(col, s))
          others_equal = false;
      if (!others_equal)
        continue;
      out(r, col) = M(digit(r, s1) * n + digit(r, s2), digit(col, s1) * n + digit(col, s2));
    }
  return out;
}

} // namespace

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_EQ(kron(eye(2), eye(2)), eye(4));
}

TEST(Kron, ElementaryIndexing) {
  OperatorSlice K = kron(elementary(2, 1, 2), elementary(2, 2, 1));
  OperatorSlice want = OperatorSlice::Zero(4, 4);
  want(1, 2) = 1.0;
  EXPECT_EQ(K, want);
}

TEST(Kron, MixedProduct) {
  Rng rng(1);
  OperatorSlice A = random_matrix(rng, 3, 3), B = random_matrix(rng, 3, 3);
  StateVector x = random_vector(rng, 3), y = random_vector(rng, 3);
  EXPECT_LE((kron(A, B) * kron(x, y) - kron(StateVector(A * x), StateVector(B * y))).norm(), 1e-13);
}

TEST(Kron, Associative) {
  Rng rng(2);
  OperatorSlice A = random_matrix(rng, 2, 2), B = random_matrix(rng, 3, 3),
                C = random_matrix(rng, 2, 2);
  OperatorSlice l = kron(kron(A, B), C), r = kron(A, kron(B, C));
  EXPECT_LE(max_abs(l - r) / max_abs(l), 1e-14);
}

TEST(Kron, CapacityError) {
  ::setenv("NABA_DIM_CAP", "8", 1);
  EXPECT_THROW(kron(eye(3), eye(3)), CapacityError);
  ::unsetenv("NABA_DIM_CAP");
  EXPECT_NO_THROW(kron(eye(3), eye(3)));
}

TEST(Embed, SingleSite) {
  EXPECT_EQ(embed_at_sites(elementary(2, 1, 2), {1}, 2, 2),
            kron(elementary(2, 1, 2), eye(2)));
}

TEST(Embed, PermutationIsSwapInvariant) {
  OperatorSlice P = OperatorSlice::Zero(4, 4);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      P += kron(elementary(2, i, j), elementary(2, j, i));
  EXPECT_EQ(embed_at_sites(P, {2, 1}, 2, 2), P);
}

TEST(Embed, MatchesIndexConstruction) {
  Rng rng(3);
  OperatorSlice M = random_matrix(rng, 4, 4);
  EXPECT_LE(max_abs(embed_at_sites(M, {1, 3}, 2, 3) - embed_by_hand(M, 1, 3, 2, 3)), 1e-15);
  EXPECT_LE(max_abs(embed_at_sites(M, {3, 1}, 2, 3) - embed_by_hand(M, 3, 1, 2, 3)), 1e-15);
  OperatorSlice N = random_matrix(rng, 9, 9);
  EXPECT_LE(max_abs(embed_at_sites(N, {2, 3}, 3, 3) - embed_by_hand(N, 2, 3, 3, 3)), 1e-15);
}

TEST(Embed, DisjointSitesCommute) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    OperatorSlice M = random_matrix(rng, 4, 4), N = random_matrix(rng, 2, 2);
    OperatorSlice a = embed_at_sites(M, {1, 3}, 2, 4), b = embed_at_sites(N, {2}, 2, 4);
    EXPECT_LE(max_abs(a * b - b * a), 1e-13);
  }
}

TEST(Embed, BadSites) {
  OperatorSlice M = eye(4);
  EXPECT_THROW(embed_at_sites(M, {1, 1}, 2, 3), ArgumentError);
  EXPECT_THROW(embed_at_sites(M, {0, 2}, 2, 3), ArgumentError);
  EXPECT_THROW(embed_at_sites(M, {1, 4}, 2, 3), ArgumentError);
}

TEST(Apply, IdentityAndMismatch) {
  Rng rng(5);
  StateVector v = random_vector(rng, 4);
  EXPECT_TRUE(naba::apply(eye(4), v) == v);
  EXPECT_THROW(naba::apply(eye(3), v), ArgumentError);
}

TEST(Inner, BasisVectors) {
  StateVector e1 = StateVector::Unit(2, 0), e2 = StateVector::Unit(2, 1);
  EXPECT_EQ(inner(e1, e2), Cx(0.0));
  EXPECT_EQ(inner(e1, e1), Cx(1.0));
}

TEST(Inner, BilinearNotHermitian) {
  StateVector u(2);
  u << Cx(1, 1), 0.0;
  EXPECT_EQ(inner(u, u), Cx(0, 2));
}

TEST(Inner, SymmetricAndBilinear) {
  Rng rng(6);
  StateVector u = random_vector(rng, 9), v = random_vector(rng, 9), w = random_vector(rng, 9);
  const Cx a = rng.box(1.0);
  EXPECT_EQ(inner(u, v), inner(v, u));
  EXPECT_LE(std::abs(inner(u, StateVector(a * v + w)) - (a * inner(u, v) + inner(u, w))), 1e-14);
  EXPECT_THROW(inner(u, StateVector(3)), ArgumentError);
}
