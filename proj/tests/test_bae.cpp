#include <naba/bae.hpp>

#include <gtest/gtest.h>

using namespace naba;

namespace {

ParamSet random_set(Rng &rng, int k, double half = 1.0) {
  ParamSet s;
  for (int i = 0; i < k; ++i)
    s.push_back(rng.box(half) + Cx(0, 0.3));
  return s;
}

SolveOptions seeded(std::uint64_t seed, int count = 40) {
  SolveOptions o;
  o.auto_seeds = count;
  o.rng_seed = seed;
  return o;
}

} // namespace

TEST(Residual, EmptyIsVacuouslyOnShell) {
  Rng rng(60);
  ChainModel m(ChainSpec(3, 1.0, random_set(rng, 3)));
  BetheParameters t = BetheParameters::empty(3);
  EXPECT_EQ(bae_residual(m, t).max_abs(), 0.0);
  const Cx z(0.5, 0.9);
  EXPECT_LE(std::abs(eigenvalue(m, t, z) - (m.lambda(1, z) + 2.0)), 1e-15);
  EXPECT_LE(eigencheck(m, t, probe_points(m.spec())), 1e-14);
}

TEST(Residual, ClosedFormGl2Root) {
  const Cx c(1.0);
  ChainModel hom(ChainSpec(2, c, {0.0, 0.0}));
  EXPECT_LE(bae_residual(hom, BetheParameters::gl2({-0.5})).max_abs(), 1e-15);
  const Cx z1(0.2, 0.4), z2(-0.7, 0.1);
  ChainModel inh(ChainSpec(2, c, {z1, z2}));
  EXPECT_LE(bae_residual(inh, BetheParameters::gl2({(z1 + z2 - c) / 2.0})).max_abs(), 1e-14);
}

TEST(Residual, SubsetFormIsProductOfSingleRoots) {
  Rng rng(61);
  ChainModel m(ChainSpec(3, 1.0, random_set(rng, 4)));
  BetheParameters t = BetheParameters::gl3(random_set(rng, 4), random_set(rng, 2));
  for (int i = 1; i <= 2; ++i) {
    const int a = static_cast<int>(t.level(i).size());
    for (int k = 0; k <= a; ++k)
      for (const auto &part : enumerate_partitions(a, k)) {
        Cx prod = 1.0;
        for (int idx : part.I)
          prod *= bae_phi(m, t, i, idx);
        const Cx subset = bae_subset_residual(m, t, i, part) + 1.0;
        EXPECT_LE(std::abs(subset - prod), 1e-11 * std::max(1.0, std::abs(prod)));
      }
  }
}

TEST(Residual, TwistedGl3ReducesAtKappaOne) {
  Rng rng(62);
  ChainModel m(ChainSpec(3, 1.0, random_set(rng, 3)));
  ParamSet u = random_set(rng, 2), v = random_set(rng, 1);
  BAEResidual a = twisted_bae_residual_gl3(m, u, v, 1.0);
  BAEResidual b = bae_residual(m, BetheParameters::gl3(u, v));
  for (int i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < a.values[i].size(); ++k)
      EXPECT_LE(std::abs(a.values[i][k] - b.values[i][k]), 1e-14);
  const Cx z(0.3, 1.2);
  EXPECT_LE(std::abs(tau_kappa_gl3(m, u, v, 1.0, z) - eigenvalue(m, BetheParameters::gl3(u, v), z)),
            1e-13);
}

TEST(Gaudin, MatchesFiniteDifferences) {
  Rng rng(63);
  for (int n = 2; n <= 4; ++n) {
    ChainModel m(ChainSpec(n, Cx(1.0, 0.2), random_set(rng, 3), TwistVector::single(n, 2, 1.3)));
    std::vector<int> card(n - 1);
    for (int i = 0; i < n - 1; ++i)
      card[i] = 2 - i % 2;
    BetheParameters t;
    for (int a : card)
      t.levels.push_back(random_set(rng, a));
    Eigen::MatrixXcd G = gaudin_matrix(m, t);
    std::vector<Cx> x = flatten(t);
    const double h = 1e-6;
    for (std::size_t l = 0; l < x.size(); ++l) {
      auto xp = x, xm = x;
      xp[l] += h;
      xm[l] -= h;
      Eigen::VectorXcd fd =
          -m.c() * (log_bae(m, unflatten(xp, card)) - log_bae(m, unflatten(xm, card))) / (2 * h);
      EXPECT_LE((G.col(l) - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, G.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Gaudin, ClearedJacobianMatchesFiniteDifferences) {
  Rng rng(64);
  ChainModel m(ChainSpec(3, 1.0, random_set(rng, 3), TwistVector{{1.0, 0.7, 1.2}}));
  const std::vector<int> card = {2, 1};
  std::vector<Cx> x = flatten(BetheParameters::gl3(random_set(rng, 2), random_set(rng, 1)));
  Eigen::MatrixXcd J, dummy;
  detail::cleared_bae(m, x, card, J);
  const double h = 1e-6;
  for (std::size_t l = 0; l < x.size(); ++l) {
    auto xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    Eigen::VectorXcd fd =
        (detail::cleared_bae(m, xp, card, dummy) - detail::cleared_bae(m, xm, card, dummy)) / (2 * h);
    EXPECT_LE((J.col(l) - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, J.cwiseAbs().maxCoeff()));
  }
}

TEST(Solver, FindsClosedFormRoot) {
  ChainModel m(ChainSpec(2, 1.0, {0.0, 0.0}));
  SolveResult r = solve_newton(m, {1}, {BetheParameters::gl2({Cx(-0.3, 0.2)})});
  ASSERT_EQ(r.certificates.size(), 1u);
  const auto &c = r.certificates[0];
  EXPECT_LE(std::abs(c.params.level(1)[0] - Cx(-0.5)), 1e-12);
  EXPECT_LE(c.eigencheck_residual, 1e-12);
  EXPECT_TRUE(c.valid());
}

TEST(Solver, DuplicateSeedsDeduplicate) {
  ChainModel m(ChainSpec(2, 1.0, {0.3, -0.3}));
  BetheParameters seed = BetheParameters::gl2({Cx(-0.4, 0.1)});
  SolveResult r = solve_newton(m, {1}, {seed, seed, seed});
  EXPECT_EQ(r.certificates.size(), 1u);
}

TEST(Solver, Idempotent) {
  Rng rng(65);
  ChainModel m(ChainSpec(3, 1.0, random_set(rng, 4)));
  SolveResult a = solve_newton(m, {2, 1}, {}, seeded(7));
  SolveResult b = solve_newton(m, {2, 1}, {}, seeded(7));
  ASSERT_EQ(a.certificates.size(), b.certificates.size());
  for (std::size_t k = 0; k < a.certificates.size(); ++k)
    EXPECT_TRUE(detail::same_roots(a.certificates[k].params, b.certificates[k].params, 0.0));
}

// Number of highest-weight states with the given cardinalities, where known.
TEST(Solver, FindsAllHighestWeightStates) {
  Rng rng(66);
  struct Case {
    int n, L;
    std::vector<int> card;
    std::size_t count;
  };
  for (const Case &cs : {Case{2, 4, {2}, 2}, Case{2, 5, {2}, 5}, Case{2, 4, {1}, 3},
                         Case{3, 3, {1, 0}, 2}, Case{3, 3, {2, 1}, 1}, Case{3, 4, {2, 1}, 3}}) {
    ChainModel m(ChainSpec(cs.n, 1.0, random_set(rng, cs.L)));
    SolveResult r = solve_newton(m, cs.card, {}, seeded(11, 60));
    EXPECT_EQ(r.certificates.size(), cs.count) << "n=" << cs.n << " L=" << cs.L;
    for (const auto &c : r.certificates) {
      EXPECT_LE(c.max_bae_residual, 1e-11);
      EXPECT_LE(c.eigencheck_residual, 1e-9);
      EXPECT_LE(dual_eigencheck(m, c.params, probe_points(m.spec())), 1e-9);
    }
  }
}

TEST(Solver, UntwistedGl3OneOneHasNoHighestWeightState) {
  // weight (L-1, 0, 1) is not dominant, so no on-shell vector exists for L = 2
  Rng rng(67);
  ParamSet z;
  for (int l = 0; l < 2; ++l)
    z.push_back(rng.uniform(-1, 1));
  ChainModel m(ChainSpec(3, 1.0, z));
  EXPECT_TRUE(solve_newton(m, {1, 1}, {}, seeded(3)).certificates.empty());
}

TEST(Solver, TwistedGl3) {
  Rng rng(68);
  ParamSet z;
  for (int l = 0; l < 2; ++l)
    z.push_back(rng.uniform(-1, 1));
  ChainModel m(ChainSpec(3, 1.0, z));
  const Cx kappa = 1.3;
  SolveResult r = solve_newton(m, {1, 1}, {}, TwistVector::single(3, 2, kappa), seeded(5));
  ASSERT_FALSE(r.certificates.empty());
  ChainModel tw(m.spec().with_twist(TwistVector::single(3, 2, kappa)));
  for (const auto &c : r.certificates) {
    EXPECT_LE(c.max_bae_residual, 1e-12);
    EXPECT_EQ(c.twist.kappa[1], kappa);
    EXPECT_LE(twisted_bae_residual_gl3(m, c.params.level(1), c.params.level(2), kappa).max_abs(),
              1e-12);
    EXPECT_LE(dual_eigencheck(tw, c.params, probe_points(tw.spec())), 1e-9);
    for (Cx zz : probe_points(m.spec()))
      EXPECT_LE(std::abs(tau_kappa_gl3(m, c.params.level(1), c.params.level(2), kappa, zz) -
                         eigenvalue(tw, c.params, zz)),
                1e-12 * std::abs(eigenvalue(tw, c.params, zz)));
  }
}

TEST(Solver, RejectsRootsOnInhomogeneities) {
  ChainModel m(ChainSpec(2, 1.0, {0.1, -0.6, 0.5, -0.2}));
  SolveResult r = solve_newton(m, {2}, {}, seeded(9, 60));
  for (const auto &c : r.certificates)
    EXPECT_FALSE(detail::collision(m.spec(), c.params, 1e-6).has_value());
}

TEST(Solver, BadArguments) {
  ChainModel m(ChainSpec(3, 1.0, {0.1, -0.6}));
  EXPECT_THROW(solve_newton(m, {1}, {}, seeded(1)), ArgumentError);
  EXPECT_THROW(solve_newton(m, {1, 0}, {}), ArgumentError);
  SolveResult r = solve_newton(m, {1, 0}, {BetheParameters::gl3({0.3, 0.4}, {})});
  ASSERT_EQ(r.failures.size(), 1u);
}

TEST(Certificate, PreconditionsAndDigest) {
  ChainModel m(ChainSpec(2, 1.0, {0.3, -0.3}));
  OnShellCertificate good = certify(m, BetheParameters::gl2({-0.5}));
  EXPECT_NO_THROW(require_on_shell(m, good));
  OnShellCertificate bad = certify(m, BetheParameters::gl2({Cx(-0.4, 0.3)}));
  EXPECT_FALSE(bad.valid());
  EXPECT_THROW(require_on_shell(m, bad), PreconditionError);
  ChainModel other(ChainSpec(2, 1.0, {0.3, -0.31}));
  EXPECT_THROW(require_on_shell(other, good), DigestError);
  EXPECT_EQ(chain_digest(m.spec()), chain_digest(m.spec().with_twist(TwistVector{{1.0, 2.0}})));
}

TEST(Certificate, HigherRankIsUncertified) {
  ChainModel m(ChainSpec(4, 1.0, {0.1, -0.6, 0.4}));
  SolveResult r = solve_newton(m, {1, 0, 0}, {}, seeded(2));
  EXPECT_TRUE(r.certificates.empty());
  ASSERT_FALSE(r.uncertified.empty());
  for (const auto &c : r.uncertified) {
    EXPECT_LE(c.max_bae_residual, 1e-11);
    EXPECT_FALSE(c.valid());
  }
}
