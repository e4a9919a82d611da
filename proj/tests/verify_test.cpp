#include <cmath>

#include <gtest/gtest.h>

#include "epstein/verify.hpp"

using namespace epstein;

namespace {

constexpr double kZetaZ2s2 = 6.0268120396919401235;
constexpr double kZetaA2s2 = 5.7833592996786723131;
constexpr double kZetaZ2s3q02 = 2.8320395210217365655;    // mpmath Mellin quadrature
constexpr double kZetaDiag14s3q02 = 1.1899564557889131384;  // mpmath nsum over Z^2
constexpr double kZetaZ3s3 = 8.4019239748275399931;

LatticeBasis diag(std::initializer_list<double> d) {
  VectorXd v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v(i++) = x;
  return LatticeBasis(MatrixXd(v.asDiagonal()));
}

}  // namespace

TEST(RandomStable, RankOneIsZ) {
  const LatticeBasis b = random_stable_lattice(1, 9);
  EXPECT_NEAR(std::abs(b.matrix()(0, 0)), 1.0, 1e-12);
}

TEST(RandomStable, PostConditions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LatticeBasis b = random_stable_lattice(2, seed);
    EXPECT_NEAR(determinant(b), 1.0, 1e-9);
    EXPECT_GE(lambda1(b), 1.0 - 1e-9);
    EXPECT_EQ(is_stable(b).verdict, StabilityVerdict::stable);
  }
  EXPECT_EQ(is_stable(random_stable_lattice(4, 1)).verdict, StabilityVerdict::stable);
}

TEST(RandomStable, Deterministic) {
  EXPECT_EQ(random_stable_lattice(3, 42).matrix(), random_stable_lattice(3, 42).matrix());
  EXPECT_EQ(random_stable_lattice(3, 42, 5).matrix(), random_stable_lattice(3, 42, 5).matrix());
  EXPECT_NE(random_stable_lattice(3, 42, 5).matrix(), random_stable_lattice(3, 42, 6).matrix());
  EXPECT_THROW(random_stable_lattice(9, 1), Error);
}

TEST(Fixtures, AreStable) {
  for (Index n = 1; n <= 4; ++n)
    for (const auto& [id, b] : verification_fixtures(n)) {
      EXPECT_EQ(b.rank(), n) << id;
      EXPECT_EQ(is_stable(b).verdict, StabilityVerdict::stable) << id;
    }
}

TEST(Fixtures, D4HasDeterminantTwoBeforeScaling) {
  MatrixXd d4(4, 4);
  d4 << 1, 1, 0, 0, -1, 1, -1, 0, 0, 0, 1, -1, 0, 0, 0, 1;
  EXPECT_NEAR(determinant(LatticeBasis(d4)), 2.0, 1e-12);
  EXPECT_NEAR(lambda1(LatticeBasis(d4)), std::sqrt(2.0), 1e-12);
}

TEST(VerifyTheorem, A2AgainstZ2) {
  VerificationReport r = verify_theorem(2, 2.0, 0.0, 0, 1);
  EXPECT_NEAR(r.reference, kZetaZ2s2, 1e-10);
  for (const LatticeOutcome& o : r.per_lattice) {
    if (o.lattice_id == "fixture-A2+Z") {
      EXPECT_NEAR(o.zeta_prime, kZetaA2s2, 1e-10);
      EXPECT_GT(o.margin, 0.2);
      EXPECT_FALSE(o.is_Zn);
    }
    if (o.lattice_id == "fixture-Zn" || o.lattice_id == "fixture-rotated-Zn") {
      EXPECT_NEAR(o.margin, 0.0, 1e-10);
      EXPECT_TRUE(o.is_Zn);
    }
  }
}

TEST(VerifyTheorem, SmallRun) {
  VerificationReport r = verify_theorem(3, 2.5, 0.2, 10, 5);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.equality_mismatches, 0u);
  EXPECT_EQ(r.errors, 0u);
  EXPECT_EQ(r.per_lattice.size(), 10u + verification_fixtures(3).size());
  EXPECT_TRUE(std::is_sorted(r.per_lattice.begin(), r.per_lattice.end(),
                             [](const auto& a, const auto& b) { return a.lattice_id < b.lattice_id; }));
  for (const LatticeOutcome& o : r.per_lattice) {
    if (!o.is_Zn) {
      EXPECT_GT(o.margin, 0.0) << o.lattice_id;
    }
  }
}

TEST(VerifyTheorem, ThreadCountDoesNotMatter) {
  VerificationReport a = verify_theorem(2, 3.0, 0.3, 6, 8, false, 1);
  VerificationReport b = verify_theorem(2, 3.0, 0.3, 6, 8, false, 4);
  ASSERT_EQ(a.per_lattice.size(), b.per_lattice.size());
  for (std::size_t i = 0; i < a.per_lattice.size(); ++i) EXPECT_EQ(a.per_lattice[i].zeta_prime, b.per_lattice[i].zeta_prime);
}

TEST(VerifyTheorem, QRange) {
  EXPECT_NEAR(theorem_q_bound(3, 2.5), 0.4, 1e-15);
  EXPECT_THROW(verify_theorem(2, 2.0, 0.6, 1, 1), Error);
  VerificationReport r = verify_theorem(2, 2.0, 0.6, 1, 1, true);
  EXPECT_TRUE(r.exploratory);
  EXPECT_THROW(verify_theorem(2, 1.0, 0.0, 1, 1), Error);
}

TEST(GeneralReduction, Examples) {
  ReductionResult a = general_case_reduction(diag({1, 4}), 3.0, 0.2);
  EXPECT_TRUE(a.holds);
  EXPECT_NEAR(a.lhs, kZetaDiag14s3q02, 1e-11);
  EXPECT_NEAR(a.rhs, kZetaZ2s3q02, 1e-11);

  ReductionResult b = general_case_reduction(random_stable_lattice(3, 2), 3.0, 0.1);
  EXPECT_NEAR(b.lhs, b.rhs, 1e-12 * b.lhs);

  ReductionResult c = general_case_reduction(diag({1, 2, 2}), 3.0, 0.0);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.rhs, kZetaZ3s3, 1e-10);
}
