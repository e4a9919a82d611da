#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "epstein/laplacian.hpp"
#include "epstein/verify.hpp"

using namespace epstein;

namespace {

constexpr double kZetaZ2s2 = 6.0268120396919401235;  // 4 zeta(2) G

LatticeBasis z(Index n) { return LatticeBasis::integer_lattice(n); }
LatticeBasis none() { return LatticeBasis::trivial(0); }

SymmetricPerturbation sym(std::initializer_list<double> entries) {
  const auto d = static_cast<Index>(std::lround(std::sqrt(entries.size())));
  MatrixXd m(d, d);
  Index i = 0;
  for (double x : entries) {
    m(i / d, i % d) = x;
    ++i;
  }
  return SymmetricPerturbation(m);
}

double fd(const SplitLattice& split, const MatrixXd& a, double s, double q) {
  const Index d = split.rank2();
  const double e0 = epsilon_functional(split, SymmetricPerturbation(MatrixXd::Zero(d, d)), s, q, 1e-14).value;
  const double fine = second_difference(split, a, s, q, 1e-3, e0);
  const double coarse = second_difference(split, a, s, q, 1e-2, e0);
  return (100.0 * fine - coarse) / 99.0;
}

}  // namespace

TEST(SymmetricPerturbation, Validation) {
  EXPECT_THROW(sym({1, 2, 0, 1}), Error);
  EXPECT_TRUE(sym({1, 2, 2, -1}).is_trace_free());
  EXPECT_FALSE(sym({1, 0, 0, 1}).is_trace_free());
}

TEST(EpsilonFunctional, Examples) {
  SplitLattice zz(z(1), z(1));
  EXPECT_NEAR(epsilon_functional(zz, sym({0}), 2.0, 0.0).value, kZetaZ2s2, 1e-11);
  SplitLattice scalar(none(), z(1));
  EXPECT_NEAR(epsilon_functional(scalar, sym({2 * std::log(2.0)}), 1.0, 0.0).value,
              std::numbers::pi * std::numbers::pi / 12, 1e-12);
}

TEST(EpsilonFunctional, AxisSwapSymmetry) {
  SplitLattice split(none(), z(2));
  const double a = 0.37;
  const double plus = epsilon_functional(split, sym({a, 0, 0, -a}), 3.0, 0.2).value;
  const double minus = epsilon_functional(split, sym({-a, 0, 0, a}), 3.0, 0.2).value;
  EXPECT_NEAR(plus, minus, 1e-12 * plus);
}

TEST(SecondDerivative, ZeroDirection) {
  SplitLattice split(z(1), z(2));
  EXPECT_EQ(second_derivative(split, sym({0, 0, 0, 0}), 3.0, 0.1).value, 0.0);
}

TEST(SecondDerivative, MatchesFiniteDifference) {
  struct Case {
    SplitLattice split;
    MatrixXd a;
    double s, q;
  };
  MatrixXd off(2, 2);
  off << 0.2, 0.7, 0.7, -0.4;
  const std::vector<Case> cases = {
      {SplitLattice(none(), z(2)), sym({1, 0, 0, -1}).matrix(), 3.0, 0.1},
      {SplitLattice(z(1), z(1)), sym({1}).matrix(), 2.0, 0.0},
      {SplitLattice(z(1), a2_lattice()), off, 2.5, 0.3},
  };
  for (const Case& c : cases) {
    const double exact = second_derivative(c.split, SymmetricPerturbation(c.a), c.s, c.q).value;
    EXPECT_NEAR(fd(c.split, c.a, c.s, c.q), exact, 1e-6 * std::abs(exact));
  }
}

TEST(LaplacianS0, RankOneIsZero) {
  EXPECT_EQ(laplacian_S0(SplitLattice(z(2), z(1)), 2.0, 0.5).value, 0.0);
}

TEST(LaplacianS0, EqualsBasisSum) {
  for (const SplitLattice& split : {SplitLattice(none(), z(2)), SplitLattice(z(1), z(2)),
                                    SplitLattice(a2_lattice(), z(3))}) {
    const double s = 0.5 * split.rank() + 1.3, q = 0.1;
    double sum = 0.0;
    for (const MatrixXd& e : trace_free_basis(split.rank2()))
      sum += second_derivative(split, SymmetricPerturbation(e), s, q).value;
    const double closed = laplacian_S0(split, s, q).value;
    EXPECT_GT(closed, 0.0);
    EXPECT_NEAR(closed, sum, 1e-9 * std::abs(sum));
  }
}

TEST(LaplacianS0, MatchesFiniteDifference) {
  SplitLattice split(z(1), z(2));
  const double closed = laplacian_S0(split, 4.0, 0.0).value;
  EXPECT_GT(closed, 0.0);
  EXPECT_NEAR(laplacian_S0_fd(split, 4.0, 0.0), closed, 1e-4 * closed);
}

TEST(LaplacianS0, MinusTraceDecomposition) {
  SplitLattice split(z(1), a2_lattice());
  const double s = 2.5, q = 0.4;
  const Index d = 2;
  double full = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      MatrixXd e = MatrixXd::Zero(d, d);
      if (i == j)
        e(i, i) = 1.0;
      else
        e(i, j) = e(j, i) = std::sqrt(0.5);
      full += second_derivative(split, SymmetricPerturbation(e), s, q).value;
    }
  const double trace = second_derivative(split, SymmetricPerturbation(MatrixXd::Identity(d, d)), s, q).value;
  const double closed = laplacian_S0(split, s, q).value;
  EXPECT_NEAR(closed, full - trace / d, 1e-6 * std::abs(closed));
}

TEST(LaplacianS0, BasisIndependence) {
  MatrixXd u(2, 2);
  u << 2, 1, 1, 1;
  const LatticeBasis l2 = a2_lattice();
  const double ref = laplacian_S0(SplitLattice(z(1), l2), 2.5, 0.2).value;
  const LatticeBasis moved(detail::random_orthogonal(2, 12) * l2.matrix() * u);
  EXPECT_NEAR(laplacian_S0(SplitLattice(z(1), moved), 2.5, 0.2).value, ref, 1e-8 * ref);
}

TEST(Positivity, Examples) {
  PositivityCheck a = laplacian_positivity_check(SplitLattice(none(), z(2)), 3.0, 0.0);
  EXPECT_TRUE(a.positive);
  SplitLattice split(z(1), z(2));
  EXPECT_NEAR(laplacian_q_bound(split, 4.0), 1.25, 1e-12);
  EXPECT_TRUE(laplacian_positivity_check(split, 4.0, 1.25).positive);
  EXPECT_THROW(laplacian_positivity_check(SplitLattice(z(1), z(1)), 3.0, 0.0), Error);
  EXPECT_THROW(laplacian_positivity_check(split, 4.0, 2.0), Error);
  EXPECT_NO_THROW(laplacian_positivity_check(split, 4.0, 2.0, true));
}

TEST(Dominance, Examples) {
  MatrixXd e1(2, 1);
  e1 << 1, 0;
  DominanceResult z2 = direct_sum_dominance(z(2), LatticeBasis(e1), 2.0, 0.0);
  EXPECT_NEAR(z2.gap, 0.0, 1e-9);
  EXPECT_TRUE(z2.splits);

  const LatticeBasis a2 = a2_lattice();
  DominanceResult h = direct_sum_dominance(a2, LatticeBasis(MatrixXd(a2.matrix().col(0))), 2.0, 0.0);
  EXPECT_GT(h.gap, 1e-4);
  EXPECT_FALSE(h.splits);

  const LatticeBasis l = direct_sum(z(1), a2);
  MatrixXd v = MatrixXd::Zero(3, 1);
  v.bottomRows(2) = a2.matrix().col(1);
  const LatticeBasis sub(v);
  DominanceResult c = direct_sum_dominance(l, sub, 2.5, 0.1);
  EXPECT_GT(c.gap, 1e-4);
  const LatticeBasis q = quotient(l, sub);
  const LatticeBasis expected = direct_sum(z(1), quotient(a2, LatticeBasis(MatrixXd(a2.matrix().col(1)))));
  EXPECT_NEAR(determinant(q), determinant(expected), 1e-12);
  EXPECT_NEAR(lambda1(q), std::min(1.0, lambda1(expected)), 1e-12);
}

TEST(Dominance, RejectsImprimitive) {
  MatrixXd e1(2, 1);
  e1 << 2, 0;
  try {
    direct_sum_dominance(z(2), LatticeBasis(e1), 2.0, 0.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::primitivity);
  }
}
