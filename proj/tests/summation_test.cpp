#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "epstein/summation.hpp"
#include "epstein/verify.hpp"

using namespace epstein;

namespace {

constexpr double pi = std::numbers::pi;

// mpmath: jtheta(3, 0, e^-pi), 4 zeta(2) G, (3/4) 6 zeta(2) L(2, chi_-3),
// pi coth(sqrt3 pi)/sqrt3 - 1/3, and Mellin quadratures of Jacobi theta powers.
constexpr double kThetaZ1 = 1.0864348112133080146;
constexpr double kZetaZ2s2 = 6.0268120396919401235;
constexpr double kZetaA2s2 = 5.7833592996786723131;
constexpr double kZetaZ3s3 = 8.4019239748275399931;
constexpr double kZetaPrimeZ1s1q3 = 1.4805341531637015652;
constexpr double kZetaQZ2s2q1 = 3.2265813644233597705;

LatticeBasis diag(std::initializer_list<double> d) {
  VectorXd v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v(i++) = x;
  return LatticeBasis(MatrixXd(v.asDiagonal()));
}

LatticeBasis z(Index n) { return LatticeBasis::integer_lattice(n); }

}  // namespace

TEST(Theta, Examples) {
  EXPECT_NEAR(theta(z(1), 1.0).value, kThetaZ1, 1e-14);
  EXPECT_NEAR(theta(z(2), 1.0).value, kThetaZ1 * kThetaZ1, 1e-14);
  EXPECT_NEAR(theta(z(1), 50.0).value, 1.0, 1e-12);
  EXPECT_EQ(theta(LatticeBasis::trivial(0), 2.0).value, 1.0);
  EXPECT_THROW(theta(z(1), 0.0), Error);
}

TEST(Theta, JacobiInversion) {
  for (double tau : {0.3, 0.8, 2.5}) {
    const LatticeBasis b = random_stable_lattice(3, 17);
    const double lhs = theta(b, tau).value;
    const double rhs = std::pow(tau, -1.5) * theta(dual(b), 1.0 / tau).value;
    EXPECT_NEAR(lhs, rhs, 1e-11 * lhs);
  }
}

TEST(Theta, DirectSumIsProduct) {
  LatticeBasis a = a2_lattice();
  LatticeBasis b = diag({0.8});
  EXPECT_NEAR(theta(direct_sum(a, b), 0.7).value, theta(a, 0.7).value * theta(b, 0.7).value, 1e-13);
}

TEST(ZetaPrime, Examples) {
  EXPECT_NEAR(zeta_prime_direct(z(1), 1.0).value, pi * pi / 3, 1e-12);
  EXPECT_NEAR(zeta_prime_direct(z(2), 2.0).value, kZetaZ2s2, 1e-11);
  EXPECT_NEAR(zeta_prime_direct(a2_lattice(), 2.0).value, kZetaA2s2, 1e-11);
  EXPECT_NEAR(zeta_prime_direct(z(3), 3.0).value, kZetaZ3s3, 1e-11);
  EXPECT_NEAR(zeta_prime_direct(z(1), 1.0, 3.0).value, kZetaPrimeZ1s1q3, 1e-12);
}

TEST(ZetaPrime, TailBoundIsSmall) {
  SummationResult r = zeta_prime_direct(z(3), 3.0, 0.0, 1e-10);
  EXPECT_LE(r.tail_bound, 1e-9 * r.value);
  EXPECT_NEAR(r.value, kZetaZ3s3, r.tail_bound + 1e-12);
}

TEST(ZetaPrime, Divergence) {
  try {
    zeta_prime_direct(z(2), 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::divergence);
  }
  EXPECT_THROW(zeta_prime_direct(z(2), 2.0, -1.0), Error);
}

TEST(ZetaPrime, ScalingAndRotation) {
  const LatticeBasis b = random_stable_lattice(3, 4);
  const double c = 1.7, s = 2.2, q = 0.4;
  const double base = zeta_prime_direct(b, s, q).value;
  LatticeBasis scaled(c * b.matrix());
  EXPECT_NEAR(zeta_prime_direct(scaled, s, c * c * q).value, std::pow(c, -2 * s) * base, 1e-11 * base);
  LatticeBasis rotated(detail::random_orthogonal(3, 99) * b.matrix());
  EXPECT_NEAR(zeta_prime_direct(rotated, s, q).value, base, 1e-11 * base);
}

TEST(ZetaPrime, BasisIndependence) {
  MatrixXd u(3, 3);
  u << 1, 5, -2, 0, 1, 3, 0, 0, 1;
  const LatticeBasis b = random_stable_lattice(3, 8);
  const double v1 = zeta_prime_direct(b, 2.0, 0.1).value;
  const double v2 = zeta_prime_direct(LatticeBasis(b.matrix() * u), 2.0, 0.1).value;
  EXPECT_NEAR(v1, v2, 1e-11 * v1);
}

TEST(ZetaQ, Examples) {
  EXPECT_NEAR(zeta_q(z(1), 1.0, 3.0).value, kZetaPrimeZ1s1q3 + 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(zeta_q(z(2), 2.0, 1.0).value, kZetaQZ2s2q1, 1e-11);
  EXPECT_DOUBLE_EQ(zeta_q(LatticeBasis::trivial(0), 1.0, 2.0).value, 0.5);
  EXPECT_THROW(zeta_q(z(1), 1.0, 0.0), Error);
}

TEST(ZetaQPsf, MatchesDirect) {
  EXPECT_NEAR(zeta_q_psf(z(1), 1.0, 3.0).value, zeta_q(z(1), 1.0, 3.0).value, 1e-9 * 1.82);
  const LatticeBasis d = diag({2.0, 0.5});
  const double ref = zeta_q(d, 3.0, 1.0).value;
  EXPECT_NEAR(zeta_q_psf(d, 3.0, 1.0).value, ref, 1e-9 * ref);
  EXPECT_NEAR(zeta_q_psf(z(2), 2.0, 1.0).value, kZetaQZ2s2q1, 1e-11);
}

TEST(ZetaQPsf, ZeroDualTerm) {
  PsfSeries series(z(1), 0.5, 3.0, 1e-12);
  const double w0 = std::sqrt(pi) * std::pow(3.0, -0.5) * std::tgamma(0.5) / std::tgamma(1.0);
  EXPECT_NEAR(w0, pi / std::sqrt(3.0), 1e-15);
  const double full = series.evaluate(1.0, 3.0).value;
  EXPECT_NEAR(full, w0 * (1.0 + series.nonzero_ratio(0.5, 3.0)), 1e-12);
  EXPECT_NEAR(w0, 1.8137993642342178, 1e-15);
}

TEST(ZetaQPsf, RandomLattices) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 3);
    const LatticeBasis b = random_stable_lattice(n, 100 + seed);
    for (double q : {0.1, 2.0}) {
      const double s = 0.5 * n + 0.75;
      const double ref = zeta_q(b, s, q).value;
      EXPECT_NEAR(zeta_q_psf(b, s, q).value, ref, 1e-9 * ref) << n << " " << q;
    }
  }
}

TEST(ZetaQPsf, Domain) {
  EXPECT_THROW(zeta_q_psf(z(2), 1.0, 1.0), Error);
  EXPECT_THROW(zeta_q_psf(z(2), 2.0, 0.0), Error);
}

TEST(ThetaQuadrature, Examples) {
  EXPECT_NEAR(zeta_from_theta_quadrature(z(1), 1.0, 3.0).value, kZetaPrimeZ1s1q3 + 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(zeta_from_theta_quadrature(z(2), 2.0, 1.0).value, kZetaQZ2s2q1, 1e-6 * kZetaQZ2s2q1);
  EXPECT_NEAR(zeta_from_theta_quadrature(LatticeBasis::trivial(0), 1.0, 2.0).value, 0.5, 1e-12);
}

TEST(ThetaQuadrature, AgreesWithDirect) {
  const LatticeBasis b = a2_lattice();
  for (double s : {1.5, 3.0})
    for (double q : {0.1, 1.0}) {
      const double ref = zeta_q(b, s, q).value;
      EXPECT_NEAR(zeta_from_theta_quadrature(b, s, q).value, ref, 1e-8 * ref);
    }
}

TEST(ThetaLimit, Examples) {
  const std::vector<double> v = theta_from_zeta_limit(z(1), 1.0, {64.0, 512.0});
  EXPECT_NEAR(v[0], kThetaZ1, 1e-2);
  EXPECT_NEAR(v[1], kThetaZ1, 1e-3);
  for (double x : theta_from_zeta_limit(LatticeBasis::trivial(0), 0.7, {1.0, 10.0, 100.0})) EXPECT_EQ(x, 1.0);
}

TEST(ThetaLimit, ApproachesTheta) {
  const double target = theta(z(2), 1.0).value;
  const std::vector<double> v = theta_from_zeta_limit(z(2), 1.0, {8, 32, 128, 512});
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(std::abs(v[i] - target), std::abs(v[i - 1] - target));
}

TEST(TailBound, DominatesOmittedTerms) {
  // Sum over |k| > 5 of k^-4 in Z^1 against the bound.
  double exact = 0.0;
  for (int k = 6; k < 200000; ++k) exact += 2.0 * std::pow(k, -4.0);
  const double bound = radial_tail_bound([](double r) { return std::pow(r, -4.0); }, 5.0, 11.0, PointCounter(1.0, 1));
  EXPECT_GE(bound, exact);
  EXPECT_LE(bound, 20.0 * exact);
}

TEST(PointCounter, DominatesEnumeratedCounts) {
  MatrixXd m(3, 3);
  m << 1.0, 0.3, -0.2, 0.0, 0.9, 0.4, 0.0, 0.0, 1.3;
  for (const LatticeBasis& b : {z(3), LatticeBasis(m)}) {
    VectorEnumerator en(b, kDefaultEnumerationBudget);
    const PointCounter pc(en);
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      std::size_t n = 1;
      en.for_each(r, [&](std::span<const std::int64_t>, double) { ++n; });
      EXPECT_GE(pc(r), static_cast<double>(n)) << r;
      EXPECT_LE(pc(r), point_count_bound(r, pc.lambda, 3));
    }
  }
}

TEST(Kahan, Compensates) {
  KahanSum k;
  k.add(1.0);
  for (int i = 0; i < 1000; ++i) k.add(1e-17);
  EXPECT_NEAR(k.value(), 1.0 + 1e-14, 1e-18);
}
