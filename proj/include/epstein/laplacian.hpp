#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "epstein/lattice.hpp"
#include "epstein/summation.hpp"

namespace epstein {

/// L1 + L2 with the perturbation acting on the full-rank factor L2.
struct SplitLattice {
  LatticeBasis part1;
  LatticeBasis part2;

  SplitLattice(LatticeBasis l1, LatticeBasis l2) : part1(std::move(l1)), part2(std::move(l2)) {
    if (!part1.is_full_rank()) throw Error(ErrorKind::domain, "L1 must be full rank in its own space");
    if (!part2.is_full_rank() || part2.is_trivial()) throw Error(ErrorKind::domain, "L2 must be full rank");
  }

  Index rank1() const { return part1.rank(); }
  Index rank2() const { return part2.rank(); }
  Index rank() const { return rank1() + rank2(); }
};

/// A symmetric d x d matrix.
class SymmetricPerturbation {
 public:
  explicit SymmetricPerturbation(MatrixXd a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || !a_.allFinite()) throw Error(ErrorKind::domain, "perturbation must be square");
    const double scale = std::max(1.0, a_.norm());
    if ((a_ - a_.transpose()).norm() > 1e-12 * scale) throw Error(ErrorKind::domain, "perturbation must be symmetric");
    a_ = 0.5 * (a_ + a_.transpose());
  }

  const MatrixXd& matrix() const { return a_; }
  Index dim() const { return a_.rows(); }
  bool is_trace_free(double tol = 1e-12) const { return std::abs(a_.trace()) <= tol * std::max(1.0, a_.norm()); }

 private:
  MatrixXd a_;
};

/// L1 + exp(A/2) L2.
inline LatticeBasis perturbed_lattice(const SplitLattice& split, const SymmetricPerturbation& a) {
  if (a.dim() != split.part2.ambient_dim()) throw Error(ErrorKind::domain, "perturbation has the wrong size");
  MatrixXd e = (0.5 * a.matrix()).exp();
  return direct_sum(split.part1, apply_transform(split.part2, e));
}

inline SummationResult epsilon_functional(const SplitLattice& split, const SymmetricPerturbation& a, double s, double q,
                                        double rel_tol = 1e-13) {
  return zeta_prime_direct(perturbed_lattice(split, a), s, q, rel_tol);
}

/// d^2/dt^2 zeta'_q(L1 + exp(tA/2) L2, s) at t = 0.
inline SummationResult second_derivative(const SplitLattice& split, const SymmetricPerturbation& a, double s, double q,
                                         double rel_tol = 1e-12) {
  const Index m = split.rank1();
  const Index d = split.rank2();
  if (a.dim() != d) throw Error(ErrorKind::domain, "perturbation has the wrong size");
  if (!(s > 0.5 * (m + d))) throw Error(ErrorKind::domain, "s must exceed n/2");
  if (!(q >= 0.0)) throw Error(ErrorKind::domain, "q must be >= 0");
  LatticeBasis l = direct_sum(split.part1, split.part2);
  MatrixXd w = MatrixXd::Zero(m + d, m + d);
  w.bottomRightCorner(d, d) = a.matrix();
  MatrixXd w2 = MatrixXd::Zero(m + d, m + d);
  w2.bottomRightCorner(d, d) = a.matrix() * a.matrix();
  SummationResult s2 = weighted_zeta_sum(l, {w, 2}, s + 2.0, q, rel_tol);
  SummationResult s1 = weighted_zeta_sum(l, {w2, 1}, s + 1.0, q, rel_tol);
  SummationResult r;
  r.value = s * ((s + 1.0) * s2.value - s1.value);
  r.tail_bound = s * ((s + 1.0) * s2.tail_bound + s1.tail_bound);
  r.terms_used = s2.terms_used + s1.terms_used;
  return r;
}

/// Orthonormal basis (Frobenius) of the trace-free symmetric d x d matrices.
inline std::vector<MatrixXd> trace_free_basis(Index d) {
  std::vector<MatrixXd> out;
  for (Index k = 1; k < d; ++k) {
    MatrixXd b = MatrixXd::Zero(d, d);
    for (Index i = 0; i < k; ++i) b(i, i) = 1.0;
    b(k, k) = -static_cast<double>(k);
    out.push_back(b / std::sqrt(static_cast<double>(k * (k + 1))));
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      MatrixXd b = MatrixXd::Zero(d, d);
      b(i, j) = b(j, i) = std::sqrt(0.5);
      out.push_back(b);
    }
  }
  return out;
}

/// Sum of second derivatives over the trace-free symmetric directions, from the
/// closed form s(d-1)/d sum_{y in L2\0} [(s+1)|y|^4 Z(s+2) - (d/2+1)|y|^2 Z(s+1)]
/// with Z(sigma) = zeta_{|y|^2+q}(L1, sigma).
///
/// Near y the inner sums use the Bessel series. Far away Z(sigma) is replaced by
/// its leading term C_sigma Q^(m/2-sigma); summed over all of L2 this part reduces
/// to plain zeta'_q(L2) values. The neglected remainder is bounded through the
/// nonzero dual terms at the cutoff.
inline SummationResult laplacian_S0(const SplitLattice& split, double s, double q, double rel_tol = 1e-12) {
  constexpr double pi = std::numbers::pi;
  const Index m = split.rank1();
  const Index d = split.rank2();
  const double n = static_cast<double>(m + d);
  if (!(s > 0.5 * n)) throw Error(ErrorKind::domain, "s must exceed n/2");
  if (!(q >= 0.0)) throw Error(ErrorKind::domain, "q must be >= 0");
  if (d < 2) return {};
  const double hm = 0.5 * m;
  const double cd = 0.5 * d + 1.0;
  const double det1 = determinant(split.part1);
  auto lead = [&](double sigma) {
    return std::exp(hm * std::log(pi) + std::lgamma(sigma - hm) - std::lgamma(sigma)) / det1;
  };
  const double c2 = lead(s + 2.0);
  const double c1 = lead(s + 1.0);

  const double zt = rel_tol * 1e-2;
  SummationResult z0 = zeta_prime_direct(split.part2, s - hm, q, zt);
  SummationResult z1 = zeta_prime_direct(split.part2, s + 1.0 - hm, q, zt);
  SummationResult z2 = zeta_prime_direct(split.part2, s + 2.0 - hm, q, zt);
  const double far = (s + 1.0) * c2 * (z0.value - 2.0 * q * z1.value + q * q * z2.value) -
                     cd * c1 * (z0.value - q * z1.value);
  double err = (s + 1.0) * c2 * (z0.tail_bound + 2.0 * q * z1.tail_bound + q * q * z2.tail_bound) +
               cd * c1 * (z0.tail_bound + q * z1.tail_bound);
  const double scale = std::max(std::abs(far), 1e-300);

  KahanSum near;
  std::size_t terms = z0.terms_used + z1.terms_used + z2.terms_used;
  if (m > 0) {
    VectorEnumerator en2(split.part2);
    const double lam2 = lambda1(en2);
    PsfSeries inner(split.part1, s + 2.0 - hm, lam2 * lam2 + q, zt);
    double radius = lam2;
    for (int it = 0;; ++it) {
      const double qr = radius * radius + q;
      const double rem = ((s + 1.0) * c2 * inner.nonzero_ratio(s + 2.0 - hm, qr) +
                          cd * c1 * inner.nonzero_ratio(s + 1.0 - hm, qr)) * z0.value;
      if (rem <= 0.1 * rel_tol * scale) {
        err += rem;
        break;
      }
      if (it > 60) throw Error(ErrorKind::tolerance, "inner Bessel remainder does not decay");
      radius *= std::sqrt(2.0);
    }
    std::vector<double> norms;
    en2.for_each(radius, [&](std::span<const std::int64_t>, double r2) { norms.push_back(r2); });
    std::sort(norms.begin(), norms.end(), std::greater<>());
    for (double y2 : norms) {
      const double qq = y2 + q;
      SummationResult a2 = inner.evaluate(s + 2.0, qq);
      SummationResult a1 = inner.evaluate(s + 1.0, qq);
      const double h = (s + 1.0) * y2 * y2 * a2.value - cd * y2 * a1.value;
      const double phi = (s + 1.0) * y2 * y2 * c2 * std::pow(qq, hm - s - 2.0) -
                         cd * y2 * c1 * std::pow(qq, hm - s - 1.0);
      near.add(h - phi);
      err += (s + 1.0) * y2 * y2 * a2.tail_bound + cd * y2 * a1.tail_bound;
    }
    terms += norms.size();
  }
  const double f = s * (d - 1.0) / d;
  SummationResult r;
  r.value = f * (far + near.value());
  r.tail_bound = f * err;
  r.terms_used = terms;
  return r;
}

/// Central second difference of E along A: (E(hA) - 2E(0) + E(-hA)) / h^2.
inline double second_difference(const SplitLattice& split, const MatrixXd& a, double s, double q, double h,
                                double e0, double rel_tol = 1e-14) {
  const double ep = epsilon_functional(split, SymmetricPerturbation(h * a), s, q, rel_tol).value;
  const double em = epsilon_functional(split, SymmetricPerturbation(-h * a), s, q, rel_tol).value;
  return (ep - 2.0 * e0 + em) / (h * h);
}

/// Finite-difference trace-free Laplacian. Falls back to Richardson extrapolation
/// between steps 10h and h when the two disagree by more than 1e-5 relative.
inline double laplacian_S0_fd(const SplitLattice& split, double s, double q, double h = 1e-3) {
  const Index d = split.rank2();
  const double e0 = epsilon_functional(split, SymmetricPerturbation(MatrixXd::Zero(d, d)), s, q, 1e-14).value;
  double total = 0.0;
  for (const MatrixXd& b : trace_free_basis(d)) {
    const double fine = second_difference(split, b, s, q, h, e0);
    const double coarse = second_difference(split, b, s, q, 10.0 * h, e0);
    if (std::abs(fine - coarse) > 1e-5 * std::max(std::abs(fine), 1e-300))
      total += (100.0 * fine - coarse) / 99.0;
    else
      total += fine;
  }
  return total;
}

struct PositivityCheck {
  bool positive = false;
  double margin = 0.0;
  double tail_bound = 0.0;
  double q_bound = 0.0;
};

inline double laplacian_q_bound(const SplitLattice& split, double s) {
  const double lam = lambda1(split.part2);
  return (2.0 * s - static_cast<double>(split.rank())) / (split.rank2() + 2.0) * lam * lam;
}

inline PositivityCheck laplacian_positivity_check(const SplitLattice& split, double s, double q,
                                                  bool allow_out_of_range = false, double rel_tol = 1e-12) {
  if (split.rank2() < 2) throw Error(ErrorKind::domain, "L2 must have rank >= 2");
  if (!(s > 0.5 * split.rank())) throw Error(ErrorKind::domain, "s must exceed n/2");
  PositivityCheck c;
  c.q_bound = laplacian_q_bound(split, s);
  if (!(q >= 0.0) || (!allow_out_of_range && q > c.q_bound * (1.0 + 1e-12)))
    throw Error(ErrorKind::domain, "q outside the certified range");
  SummationResult r = laplacian_S0(split, s, q, rel_tol);
  c.margin = r.value;
  c.tail_bound = r.tail_bound;
  c.positive = r.value - r.tail_bound > 0.0;
  return c;
}

struct DominanceResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tail_bound = 0.0;
  bool splits = false;
};

/// zeta'_q(L) against zeta'_q(L/L' + L') for a primitive sublattice L'.
inline DominanceResult direct_sum_dominance(const LatticeBasis& b, const LatticeBasis& sub, double s, double q,
                                            double rel_tol = 1e-13) {
  if (!b.is_full_rank()) throw Error(ErrorKind::domain, "L must be full rank");
  LatticeBasis qt = quotient(b, sub);
  LatticeBasis split = direct_sum(qt, full_rank_coordinates(sub).coords);
  SummationResult l = zeta_prime_direct(b, s, q, rel_tol);
  SummationResult r = zeta_prime_direct(split, s, q, rel_tol);
  DominanceResult out;
  out.lhs = l.value;
  out.rhs = r.value;
  out.gap = r.value - l.value;
  out.tail_bound = l.tail_bound + r.tail_bound;
  out.splits = true;
  if (!sub.is_trivial()) {
    const MatrixXd& sm = sub.matrix();
    MatrixXd proj = sm * (sm.transpose() * sm).ldlt().solve(sm.transpose() * b.matrix());
    for (Index i = 0; i < proj.cols() && out.splits; ++i) out.splits = contains(sub, proj.col(i), 1e-8);
  }
  return out;
}

}  // namespace epstein
