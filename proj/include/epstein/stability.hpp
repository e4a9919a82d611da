#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "epstein/lattice.hpp"

namespace epstein {

/// gamma_k^(k/2) for the Hermite constant gamma_k; exact for k <= 8, and the
/// bound gamma_k <= 1 + k/4 beyond.
inline double hermite_power_bound(Index k) {
  static const std::array<double, 9> exact = {1.0,
                                              1.0,
                                              std::sqrt(4.0 / 3.0),
                                              std::sqrt(2.0),
                                              2.0,
                                              std::sqrt(8.0),
                                              std::sqrt(64.0 / 3.0),
                                              8.0,
                                              16.0};
  if (k < static_cast<Index>(exact.size())) return exact[k];
  return std::pow(1.0 + 0.25 * k, 0.5 * k);
}

struct SublatticeMinimum {
  Index rank = 0;
  double det = 1.0;
  LatticeBasis sublattice;
  IntMatrix coeffs;
  double radius = 0.0;
  double required_radius = 0.0;
  bool complete = true;
};

namespace detail {

struct Candidate {
  IntVector coeffs;
  VectorXd embedding;
  double norm = 0.0;
};

// One representative per +-pair (first nonzero coefficient negative), sorted by (norm, coeffs).
inline std::vector<Candidate> sublattice_candidates(const LatticeBasis& b, double radius, std::size_t budget) {
  std::vector<Candidate> out;
  for (LatticeVector& v : enumerate_vectors(b, radius, budget)) {
    Index i = 0;
    while (i < v.coeffs.size() && v.coeffs(i) == 0) ++i;
    if (i == v.coeffs.size() || v.coeffs(i) > 0) continue;
    out.push_back({std::move(v.coeffs), std::move(v.embedding), std::sqrt(v.norm_sq)});
  }
  return out;
}

// Depth-first search over k-tuples of independent candidates. bound() returns the
// current determinant bound D; a partial tuple with norm product P and last norm nu
// is abandoned when P nu^(k-j) > gamma_k^(k/2) D. visit(det, saturated coeffs).
template <class Bound, class Visit>
void search_tuples(const LatticeBasis& b, const std::vector<Candidate>& cand, Index k, Bound&& bound,
                   Visit&& visit, std::size_t budget) {
  const double hk = hermite_power_bound(k);
  std::vector<std::size_t> chosen;
  std::vector<VectorXd> ortho;
  std::size_t nodes = 0;
  bool stop = false;
  auto rec = [&](auto&& self, std::size_t start, double prod, double gsdet) -> void {
    const Index j = static_cast<Index>(chosen.size());
    if (j == k) {
      IntMatrix c(b.rank(), k);
      for (Index i = 0; i < k; ++i) c.col(i) = cand[chosen[i]].coeffs;
      Saturation s = saturate(c);
      if (visit(gsdet / static_cast<double>(std::llabs(s.index)), s.basis)) stop = true;
      return;
    }
    for (std::size_t i = start; i < cand.size() && !stop; ++i) {
      if (++nodes > budget) throw Error(ErrorKind::enumeration_budget, "sublattice search exceeds the budget");
      const double nu = cand[i].norm;
      if (prod * std::pow(nu, static_cast<double>(k - j)) > hk * bound() * (1.0 + 1e-12)) break;
      VectorXd r = cand[i].embedding;
      for (const VectorXd& o : ortho) r -= (o.dot(r) / o.squaredNorm()) * o;
      const double rn = r.norm();
      if (rn <= 1e-9 * nu) continue;
      chosen.push_back(i);
      ortho.push_back(std::move(r));
      self(self, i + 1, prod * nu, gsdet * rn);
      chosen.pop_back();
      ortho.pop_back();
    }
  };
  rec(rec, 0, 1.0, 1.0);
}

}  // namespace detail

/// Minimum determinant over rank-k sublattices. Without an explicit radius the
/// search radius is chosen so that the result is provably optimal.
inline SublatticeMinimum min_sublattice_det(const LatticeBasis& b, Index k, std::optional<double> radius = {},
                                            const Tolerances& tol = {}) {
  const Index d = b.rank();
  if (k < 0 || k > d) throw Error(ErrorKind::domain, "sublattice rank out of range");
  SublatticeMinimum out;
  out.rank = k;
  if (k == 0) {
    out.sublattice = LatticeBasis::trivial(b.ambient_dim());
    out.coeffs = IntMatrix(d, 0);
    return out;
  }
  if (k == d) {
    out.det = determinant(b);
    out.sublattice = b;
    out.coeffs = IntMatrix::Identity(d, d);
    return out;
  }

  VectorEnumerator en(b, tol.enumeration_budget);
  const double lam = lambda1(en);
  // Initial bound: saturation of the first k reduced vectors.
  IntMatrix init = en.transform().leftCols(k);
  Saturation s0 = saturate(init);
  out.coeffs = s0.basis;
  out.sublattice = LatticeBasis(b.matrix() * s0.basis.cast<double>());
  out.det = determinant(out.sublattice);

  const double hk = hermite_power_bound(k);
  auto required = [&](double dbest) { return hk * dbest / std::pow(lam, static_cast<double>(k - 1)); };
  double rad = required(out.det);
  if (radius) {
    rad = *radius;
  } else if (en.predicted_count(rad) > 0.1 * static_cast<double>(tol.enumeration_budget)) {
    double gsmax = std::sqrt(en.gs_norms_sq().maxCoeff());
    rad = std::max(std::sqrt(static_cast<double>(b.ambient_dim())), 2.0 * gsmax);
  }

  std::vector<detail::Candidate> cand = detail::sublattice_candidates(b, rad, tol.enumeration_budget);
  // With an explicit radius only tuples inside the radius count.
  double best = radius ? std::numeric_limits<double>::infinity() : out.det;
  IntMatrix best_c = out.coeffs;
  detail::search_tuples(
      b, cand, k, [&] { return best; },
      [&](double det, const IntMatrix& c) {
        if (det < best * (1.0 - 1e-12)) {
          best = det;
          best_c = c;
        }
        return false;
      },
      tol.enumeration_budget);
  if (!std::isfinite(best))
    throw Error(ErrorKind::insufficient_radius, "fewer than k independent vectors within the radius");

  out.coeffs = best_c;
  out.sublattice = LatticeBasis(b.matrix() * best_c.cast<double>());
  out.det = determinant(out.sublattice);
  out.radius = rad;
  out.required_radius = required(out.det);
  out.complete = rad >= out.required_radius * (1.0 - 1e-12);
  return out;
}

/// Calls visit(sublattice) for primitive rank-k sublattices with det <= det_bound,
/// in search order, until visit returns true. Repeats are possible.
template <class Visit>
void for_each_small_sublattice(const LatticeBasis& b, Index k, double det_bound, Visit&& visit,
                               const Tolerances& tol = {}) {
  if (k <= 0 || k >= b.rank()) return;
  const double lam = lambda1(b, tol.enumeration_budget);
  const double rad = hermite_power_bound(k) * det_bound / std::pow(lam, static_cast<double>(k - 1));
  std::vector<detail::Candidate> cand = detail::sublattice_candidates(b, rad, tol.enumeration_budget);
  detail::search_tuples(
      b, cand, k, [&] { return det_bound; },
      [&](double det, const IntMatrix& c) {
        if (det > det_bound) return false;
        return static_cast<bool>(visit(LatticeBasis(b.matrix() * c.cast<double>())));
      },
      tol.enumeration_budget);
}

enum class StabilityVerdict { stable, unstable, not_unit_det, inconclusive };

inline const char* to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::stable: return "stable";
    case StabilityVerdict::unstable: return "unstable";
    case StabilityVerdict::not_unit_det: return "not-unit-det";
    case StabilityVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct StabilityCertificate {
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  std::vector<SublatticeMinimum> min_dets;  // k = 1..rank
  std::optional<LatticeBasis> witness;
  std::string explanation;
};

inline StabilityCertificate is_stable(const LatticeBasis& b, const Tolerances& tol = {}) {
  if (!b.is_full_rank() || b.is_trivial()) throw Error(ErrorKind::domain, "stability needs a full-rank lattice");
  StabilityCertificate cert;
  const Index n = b.rank();
  for (Index k = 1; k <= n; ++k) cert.min_dets.push_back(min_sublattice_det(b, k, std::nullopt, tol));
  const double det = cert.min_dets.back().det;
  if (std::abs(det - 1.0) > tol.rel) {
    cert.verdict = StabilityVerdict::not_unit_det;
    cert.explanation = "det(L) = " + std::to_string(det);
    return cert;
  }
  bool complete = true;
  for (Index k = 1; k < n; ++k) {
    const SublatticeMinimum& m = cert.min_dets[k - 1];
    if (m.det < 1.0 - tol.rel) {
      cert.verdict = StabilityVerdict::unstable;
      cert.witness = m.sublattice;
      cert.explanation = "rank " + std::to_string(k) + " sublattice with det " + std::to_string(m.det);
      return cert;
    }
    complete = complete && m.complete;
  }
  cert.verdict = complete ? StabilityVerdict::stable : StabilityVerdict::inconclusive;
  cert.explanation = complete ? "all proper sublattices have det >= 1" : "search radius could not be certified";
  return cert;
}

struct StabilizeResult {
  LatticeBasis lattice;
  MatrixXd transform;
};

/// Contracts a semi-stable lattice (all sublattice dets >= 1) to a stable one.
/// Each step shrinks the complement of the largest det-1 sublattice L1 by the
/// smallest normalised sublattice det of L / L1.
inline StabilizeResult stabilize(const LatticeBasis& b, const Tolerances& tol = {}) {
  if (!b.is_full_rank() || b.is_trivial()) throw Error(ErrorKind::domain, "stabilize needs a full-rank lattice");
  const Index n = b.rank();
  LatticeBasis cur = b;
  MatrixXd total = MatrixXd::Identity(n, n);
  for (int step = 0; step <= n + 1; ++step) {
    std::vector<SublatticeMinimum> mins;
    for (Index k = 1; k <= n; ++k) mins.push_back(min_sublattice_det(cur, k, std::nullopt, tol));
    for (const SublatticeMinimum& m : mins) {
      if (m.det < 1.0 - tol.rel) {
        if (step == 0) throw Error(ErrorKind::not_semi_stable, "a sublattice has det < 1");
        throw Error(ErrorKind::tolerance, "stabilization lost semi-stability");
      }
    }
    Index k1 = 0;
    for (Index k = n; k >= 1; --k) {
      if (mins[k - 1].det <= 1.0 + tol.rel) {
        k1 = k;
        break;
      }
    }
    if (k1 == n) {
      StabilityCertificate c = is_stable(cur, tol);
      if (c.verdict != StabilityVerdict::stable) throw Error(ErrorKind::tolerance, "stabilized lattice is not certified stable");
      return {cur, total};
    }
    LatticeBasis l1 = k1 == 0 ? LatticeBasis::trivial(n) : mins[k1 - 1].sublattice;
    LatticeBasis qt = quotient(cur, l1, 1e-8);
    double c = std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= qt.rank(); ++j)
      c = std::min(c, std::pow(min_sublattice_det(qt, j, std::nullopt, tol).det, 1.0 / j));
    MatrixXd p1 = MatrixXd::Zero(n, n);
    if (k1 > 0) {
      const MatrixXd& m = l1.matrix();
      p1 = m * (m.transpose() * m).ldlt().solve(m.transpose());
    }
    MatrixXd a = p1 + (MatrixXd::Identity(n, n) - p1) / c;
    cur = apply_transform(cur, a);
    total = a * total;
  }
  throw Error(ErrorKind::tolerance, "stabilization did not terminate");
}

enum class BoundaryVerdict { interior, boundary, not_stable, inconclusive };

inline const char* to_string(BoundaryVerdict v) {
  switch (v) {
    case BoundaryVerdict::interior: return "interior";
    case BoundaryVerdict::boundary: return "boundary";
    case BoundaryVerdict::not_stable: return "not-stable";
    case BoundaryVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct BoundaryResult {
  BoundaryVerdict verdict = BoundaryVerdict::inconclusive;
  std::optional<LatticeBasis> witness;
};

inline BoundaryResult on_stable_boundary(const LatticeBasis& b, const Tolerances& tol = {}) {
  StabilityCertificate cert = is_stable(b, tol);
  if (cert.verdict == StabilityVerdict::inconclusive) return {BoundaryVerdict::inconclusive, {}};
  if (cert.verdict != StabilityVerdict::stable) return {BoundaryVerdict::not_stable, {}};
  const Index n = b.rank();
  bool undecided = false;
  for (Index k = 1; k < n; ++k) {
    if (cert.min_dets[k - 1].det > 1.0 + tol.rel) continue;
    std::optional<LatticeBasis> found;
    for_each_small_sublattice(
        b, k, 1.0 + tol.rel,
        [&](const LatticeBasis& sub) {
          StabilityCertificate qc = is_stable(quotient(b, sub, 1e-8), tol);
          if (qc.verdict == StabilityVerdict::stable) {
            found = sub;
            return true;
          }
          if (qc.verdict == StabilityVerdict::inconclusive) undecided = true;
          return false;
        },
        tol);
    if (found) return {BoundaryVerdict::boundary, found};
  }
  return {undecided ? BoundaryVerdict::inconclusive : BoundaryVerdict::interior, {}};
}

}  // namespace epstein
