#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "epstein/decomposition.hpp"
#include "epstein/lattice.hpp"
#include "epstein/stability.hpp"
#include "epstein/summation.hpp"

namespace epstein {

namespace detail {

inline MatrixXd gaussian_matrix(Index n, std::uint64_t seed, std::uint64_t stream, std::uint64_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(attempt)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  MatrixXd m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = normal(rng);
  return m;
}

inline MatrixXd random_orthogonal(Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian_matrix(n, seed, 0, 0));
  MatrixXd q = qr.householderQ();
  return q;
}

}  // namespace detail

/// Smallest det(M)^(1/rank M) over nonzero sublattices M, the full lattice included.
inline double min_normalized_det(const LatticeBasis& b, const Tolerances& tol = {}) {
  double m = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= b.rank(); ++k)
    m = std::min(m, std::pow(min_sublattice_det(b, k, std::nullopt, tol).det, 1.0 / static_cast<double>(k)));
  return m;
}

/// Gaussian basis with det 1, scaled so no sublattice has det < 1, then stabilized.
/// stream selects an independent sample for the same seed.
inline LatticeBasis random_stable_lattice(Index n, std::uint64_t seed, std::uint64_t stream = 0,
                                          const Tolerances& tol = {}) {
  if (n < 1 || n > 8) throw Error(ErrorKind::domain, "random stable lattices need 1 <= n <= 8");
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    MatrixXd g = detail::gaussian_matrix(n, seed, stream, attempt);
    const double det = std::abs(g.determinant());
    if (!(det > 1e-6)) continue;
    try {
      LatticeBasis b(g / std::pow(det, 1.0 / static_cast<double>(n)));
      b = LatticeBasis(lll_reduce(b).basis);
      const double m = min_normalized_det(b, tol);
      if (m < 1.0) b = LatticeBasis(b.matrix() / m);
      LatticeBasis out = stabilize(b, tol).lattice;
      return LatticeBasis(lll_reduce(out).basis);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::degenerate_basis || e.kind() == ErrorKind::tolerance ||
          e.kind() == ErrorKind::enumeration_budget)
        continue;
      throw;
    }
  }
  throw Error(ErrorKind::tolerance, "could not sample a certified stable lattice");
}

/// Hexagonal lattice with det 1.
inline LatticeBasis a2_lattice() {
  MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
  return LatticeBasis(m / std::sqrt(std::sqrt(3.0) / 2.0));
}

/// Named fixtures of rank n used alongside the random samples.
inline std::vector<std::pair<std::string, LatticeBasis>> verification_fixtures(Index n) {
  std::vector<std::pair<std::string, LatticeBasis>> out;
  auto zn = [](Index k) { return k == 0 ? LatticeBasis::trivial(0) : LatticeBasis::integer_lattice(k); };
  out.emplace_back("fixture-Zn", zn(n));
  out.emplace_back("fixture-rotated-Zn", LatticeBasis(detail::random_orthogonal(n, 20240607)));
  if (n >= 2) {
    out.emplace_back("fixture-A2+Z", direct_sum(a2_lattice(), zn(n - 2)));
    MatrixXd sh(2, 2);
    sh << 1.0, 0.5, 0.0, 1.0;
    out.emplace_back("fixture-sheared+Z", direct_sum(LatticeBasis(sh), zn(n - 2)));
  }
  if (n == 3) {
    MatrixXd d3(3, 3);
    d3 << 1, 1, 0, 1, 0, 1, 0, 1, 1;
    out.emplace_back("fixture-D3", LatticeBasis(d3 / std::cbrt(2.0)));
    out.emplace_back("fixture-Z+stable", direct_sum(zn(1), random_stable_lattice(2, 7)));
  }
  if (n == 4) {
    MatrixXd d4(4, 4);
    d4 << 1, 1, 0, 0, -1, 1, -1, 0, 0, 0, 1, -1, 0, 0, 0, 1;
    out.emplace_back("fixture-D4", LatticeBasis(d4 / std::pow(2.0, 0.25)));
    out.emplace_back("fixture-A2+A2", direct_sum(a2_lattice(), a2_lattice()));
    out.emplace_back("fixture-Z+stable", direct_sum(zn(1), random_stable_lattice(3, 7)));
  }
  return out;
}

/// Margins within this fraction of zeta'_q(Z^n) count as equality.
inline constexpr double kEqualityRelTol = 1e-10;

inline double theorem_q_bound(Index n, double s) { return (2.0 * s - static_cast<double>(n)) / (n + 2.0); }

struct LatticeOutcome {
  std::string lattice_id;
  double zeta_prime = 0.0;
  double margin = 0.0;
  double tail_bound = 0.0;
  bool is_Zn = false;
  bool violation = false;
  bool equality_mismatch = false;
  std::string error;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  Index n = 0;
  double s = 0.0;
  double q = 0.0;
  double q_bound = 0.0;
  bool exploratory = false;
  double reference = 0.0;
  double reference_tail = 0.0;
  std::vector<LatticeOutcome> per_lattice;
  std::size_t violations = 0;
  std::size_t equality_mismatches = 0;
  std::size_t errors = 0;
};

/// Evaluates zeta'_q(L, s) <= zeta'_q(Z^n, s) over fixtures and count random stable lattices.
inline VerificationReport verify_theorem(Index n, double s, double q, std::size_t count, std::uint64_t seed,
                                         bool explore_q = false, unsigned threads = 0) {
  if (n < 1 || n > 8) throw Error(ErrorKind::domain, "n must be in 1..8");
  if (!(s > 0.5 * n)) throw Error(ErrorKind::domain, "s must exceed n/2");
  VerificationReport rep;
  rep.seed = seed;
  rep.n = n;
  rep.s = s;
  rep.q = q;
  rep.q_bound = theorem_q_bound(n, s);
  if (!(q >= 0.0)) throw Error(ErrorKind::domain, "q must be >= 0");
  if (q > rep.q_bound * (1.0 + 1e-12)) {
    if (!explore_q) throw Error(ErrorKind::domain, "q beyond the proven range needs the exploratory flag");
    rep.exploratory = true;
  }
  constexpr double rel = 1e-12;
  SummationResult ref = zeta_prime_direct(LatticeBasis::integer_lattice(n), s, q, rel);
  rep.reference = ref.value;
  rep.reference_tail = ref.tail_bound;

  struct Job {
    std::string id;
    std::optional<LatticeBasis> lattice;
    std::size_t stream = 0;
  };
  std::vector<Job> jobs;
  for (auto& [id, b] : verification_fixtures(n)) jobs.push_back({id, b, 0});
  for (std::size_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "random-%04zu", i);
    jobs.push_back({buf, std::nullopt, i});
  }

  std::vector<LatticeOutcome> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      LatticeOutcome& o = results[j];
      o.lattice_id = jobs[j].id;
      try {
        LatticeBasis b = jobs[j].lattice ? *jobs[j].lattice : random_stable_lattice(n, seed, jobs[j].stream);
        SummationResult z = zeta_prime_direct(b, s, q, rel);
        o.zeta_prime = z.value;
        o.tail_bound = z.tail_bound;
        o.margin = ref.value - z.value;
        o.is_Zn = is_isomorphic_to_Zn(b);
        o.violation = o.margin < -(z.tail_bound + ref.tail_bound + 1e-10);
        const double eq_tol = kEqualityRelTol * ref.value + z.tail_bound + ref.tail_bound;
        o.equality_mismatch = (std::abs(o.margin) <= eq_tol) != o.is_Zn;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::sort(results.begin(), results.end(),
            [](const LatticeOutcome& a, const LatticeOutcome& b) { return a.lattice_id < b.lattice_id; });
  for (const LatticeOutcome& o : results) {
    rep.violations += o.violation;
    rep.equality_mismatches += o.equality_mismatch;
    rep.errors += !o.error.empty();
  }
  rep.per_lattice = std::move(results);
  return rep;
}

struct ReductionResult {
  double lhs = 0.0;
  double rhs = 0.0;
  MatrixXd transform;
  bool holds = false;
};

/// zeta'_q(L) against zeta'_q(A L) for the stabilizing contraction A of a semi-stable L.
inline ReductionResult general_case_reduction(const LatticeBasis& b, double s, double q, const Tolerances& tol = {}) {
  StabilizeResult st = stabilize(b, tol);
  ReductionResult r;
  r.lhs = zeta_prime_direct(b, s, q, 1e-13).value;
  r.rhs = zeta_prime_direct(st.lattice, s, q, 1e-13).value;
  r.transform = st.transform;
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

}  // namespace epstein
