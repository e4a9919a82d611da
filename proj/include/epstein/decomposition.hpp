#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "epstein/lattice.hpp"

namespace epstein {

/// L = assembly * (coords_1 + ... + coords_m) as an orthogonal direct sum.
/// summands are the corresponding sublattices of L in ambient coordinates.
struct Decomposition {
  std::vector<LatticeBasis> summands;
  std::vector<LatticeBasis> coords;
  MatrixXd assembly;
  std::vector<Index> ranks;
  std::vector<double> dets;
  bool certified = false;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline std::optional<Decomposition> try_decompose(const LatticeBasis& b, double radius, const Tolerances& tol) {
  const Index d = b.rank();
  std::vector<LatticeVector> all = enumerate_vectors(b, radius, tol.enumeration_budget);

  // Vectors that are not the sum of two orthogonal nonzero lattice vectors.
  std::vector<const LatticeVector*> indec;
  for (const LatticeVector& v : all) {
    Index i = 0;
    while (v.coeffs(i) == 0) ++i;
    if (v.coeffs(i) < 0) continue;
    bool decomposable = false;
    for (const LatticeVector& a : all) {
      if (a.norm_sq >= v.norm_sq * (1.0 - tol.rel)) break;
      if (std::abs(a.embedding.dot(v.embedding) - a.norm_sq) <= tol.rel * v.norm_sq) {
        decomposable = true;
        break;
      }
    }
    if (!decomposable) indec.push_back(&v);
  }

  UnionFind uf(indec.size());
  for (std::size_t i = 0; i < indec.size(); ++i) {
    for (std::size_t j = i + 1; j < indec.size(); ++j) {
      const double ip = indec[i]->embedding.dot(indec[j]->embedding);
      if (std::abs(ip) > tol.rel * std::sqrt(indec[i]->norm_sq * indec[j]->norm_sq)) uf.join(i, j);
    }
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < indec.size(); ++i)
    if (uf.find(i) == i) roots.push_back(i);

  Decomposition out;
  IntMatrix all_coeffs(d, 0);
  for (std::size_t root : roots) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < indec.size(); ++i)
      if (uf.find(i) == root) members.push_back(i);
    IntMatrix rows(static_cast<Index>(members.size()), d);
    for (std::size_t m = 0; m < members.size(); ++m) rows.row(static_cast<Index>(m)) = indec[members[m]]->coeffs.transpose();
    RowEchelon e = integer_row_echelon(rows);
    IntMatrix basis = e.reduced.topRows(e.rank).transpose();
    LatticeBasis sub(b.matrix() * basis.cast<double>());
    IntMatrix grown(d, all_coeffs.cols() + basis.cols());
    grown << all_coeffs, basis;
    all_coeffs = std::move(grown);
    out.summands.push_back(sub);
    out.ranks.push_back(sub.rank());
    out.dets.push_back(determinant(sub));
  }
  if (all_coeffs.cols() != d) return std::nullopt;
  RowEchelon e = integer_row_echelon(all_coeffs);
  if (e.rank != d || std::llabs(echelon_index(e)) != 1) return std::nullopt;

  out.assembly = MatrixXd(b.ambient_dim(), d);
  Index col = 0;
  for (const LatticeBasis& s : out.summands) {
    FramedBasis fb = full_rank_coordinates(s);
    out.assembly.middleCols(col, s.rank()) = fb.frame;
    out.coords.push_back(fb.coords);
    col += s.rank();
  }
  const double orth = (out.assembly.transpose() * out.assembly - MatrixXd::Identity(d, d)).norm();
  if (orth > 1e-9) throw Error(ErrorKind::tolerance, "summands are not mutually orthogonal");
  out.certified = true;
  return out;
}

}  // namespace detail

/// Splits L into indecomposable orthogonal summands. Vectors that are sums of two
/// orthogonal lattice vectors are discarded; the remaining short vectors fall
/// into classes under non-orthogonality, and each class spans one summand.
inline Decomposition decompose(const LatticeBasis& b, std::optional<double> radius = {}, const Tolerances& tol = {}) {
  if (b.is_trivial() || b.rank() != b.ambient_dim()) throw Error(ErrorKind::domain, "decompose needs a full-rank lattice");
  if (radius) {
    if (!(*radius > 0.0)) throw Error(ErrorKind::domain, "radius must be positive");
    if (auto d = detail::try_decompose(b, *radius, tol)) return *d;
    throw Error(ErrorKind::insufficient_radius, "vectors within the radius do not generate the lattice");
  }
  double r = std::sqrt(lll_reduce(b).basis.colwise().squaredNorm().maxCoeff()) * (1.0 + 1e-9);
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (auto d = detail::try_decompose(b, r, tol)) return *d;
    r *= 2.0;
  }
  throw Error(ErrorKind::insufficient_radius, "short vectors did not generate the lattice");
}

inline bool is_isomorphic_to_Zn(const LatticeBasis& b, const Tolerances& tol = {}) {
  if (b.is_trivial()) return true;
  Decomposition d = decompose(b.rank() == b.ambient_dim() ? b : full_rank_coordinates(b).coords, std::nullopt, tol);
  if (static_cast<Index>(d.summands.size()) != b.rank()) return false;
  for (double det : d.dets)
    if (std::abs(det - 1.0) > tol.rel) return false;
  return true;
}

}  // namespace epstein
