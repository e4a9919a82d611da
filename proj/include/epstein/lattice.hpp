#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "epstein/error.hpp"
#include "epstein/integer_matrix.hpp"

namespace epstein {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr std::size_t kDefaultEnumerationBudget = 10'000'000;

struct Tolerances {
  double rel = 1e-9;
  std::size_t enumeration_budget = kDefaultEnumerationBudget;
};

/// A lattice given by the columns of an n x d real matrix (d <= n).
/// d == 0 is the trivial lattice {0}.
class LatticeBasis {
 public:
  LatticeBasis() = default;

  explicit LatticeBasis(MatrixXd columns) : columns_(std::move(columns)) { validate(); }

  static LatticeBasis trivial(Index ambient_dim = 0) {
    LatticeBasis b;
    b.columns_ = MatrixXd(ambient_dim, 0);
    return b;
  }

  static LatticeBasis integer_lattice(Index n) { return LatticeBasis(MatrixXd::Identity(n, n)); }

  Index ambient_dim() const { return columns_.rows(); }
  Index rank() const { return columns_.cols(); }
  bool is_trivial() const { return rank() == 0; }
  bool is_full_rank() const { return rank() == ambient_dim(); }

  const MatrixXd& matrix() const { return columns_; }
  VectorXd column(Index i) const { return columns_.col(i); }
  MatrixXd gram() const { return columns_.transpose() * columns_; }

 private:
  void validate() const {
    if (columns_.cols() > columns_.rows())
      throw Error(ErrorKind::degenerate_basis, "more basis vectors than ambient dimensions");
    if (!columns_.allFinite()) throw Error(ErrorKind::degenerate_basis, "non-finite entry");
    if (columns_.cols() == 0) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram(), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || !(lo > 1e-13 * hi))
      throw Error(ErrorKind::degenerate_basis, "Gram matrix is singular or badly conditioned");
  }

  MatrixXd columns_ = MatrixXd(0, 0);
};

struct LatticeVector {
  IntVector coeffs;
  VectorXd embedding;
  double norm_sq = 0.0;
};

inline double determinant(const LatticeBasis& b) {
  if (b.is_trivial()) return 1.0;
  Eigen::LLT<MatrixXd> llt(b.gram());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::degenerate_basis, "Gram not positive definite");
  return llt.matrixL().toDenseMatrix().diagonal().prod();
}

/// Basis of the dual lattice inside span(L): B G^-1.
inline LatticeBasis dual(const LatticeBasis& b) {
  if (b.is_trivial()) return b;
  MatrixXd g = b.gram();
  MatrixXd d = b.matrix() * g.ldlt().solve(MatrixXd::Identity(g.rows(), g.cols()));
  return LatticeBasis(std::move(d));
}

inline LatticeBasis direct_sum(const LatticeBasis& a, const LatticeBasis& b) {
  MatrixXd m = MatrixXd::Zero(a.ambient_dim() + b.ambient_dim(), a.rank() + b.rank());
  m.topLeftCorner(a.ambient_dim(), a.rank()) = a.matrix();
  m.bottomRightCorner(b.ambient_dim(), b.rank()) = b.matrix();
  return LatticeBasis(std::move(m));
}

inline LatticeBasis apply_transform(const LatticeBasis& b, const MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() != b.ambient_dim())
    throw Error(ErrorKind::singular_transform, "transform has the wrong shape");
  Eigen::FullPivLU<MatrixXd> lu(m);
  if (!m.allFinite() || !lu.isInvertible())
    throw Error(ErrorKind::singular_transform, "transform is singular");
  return LatticeBasis(m * b.matrix());
}

/// Orthonormal n x d frame F of span(L) and the d x d coordinates C with B = F C.
struct FramedBasis {
  MatrixXd frame;
  LatticeBasis coords;
};

inline FramedBasis full_rank_coordinates(const LatticeBasis& b) {
  const Index n = b.ambient_dim();
  const Index d = b.rank();
  if (d == 0) return {MatrixXd(n, 0), LatticeBasis::trivial(0)};
  Eigen::HouseholderQR<MatrixXd> qr(b.matrix());
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, d);
  MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    if (r(i, i) < 0) {
      r.row(i) *= -1;
      q.col(i) *= -1;
    }
  }
  return {std::move(q), LatticeBasis(std::move(r))};
}

namespace detail {

struct GramSchmidt {
  MatrixXd mu;
  VectorXd bstar;
};

inline GramSchmidt gram_schmidt(const MatrixXd& g) {
  const Index d = g.rows();
  GramSchmidt gs{MatrixXd::Identity(d, d), VectorXd::Zero(d)};
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < i; ++j) {
      double v = g(i, j);
      for (Index k = 0; k < j; ++k) v -= gs.mu(j, k) * gs.mu(i, k) * gs.bstar(k);
      gs.mu(i, j) = v / gs.bstar(j);
    }
    double v = g(i, i);
    for (Index k = 0; k < i; ++k) v -= gs.mu(i, k) * gs.mu(i, k) * gs.bstar(k);
    gs.bstar(i) = v;
  }
  return gs;
}

inline double ball_volume(Index d, double r) {
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(r, static_cast<double>(d)) /
         std::tgamma(0.5 * d + 1.0);
}

}  // namespace detail

/// basis == original * transform, transform unimodular.
struct ReducedBasis {
  MatrixXd basis;
  IntMatrix transform;
};

inline ReducedBasis lll_reduce(const LatticeBasis& b, double delta = 0.99) {
  const Index d = b.rank();
  ReducedBasis out{b.matrix(), IntMatrix::Identity(d, d)};
  if (d < 2) return out;
  MatrixXd& bc = out.basis;
  IntMatrix& u = out.transform;
  Index k = 1;
  std::size_t guard = 0;
  while (k < d) {
    if (++guard > 1'000'000) throw Error(ErrorKind::range, "LLL did not converge");
    detail::GramSchmidt gs = detail::gram_schmidt(bc.transpose() * bc);
    for (Index j = k - 1; j >= 0; --j) {
      const double r = std::nearbyint(gs.mu(k, j));
      if (r == 0.0) continue;
      if (std::abs(r) > 9e15) throw Error(ErrorKind::range, "LLL coefficient overflow");
      const auto ri = static_cast<std::int64_t>(r);
      bc.col(k) -= r * bc.col(j);
      for (Index i = 0; i < d; ++i) u(i, k) = detail::checked_sub(u(i, k), detail::checked_mul(ri, u(i, j)));
      for (Index i = 0; i <= j; ++i) gs.mu(k, i) -= r * gs.mu(j, i);
    }
    if (gs.bstar(k) >= (delta - gs.mu(k, k - 1) * gs.mu(k, k - 1)) * gs.bstar(k - 1)) {
      ++k;
    } else {
      bc.col(k).swap(bc.col(k - 1));
      u.col(k).swap(u.col(k - 1));
      k = std::max<Index>(k - 1, 1);
    }
  }
  return out;
}

/// Fincke-Pohst enumeration over an LLL-reduced basis.
class VectorEnumerator {
 public:
  explicit VectorEnumerator(const LatticeBasis& b, std::size_t budget = kDefaultEnumerationBudget)
      : budget_(budget), original_(b.matrix()) {
    ReducedBasis r = lll_reduce(b);
    reduced_ = std::move(r.basis);
    transform_ = std::move(r.transform);
    gs_ = detail::gram_schmidt(reduced_.transpose() * reduced_);
    det_ = std::sqrt(std::max(gs_.bstar.prod(), 0.0));
    if (b.rank() == 0) det_ = 1.0;
  }

  Index rank() const { return reduced_.cols(); }
  double det() const { return det_; }
  const MatrixXd& reduced_basis() const { return reduced_; }
  const IntMatrix& transform() const { return transform_; }
  const VectorXd& gs_norms_sq() const { return gs_.bstar; }

  double shortest_basis_norm() const {
    if (rank() == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(reduced_.colwise().squaredNorm().minCoeff());
  }

  double predicted_count(double radius) const {
    if (rank() == 0) return 1.0;
    return detail::ball_volume(rank(), radius + 0.5 * gs_max_norm()) / det_ + 1.0;
  }

  /// Calls visit(reduced_coeffs, norm_sq) for every nonzero vector with norm <= radius.
  template <class Visitor>
  std::size_t for_each(double radius, Visitor&& visit) const {
    const Index d = rank();
    if (d == 0 || !(radius > 0.0)) return 0;
    if (!std::isfinite(radius) || predicted_count(radius) > static_cast<double>(budget_))
      throw Error(ErrorKind::enumeration_budget, "predicted point count exceeds the budget");
    const double r2 = radius * radius * (1.0 + 1e-12);
    std::vector<std::int64_t> x(d, 0);
    std::size_t nodes = 0;
    std::size_t found = 0;
    auto level = [&](auto&& self, Index i, double used) -> void {
      double c = 0.0;
      for (Index j = i + 1; j < d; ++j) c -= gs_.mu(j, i) * static_cast<double>(x[j]);
      const double rem = r2 - used;
      if (rem < 0.0) return;
      const double half = std::sqrt(rem / gs_.bstar(i));
      const auto lo = static_cast<std::int64_t>(std::ceil(c - half));
      const auto hi = static_cast<std::int64_t>(std::floor(c + half));
      for (std::int64_t xi = lo; xi <= hi; ++xi) {
        if (++nodes > budget_)
          throw Error(ErrorKind::enumeration_budget, "enumeration node count exceeds the budget");
        const double t = static_cast<double>(xi) - c;
        const double u = used + t * t * gs_.bstar(i);
        if (u > r2) continue;
        x[i] = xi;
        if (i == 0) {
          bool zero = true;
          for (auto v : x) zero = zero && v == 0;
          if (!zero) {
            ++found;
            visit(std::span<const std::int64_t>(x), u);
          }
        } else {
          self(self, i - 1, u);
        }
      }
      x[i] = 0;
    };
    level(level, d - 1, 0.0);
    return found;
  }

  /// Reduced coefficients to coefficients in the original basis.
  IntVector to_original(std::span<const std::int64_t> reduced) const {
    IntVector r(rank());
    for (Index i = 0; i < rank(); ++i) r(i) = reduced[i];
    return transform_ * r;
  }

  VectorXd embed(std::span<const std::int64_t> reduced) const {
    VectorXd z = VectorXd::Zero(reduced_.rows());
    for (Index i = 0; i < rank(); ++i)
      if (reduced[i] != 0) z += static_cast<double>(reduced[i]) * reduced_.col(i);
    return z;
  }

  std::size_t budget() const { return budget_; }

 private:
  double gs_max_norm() const { return std::sqrt(gs_.bstar.maxCoeff()); }

  std::size_t budget_;
  MatrixXd original_;
  MatrixXd reduced_;
  IntMatrix transform_;
  detail::GramSchmidt gs_;
  double det_ = 1.0;
};

namespace detail {

inline bool coeff_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace detail

/// Nonzero lattice vectors with norm <= radius, sorted by (norm_sq, coeffs).
inline std::vector<LatticeVector> enumerate_vectors(const LatticeBasis& b, double radius,
                                                    std::size_t budget = kDefaultEnumerationBudget) {
  if (radius < 0.0) throw Error(ErrorKind::domain, "negative radius");
  VectorEnumerator en(b, budget);
  std::vector<LatticeVector> out;
  en.for_each(radius, [&](std::span<const std::int64_t> x, double) {
    LatticeVector v;
    v.coeffs = en.to_original(x);
    v.embedding = b.matrix() * v.coeffs.cast<double>();
    v.norm_sq = v.embedding.squaredNorm();
    if (v.norm_sq <= radius * radius * (1.0 + 1e-12)) out.push_back(std::move(v));
  });
  std::sort(out.begin(), out.end(), [](const LatticeVector& a, const LatticeVector& c) {
    if (a.norm_sq != c.norm_sq) return a.norm_sq < c.norm_sq;
    return detail::coeff_less(a.coeffs, c.coeffs);
  });
  return out;
}

inline double lambda1(const VectorEnumerator& en) {
  if (en.rank() == 0) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  en.for_each(en.shortest_basis_norm(), [&](std::span<const std::int64_t>, double n2) {
    best = std::min(best, n2);
  });
  return std::sqrt(best);
}

inline double lambda1(const LatticeBasis& b, std::size_t budget = kDefaultEnumerationBudget) {
  return lambda1(VectorEnumerator(b, budget));
}

/// Real coefficients X with B X = vectors, or a containment error if the vectors
/// leave span(L).
inline MatrixXd real_coefficients(const LatticeBasis& b, const MatrixXd& vectors, double tol = 1e-9) {
  if (vectors.rows() != b.ambient_dim()) throw Error(ErrorKind::containment, "ambient dimension mismatch");
  if (b.is_trivial()) {
    if (vectors.cols() > 0 && vectors.norm() > tol) throw Error(ErrorKind::containment, "not in {0}");
    return MatrixXd(0, vectors.cols());
  }
  MatrixXd g = b.gram();
  MatrixXd x = g.ldlt().solve(b.matrix().transpose() * vectors);
  const double resid = (b.matrix() * x - vectors).norm();
  if (resid > tol * std::max(1.0, vectors.norm()))
    throw Error(ErrorKind::containment, "vectors are not in the span of the lattice");
  return x;
}

/// Integer coefficients of the columns of vectors, or a containment error.
inline IntMatrix integer_coefficients(const LatticeBasis& b, const MatrixXd& vectors, double tol = 1e-9) {
  MatrixXd x = real_coefficients(b, vectors, tol);
  IntMatrix c(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double r = std::nearbyint(x(i, j));
      if (std::abs(x(i, j) - r) > tol * std::max(1.0, std::abs(x(i, j))))
        throw Error(ErrorKind::containment, "vector is not a lattice vector");
      c(i, j) = static_cast<std::int64_t>(r);
    }
  }
  return c;
}

inline bool contains(const LatticeBasis& b, const VectorXd& v, double tol = 1e-9) {
  try {
    integer_coefficients(b, v, tol);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::containment) return false;
    throw;
  }
}

inline bool is_sublattice(const LatticeBasis& b, const LatticeBasis& sub, double tol = 1e-9) {
  try {
    integer_coefficients(b, sub.matrix(), tol);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::containment) return false;
    throw;
  }
}

/// Saturation of sub inside L, i.e. L intersected with span(sub).
inline LatticeBasis saturation(const LatticeBasis& b, const LatticeBasis& sub, double tol = 1e-9) {
  if (sub.is_trivial()) return LatticeBasis::trivial(b.ambient_dim());
  Saturation s = saturate(integer_coefficients(b, sub.matrix(), tol));
  return LatticeBasis(b.matrix() * s.basis.cast<double>());
}

inline bool is_primitive(const LatticeBasis& b, const LatticeBasis& sub, double tol = 1e-9) {
  if (sub.is_trivial()) return true;
  return saturate(integer_coefficients(b, sub.matrix(), tol)).index == 1;
}

/// Orthogonal projection of L onto span(sub)^perp, expressed as a full-rank
/// lattice in an orthonormal frame of that complement.
inline LatticeBasis quotient(const LatticeBasis& b, const LatticeBasis& sub, double tol = 1e-9) {
  const Index d = b.rank();
  const Index k = sub.rank();
  if (k == 0) return full_rank_coordinates(b).coords;
  Saturation s = saturate(integer_coefficients(b, sub.matrix(), tol));
  if (s.index != 1) throw Error(ErrorKind::primitivity, "sublattice is not primitive");
  if (k == d) return LatticeBasis::trivial(0);
  const MatrixXd& sm = sub.matrix();
  MatrixXd comp = b.matrix() * s.complement.cast<double>();
  MatrixXd proj = comp - sm * (sm.transpose() * sm).ldlt().solve(sm.transpose() * comp);
  return full_rank_coordinates(LatticeBasis(std::move(proj))).coords;
}

}  // namespace epstein
