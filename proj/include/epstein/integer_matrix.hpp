#pragma once

#include <cstdint>
#include <cstdlib>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "epstein/error.hpp"

namespace epstein {

using Eigen::Index;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::range, "integer overflow");
  return r;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw Error(ErrorKind::range, "integer overflow");
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::range, "integer overflow");
  return r;
}

// row_i -= f * row_p
inline void row_axpy(IntMatrix& m, Index i, Index p, std::int64_t f) {
  for (Index c = 0; c < m.cols(); ++c) m(i, c) = checked_sub(m(i, c), checked_mul(f, m(p, c)));
}

// col_p += f * col_i
inline void col_axpy(IntMatrix& m, Index p, Index i, std::int64_t f) {
  for (Index r = 0; r < m.rows(); ++r) m(r, p) = checked_add(m(r, p), checked_mul(f, m(r, i)));
}

}  // namespace detail

/// transform * input == reduced, transform unimodular, inverse == transform^-1.
/// The nonzero rows of reduced come first and form a staircase with positive pivots.
struct RowEchelon {
  IntMatrix transform;
  IntMatrix inverse;
  IntMatrix reduced;
  Index rank = 0;
  std::vector<Index> pivot_cols;
};

inline RowEchelon integer_row_echelon(const IntMatrix& input) {
  const Index rows = input.rows();
  const Index cols = input.cols();
  RowEchelon e;
  e.reduced = input;
  e.transform = IntMatrix::Identity(rows, rows);
  e.inverse = IntMatrix::Identity(rows, rows);
  IntMatrix& m = e.reduced;

  Index r = 0;
  for (Index c = 0; c < cols && r < rows; ++c) {
    while (true) {
      Index best = -1;
      for (Index i = r; i < rows; ++i) {
        if (m(i, c) != 0 && (best < 0 || std::llabs(m(i, c)) < std::llabs(m(best, c)))) best = i;
      }
      if (best < 0) break;
      if (best != r) {
        m.row(best).swap(m.row(r));
        e.transform.row(best).swap(e.transform.row(r));
        e.inverse.col(best).swap(e.inverse.col(r));
      }
      bool done = true;
      for (Index i = r + 1; i < rows; ++i) {
        if (m(i, c) == 0) continue;
        const std::int64_t f = m(i, c) / m(r, c);
        if (f != 0) {
          detail::row_axpy(m, i, r, f);
          detail::row_axpy(e.transform, i, r, f);
          detail::col_axpy(e.inverse, r, i, f);
        }
        if (m(i, c) != 0) done = false;
      }
      if (done) break;
    }
    if (m(r, c) == 0) continue;
    if (m(r, c) < 0) {
      m.row(r) *= -1;
      e.transform.row(r) *= -1;
      e.inverse.col(r) *= -1;
    }
    e.pivot_cols.push_back(c);
    ++r;
  }
  e.rank = r;
  return e;
}

/// Product of the echelon pivots; for a full-column-rank d x k coefficient
/// matrix this is the index of its span inside the saturation.
inline std::int64_t echelon_index(const RowEchelon& e) {
  std::int64_t idx = 1;
  for (Index i = 0; i < e.rank; ++i) idx = detail::checked_mul(idx, e.reduced(i, e.pivot_cols[i]));
  return idx;
}

/// Columns of coeffs (d x k, rank k) span a subgroup of Z^d. Returns a d x k basis of
/// its saturation (Q-span intersected with Z^d) and the index of the span in it.
struct Saturation {
  IntMatrix basis;
  IntMatrix complement;
  std::int64_t index = 1;
};

inline Saturation saturate(const IntMatrix& coeffs) {
  const Index d = coeffs.rows();
  const Index k = coeffs.cols();
  RowEchelon e = integer_row_echelon(coeffs);
  if (e.rank != k) throw Error(ErrorKind::degenerate_basis, "coefficient columns are dependent");
  Saturation s;
  s.index = echelon_index(e);
  s.basis = e.inverse.leftCols(k);
  s.complement = e.inverse.rightCols(d - k);
  return s;
}

}  // namespace epstein
