#ifndef SELINV_ORACLE_HPP_
#define SELINV_ORACLE_HPP_

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "selinv/dense.hpp"
#include "selinv/inversion.hpp"
#include "selinv/sparse_matrix.hpp"

namespace selinv {

inline constexpr Int kDefaultDenseLimit = 2000;

// Full inverse by dense LU with partial pivoting. This is a verification
// oracle and deliberately shares no code with the supernodal kernels.
inline DenseMatrix dense_inverse_oracle(const SparseMatrix& a,
                                        Int dense_limit = kDefaultDenseLimit) {
  const Int n = a.n();
  if (n > dense_limit)
    throw Error("dense oracle limited to n <= " + std::to_string(dense_limit) +
                ", got n = " + std::to_string(n));
  DenseMatrix lu = a.to_dense();
  const double scale = std::max(lu.max_abs(), std::numeric_limits<double>::min());
  const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  std::vector<Int> row_of(n);  // row_of[k] = original row now in position k
  for (Int k = 0; k < n; ++k) row_of[k] = k;

  for (Int k = 0; k < n; ++k) {
    Int piv = k;
    double best = std::abs(lu(k, k));
    for (Int i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        piv = i;
      }
    }
    if (!(best > tiny)) throw SingularMatrixError(k);
    if (piv != k) {
      for (Int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(row_of[k], row_of[piv]);
    }
    const double d = lu(k, k);
    for (Int i = k + 1; i < n; ++i) lu(i, k) /= d;
    for (Int j = k + 1; j < n; ++j) {
      const double ukj = lu(k, j);
      if (ukj == 0.0) continue;
      for (Int i = k + 1; i < n; ++i) lu(i, j) -= lu(i, k) * ukj;
    }
  }

  DenseMatrix inv(n, n);
  std::vector<double> x(n);
  for (Int col = 0; col < n; ++col) {
    // Solve L U x = P e_col.
    for (Int k = 0; k < n; ++k) x[k] = row_of[k] == col ? 1.0 : 0.0;
    for (Int j = 0; j < n; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (Int i = j + 1; i < n; ++i) x[i] -= lu(i, j) * xj;
    }
    for (Int j = n - 1; j >= 0; --j) {
      x[j] /= lu(j, j);
      const double xj = x[j];
      for (Int i = 0; i < j; ++i) x[i] -= lu(i, j) * xj;
    }
    for (Int i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  return inv;
}

// Copies the entries of a full inverse (original ordering) that lie on the
// block pattern of L + U into selected-inverse storage.
inline SelectedInverse extract_selected(const DenseMatrix& ainv,
                                        std::shared_ptr<const SymbolicAnalysis> sym,
                                        bool symmetric = false) {
  if (ainv.rows() != sym->n() || ainv.cols() != sym->n())
    throw DimensionMismatch("inverse dimension does not match symbolic analysis");
  SelectedInverse si(std::move(sym), symmetric);
  const auto& s = si.symbolic();
  const auto& part = s.partition;
  const auto& blocks = s.blocks;
  const auto& p = s.ordering;
  for (Int k = 0; k < part.count(); ++k) {
    const Int kb = part.begin(k), w = part.width(k);
    auto& sk = si.supernode(k);
    for (Int c = 0; c < w; ++c)
      for (Int r = 0; r < w; ++r) sk.diag(r, c) = ainv(p[kb + r], p[kb + c]);
    const auto& anc = blocks.ancestors[k];
    for (std::size_t a = 0; a < anc.size(); ++a) {
      const Int ib = part.begin(anc[a]);
      const Int off = blocks.row_offsets[k][a];
      for (Int c = 0; c < w; ++c)
        for (Int r = 0; r < part.width(anc[a]); ++r) {
          sk.below(off + r, c) = ainv(p[ib + r], p[kb + c]);
          sk.right(c, off + r) = ainv(p[kb + c], p[ib + r]);
        }
    }
  }
  return si;
}

inline double max_abs_entry(const SelectedInverse& si) {
  double m = 0.0;
  si.for_each_entry([&](Int, Int, double v) { m = std::max(m, std::abs(v)); });
  return m;
}

struct Deviation {
  double max_abs = 0.0;
  // max_abs divided by the largest magnitude of the reference on the pattern.
  double max_rel = 0.0;
  // Worst entry, in the permuted ordering.
  Int row = -1;
  Int col = -1;
};

// Entrywise comparison of 'computed' against 'reference' on the shared pattern.
inline Deviation compare(const SelectedInverse& computed, const SelectedInverse& reference) {
  std::vector<double> ref;
  ref.reserve(static_cast<std::size_t>(reference.stored_entries()));
  reference.for_each_entry([&](Int, Int, double v) { ref.push_back(v); });
  Deviation d;
  double scale = 0.0;
  std::size_t idx = 0;
  computed.for_each_entry([&](Int i, Int j, double v) {
    const double r = ref.at(idx++);
    scale = std::max(scale, std::abs(r));
    const double diff = std::abs(v - r);
    if (diff > d.max_abs || std::isnan(diff)) {
      d.max_abs = std::isnan(diff) ? std::numeric_limits<double>::infinity() : diff;
      d.row = i;
      d.col = j;
    }
  });
  if (idx != ref.size()) throw DimensionMismatch("selected inverses have different patterns");
  d.max_rel = scale > 0.0 ? d.max_abs / scale : d.max_abs;
  return d;
}

// Largest over all pattern blocks (I, J) of ||X_IJ - Y_IJ||_max / s_IJ, with
// s_IJ = max(||Y_IJ||_max, sqrt(||Y_II||_max ||Y_JJ||_max)). Off-diagonal
// blocks that are tiny through cancellation are measured against the scale
// of the diagonal blocks they couple rather than their own magnitude.
inline double blockwise_relative_difference(const SelectedInverse& x,
                                            const SelectedInverse& y) {
  const auto& part = y.symbolic().partition;
  const auto& blocks = y.symbolic().blocks;
  std::vector<double> diag_scale(part.count());
  for (Int k = 0; k < part.count(); ++k) diag_scale[k] = max_abs(y.supernode(k).diag.view());
  double worst = 0.0;
  auto visit = [&](ConstMatrixView a, ConstMatrixView b, double coupled) {
    double diff = 0.0, scale = 0.0;
    for (Int j = 0; j < b.cols; ++j)
      for (Int i = 0; i < b.rows; ++i) {
        const double dd = std::abs(a(i, j) - b(i, j));
        diff = std::isnan(dd) ? std::numeric_limits<double>::infinity() : std::max(diff, dd);
        scale = std::max(scale, std::abs(b(i, j)));
      }
    scale = std::max(scale, coupled);
    worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
  };
  for (Int k = 0; k < part.count(); ++k) {
    visit(x.supernode(k).diag.view(), y.supernode(k).diag.view(), diag_scale[k]);
    for (Int a = 0; a < static_cast<Int>(blocks.ancestors[k].size()); ++a) {
      const double coupled = std::sqrt(diag_scale[k] * diag_scale[blocks.ancestors[k][a]]);
      visit(x.below_block(k, a), y.below_block(k, a), coupled);
      visit(x.right_block(k, a), y.right_block(k, a), coupled);
    }
  }
  return worst;
}

}  // namespace selinv

#endif  // SELINV_ORACLE_HPP_
