#ifndef SELINV_FACTOR_HPP_
#define SELINV_FACTOR_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selinv/dense.hpp"
#include "selinv/sparse_matrix.hpp"
#include "selinv/symbolic.hpp"

namespace selinv {

enum class FactorMode { kGeneral, kSymmetric };

// Supernodal LU factors of P A P^T without pivoting. For supernode K the
// diagonal block packs unit-lower L_{K,K} below the diagonal and U_{K,K} on
// and above it. 'lower' stacks L_{I,K} for I in C(K); 'upper' places
// U_{K,I} side by side in the same order. Symmetric mode leaves 'upper'
// empty: there U_{K,I} = D_K L_{I,K}^T with D_K the diagonal of U_{K,K}.
struct SupernodeFactor {
  DenseMatrix diag;
  DenseMatrix lower;
  DenseMatrix upper;
};

class LUFactors {
 public:
  LUFactors(std::shared_ptr<const SymbolicAnalysis> symbolic, FactorMode mode)
      : symbolic_(std::move(symbolic)), mode_(mode) {
    const auto& part = symbolic_->partition;
    supernodes_.resize(part.count());
    for (Int k = 0; k < part.count(); ++k) {
      const Int w = part.width(k);
      const Int h = symbolic_->blocks.stacked_height(k);
      supernodes_[k].diag = DenseMatrix(w, w);
      supernodes_[k].lower = DenseMatrix(h, w);
      if (mode_ == FactorMode::kGeneral) supernodes_[k].upper = DenseMatrix(w, h);
    }
  }

  const SymbolicAnalysis& symbolic() const { return *symbolic_; }
  const std::shared_ptr<const SymbolicAnalysis>& symbolic_ptr() const {
    return symbolic_;
  }
  FactorMode mode() const { return mode_; }
  bool symmetric() const { return mode_ == FactorMode::kSymmetric; }

  SupernodeFactor& supernode(Int k) { return supernodes_[k]; }
  const SupernodeFactor& supernode(Int k) const { return supernodes_[k]; }

  // L_{I,K} for I in C(K), given by its position in the ancestor list.
  MatrixView lower_block(Int k, Int pos) {
    return stacked_rows(supernodes_[k].lower.view(), k, pos);
  }
  ConstMatrixView lower_block(Int k, Int pos) const {
    return stacked_rows(supernodes_[k].lower.view(), k, pos);
  }
  MatrixView upper_block(Int k, Int pos) {
    return stacked_cols(supernodes_[k].upper.view(), k, pos);
  }
  ConstMatrixView upper_block(Int k, Int pos) const {
    return stacked_cols(supernodes_[k].upper.view(), k, pos);
  }

  // Dense unit-lower L and upper U of P A P^T; intended for tests.
  DenseMatrix dense_l() const {
    const auto& part = symbolic_->partition;
    const Int n = symbolic_->n();
    DenseMatrix l(n, n);
    for (Int k = 0; k < part.count(); ++k) {
      const Int b = part.begin(k), w = part.width(k);
      const auto& f = supernodes_[k];
      for (Int c = 0; c < w; ++c) {
        l(b + c, b + c) = 1.0;
        for (Int r = c + 1; r < w; ++r) l(b + r, b + c) = f.diag(r, c);
        place_lower(l, k, f.lower, b + c, c);
      }
    }
    return l;
  }

  DenseMatrix dense_u() const {
    const auto& part = symbolic_->partition;
    const auto& blocks = symbolic_->blocks;
    const Int n = symbolic_->n();
    DenseMatrix u(n, n);
    for (Int k = 0; k < part.count(); ++k) {
      const Int b = part.begin(k), w = part.width(k);
      const auto& f = supernodes_[k];
      for (Int c = 0; c < w; ++c)
        for (Int r = 0; r <= c; ++r) u(b + r, b + c) = f.diag(r, c);
      const auto& anc = blocks.ancestors[k];
      for (std::size_t a = 0; a < anc.size(); ++a) {
        const Int ib = part.begin(anc[a]);
        const Int off = blocks.row_offsets[k][a];
        for (Int c = 0; c < part.width(anc[a]); ++c)
          for (Int r = 0; r < w; ++r)
            u(b + r, ib + c) = symmetric() ? f.diag(r, r) * f.lower(off + c, r)
                                           : f.upper(r, off + c);
      }
    }
    return u;
  }

 private:
  template <class View>
  View stacked_rows(View v, Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    return v.block(off[pos], 0, off[pos + 1] - off[pos], v.cols);
  }
  template <class View>
  View stacked_cols(View v, Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    return v.block(0, off[pos], v.rows, off[pos + 1] - off[pos]);
  }

  void place_lower(DenseMatrix& l, Int k, const DenseMatrix& lower, Int col,
                   Int local_col) const {
    const auto& part = symbolic_->partition;
    const auto& blocks = symbolic_->blocks;
    const auto& anc = blocks.ancestors[k];
    for (std::size_t a = 0; a < anc.size(); ++a) {
      const Int ib = part.begin(anc[a]);
      const Int off = blocks.row_offsets[k][a];
      for (Int r = 0; r < part.width(anc[a]); ++r)
        l(ib + r, col) = lower(off + r, local_col);
    }
  }

  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  FactorMode mode_;
  std::vector<SupernodeFactor> supernodes_;
};

namespace detail {

// Block (I, J) of the working matrix held by the factor storage.
inline MatrixView factor_block(LUFactors& f, Int i, Int j) {
  const auto& blocks = f.symbolic().blocks;
  if (i == j) return f.supernode(i).diag.view();
  const Int pos = i > j ? blocks.find_ancestor(j, i) : blocks.find_ancestor(i, j);
  if (pos < 0)
    throw InternalError("block (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is outside the factor pattern");
  return i > j ? f.lower_block(j, pos) : f.upper_block(i, pos);
}

inline void scatter_matrix(const SparseMatrix& a, LUFactors& f) {
  const auto& s = f.symbolic();
  const auto& part = s.partition;
  const Permutation inv = s.ordering.inverse();
  for (Int old_j = 0; old_j < a.n(); ++old_j) {
    const Int j = inv[old_j];
    const Int kj = part.col_to_snode[j];
    auto rows = a.column_rows(old_j);
    auto vals = a.column_values(old_j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      const Int i = inv[rows[p]];
      const Int ki = part.col_to_snode[i];
      if (f.symmetric() && ki < kj) continue;
      factor_block(f, ki, kj)(i - part.begin(ki), j - part.begin(kj)) = vals[p];
    }
  }
}

}  // namespace detail

// Right-looking supernodal LU of P A P^T (P = sym->ordering) with no
// pivoting. Symmetric mode requires a value-symmetric A and factors each
// diagonal block as L D L^T, so U_{K,K} = D_K L_{K,K}^T exactly.
// Throws PivotBreakdown when |pivot| <= pivot_tolerance * max|A|.
inline LUFactors supernodal_factor(const SparseMatrix& a,
                                   std::shared_ptr<const SymbolicAnalysis> sym,
                                   FactorMode mode = FactorMode::kGeneral,
                                   double pivot_tolerance = 1e-14) {
  if (a.n() != sym->n())
    throw DimensionMismatch("matrix dimension does not match symbolic analysis");
  if (!a.pattern_symmetric())
    throw Error("factorization requires a pattern-symmetric matrix");
  if (mode == FactorMode::kSymmetric && !a.value_symmetric())
    throw Error("symmetric factorization requires a value-symmetric matrix");

  LUFactors f(std::move(sym), mode);
  detail::scatter_matrix(a, f);
  const double threshold = pivot_tolerance * a.max_abs();
  const auto& part = f.symbolic().partition;
  const auto& blocks = f.symbolic().blocks;
  DenseMatrix scaled_upper;  // D_K L_{C,K}^T in symmetric mode

  for (Int k = 0; k < part.count(); ++k) {
    SupernodeFactor& sk = f.supernode(k);
    const auto bad = f.symmetric() ? factor_ldlt_unpivoted(sk.diag.view(), threshold)
                                   : factor_lu_unpivoted(sk.diag.view(), threshold);
    if (bad) throw PivotBreakdown(part.begin(k) + *bad, sk.diag(*bad, *bad));

    solve_right_upper(sk.lower.view(), sk.diag.view());
    if (!f.symmetric()) solve_left_unit_lower(sk.upper.view(), sk.diag.view());

    const auto& anc = blocks.ancestors[k];
    if (anc.empty()) continue;
    const auto& off = blocks.row_offsets[k];
    ConstMatrixView upper;
    if (f.symmetric()) {
      const Int w = part.width(k);
      scaled_upper = DenseMatrix(w, sk.lower.rows());
      for (Int c = 0; c < sk.lower.rows(); ++c)
        for (Int r = 0; r < w; ++r) scaled_upper(r, c) = sk.diag(r, r) * sk.lower(c, r);
      upper = scaled_upper.view();
    } else {
      upper = sk.upper.view();
    }
    const ConstMatrixView lower = sk.lower.view();

    // Trailing update A_{I,J} -= L_{I,K} U_{K,J} over pattern blocks.
    for (std::size_t bj = 0; bj < anc.size(); ++bj) {
      const Int j = anc[bj];
      const ConstMatrixView ukj = upper.block(0, off[bj], upper.rows, off[bj + 1] - off[bj]);
      for (std::size_t bi = 0; bi < anc.size(); ++bi) {
        const Int i = anc[bi];
        if (f.symmetric() && i < j) continue;
        if (!blocks.has_block(i, j)) continue;
        const ConstMatrixView lik = lower.block(off[bi], 0, off[bi + 1] - off[bi], lower.cols);
        multiply_subtract(detail::factor_block(f, i, j), lik, ukj);
      }
    }
  }
  return f;
}

// Solves A x = b using the factors of P A P^T.
inline std::vector<double> sparse_solve(const LUFactors& f, std::span<const double> b) {
  const auto& s = f.symbolic();
  const auto& part = s.partition;
  const auto& blocks = s.blocks;
  const Int n = s.n();
  if (static_cast<Int>(b.size()) != n)
    throw DimensionMismatch("right-hand side length " + std::to_string(b.size()) +
                            " does not match dimension " + std::to_string(n));
  std::vector<double> y(n);
  for (Int k = 0; k < n; ++k) y[k] = b[s.ordering[k]];
  auto segment = [&](Int k) {
    return MatrixView{y.data() + part.begin(k), part.width(k), 1,
                      std::max<Int>(part.width(k), 1)};
  };

  for (Int k = 0; k < part.count(); ++k) {
    const auto& sk = f.supernode(k);
    solve_left_unit_lower(segment(k), sk.diag.view());
    const auto& anc = blocks.ancestors[k];
    for (std::size_t a = 0; a < anc.size(); ++a)
      multiply_subtract(segment(anc[a]), f.lower_block(k, static_cast<Int>(a)),
                        as_const(segment(k)));
  }
  std::vector<double> tmp;
  for (Int k = part.count() - 1; k >= 0; --k) {
    const auto& sk = f.supernode(k);
    const auto& anc = blocks.ancestors[k];
    if (f.symmetric()) {
      const Int w = part.width(k);
      tmp.assign(w, 0.0);
      MatrixView t{tmp.data(), w, 1, std::max<Int>(w, 1)};
      for (std::size_t a = 0; a < anc.size(); ++a)
        multiply_subtract(t, f.lower_block(k, static_cast<Int>(a)),
                          as_const(segment(anc[a])), Op::kTranspose);
      // t = -L_{C,K}^T y_C; the upper blocks are D_K times that.
      for (Int r = 0; r < w; ++r) y[part.begin(k) + r] += sk.diag(r, r) * tmp[r];
    } else {
      for (std::size_t a = 0; a < anc.size(); ++a)
        multiply_subtract(segment(k), f.upper_block(k, static_cast<Int>(a)),
                          as_const(segment(anc[a])));
    }
    solve_left_upper(segment(k), sk.diag.view());
  }

  std::vector<double> x(n);
  for (Int k = 0; k < n; ++k) x[s.ordering[k]] = y[k];
  return x;
}

}  // namespace selinv

#endif  // SELINV_FACTOR_HPP_
