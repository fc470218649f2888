#ifndef SELINV_INVERSION_HPP_
#define SELINV_INVERSION_HPP_

#include <algorithm>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selinv/dense.hpp"
#include "selinv/factor.hpp"
#include "selinv/symbolic.hpp"

namespace selinv {

// Normalized factors: lhat stacks L_{I,K} (L_{K,K})^{-1} for I in C(K), uhat
// places (U_{K,K})^{-1} U_{K,I} side by side. Symmetric mode keeps no uhat
// since there uhat = lhat^T. The packed diagonal LU block is retained.
struct NormalizedSupernode {
  DenseMatrix diag;
  DenseMatrix lhat;
  DenseMatrix uhat;
};

class NormalizedFactors {
 public:
  NormalizedFactors(std::shared_ptr<const SymbolicAnalysis> symbolic,
                    FactorMode mode, std::vector<NormalizedSupernode> supernodes)
      : symbolic_(std::move(symbolic)), mode_(mode),
        supernodes_(std::move(supernodes)) {}

  const SymbolicAnalysis& symbolic() const { return *symbolic_; }
  const std::shared_ptr<const SymbolicAnalysis>& symbolic_ptr() const {
    return symbolic_;
  }
  FactorMode mode() const { return mode_; }
  bool symmetric() const { return mode_ == FactorMode::kSymmetric; }

  const NormalizedSupernode& supernode(Int k) const { return supernodes_[k]; }

  // lhat block for I = C(K)[pos], i.e. the normalized L_{I,K}.
  ConstMatrixView lhat_block(Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    const auto v = supernodes_[k].lhat.view();
    return v.block(off[pos], 0, off[pos + 1] - off[pos], v.cols);
  }
  // uhat block for I = C(K)[pos], i.e. the normalized U_{K,I}. General mode only.
  ConstMatrixView uhat_block(Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    const auto v = supernodes_[k].uhat.view();
    return v.block(0, off[pos], v.rows, off[pos + 1] - off[pos]);
  }

 private:
  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  FactorMode mode_;
  std::vector<NormalizedSupernode> supernodes_;
};

// Entries of A^{-1} (in the permuted ordering) on the block pattern of L + U.
// For supernode K: 'diag' holds A^{-1}_{K,K}, 'below' stacks A^{-1}_{I,K} and
// 'right' places A^{-1}_{K,I} side by side, for I in C(K).
struct InverseSupernode {
  DenseMatrix diag;
  DenseMatrix below;
  DenseMatrix right;
};

class SelectedInverse {
 public:
  SelectedInverse(std::shared_ptr<const SymbolicAnalysis> symbolic, bool symmetric)
      : symbolic_(std::move(symbolic)), symmetric_(symmetric) {
    const auto& part = symbolic_->partition;
    supernodes_.resize(part.count());
    for (Int k = 0; k < part.count(); ++k) {
      const Int w = part.width(k);
      const Int h = symbolic_->blocks.stacked_height(k);
      supernodes_[k] = {DenseMatrix(w, w), DenseMatrix(h, w), DenseMatrix(w, h)};
    }
  }

  const SymbolicAnalysis& symbolic() const { return *symbolic_; }
  const std::shared_ptr<const SymbolicAnalysis>& symbolic_ptr() const {
    return symbolic_;
  }
  bool symmetric() const { return symmetric_; }
  Int n() const { return symbolic_->n(); }

  InverseSupernode& supernode(Int k) { return supernodes_[k]; }
  const InverseSupernode& supernode(Int k) const { return supernodes_[k]; }

  MatrixView below_block(Int k, Int pos) {
    return rows_of(supernodes_[k].below.view(), k, pos);
  }
  ConstMatrixView below_block(Int k, Int pos) const {
    return rows_of(supernodes_[k].below.view(), k, pos);
  }
  MatrixView right_block(Int k, Int pos) {
    return cols_of(supernodes_[k].right.view(), k, pos);
  }
  ConstMatrixView right_block(Int k, Int pos) const {
    return cols_of(supernodes_[k].right.view(), k, pos);
  }

  // Block A^{-1}_{I,J}, or nullopt when (I, J) is outside the pattern.
  std::optional<ConstMatrixView> block(Int i, Int j) const {
    const auto& blocks = symbolic_->blocks;
    if (i == j) return supernodes_[i].diag.view();
    if (i > j) {
      const Int pos = blocks.find_ancestor(j, i);
      if (pos < 0) return std::nullopt;
      return below_block(j, pos);
    }
    const Int pos = blocks.find_ancestor(i, j);
    if (pos < 0) return std::nullopt;
    return right_block(i, pos);
  }

  // Entry (i, j) of A^{-1} in the permuted ordering, if stored.
  std::optional<double> value(Int i, Int j) const {
    const auto& part = symbolic_->partition;
    const Int bi = part.col_to_snode[i], bj = part.col_to_snode[j];
    auto b = block(bi, bj);
    if (!b) return std::nullopt;
    return (*b)(i - part.begin(bi), j - part.begin(bj));
  }

  // Visits every stored entry as (row, col, value) in the permuted ordering.
  template <class F>
  void for_each_entry(F&& f) const {
    const auto& part = symbolic_->partition;
    const auto& blocks = symbolic_->blocks;
    for (Int k = 0; k < part.count(); ++k) {
      const Int kb = part.begin(k), w = part.width(k);
      const auto& s = supernodes_[k];
      for (Int c = 0; c < w; ++c)
        for (Int r = 0; r < w; ++r) f(kb + r, kb + c, s.diag(r, c));
      const auto& anc = blocks.ancestors[k];
      for (std::size_t a = 0; a < anc.size(); ++a) {
        const Int ib = part.begin(anc[a]);
        const Int off = blocks.row_offsets[k][a];
        for (Int c = 0; c < w; ++c)
          for (Int r = 0; r < part.width(anc[a]); ++r) {
            f(ib + r, kb + c, s.below(off + r, c));
            f(kb + c, ib + r, s.right(c, off + r));
          }
      }
    }
  }

  // Stored entries (row, value) of column j, permuted ordering, rows ascending.
  std::vector<std::pair<Int, double>> column(Int j) const {
    const auto& part = symbolic_->partition;
    const auto& blocks = symbolic_->blocks;
    const Int k = part.col_to_snode[j];
    const Int c = j - part.begin(k);
    std::vector<std::pair<Int, double>> out;
    for (Int d : blocks.descendants[k]) {
      auto b = right_block(d, blocks.find_ancestor(d, k));
      for (Int r = 0; r < b.rows; ++r) out.emplace_back(part.begin(d) + r, b(r, c));
    }
    const auto& s = supernodes_[k];
    for (Int r = 0; r < part.width(k); ++r) out.emplace_back(part.begin(k) + r, s.diag(r, c));
    const auto& anc = blocks.ancestors[k];
    for (std::size_t a = 0; a < anc.size(); ++a) {
      auto b = below_block(k, static_cast<Int>(a));
      for (Int r = 0; r < b.rows; ++r) out.emplace_back(part.begin(anc[a]) + r, b(r, c));
    }
    return out;
  }

  Int stored_entries() const {
    Int total = 0;
    for (const auto& s : supernodes_)
      total += static_cast<Int>(s.diag.data().size() + s.below.data().size() +
                                s.right.data().size());
    return total;
  }

  // Byte-wise equality of all stored blocks.
  bool bitwise_equal(const SelectedInverse& other) const {
    if (supernodes_.size() != other.supernodes_.size()) return false;
    auto same = [](const DenseMatrix& a, const DenseMatrix& b) {
      return a.rows() == b.rows() && a.cols() == b.cols() &&
             std::memcmp(a.data().data(), b.data().data(),
                         a.data().size() * sizeof(double)) == 0;
    };
    for (std::size_t k = 0; k < supernodes_.size(); ++k) {
      const auto& a = supernodes_[k];
      const auto& b = other.supernodes_[k];
      if (!same(a.diag, b.diag) || !same(a.below, b.below) || !same(a.right, b.right))
        return false;
    }
    return true;
  }

 private:
  template <class View>
  View rows_of(View v, Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    return v.block(off[pos], 0, off[pos + 1] - off[pos], v.cols);
  }
  template <class View>
  View cols_of(View v, Int k, Int pos) const {
    const auto& off = symbolic_->blocks.row_offsets[k];
    return v.block(0, off[pos], v.rows, off[pos + 1] - off[pos]);
  }

  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  bool symmetric_;
  std::vector<InverseSupernode> supernodes_;
};

// Computes lhat and uhat by triangular solves against each diagonal block.
// The rvalue overload reuses the factor storage in place.
inline NormalizedFactors normalize_factors(LUFactors&& f) {
  const Int count = f.symbolic().partition.count();
  std::vector<NormalizedSupernode> out(count);
  for (Int k = 0; k < count; ++k) {
    SupernodeFactor& sk = f.supernode(k);
    out[k].diag = std::move(sk.diag);
    out[k].lhat = std::move(sk.lower);
    out[k].uhat = std::move(sk.upper);
    solve_right_unit_lower(out[k].lhat.view(), out[k].diag.view());
    if (!f.symmetric()) solve_left_upper(out[k].uhat.view(), out[k].diag.view());
  }
  return NormalizedFactors(f.symbolic_ptr(), f.mode(), std::move(out));
}

inline NormalizedFactors normalize_factors(const LUFactors& f) {
  LUFactors copy = f;
  return normalize_factors(std::move(copy));
}

namespace detail {

inline Int require_ancestor(const BlockSparsity& b, Int k, Int i) {
  const Int pos = b.find_ancestor(k, i);
  if (pos < 0)
    throw InternalError("supernode " + std::to_string(i) +
                        " is not in the ancestor set of " + std::to_string(k));
  return pos;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels of the left-looking algorithm. Each writes exactly one block of the
// selected inverse; kernels with distinct output blocks may run concurrently.
// ---------------------------------------------------------------------------

// block <- (block + block^T) / 2
inline void symmetrize_diag(MatrixView block) { symmetrize(block); }

// A^{-1}_{K,K} = (U_{K,K})^{-1} (L_{K,K})^{-1} - uhat_{K,C} A^{-1}_{C,K}.
// Requires every A^{-1}_{I,K}, I in C(K), to be final.
inline void diag_block_update(Int k, const NormalizedFactors& nf, SelectedInverse& si) {
  const auto& nk = nf.supernode(k);
  auto& target = si.supernode(k).diag;
  target = inverse_from_packed_lu(nk.diag.view());
  const auto below = si.supernode(k).below.view();
  if (nf.symmetric())
    multiply_subtract(target.view(), nk.lhat.view(), below, Op::kTranspose);
  else
    multiply_subtract(target.view(), nk.uhat.view(), below);
}

// Symmetric mode: A^{-1}_{K,C} <- (A^{-1}_{C,K})^T.
inline void mirror_to_upper(Int k, SelectedInverse& si) {
  auto& s = si.supernode(k);
  copy_transposed(s.right.view(), s.below.view());
}

// A^{-1}_{I,I'} -= A^{-1}_{I,K} lhat_{K,I'} for I in C(K), I' in C'(K), with
// (I, I') in the pattern.
inline void outer_product_update(Int k, Int i, Int ip, const NormalizedFactors& nf,
                                 SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_i = detail::require_ancestor(b, k, i);
  const Int pos_k = detail::require_ancestor(b, ip, k);
  const Int pos_target = detail::require_ancestor(b, ip, i);
  multiply_subtract(si.below_block(ip, pos_target), as_const(si.below_block(k, pos_i)),
                    nf.lhat_block(ip, pos_k));
}

// A^{-1}_{K,I'} -= sum over I in C(K), L_{I,I'} != 0, ascending in I, of
// A^{-1}_{K,I} lhat_{I,I'}. The I = K term is inner_product_diag_update.
inline void inner_product_update(Int k, Int ip, const NormalizedFactors& nf,
                                 SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_k = detail::require_ancestor(b, ip, k);
  MatrixView target = si.below_block(ip, pos_k);
  const auto& anc = b.ancestors[k];
  for (std::size_t a = 0; a < anc.size(); ++a) {
    const Int pos_i = b.find_ancestor(ip, anc[a]);
    if (pos_i < 0) continue;
    if (nf.symmetric()) {
      multiply_subtract(target, as_const(si.below_block(k, static_cast<Int>(a))),
                        nf.lhat_block(ip, pos_i), Op::kTranspose);
    } else {
      multiply_subtract(target, as_const(si.right_block(k, static_cast<Int>(a))),
                        nf.lhat_block(ip, pos_i));
    }
  }
}

// A^{-1}_{K,I'} -= A^{-1}_{K,K} lhat_{K,I'}; requires the final diagonal block.
inline void inner_product_diag_update(Int k, Int ip, const NormalizedFactors& nf,
                                      SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_k = detail::require_ancestor(b, ip, k);
  multiply_subtract(si.below_block(ip, pos_k), si.supernode(k).diag.view(),
                    nf.lhat_block(ip, pos_k));
}

// Upper-triangle counterparts, general mode only.

// A^{-1}_{I',I} -= uhat_{I',K} A^{-1}_{K,I}.
inline void outer_product_update_upper(Int k, Int i, Int ip, const NormalizedFactors& nf,
                                       SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_i = detail::require_ancestor(b, k, i);
  const Int pos_k = detail::require_ancestor(b, ip, k);
  const Int pos_target = detail::require_ancestor(b, ip, i);
  multiply_subtract(si.right_block(ip, pos_target), nf.uhat_block(ip, pos_k),
                    as_const(si.right_block(k, pos_i)));
}

// A^{-1}_{I',K} -= sum over I in C(K), U_{I',I} != 0, of uhat_{I',I} A^{-1}_{I,K}.
inline void inner_product_update_upper(Int k, Int ip, const NormalizedFactors& nf,
                                       SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_k = detail::require_ancestor(b, ip, k);
  MatrixView target = si.right_block(ip, pos_k);
  const auto& anc = b.ancestors[k];
  for (std::size_t a = 0; a < anc.size(); ++a) {
    const Int pos_i = b.find_ancestor(ip, anc[a]);
    if (pos_i < 0) continue;
    multiply_subtract(target, nf.uhat_block(ip, pos_i),
                      as_const(si.below_block(k, static_cast<Int>(a))));
  }
}

// A^{-1}_{I',K} -= uhat_{I',K} A^{-1}_{K,K}.
inline void inner_product_diag_update_upper(Int k, Int ip, const NormalizedFactors& nf,
                                            SelectedInverse& si) {
  const auto& b = nf.symbolic().blocks;
  const Int pos_k = detail::require_ancestor(b, ip, k);
  multiply_subtract(si.right_block(ip, pos_k), nf.uhat_block(ip, pos_k),
                    si.supernode(k).diag.view());
}

// Diagonal stage of supernode K: diagonal update, then in symmetric mode the
// symmetrization and the transpose copy of the (final) lower blocks.
inline void diag_stage(Int k, const NormalizedFactors& nf, SelectedInverse& si) {
  diag_block_update(k, nf, si);
  if (nf.symmetric()) {
    symmetrize_diag(si.supernode(k).diag.view());
    mirror_to_upper(k, si);
  }
}

// Left-looking selected inversion: supernodes are visited root first; once
// A^{-1} for K is final its contributions are pushed to the descendants.
inline SelectedInverse selinv_left(const NormalizedFactors& nf) {
  const auto& b = nf.symbolic().blocks;
  SelectedInverse si(nf.symbolic_ptr(), nf.symmetric());
  for (Int k = b.count() - 1; k >= 0; --k) {
    diag_stage(k, nf, si);
    const auto& anc = b.ancestors[k];
    const auto& desc = b.descendants[k];
    for (Int ip : desc)
      for (Int i : anc)
        if (b.find_ancestor(ip, i) >= 0) outer_product_update(k, i, ip, nf, si);
    for (Int ip : desc) inner_product_update(k, ip, nf, si);
    for (Int ip : desc) inner_product_diag_update(k, ip, nf, si);
    if (nf.symmetric()) continue;
    for (Int ip : desc)
      for (Int i : anc)
        if (b.find_ancestor(ip, i) >= 0) outer_product_update_upper(k, i, ip, nf, si);
    for (Int ip : desc) inner_product_update_upper(k, ip, nf, si);
    for (Int ip : desc) inner_product_diag_update_upper(k, ip, nf, si);
  }
  return si;
}

// Right-looking selected inversion. A^{-1}_{C,C} is gathered into a dense
// workspace; blocks outside the pattern are exact zeros there.
inline SelectedInverse selinv_right(const NormalizedFactors& nf) {
  const auto& b = nf.symbolic().blocks;
  SelectedInverse si(nf.symbolic_ptr(), nf.symmetric());
  DenseMatrix gathered;
  for (Int k = b.count() - 1; k >= 0; --k) {
    const auto& nk = nf.supernode(k);
    auto& sk = si.supernode(k);
    const auto& anc = b.ancestors[k];
    const auto& off = b.row_offsets[k];
    const Int h = b.stacked_height(k);

    gathered = DenseMatrix(h, h);
    for (std::size_t cj = 0; cj < anc.size(); ++cj) {
      for (std::size_t ci = 0; ci < anc.size(); ++ci) {
        auto blk = si.block(anc[ci], anc[cj]);
        if (!blk) continue;
        copy(gathered.view().block(off[ci], off[cj], blk->rows, blk->cols), *blk);
      }
    }

    // A^{-1}_{C,K} = -A^{-1}_{C,C} lhat_{C,K}
    multiply_subtract(sk.below.view(), gathered.view(), nk.lhat.view());

    sk.diag = inverse_from_packed_lu(nk.diag.view());
    if (nf.symmetric()) {
      multiply_subtract(sk.diag.view(), nk.lhat.view(), sk.below.view(), Op::kTranspose);
      symmetrize_diag(sk.diag.view());
      mirror_to_upper(k, si);
    } else {
      multiply_subtract(sk.diag.view(), nk.uhat.view(), sk.below.view());
      // A^{-1}_{K,C} = -uhat_{K,C} A^{-1}_{C,C}
      multiply_subtract(sk.right.view(), nk.uhat.view(), gathered.view());
    }
  }
  return si;
}

}  // namespace selinv

#endif  // SELINV_INVERSION_HPP_
