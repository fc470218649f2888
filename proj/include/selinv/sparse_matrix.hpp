#ifndef SELINV_SPARSE_MATRIX_HPP_
#define SELINV_SPARSE_MATRIX_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "selinv/dense.hpp"
#include "selinv/types.hpp"

namespace selinv {

struct Triplet {
  Int row;
  Int col;
  double value;
};

// Square compressed-column matrix with sorted, duplicate-free columns.
// Immutable after construction.
class SparseMatrix {
 public:
  SparseMatrix() : col_ptr_(1, 0) {}

  // Takes ownership of CSC arrays; validates ordering and detects symmetry.
  static SparseMatrix from_csc(Int n, std::vector<Int> col_ptr,
                               std::vector<Int> row_idx,
                               std::vector<double> values) {
    if (n < 0) throw DimensionMismatch("negative dimension");
    if (static_cast<Int>(col_ptr.size()) != n + 1 || col_ptr[0] != 0)
      throw DimensionMismatch("col_ptr must have length n+1 and start at 0");
    if (row_idx.size() != values.size() ||
        col_ptr[n] != static_cast<Int>(row_idx.size()))
      throw DimensionMismatch("col_ptr[n] must equal the number of entries");
    for (Int j = 0; j < n; ++j) {
      if (col_ptr[j + 1] < col_ptr[j])
        throw DimensionMismatch("col_ptr is decreasing at column " +
                                std::to_string(j));
      for (Int p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        if (row_idx[p] < 0 || row_idx[p] >= n)
          throw DimensionMismatch("row index out of range in column " +
                                  std::to_string(j));
        if (p > col_ptr[j] && row_idx[p] <= row_idx[p - 1])
          throw DimensionMismatch("row indices not strictly increasing in column " +
                                  std::to_string(j));
      }
    }
    SparseMatrix a;
    a.n_ = n;
    a.col_ptr_ = std::move(col_ptr);
    a.row_idx_ = std::move(row_idx);
    a.values_ = std::move(values);
    a.detect_symmetry();
    return a;
  }

  // Duplicate coordinates are summed.
  static SparseMatrix from_triplets(Int n, std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
      if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
        throw DimensionMismatch("triplet (" + std::to_string(t.row) + ", " +
                                std::to_string(t.col) + ") outside " +
                                std::to_string(n) + "x" + std::to_string(n));
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                return a.col != b.col ? a.col < b.col : a.row < b.row;
              });
    std::vector<Int> col_ptr(n + 1, 0);
    std::vector<Int> row_idx;
    std::vector<double> values;
    row_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const Triplet& t = triplets[k];
      if (k > 0 && t.row == triplets[k - 1].row && t.col == triplets[k - 1].col) {
        values.back() += t.value;
        continue;
      }
      row_idx.push_back(t.row);
      values.push_back(t.value);
      ++col_ptr[t.col + 1];
    }
    for (Int j = 0; j < n; ++j) col_ptr[j + 1] += col_ptr[j];
    return from_csc(n, std::move(col_ptr), std::move(row_idx), std::move(values));
  }

  static SparseMatrix from_dense(const DenseMatrix& d, bool keep_zeros = false) {
    std::vector<Triplet> t;
    for (Int j = 0; j < d.cols(); ++j)
      for (Int i = 0; i < d.rows(); ++i)
        if (keep_zeros || d(i, j) != 0.0) t.push_back({i, j, d(i, j)});
    return from_triplets(d.rows(), std::move(t));
  }

  Int n() const { return n_; }
  Int nnz() const { return col_ptr_[n_]; }
  std::span<const Int> col_ptr() const { return col_ptr_; }
  std::span<const Int> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<const Int> column_rows(Int j) const {
    return {row_idx_.data() + col_ptr_[j],
            static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }
  std::span<const double> column_values(Int j) const {
    return {values_.data() + col_ptr_[j],
            static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }

  bool pattern_symmetric() const { return pattern_symmetric_; }
  bool value_symmetric() const { return value_symmetric_; }

  // Index into values() of entry (i, j), or -1 when not stored.
  Int find(Int i, Int j) const {
    auto rows = column_rows(j);
    auto it = std::lower_bound(rows.begin(), rows.end(), i);
    if (it == rows.end() || *it != i) return -1;
    return col_ptr_[j] + (it - rows.begin());
  }
  double at(Int i, Int j) const {
    const Int p = find(i, j);
    return p < 0 ? 0.0 : values_[p];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_, n_);
    for (Int j = 0; j < n_; ++j)
      for (Int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
        d(row_idx_[p], j) = values_[p];
    return d;
  }

  // y = A x
  std::vector<double> multiply(std::span<const double> x) const {
    if (static_cast<Int>(x.size()) != n_)
      throw DimensionMismatch("vector length does not match matrix dimension");
    std::vector<double> y(n_, 0.0);
    for (Int j = 0; j < n_; ++j)
      for (Int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
        y[row_idx_[p]] += values_[p] * x[j];
    return y;
  }

  SparseMatrix transpose() const {
    std::vector<Int> count(n_ + 1, 0);
    for (Int i : row_idx_) ++count[i + 1];
    for (Int i = 0; i < n_; ++i) count[i + 1] += count[i];
    std::vector<Int> col_ptr = count;
    std::vector<Int> rows(row_idx_.size());
    std::vector<double> vals(values_.size());
    for (Int j = 0; j < n_; ++j) {
      for (Int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
        const Int q = count[row_idx_[p]]++;
        rows[q] = j;
        vals[q] = values_[p];
      }
    }
    return from_csc(n_, std::move(col_ptr), std::move(rows), std::move(vals));
  }

 private:
  void detect_symmetry() {
    pattern_symmetric_ = true;
    value_symmetric_ = true;
    for (Int j = 0; j < n_ && pattern_symmetric_; ++j) {
      for (Int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
        const Int i = row_idx_[p];
        if (i == j) continue;
        const Int q = find(j, i);
        if (q < 0) {
          pattern_symmetric_ = false;
          value_symmetric_ = false;
          break;
        }
        if (values_[q] != values_[p]) value_symmetric_ = false;
      }
    }
  }

  Int n_ = 0;
  std::vector<Int> col_ptr_;
  std::vector<Int> row_idx_;
  std::vector<double> values_;
  bool pattern_symmetric_ = true;
  bool value_symmetric_ = true;
};

// perm[new_position] = old_index.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<Int> perm) : perm_(std::move(perm)) {
    std::vector<char> seen(perm_.size(), 0);
    for (Int p : perm_) {
      if (p < 0 || p >= size() || seen[p])
        throw DimensionMismatch("permutation is not a bijection on 0.." +
                                std::to_string(size() - 1));
      seen[p] = 1;
    }
  }

  static Permutation identity(Int n) {
    std::vector<Int> p(n);
    std::iota(p.begin(), p.end(), Int{0});
    return Permutation(std::move(p));
  }

  Int size() const { return static_cast<Int>(perm_.size()); }
  Int operator[](Int new_index) const { return perm_[new_index]; }
  std::span<const Int> indices() const { return perm_; }

  // inverse()[old_index] = new_position
  Permutation inverse() const {
    std::vector<Int> inv(perm_.size());
    for (Int k = 0; k < size(); ++k) inv[perm_[k]] = k;
    return Permutation(std::move(inv));
  }

  // Applies 'then' after *this: result[k] = (*this)[then[k]].
  Permutation compose(const Permutation& then) const {
    if (then.size() != size()) throw DimensionMismatch("permutation sizes differ");
    std::vector<Int> out(perm_.size());
    for (Int k = 0; k < size(); ++k) out[k] = perm_[then[k]];
    return Permutation(std::move(out));
  }

  bool is_identity() const {
    for (Int k = 0; k < size(); ++k)
      if (perm_[k] != k) return false;
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Int> perm_;
};

// Pattern becomes pattern(A) ∪ pattern(A^T); added positions hold explicit zeros.
inline SparseMatrix symmetrize_structure(const SparseMatrix& a) {
  if (a.pattern_symmetric()) return a;
  const Int n = a.n();
  std::vector<Triplet> t;
  t.reserve(2 * a.nnz());
  for (Int j = 0; j < n; ++j) {
    auto rows = a.column_rows(j);
    auto vals = a.column_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      t.push_back({rows[k], j, vals[k]});
      if (a.find(j, rows[k]) < 0) t.push_back({j, rows[k], 0.0});
    }
  }
  return SparseMatrix::from_triplets(n, std::move(t));
}

// Returns P A P^T, i.e. entry (new_i, new_j) = A(p[new_i], p[new_j]).
inline SparseMatrix permute_symmetric(const SparseMatrix& a, const Permutation& p) {
  if (p.size() != a.n())
    throw DimensionMismatch("permutation length " + std::to_string(p.size()) +
                            " does not match matrix dimension " +
                            std::to_string(a.n()));
  const Int n = a.n();
  const Permutation inv = p.inverse();
  std::vector<Int> col_ptr(n + 1, 0);
  for (Int new_j = 0; new_j < n; ++new_j)
    col_ptr[new_j + 1] = col_ptr[new_j] + static_cast<Int>(a.column_rows(p[new_j]).size());
  std::vector<Int> rows(a.nnz());
  std::vector<double> vals(a.nnz());
  std::vector<std::pair<Int, double>> scratch;
  for (Int new_j = 0; new_j < n; ++new_j) {
    auto old_rows = a.column_rows(p[new_j]);
    auto old_vals = a.column_values(p[new_j]);
    scratch.clear();
    for (std::size_t k = 0; k < old_rows.size(); ++k)
      scratch.emplace_back(inv[old_rows[k]], old_vals[k]);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    Int q = col_ptr[new_j];
    for (const auto& [r, v] : scratch) {
      rows[q] = r;
      vals[q] = v;
      ++q;
    }
  }
  return SparseMatrix::from_csc(n, std::move(col_ptr), std::move(rows), std::move(vals));
}

// Finite-difference Laplacian on a 1-3 dimensional grid with Dirichlet
// boundaries, shifted by the identity: diagonal 2*d + 1, neighbours -1.
inline SparseMatrix generate_grid_laplacian(std::span<const Int> dims) {
  if (dims.empty() || dims.size() > 3)
    throw DimensionMismatch("grid must have 1 to 3 extents");
  Int n = 1;
  for (Int e : dims) {
    if (e < 1) throw DimensionMismatch("grid extents must be at least 1");
    if (n > std::numeric_limits<Int>::max() / e)
      throw DimensionMismatch("grid size overflows the index type");
    n *= e;
  }
  const Int d = static_cast<Int>(dims.size());
  std::vector<Int> stride(d, 1);
  for (Int k = 1; k < d; ++k) stride[k] = stride[k - 1] * dims[k - 1];
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n * (2 * d + 1)));
  for (Int node = 0; node < n; ++node) {
    t.push_back({node, node, 2.0 * static_cast<double>(d) + 1.0});
    for (Int k = 0; k < d; ++k) {
      const Int coord = (node / stride[k]) % dims[k];
      if (coord > 0) t.push_back({node - stride[k], node, -1.0});
      if (coord + 1 < dims[k]) t.push_back({node + stride[k], node, -1.0});
    }
  }
  return SparseMatrix::from_triplets(n, std::move(t));
}

inline SparseMatrix generate_grid_laplacian(std::initializer_list<Int> dims) {
  std::vector<Int> v(dims);
  return generate_grid_laplacian(std::span<const Int>(v));
}

}  // namespace selinv

#endif  // SELINV_SPARSE_MATRIX_HPP_
