#ifndef SELINV_SYMBOLIC_HPP_
#define SELINV_SYMBOLIC_HPP_

#include <algorithm>
#include <filesystem>
#include <optional>
#include <vector>

#include "selinv/ordering.hpp"
#include "selinv/sparse_matrix.hpp"

namespace selinv {

struct EliminationTree {
  static constexpr Int kRoot = -1;

  // parent[j] > j, or kRoot.
  std::vector<Int> parent;

  Int size() const { return static_cast<Int>(parent.size()); }

  std::vector<std::vector<Int>> children() const {
    std::vector<std::vector<Int>> c(parent.size());
    for (Int j = 0; j < size(); ++j)
      if (parent[j] != kRoot) c[parent[j]].push_back(j);
    return c;
  }

  // Number of vertices on the longest leaf-to-root path.
  Int height() const {
    std::vector<Int> depth(parent.size(), 1);
    Int h = 0;
    for (Int j = size() - 1; j >= 0; --j) {
      if (parent[j] != kRoot) depth[j] = depth[parent[j]] + 1;
      h = std::max(h, depth[j]);
    }
    return h;
  }
};

// Strictly-lower pattern of the Cholesky factor of pattern(A), per column.
// The pattern of U is its transpose.
struct FillPattern {
  std::vector<std::vector<Int>> columns;

  Int n() const { return static_cast<Int>(columns.size()); }
  Int strict_lower_nnz() const {
    Int total = 0;
    for (const auto& c : columns) total += static_cast<Int>(c.size());
    return total;
  }
  Int lu_nnz() const { return n() + 2 * strict_lower_nnz(); }
};

struct SupernodePartition {
  // first[K] is the first column of supernode K; first[count()] == n.
  std::vector<Int> first;
  std::vector<Int> col_to_snode;

  Int count() const { return static_cast<Int>(first.size()) - 1; }
  Int begin(Int k) const { return first[k]; }
  Int end(Int k) const { return first[k + 1]; }
  Int width(Int k) const { return first[k + 1] - first[k]; }
  Int max_width() const {
    Int w = 0;
    for (Int k = 0; k < count(); ++k) w = std::max(w, width(k));
    return w;
  }
};

// Block sparsity of the supernodal factor: for each supernode K the sorted
// ancestor set C(K) = {I > K : L_{I,K} != 0} and the dual descendant set
// C'(K) = {I' < K : L_{K,I'} != 0}. Blocks L_{I,K} are stored dense, stacked
// in ancestor order; row_offsets gives each block's first row in the stack.
struct BlockSparsity {
  std::vector<std::vector<Int>> ancestors;
  std::vector<std::vector<Int>> descendants;
  std::vector<std::vector<Int>> row_offsets;

  Int count() const { return static_cast<Int>(ancestors.size()); }

  // Position of I within C(K), or -1.
  Int find_ancestor(Int k, Int i) const {
    const auto& c = ancestors[k];
    auto it = std::lower_bound(c.begin(), c.end(), i);
    if (it == c.end() || *it != i) return -1;
    return static_cast<Int>(it - c.begin());
  }

  // Whether block (I, J) of L + U is structurally nonzero.
  bool has_block(Int i, Int j) const {
    if (i == j) return true;
    return i > j ? find_ancestor(j, i) >= 0 : find_ancestor(i, j) >= 0;
  }

  Int stacked_height(Int k) const { return row_offsets[k].back(); }
};

struct SymbolicAnalysis {
  EliminationTree etree;
  FillPattern fill;
  SupernodePartition partition;
  BlockSparsity blocks;
  // Maps new (factor) positions to original indices.
  Permutation ordering;
  OrderingMethod method = OrderingMethod::kNatural;

  Int n() const { return etree.size(); }
  Int supernode_count() const { return partition.count(); }

  // Number of doubles held by one block-dense copy of L (diagonal blocks
  // included), which is also the size of one triangle of SelectedInverse.
  Int block_lower_entries() const {
    Int total = 0;
    for (Int k = 0; k < partition.count(); ++k) {
      const Int w = partition.width(k);
      total += w * w + blocks.stacked_height(k) * w;
    }
    return total;
  }
};

// Liu's algorithm with path compression. Requires a pattern-symmetric A.
inline EliminationTree elimination_tree(const SparseMatrix& a) {
  const Int n = a.n();
  EliminationTree t{std::vector<Int>(n, EliminationTree::kRoot)};
  std::vector<Int> ancestor(n, EliminationTree::kRoot);
  for (Int j = 0; j < n; ++j) {
    for (Int i : a.column_rows(j)) {
      if (i >= j) break;
      Int r = i;
      while (r != EliminationTree::kRoot && r < j) {
        const Int next = ancestor[r];
        ancestor[r] = j;
        if (next == EliminationTree::kRoot) t.parent[r] = j;
        r = next;
      }
    }
  }
  return t;
}

// Depth-first postorder visiting children in ascending index order.
// An already postordered tree yields the identity.
inline Permutation postorder_tree(const EliminationTree& t) {
  const Int n = t.size();
  const auto children = t.children();
  std::vector<Int> order;
  order.reserve(n);
  std::vector<std::pair<Int, std::size_t>> stack;
  for (Int root = 0; root < n; ++root) {
    if (t.parent[root] != EliminationTree::kRoot) continue;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto& [node, next_child] = stack.back();
      if (next_child < children[node].size()) {
        const Int c = children[node][next_child++];
        stack.emplace_back(c, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  return Permutation(std::move(order));
}

// Fill pattern of the Cholesky factor: column j is the lower part of A(:, j)
// merged with the patterns of j's children, minus j itself.
inline FillPattern symbolic_factor(const SparseMatrix& a, const EliminationTree& t) {
  const Int n = a.n();
  if (t.size() != n) throw DimensionMismatch("elimination tree size mismatch");
  const auto children = t.children();
  FillPattern fill;
  fill.columns.resize(n);
  std::vector<Int> marker(n, -1);
  for (Int j = 0; j < n; ++j) {
    auto& col = fill.columns[j];
    marker[j] = j;
    for (Int i : a.column_rows(j)) {
      if (i > j && marker[i] != j) {
        marker[i] = j;
        col.push_back(i);
      }
    }
    for (Int c : children[j]) {
      for (Int i : fill.columns[c]) {
        if (marker[i] != j) {
          marker[i] = j;
          col.push_back(i);
        }
      }
    }
    std::sort(col.begin(), col.end());
    if (!col.empty() && col.front() != t.parent[j])
      throw InternalError("elimination tree inconsistent with matrix at column " +
                          std::to_string(j));
  }
  return fill;
}

// Greedy left-to-right merge of structurally identical columns: j + 1 joins
// the supernode of j iff parent(j) = j + 1, pattern(j) \ {j + 1} equals
// pattern(j + 1), and the supernode has fewer than max_supernode_size columns.
inline SupernodePartition supernode_partition(const FillPattern& fill,
                                              Int max_supernode_size) {
  if (max_supernode_size < 1) throw Error("max_supernode_size must be >= 1");
  const Int n = fill.n();
  SupernodePartition part;
  part.col_to_snode.assign(n, 0);
  if (n == 0) {
    part.first = {0};
    return part;
  }
  part.first.push_back(0);
  for (Int j = 0; j + 1 < n; ++j) {
    const auto& cur = fill.columns[j];
    const auto& next = fill.columns[j + 1];
    const bool chained = !cur.empty() && cur.front() == j + 1 &&
                         cur.size() == next.size() + 1 &&
                         std::equal(next.begin(), next.end(), cur.begin() + 1);
    const Int size = j + 1 - part.first.back();
    if (!chained || size >= max_supernode_size) part.first.push_back(j + 1);
  }
  part.first.push_back(n);
  for (Int k = 0; k < part.count(); ++k)
    for (Int j = part.begin(k); j < part.end(k); ++j) part.col_to_snode[j] = k;
  return part;
}

inline BlockSparsity block_structure(const FillPattern& fill,
                                     const SupernodePartition& part) {
  const Int count = part.count();
  BlockSparsity b;
  b.ancestors.resize(count);
  b.descendants.resize(count);
  b.row_offsets.resize(count);
  for (Int k = 0; k < count; ++k) {
    auto& c = b.ancestors[k];
    for (Int j = part.begin(k); j < part.end(k); ++j)
      for (Int i : fill.columns[j])
        if (i >= part.end(k)) c.push_back(part.col_to_snode[i]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    auto& off = b.row_offsets[k];
    off.assign(c.size() + 1, 0);
    for (std::size_t a = 0; a < c.size(); ++a) off[a + 1] = off[a] + part.width(c[a]);
    for (Int i : c) b.descendants[i].push_back(k);
  }
  return b;
}

struct AnalyzeOptions {
  OrderingMethod ordering = OrderingMethod::kNatural;
  Int max_supernode_size = 64;
  std::optional<std::filesystem::path> permutation_file;
};

// Ordering, postordering, fill and supernodal block structure of a
// pattern-symmetric matrix. The result describes P A P^T where P is
// 'ordering' (fill-reducing order followed by an etree postorder).
inline SymbolicAnalysis analyze(const SparseMatrix& a, const AnalyzeOptions& opts = {}) {
  if (!a.pattern_symmetric())
    throw Error("symbolic analysis requires a pattern-symmetric matrix");
  const Permutation fill_order =
      fill_reducing_order(a, opts.ordering, opts.permutation_file);
  const EliminationTree pre = elimination_tree(permute_symmetric(a, fill_order));
  const Permutation post = postorder_tree(pre);

  SymbolicAnalysis s;
  s.method = opts.ordering;
  s.ordering = fill_order.compose(post);
  const SparseMatrix b = permute_symmetric(a, s.ordering);
  s.etree = elimination_tree(b);
  s.fill = symbolic_factor(b, s.etree);
  s.partition = supernode_partition(s.fill, opts.max_supernode_size);
  s.blocks = block_structure(s.fill, s.partition);
  return s;
}

}  // namespace selinv

#endif  // SELINV_SYMBOLIC_HPP_
