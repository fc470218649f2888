#ifndef SELINV_ORDERING_HPP_
#define SELINV_ORDERING_HPP_

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "selinv/matrix_market.hpp"
#include "selinv/sparse_matrix.hpp"

namespace selinv {

enum class OrderingMethod { kNatural, kMinimumDegree, kExternal };

inline std::string to_string(OrderingMethod m) {
  switch (m) {
    case OrderingMethod::kNatural: return "natural";
    case OrderingMethod::kMinimumDegree: return "mindeg";
    case OrderingMethod::kExternal: return "external";
  }
  return "unknown";
}

namespace detail {

// Quotient-graph state of the minimum degree ordering. Variables that become
// indistinguishable are merged into supervariables and eliminated together;
// degrees are exact (not approximate) elimination-graph degrees.
class MinimumDegree {
 public:
  explicit MinimumDegree(const SparseMatrix& a)
      : n_(a.n()),
        state_(n_, State::kVariable),
        weight_(n_, 1),
        degree_(n_, 0),
        stamp_(n_, 0),
        members_(n_),
        vars_(n_),
        elements_(n_),
        element_vars_(n_) {
    for (Int j = 0; j < n_; ++j) {
      members_[j].push_back(j);
      for (Int i : a.column_rows(j))
        if (i != j) vars_[j].push_back(i);
      degree_[j] = static_cast<Int>(vars_[j].size());
      queue_.insert({degree_[j], j});
    }
  }

  std::vector<Int> run() {
    std::vector<Int> order;
    order.reserve(n_);
    while (!queue_.empty()) {
      const Int pivot = queue_.begin()->second;
      queue_.erase(queue_.begin());
      for (Int v : members_[pivot]) order.push_back(v);
      eliminate(pivot);
    }
    return order;
  }

 private:
  enum class State : unsigned char { kVariable, kMerged, kElement, kAbsorbed };

  Int next_stamp() {
    if (++current_stamp_ == std::numeric_limits<Int>::max()) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      current_stamp_ = 1;
    }
    return current_stamp_;
  }

  void eliminate(Int pivot) {
    // Reach set of the pivot becomes the new element.
    const Int mark = next_stamp();
    stamp_[pivot] = mark;
    std::vector<Int> reach;
    for (Int v : vars_[pivot]) {
      if (state_[v] == State::kVariable && stamp_[v] != mark) {
        stamp_[v] = mark;
        reach.push_back(v);
      }
    }
    for (Int e : elements_[pivot]) {
      if (state_[e] != State::kElement) continue;
      for (Int v : element_vars_[e]) {
        if (state_[v] == State::kVariable && stamp_[v] != mark) {
          stamp_[v] = mark;
          reach.push_back(v);
        }
      }
      state_[e] = State::kAbsorbed;
      std::vector<Int>().swap(element_vars_[e]);
    }
    state_[pivot] = State::kElement;
    std::vector<Int>().swap(vars_[pivot]);
    std::vector<Int>().swap(elements_[pivot]);

    // Prune variable lists: edges inside the reach set are implied by the
    // new element.
    for (Int i : reach) {
      auto& els = elements_[i];
      std::erase_if(els, [&](Int e) { return state_[e] != State::kElement; });
      els.push_back(pivot);
      std::sort(els.begin(), els.end());
      auto& vs = vars_[i];
      std::erase_if(vs, [&](Int v) {
        return state_[v] != State::kVariable || stamp_[v] == mark;
      });
      std::sort(vs.begin(), vs.end());
    }

    detect_supervariables(reach);
    std::erase_if(reach, [&](Int v) { return state_[v] != State::kVariable; });
    element_vars_[pivot] = reach;

    for (Int i : reach) {
      queue_.erase({degree_[i], i});
      degree_[i] = exact_degree(i);
      queue_.insert({degree_[i], i});
    }
  }

  void detect_supervariables(const std::vector<Int>& reach) {
    std::unordered_map<std::uint64_t, std::vector<Int>> buckets;
    for (Int i : reach) {
      std::uint64_t h = 1469598103934665603ull;
      for (Int e : elements_[i]) h = (h ^ static_cast<std::uint64_t>(e)) * 1099511628211ull;
      h ^= 0x9e3779b97f4a7c15ull;
      for (Int v : vars_[i]) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
      buckets[h].push_back(i);
    }
    for (auto& [hash, group] : buckets) {
      if (group.size() < 2) continue;
      std::sort(group.begin(), group.end());
      for (std::size_t a = 0; a < group.size(); ++a) {
        const Int i = group[a];
        if (state_[i] != State::kVariable) continue;
        for (std::size_t b = a + 1; b < group.size(); ++b) {
          const Int j = group[b];
          if (state_[j] != State::kVariable) continue;
          if (elements_[i] != elements_[j] || vars_[i] != vars_[j]) continue;
          queue_.erase({degree_[j], j});
          weight_[i] += weight_[j];
          members_[i].insert(members_[i].end(), members_[j].begin(),
                             members_[j].end());
          state_[j] = State::kMerged;
          std::vector<Int>().swap(members_[j]);
          std::vector<Int>().swap(vars_[j]);
          std::vector<Int>().swap(elements_[j]);
        }
      }
    }
  }

  // Number of other original vertices adjacent to any member of 'i' in the
  // elimination graph, plus the other members of its own supervariable.
  Int exact_degree(Int i) {
    const Int mark = next_stamp();
    stamp_[i] = mark;
    Int degree = weight_[i] - 1;
    for (Int e : elements_[i]) {
      auto& ev = element_vars_[e];
      std::size_t keep = 0;
      for (Int v : ev) {
        if (state_[v] != State::kVariable) continue;
        ev[keep++] = v;
        if (stamp_[v] == mark) continue;
        stamp_[v] = mark;
        degree += weight_[v];
      }
      ev.resize(keep);
    }
    for (Int v : vars_[i]) {
      if (state_[v] != State::kVariable || stamp_[v] == mark) continue;
      stamp_[v] = mark;
      degree += weight_[v];
    }
    return degree;
  }

  Int n_;
  std::vector<State> state_;
  std::vector<Int> weight_;
  std::vector<Int> degree_;
  std::vector<Int> stamp_;
  Int current_stamp_ = 0;
  std::vector<std::vector<Int>> members_;
  std::vector<std::vector<Int>> vars_;
  std::vector<std::vector<Int>> elements_;
  std::vector<std::vector<Int>> element_vars_;
  std::set<std::pair<Int, Int>> queue_;
};

}  // namespace detail

// Minimum degree elimination order of a pattern-symmetric matrix; ties are
// broken by the smallest vertex index.
inline Permutation minimum_degree_order(const SparseMatrix& a) {
  if (!a.pattern_symmetric())
    throw Error("minimum degree ordering requires a pattern-symmetric matrix");
  return Permutation(detail::MinimumDegree(a).run());
}

inline Permutation fill_reducing_order(
    const SparseMatrix& a, OrderingMethod method,
    const std::optional<std::filesystem::path>& external = std::nullopt) {
  switch (method) {
    case OrderingMethod::kNatural:
      return Permutation::identity(a.n());
    case OrderingMethod::kMinimumDegree:
      return minimum_degree_order(a);
    case OrderingMethod::kExternal:
      if (!external) throw Error("external ordering requires a permutation file");
      return read_permutation(*external, a.n());
  }
  throw Error("unknown ordering method");
}

}  // namespace selinv

#endif  // SELINV_ORDERING_HPP_
