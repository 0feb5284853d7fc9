// Copyright 2026 The netauct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "netauct/critical.hpp"
#include "netauct/errors.hpp"
#include "netauct/network.hpp"

// Welfare maximization with unit demand and homogeneous items, plus the
// allocation tree the multi-item mechanism walks. With unit demand, greedy
// selection by valuation rank is exactly optimal, so no solver is involved.
//
// Whenever buyers are ranked by reported valuation the canonical tie-break
// applies: higher valuation first, lower id first among equals. A single
// global rule keeps every subroutine's ranking mutually consistent.

namespace netauct {

template <typename V>
struct Allocation {
  std::set<BuyerId> winners;
  V welfare{};
};

/// Constraint system for a welfare maximization: `excluded` buyers are
/// removed from eligibility, `forced` buyers must win, `k` items total.
struct WelfareProgram {
  std::set<BuyerId> excluded;
  std::set<BuyerId> forced;
  int k = 1;
};

namespace detail {

/// Canonical valuation ranking: descending value, ascending id.
template <typename V>
struct CanonicalRank {
  const std::map<BuyerId, V>* values;
  bool operator()(BuyerId a, BuyerId b) const {
    const V& va = values->at(a);
    const V& vb = values->at(b);
    if (va != vb) return vb < va;
    return a < b;
  }
};

template <typename V>
std::vector<BuyerId> ranked(std::vector<BuyerId> ids,
                            const std::map<BuyerId, V>& values) {
  std::sort(ids.begin(), ids.end(), CanonicalRank<V>{&values});
  return ids;
}

template <typename V>
Allocation<V> constrained_welfare_impl(const std::map<BuyerId, V>& reports,
                                       const WelfareProgram& prog) {
  if (static_cast<int>(prog.forced.size()) > prog.k)
    throw InfeasibleProgramError("forced set larger than item count");
  Allocation<V> result;
  result.welfare = ValueTraits<V>::zero();
  for (BuyerId id : prog.forced) {
    if (prog.excluded.count(id))
      throw InfeasibleProgramError("buyer " + id_str(id) +
                                   " both forced and excluded");
    if (!reports.count(id))
      throw InfeasibleProgramError("forced buyer " + id_str(id) +
                                   " is not a participant");
    result.winners.insert(id);
    result.welfare += reports.at(id);
  }
  std::vector<BuyerId> eligible;
  for (const auto& [id, v] : reports) {
    if (!prog.excluded.count(id) && !prog.forced.count(id)) eligible.push_back(id);
  }
  eligible = ranked(std::move(eligible), reports);
  std::size_t free_slots = static_cast<std::size_t>(prog.k) - prog.forced.size();
  for (std::size_t i = 0; i < eligible.size() && i < free_slots; ++i) {
    result.winners.insert(eligible[i]);
    result.welfare += reports.at(eligible[i]);
  }
  return result;
}

template <typename V>
std::vector<BuyerId> top_k_critical_children_impl(
    const CriticalStructure& cs, const std::map<BuyerId, V>& reports,
    BuyerId buyer, int k) {
  const std::set<BuyerId>& children = cs.children_of(buyer);
  std::vector<BuyerId> order =
      ranked(std::vector<BuyerId>(children.begin(), children.end()), reports);
  if (static_cast<int>(order.size()) > k) order.resize(static_cast<std::size_t>(k));
  return order;
}

// The set a buyer must beat to take an item: her top-k critical children,
// their critical parents strictly below her, and those parents' critical
// children.
template <typename V>
std::set<BuyerId> competitor_closure_impl(const CriticalStructure& cs,
                                          const std::map<BuyerId, V>& reports,
                                          BuyerId buyer, int k) {
  const std::vector<BuyerId> top = top_k_critical_children_impl(cs, reports, buyer, k);
  std::set<BuyerId> closure(top.begin(), top.end());
  std::set<BuyerId> below_parents;
  for (BuyerId j : top) {
    for (BuyerId l : cs.parents_of(j)) {
      if (cs.precedes(buyer, l)) below_parents.insert(l);
    }
  }
  closure.insert(below_parents.begin(), below_parents.end());
  for (BuyerId j : below_parents) {
    const std::set<BuyerId>& cj = cs.children_of(j);
    closure.insert(cj.begin(), cj.end());
  }
  return closure;
}

}  // namespace detail

/// Welfare-maximizing allocation of k items among participants: the
/// min(k, #participants) highest-ranked reports win. Zero-valuation
/// participants are eligible; the canonical tie-break decides.
template <typename V>
Allocation<V> efficient_allocation(const Network<V>& net,
                                   const ActionProfile<V>& profile, int k) {
  (void)net;
  return detail::constrained_welfare_impl(reported_valuations(profile),
                                          WelfareProgram{{}, {}, k});
}

/// Constrained welfare maximization: forced buyers win, excluded buyers are
/// ineligible, the remaining slots go to the highest-ranked eligible
/// participants. Throws InfeasibleProgramError on contradictory constraints,
/// which signals a bug in the calling mechanism pass, never user input.
template <typename V>
Allocation<V> constrained_welfare(const Network<V>& net,
                                  const ActionProfile<V>& profile,
                                  const WelfareProgram& prog) {
  (void)net;
  return detail::constrained_welfare_impl(reported_valuations(profile), prog);
}

/// The up-to-k highest-ranked critical children of `buyer`.
template <typename V>
std::vector<BuyerId> top_k_critical_children(const CriticalStructure& cs,
                                             const ActionProfile<V>& profile,
                                             BuyerId buyer, int k) {
  return detail::top_k_critical_children_impl(cs, reported_valuations(profile),
                                              buyer, k);
}

/// Competitor closure of `buyer` for a k-item sale. Always a subset of her
/// critical children; never contains the buyer herself or any of her
/// critical parents.
template <typename V>
std::set<BuyerId> competitor_closure(const CriticalStructure& cs,
                                     const ActionProfile<V>& profile,
                                     BuyerId buyer, int k) {
  return detail::competitor_closure_impl(cs, reported_valuations(profile),
                                         buyer, k);
}

/// The tree the multi-item pass distributes items along: nodes are the
/// efficient winners and all their critical parents, each node hangs below
/// its closest critical parent (or the seller), and a node's weight counts
/// the efficient winners in its subtree. Weights are decremented while the
/// pass reassigns items; everything else is immutable.
template <typename V>
class AllocationTree {
 public:
  AllocationTree(std::set<BuyerId> nodes, std::map<BuyerId, BuyerId> parent,
                 std::map<BuyerId, int> weights, std::map<BuyerId, V> values)
      : nodes_(std::move(nodes)),
        parent_(std::move(parent)),
        weight_(weights),
        initial_weight_(std::move(weights)),
        value_(std::move(values)) {
    for (const auto& [child, p] : parent_) children_[p].push_back(child);
    for (auto& [p, cs] : children_) std::sort(cs.begin(), cs.end());
  }

  const std::set<BuyerId>& node_ids() const { return nodes_; }
  bool contains(BuyerId id) const { return nodes_.count(id) != 0; }

  /// Parent in the tree; kSellerId for the seller's direct children.
  BuyerId parent_of(BuyerId id) const { return parent_.at(id); }

  /// Direct children in ascending id order; `children_of(kSellerId)` is the
  /// seller's child list.
  const std::vector<BuyerId>& children_of(BuyerId id) const {
    static const std::vector<BuyerId> kNone;
    auto it = children_.find(id);
    return it == children_.end() ? kNone : it->second;
  }

  int weight(BuyerId id) const { return weight_.at(id); }
  int initial_weight(BuyerId id) const { return initial_weight_.at(id); }
  const V& value_of(BuyerId id) const { return value_.at(id); }

  void decrement_weight(BuyerId id) {
    int& w = weight_.at(id);
    if (w <= 0)
      throw InternalInvariantError("weight of buyer " + id_str(id) +
                                   " would turn negative");
    --w;
  }

  /// All tree nodes in the subtree rooted at `id`, including `id`.
  std::vector<BuyerId> subtree(BuyerId id) const {
    std::vector<BuyerId> out, stack{id};
    while (!stack.empty()) {
      BuyerId u = stack.back();
      stack.pop_back();
      out.push_back(u);
      const std::vector<BuyerId>& cs = children_of(u);
      stack.insert(stack.end(), cs.begin(), cs.end());
    }
    return out;
  }

 private:
  std::set<BuyerId> nodes_;
  std::map<BuyerId, BuyerId> parent_;
  std::map<BuyerId, std::vector<BuyerId>> children_;
  std::map<BuyerId, int> weight_;
  std::map<BuyerId, int> initial_weight_;
  std::map<BuyerId, V> value_;
};

namespace detail {

template <typename V>
AllocationTree<V> build_allocation_tree_impl(const CriticalStructure& cs,
                                             const std::map<BuyerId, V>& reports,
                                             const std::set<BuyerId>& efficient_winners) {
  std::set<BuyerId> nodes = efficient_winners;
  std::map<BuyerId, int> weights;
  for (BuyerId w : efficient_winners) {
    weights[w] += 1;
    for (BuyerId p : cs.parents_of(w)) {
      nodes.insert(p);
      weights[p] += 1;
    }
  }
  std::map<BuyerId, BuyerId> parent;
  std::map<BuyerId, V> values;
  for (BuyerId id : nodes) {
    weights.try_emplace(id, 0);
    values.emplace(id, reports.at(id));
    const std::vector<BuyerId>& chain = cs.parents_of(id);
    if (chain.empty()) {
      parent.emplace(id, kSellerId);
    } else {
      for (BuyerId p : chain) {
        if (!nodes.count(p))
          throw InternalInvariantError("critical parent " + id_str(p) +
                                       " of tree node " + id_str(id) +
                                       " is outside the tree");
      }
      parent.emplace(id, chain.back());
    }
  }
  AllocationTree<V> tree(std::move(nodes), std::move(parent),
                         std::move(weights), std::move(values));
  // Definition sanity: every weight equals the children sum plus the node's
  // own efficient item.
  for (BuyerId id : tree.node_ids()) {
    int sum = efficient_winners.count(id) ? 1 : 0;
    for (BuyerId c : tree.children_of(id)) sum += tree.weight(c);
    if (sum != tree.weight(id))
      throw InternalInvariantError("weight arithmetic broken at buyer " +
                                   id_str(id));
  }
  return tree;
}

}  // namespace detail

template <typename V>
AllocationTree<V> build_allocation_tree(const Network<V>& net,
                                        const ActionProfile<V>& profile,
                                        const CriticalStructure& cs, int k) {
  const std::map<BuyerId, V> reports = reported_valuations(profile);
  const Allocation<V> eff =
      detail::constrained_welfare_impl(reports, WelfareProgram{{}, {}, k});
  (void)net;
  return detail::build_allocation_tree_impl(cs, reports, eff.winners);
}

}  // namespace netauct
