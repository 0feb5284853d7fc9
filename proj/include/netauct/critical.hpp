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
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "netauct/network.hpp"

// Critical parents and children of an invitation graph. Buyer j is a
// critical parent of buyer i when every invitation chain from the seller to
// i passes through j, i.e. j is a proper dominator of i in the directed
// invitation graph rooted at the seller. The partial order `precedes` (j
// precedes i iff j is i's critical parent) is what the mechanisms walk.

namespace netauct {

class CriticalStructure {
 public:
  CriticalStructure(std::set<BuyerId> participants,
                    std::map<BuyerId, std::vector<BuyerId>> parents)
      : participants_(std::move(participants)), parents_(std::move(parents)) {
    for (const auto& [child, ps] : parents_) {
      children_[child];  // ensure every participant has an entry
      for (BuyerId p : ps) children_[p].insert(child);
    }
  }

  const std::set<BuyerId>& participants() const { return participants_; }
  bool is_participant(BuyerId id) const { return participants_.count(id) != 0; }

  /// Critical parents of `id`, ordered from closest to the seller outward
  /// (the restriction of the partial order to a buyer's parents is a chain).
  /// Querying a non-participant is a contract violation.
  const std::vector<BuyerId>& parents_of(BuyerId id) const {
    auto it = parents_.find(id);
    if (it == parents_.end())
      throw std::out_of_range("buyer " + id_str(id) + " is not a participant");
    return it->second;
  }

  const std::set<BuyerId>& children_of(BuyerId id) const {
    auto it = children_.find(id);
    if (it == children_.end())
      throw std::out_of_range("buyer " + id_str(id) + " is not a participant");
    return it->second;
  }

  /// True iff i is a critical parent of j.
  bool precedes(BuyerId i, BuyerId j) const {
    const std::vector<BuyerId>& ps = parents_of(j);
    if (!is_participant(i))
      throw std::out_of_range("buyer " + id_str(i) + " is not a participant");
    return std::find(ps.begin(), ps.end(), i) != ps.end();
  }

 private:
  std::set<BuyerId> participants_;
  std::map<BuyerId, std::vector<BuyerId>> parents_;
  std::map<BuyerId, std::set<BuyerId>> children_;
};

inline bool precedes(const CriticalStructure& cs, BuyerId i, BuyerId j) {
  return cs.precedes(i, j);
}

namespace detail {

// The invitation digraph restricted to participants, in index space:
// node 0 is the seller, node 1..m are participants in ascending id order.
template <typename V>
struct InvitationGraph {
  std::vector<BuyerId> ids;                    // index -> id (ids[0] unused)
  std::map<BuyerId, std::size_t> index;        // id -> index
  std::vector<std::vector<std::size_t>> succ;  // forward edges
  std::vector<std::vector<std::size_t>> pred;  // reverse edges

  InvitationGraph(const Network<V>& net, const ActionProfile<V>& profile,
                  const std::set<BuyerId>& parts) {
    ids.push_back(kSellerId);
    for (BuyerId id : parts) {
      index.emplace(id, ids.size());
      ids.push_back(id);
    }
    succ.assign(ids.size(), {});
    pred.assign(ids.size(), {});
    for (BuyerId j : net.seller_neighbors()) {
      if (parts.count(j) && !profile.is_nil(j)) add_edge(0, index.at(j));
    }
    for (BuyerId j : parts) {
      const Action<V>& act = profile.action(j);
      if (!act) continue;
      for (BuyerId l : act->invited) {
        auto it = index.find(l);
        if (it != index.end() && !profile.is_nil(l))
          add_edge(index.at(j), it->second);
      }
    }
  }

  void add_edge(std::size_t from, std::size_t to) {
    succ[from].push_back(to);
    pred[to].push_back(from);
  }

  /// Nodes reachable from the seller with node `removed` deleted
  /// (pass size() to remove nothing).
  std::vector<bool> reachable_without(std::size_t removed) const {
    std::vector<bool> seen(ids.size(), false);
    std::vector<std::size_t> stack;
    seen[0] = true;
    stack.push_back(0);
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : succ[u]) {
        if (v == removed || seen[v]) continue;
        seen[v] = true;
        stack.push_back(v);
      }
    }
    return seen;
  }
};

// Orders each parent set along its chain: fewer critical parents of one's
// own means closer to the seller.
inline std::map<BuyerId, std::vector<BuyerId>> sort_parent_chains(
    std::map<BuyerId, std::set<BuyerId>> parent_sets) {
  std::map<BuyerId, std::vector<BuyerId>> sorted;
  for (auto& [id, ps] : parent_sets) {
    std::vector<BuyerId> chain(ps.begin(), ps.end());
    std::sort(chain.begin(), chain.end(), [&](BuyerId a, BuyerId b) {
      std::size_t da = parent_sets.at(a).size(), db = parent_sets.at(b).size();
      return da != db ? da < db : a < b;
    });
    sorted.emplace(id, std::move(chain));
  }
  return sorted;
}

}  // namespace detail

/// Critical parents/children of every participant, via the iterative
/// dominator dataflow dom(v) = {v} ∪ ⋂_{p ∈ pred(v)} dom(p) on the
/// invitation digraph. Quadratic in the worst case, which is fine at the
/// network sizes verification runs at; `critical_structure_oracle` is the
/// independent ground truth.
template <typename V>
CriticalStructure critical_structure(const Network<V>& net,
                                     const ActionProfile<V>& profile) {
  const std::set<BuyerId> parts = participants(net, profile);
  detail::InvitationGraph<V> g(net, profile, parts);
  const std::size_t n = g.ids.size();
  const std::size_t words = (n + 63) / 64;

  // dom[v] as bitsets; seller = {s}, everything else starts full.
  std::vector<std::vector<std::uint64_t>> dom(
      n, std::vector<std::uint64_t>(words, ~std::uint64_t{0}));
  std::fill(dom[0].begin(), dom[0].end(), 0);
  dom[0][0] |= 1;

  bool changed = true;
  std::vector<std::uint64_t> acc(words);
  while (changed) {
    changed = false;
    for (std::size_t v = 1; v < n; ++v) {
      std::fill(acc.begin(), acc.end(), ~std::uint64_t{0});
      for (std::size_t p : g.pred[v]) {
        for (std::size_t w = 0; w < words; ++w) acc[w] &= dom[p][w];
      }
      acc[v / 64] |= std::uint64_t{1} << (v % 64);
      if (acc != dom[v]) {
        dom[v] = acc;
        changed = true;
      }
    }
  }

  std::map<BuyerId, std::set<BuyerId>> parent_sets;
  for (std::size_t v = 1; v < n; ++v) {
    std::set<BuyerId>& ps = parent_sets[g.ids[v]];
    for (std::size_t u = 1; u < n; ++u) {
      if (u != v && (dom[v][u / 64] >> (u % 64)) & 1) ps.insert(g.ids[u]);
    }
  }
  return CriticalStructure(parts, detail::sort_parent_chains(std::move(parent_sets)));
}

/// Ground-truth variant straight from the definition: j is i's critical
/// parent iff deleting j disconnects i from the seller. One reachability
/// sweep per participant; intended for small verification networks.
template <typename V>
CriticalStructure critical_structure_oracle(const Network<V>& net,
                                            const ActionProfile<V>& profile) {
  const std::set<BuyerId> parts = participants(net, profile);
  detail::InvitationGraph<V> g(net, profile, parts);
  const std::size_t n = g.ids.size();

  std::map<BuyerId, std::set<BuyerId>> parent_sets;
  for (BuyerId id : parts) parent_sets[id];
  for (std::size_t removed = 1; removed < n; ++removed) {
    const std::vector<bool> seen = g.reachable_without(removed);
    for (std::size_t v = 1; v < n; ++v) {
      if (v != removed && !seen[v]) parent_sets[g.ids[v]].insert(g.ids[removed]);
    }
  }
  return CriticalStructure(parts, detail::sort_parent_chains(std::move(parent_sets)));
}

}  // namespace netauct
