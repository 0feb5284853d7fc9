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

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netauct/allocation.hpp"
#include "netauct/critical.hpp"
#include "netauct/errors.hpp"
#include "netauct/network.hpp"

// The three mechanisms. Each maps a network and a feasible action profile to
// an outcome (item assignment, payments, revenue):
//
//  - run_idm:       single-item diffusion mechanism. The item travels down
//                   the critical-parent chain of the top bidder; each buyer
//                   on the chain either keeps it or passes it on, and is paid
//                   the increase her diffusion causes in the best price.
//  - run_gidm:      the multi-item generalization. Items are distributed
//                   along the allocation tree with a LIFO pass; a popped
//                   buyer takes an item when she wins a constrained welfare
//                   maximization that excludes her competitor closure, and
//                   payments are differences of two such maximizations.
//  - run_vcg_local: (k+1)-price sale among the seller's direct neighbours,
//                   the no-advertising baseline.
//
// Every run is single-threaded and deterministic; runs on distinct inputs
// are independent and may execute concurrently.

namespace netauct {

template <typename V>
struct Outcome {
  std::map<BuyerId, int> item_of;  // 1 for winners, 0 otherwise; total over buyers
  std::map<BuyerId, V> payment;    // negative = paid by the mechanism; total
  V revenue{};
  std::vector<std::string> trace;

  int item(BuyerId id) const {
    auto it = item_of.find(id);
    return it == item_of.end() ? 0 : it->second;
  }
  V pay(BuyerId id) const {
    auto it = payment.find(id);
    return it == payment.end() ? ValueTraits<V>::zero() : it->second;
  }
};

/// Everything recorded about one buyer when the multi-item pass pops her.
/// Payments reuse these pop-time values, never end-of-pass state.
template <typename V>
struct PopSnapshot {
  int order = 0;                         // position in the pop sequence
  int items_received = 0;                // k_i, items handed to her
  std::set<BuyerId> received;            // critical parents already holding items
  std::set<BuyerId> out;                 // efficient winners those parents displaced
  std::set<BuyerId> closure;             // competitor closure at this pop
  std::set<BuyerId> critical_children;   // her full critical child set
  V sw_minus_closure{};                  // optimum with the closure removed
  std::set<BuyerId> sw_closure_winners;  // witnesses of that optimum
  bool won = false;
  std::optional<BuyerId> get_from;       // defined iff won
  std::vector<std::pair<BuyerId, int>> handed;  // children pushed, with item counts
  std::optional<V> sw_minus_d;           // optimum without her down-set (payment phase)
};

template <typename V>
struct PassState {
  std::vector<BuyerId> pop_order;
  std::vector<BuyerId> winners;  // in pop order
  std::map<BuyerId, BuyerId> get_from;
  std::set<BuyerId> taken_out;   // efficient winners whose item was consumed
  std::map<BuyerId, PopSnapshot<V>> snapshots;

  bool won(BuyerId id) const { return get_from.count(id) != 0; }
};

/// The corrected constraint form (forced winners) is the conforming one.
/// The superseded original form (forced losers) is kept solely for
/// differential testing; it is known to admit incentive violations.
enum class ConstraintForm { kCorrected, kOriginal };

struct GidmOptions {
  ConstraintForm constraints = ConstraintForm::kCorrected;
  /// Per-parent override of the child push sequence (defaults to ascending
  /// id). Only the order-sensitivity diagnostic uses this.
  std::map<BuyerId, std::vector<BuyerId>> push_order;
};

template <typename V>
struct GidmResult {
  Outcome<V> outcome;
  PassState<V> pass;
  AllocationTree<V> tree;
  std::set<BuyerId> efficient_winners;
  std::map<BuyerId, V> reports;
  int item_count = 1;
};

namespace detail {

inline std::string join_ids(const std::set<BuyerId>& ids) {
  std::string out = "{";
  for (BuyerId id : ids) {
    if (out.size() > 1) out += ",";
    out += id_str(id);
  }
  return out + "}";
}

template <typename V>
void require_feasible(const Network<V>& net, const ActionProfile<V>& profile) {
  if (auto err = check_feasible(net, profile))
    throw std::invalid_argument("infeasible action profile: " + err->message());
}

/// Participants when `removed` is silenced entirely: she neither counts nor
/// relays invitations.
template <typename V>
std::set<BuyerId> participants_without(const Network<V>& net,
                                       const ActionProfile<V>& profile,
                                       BuyerId removed) {
  std::set<BuyerId> reached;
  std::vector<BuyerId> frontier;
  for (BuyerId j : net.seller_neighbors()) {
    if (j != removed && reached.insert(j).second) frontier.push_back(j);
  }
  while (!frontier.empty()) {
    BuyerId b = frontier.back();
    frontier.pop_back();
    const Action<V>& act = profile.action(b);
    if (!act) continue;
    for (BuyerId j : act->invited) {
      if (j == removed || !net.has_buyer(j)) continue;
      if (reached.insert(j).second) frontier.push_back(j);
    }
  }
  return reached;
}

/// Highest valuation reported by anyone reachable without `removed`;
/// zero when nobody is (a lone gatekeeper faces no competition).
template <typename V>
V best_report_without(const Network<V>& net, const ActionProfile<V>& profile,
                      const std::map<BuyerId, V>& reports, BuyerId removed) {
  V best = ValueTraits<V>::zero();
  for (BuyerId j : participants_without(net, profile, removed)) {
    auto it = reports.find(j);
    if (it != reports.end() && best < it->second) best = it->second;
  }
  return best;
}

}  // namespace detail

template <typename V>
struct IdmResult {
  Outcome<V> outcome;
  std::optional<BuyerId> top_buyer;
  std::vector<BuyerId> chain;          // critical parents of the top buyer + her
  std::map<BuyerId, V> removal_price;  // p_i for every chain member
};

/// Single-item diffusion mechanism. The item count of the network is
/// ignored; one item is sold. An empty participant set is not an error:
/// nothing is sold and revenue is zero.
template <typename V>
IdmResult<V> run_idm_detailed(const Network<V>& net,
                              const ActionProfile<V>& profile) {
  detail::require_feasible(net, profile);
  IdmResult<V> result;
  Outcome<V>& outcome = result.outcome;
  outcome.revenue = ValueTraits<V>::zero();
  const std::map<BuyerId, V> reports = reported_valuations(profile);
  for (const auto& [id, type] : net.buyers()) {
    outcome.item_of[id] = 0;
    outcome.payment[id] = ValueTraits<V>::zero();
  }
  if (reports.empty()) {
    outcome.trace.push_back("no participants: nothing sold");
    return result;
  }

  std::vector<BuyerId> all;
  for (const auto& [id, v] : reports) all.push_back(id);
  const BuyerId top = detail::ranked(std::move(all), reports).front();
  result.top_buyer = top;

  const CriticalStructure cs = critical_structure(net, profile);
  result.chain = cs.parents_of(top);
  result.chain.push_back(top);
  for (BuyerId i : result.chain)
    result.removal_price.emplace(
        i, detail::best_report_without(net, profile, reports, i));

  {
    std::ostringstream os;
    os << "top buyer " << id_str(top) << "; chain";
    for (BuyerId i : result.chain)
      os << " " << id_str(i) << "(p=" << ValueTraits<V>::str(result.removal_price.at(i)) << ")";
    outcome.trace.push_back(os.str());
  }

  for (std::size_t l = 0;; ++l) {
    const BuyerId i = result.chain[l];
    const V& p_i = result.removal_price.at(i);
    const bool last = l + 1 == result.chain.size();
    if (!last) {
      const BuyerId next = result.chain[l + 1];
      const V& p_next = result.removal_price.at(next);
      if (!(reports.at(i) == p_next)) {
        outcome.payment[i] = p_i - p_next;
        outcome.trace.push_back("buyer " + id_str(i) + " passes to " + id_str(next) +
                                ", pays " + ValueTraits<V>::str(outcome.payment[i]));
        continue;
      }
    }
    outcome.item_of[i] = 1;
    outcome.payment[i] = p_i;
    outcome.trace.push_back("buyer " + id_str(i) + " keeps the item, pays " +
                            ValueTraits<V>::str(p_i));
    break;
  }
  for (const auto& [id, x] : outcome.payment) outcome.revenue += x;
  return result;
}

template <typename V>
Outcome<V> run_idm(const Network<V>& net, const ActionProfile<V>& profile) {
  return run_idm_detailed(net, profile).outcome;
}

/// Multi-item diffusion mechanism with explicit item count.
template <typename V>
GidmResult<V> run_gidm_detailed(const Network<V>& net,
                                const ActionProfile<V>& profile, int k,
                                const GidmOptions& options = {}) {
  detail::require_feasible(net, profile);
  if (k < 1) throw std::invalid_argument("item count must be >= 1");

  const std::map<BuyerId, V> reports = reported_valuations(profile);
  const CriticalStructure cs = critical_structure(net, profile);
  const Allocation<V> efficient =
      detail::constrained_welfare_impl(reports, WelfareProgram{{}, {}, k});
  const std::set<BuyerId>& n_opt = efficient.winners;

  GidmResult<V> result{Outcome<V>{},
                       PassState<V>{},
                       detail::build_allocation_tree_impl(cs, reports, n_opt),
                       n_opt,
                       reports,
                       k};
  Outcome<V>& outcome = result.outcome;
  PassState<V>& pass = result.pass;
  AllocationTree<V>& tree = result.tree;
  outcome.revenue = ValueTraits<V>::zero();
  for (const auto& [id, type] : net.buyers()) {
    outcome.item_of[id] = 0;
    outcome.payment[id] = ValueTraits<V>::zero();
  }
  if (options.constraints == ConstraintForm::kOriginal)
    outcome.trace.push_back("constraints: original (non-conforming)");

  // Resolves the push sequence for one parent, honouring overrides.
  const auto push_sequence = [&](BuyerId parent) {
    const std::vector<BuyerId>& children = tree.children_of(parent);
    auto it = options.push_order.find(parent);
    if (it == options.push_order.end()) return children;
    if (std::set<BuyerId>(it->second.begin(), it->second.end()) !=
        std::set<BuyerId>(children.begin(), children.end()))
      throw InternalInvariantError("push order override for " + id_str(parent) +
                                   " is not a permutation of her children");
    return it->second;
  };

  std::vector<BuyerId> stack;
  std::map<BuyerId, int> items_given;
  {
    std::ostringstream os;
    os << "seller hands:";
    for (BuyerId c : push_sequence(kSellerId)) {
      items_given[c] = tree.weight(c);
      stack.push_back(c);
      os << " " << tree.weight(c) << "->" << id_str(c);
    }
    if (stack.empty()) os << " (no items to hand)";
    outcome.trace.push_back(os.str());
  }

  // Builds the two constrained-welfare programs for a snapshot. The
  // corrected constraint form forces all undisturbed efficient winners to
  // keep their items; the superseded original form merely bans displaced
  // ones.
  const auto closure_program = [&](BuyerId i, const PopSnapshot<V>& snap) {
    WelfareProgram prog;
    prog.k = k;
    prog.excluded = snap.closure;
    prog.forced = snap.received;
    if (options.constraints == ConstraintForm::kCorrected) {
      for (BuyerId j : n_opt) {
        if (j != i && !snap.closure.count(j) && !snap.out.count(j))
          prog.forced.insert(j);
      }
    } else {
      for (BuyerId j : snap.out) {
        if (j != i) prog.excluded.insert(j);
      }
    }
    return prog;
  };
  const auto downset_program = [&](BuyerId i, const PopSnapshot<V>& snap) {
    WelfareProgram prog;
    prog.k = k;
    prog.excluded = snap.critical_children;
    prog.excluded.insert(i);
    prog.forced = snap.received;
    if (options.constraints == ConstraintForm::kCorrected) {
      for (BuyerId j : n_opt) {
        if (!prog.excluded.count(j) && !snap.out.count(j)) prog.forced.insert(j);
      }
    } else {
      for (BuyerId j : snap.out) prog.excluded.insert(j);
    }
    return prog;
  };

  int pops = 0;
  while (!stack.empty()) {
    const BuyerId i = stack.back();
    stack.pop_back();
    pass.pop_order.push_back(i);

    PopSnapshot<V>& snap = pass.snapshots[i];
    snap.order = pops++;
    snap.items_received = items_given.at(i);
    snap.critical_children = cs.children_of(i);
    snap.closure = detail::competitor_closure_impl(cs, reports, i, k);
    for (BuyerId p : cs.parents_of(i)) {
      if (pass.won(p)) snap.received.insert(p);
    }
    for (BuyerId p : snap.received) {
      const BuyerId source = pass.get_from.at(p);
      if (!snap.received.count(source)) snap.out.insert(source);
    }

    const Allocation<V> alloc =
        detail::constrained_welfare_impl(reports, closure_program(i, snap));
    snap.sw_minus_closure = alloc.welfare;
    snap.sw_closure_winners = alloc.winners;
    snap.won = alloc.winners.count(i) != 0;

    {
      std::ostringstream os;
      os << "pop " << id_str(i) << " (holds " << snap.items_received
         << "): received=" << detail::join_ids(snap.received)
         << " out=" << detail::join_ids(snap.out)
         << " closure=" << detail::join_ids(snap.closure)
         << " sw=" << ValueTraits<V>::str(snap.sw_minus_closure)
         << (snap.won ? " -> wins" : " -> passes");
      outcome.trace.push_back(os.str());
    }

    if (snap.won) {
      pass.winners.push_back(i);
      int children_weight = 0;
      for (BuyerId c : tree.children_of(i)) children_weight += tree.weight(c);
      if (children_weight == tree.weight(i) - 1) {
        // Her own efficient item is still in place; she keeps it.
        if (!n_opt.count(i) || pass.taken_out.count(i))
          throw InternalInvariantError("self-take by " + id_str(i) +
                                       " without an intact own item");
        pass.get_from[i] = i;
        pass.taken_out.insert(i);
        snap.get_from = i;
        outcome.trace.push_back("take " + id_str(i) + " <- self");
      } else {
        // She takes the lowest-ranked intact item in her subtree; exactly
        // the items handed to her remain intact down there.
        std::vector<BuyerId> candidates;
        for (BuyerId j : tree.subtree(i)) {
          if (n_opt.count(j) && !pass.taken_out.count(j)) candidates.push_back(j);
        }
        if (static_cast<int>(candidates.size()) != snap.items_received)
          throw InternalInvariantError(
              "intact items in the subtree of " + id_str(i) +
              " do not match the items handed to her");
        const BuyerId out = detail::ranked(std::move(candidates), reports).back();
        pass.get_from[i] = out;
        pass.taken_out.insert(out);
        snap.get_from = out;
        for (BuyerId j = out; j != i; j = tree.parent_of(j)) {
          if (j == kSellerId)
            throw InternalInvariantError("take path escaped the subtree of " +
                                         id_str(i));
          tree.decrement_weight(j);
        }
        outcome.trace.push_back("take " + id_str(i) + " <- " + id_str(out));
      }
    }

    for (BuyerId c : push_sequence(i)) {
      if (tree.weight(c) > 0) {
        items_given[c] = tree.weight(c);
        stack.push_back(c);
        snap.handed.emplace_back(c, tree.weight(c));
        outcome.trace.push_back("hand " + std::to_string(tree.weight(c)) +
                                " -> " + id_str(c));
      }
    }
  }

  if (static_cast<int>(pass.winners.size()) > k)
    throw InternalInvariantError("more winners than items");

  // Payment phase. Pop-time snapshots feed both welfare programs; the
  // down-set program is solved here since it is only needed for payments.
  std::set<BuyerId> winner_parents;
  for (BuyerId w : pass.winners) {
    for (BuyerId p : cs.parents_of(w)) {
      if (!pass.won(p)) winner_parents.insert(p);
    }
  }
  for (BuyerId i : pass.pop_order) {
    PopSnapshot<V>& snap = pass.snapshots.at(i);
    snap.sw_minus_d =
        detail::constrained_welfare_impl(reports, downset_program(i, snap)).welfare;
    if (snap.won) {
      outcome.item_of[i] = 1;
      outcome.payment[i] =
          *snap.sw_minus_d - (snap.sw_minus_closure - reports.at(i));
    } else if (winner_parents.count(i)) {
      outcome.payment[i] = *snap.sw_minus_d - snap.sw_minus_closure;
    }
  }
  for (BuyerId i : winner_parents) {
    if (!pass.snapshots.count(i))
      throw InternalInvariantError("critical parent " + id_str(i) +
                                   " of a winner was never popped");
  }
  for (const auto& [id, x] : outcome.payment) outcome.revenue += x;
  {
    std::ostringstream os;
    os << "winners:";
    for (BuyerId w : pass.winners)
      os << " " << id_str(w) << "(pays " << ValueTraits<V>::str(outcome.payment.at(w)) << ")";
    os << "; revenue " << ValueTraits<V>::str(outcome.revenue);
    outcome.trace.push_back(os.str());
  }
  return result;
}

template <typename V>
GidmResult<V> run_gidm_detailed(const Network<V>& net,
                                const ActionProfile<V>& profile) {
  return run_gidm_detailed(net, profile, net.item_count());
}

template <typename V>
Outcome<V> run_gidm(const Network<V>& net, const ActionProfile<V>& profile,
                    int k) {
  return run_gidm_detailed(net, profile, k).outcome;
}

template <typename V>
Outcome<V> run_gidm(const Network<V>& net, const ActionProfile<V>& profile) {
  return run_gidm_detailed(net, profile, net.item_count()).outcome;
}

/// (k+1)-price sale restricted to the seller's neighbours, on true types:
/// the top-k valuations win and each winner pays the (k+1)-th highest
/// valuation (zero when there are at most k neighbours).
template <typename V>
Outcome<V> run_vcg_local(const Network<V>& net, int k) {
  Outcome<V> outcome;
  outcome.revenue = ValueTraits<V>::zero();
  std::map<BuyerId, V> values;
  for (const auto& [id, type] : net.buyers()) {
    outcome.item_of[id] = 0;
    outcome.payment[id] = ValueTraits<V>::zero();
    if (net.seller_neighbors().count(id)) values.emplace(id, type.valuation);
  }
  std::vector<BuyerId> order;
  for (const auto& [id, v] : values) order.push_back(id);
  order = detail::ranked(std::move(order), values);

  const V price = static_cast<int>(order.size()) > k
                      ? values.at(order[static_cast<std::size_t>(k)])
                      : ValueTraits<V>::zero();
  const std::size_t winners =
      std::min(order.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < winners; ++i) {
    outcome.item_of[order[i]] = 1;
    outcome.payment[order[i]] = price;
    outcome.revenue += price;
  }
  outcome.trace.push_back("neighbours-only sale: " + std::to_string(winners) +
                          " item(s) at " + ValueTraits<V>::str(price));
  return outcome;
}

/// Per-buyer split of a multi-item payment into the two terms of its
/// telescoped form. `still` is the set of efficient winners whose items are
/// untouched from the buyer's point of view; both welfare programs count
/// those valuations, so subtracting them isolates what the buyer's subtree
/// actually competes over.
template <typename V>
struct DecompositionEntry {
  V first{};
  V second{};
  std::set<BuyerId> still;
  int items_received = 0;
};

template <typename V>
std::map<BuyerId, DecompositionEntry<V>> payment_decomposition(
    const GidmResult<V>& result) {
  std::map<BuyerId, DecompositionEntry<V>> table;
  for (const auto& [i, snap] : result.pass.snapshots) {
    DecompositionEntry<V> entry;
    entry.items_received = snap.items_received;
    for (BuyerId j : result.efficient_winners) {
      if (j == i || snap.critical_children.count(j) || snap.out.count(j)) continue;
      entry.still.insert(j);
    }
    for (BuyerId j : snap.received) entry.still.insert(j);
    V still_value = ValueTraits<V>::zero();
    for (BuyerId j : entry.still) still_value += result.reports.at(j);
    entry.first = *snap.sw_minus_d - still_value;
    entry.second = snap.sw_minus_closure - still_value;
    if (snap.won) entry.second -= result.reports.at(i);
    table.emplace(i, std::move(entry));
  }
  return table;
}

}  // namespace netauct
