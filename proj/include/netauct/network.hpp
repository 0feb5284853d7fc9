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

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netauct/value.hpp"

// Ground truth of a sale over a social network: the seller, the buyers with
// their private valuations and neighbour sets, and the buyers' (possibly
// strategic) actions. Everything here is immutable after construction and
// every operation is a pure function, so shared instances are safe to use
// from any number of threads.

namespace netauct {

using BuyerId = std::uint32_t;

/// Distinguished identity for the seller; never a valid buyer id.
inline constexpr BuyerId kSellerId = std::numeric_limits<BuyerId>::max();

inline std::string id_str(BuyerId id) {
  return id == kSellerId ? "s" : std::to_string(id);
}

/// A buyer's private type: her valuation for one item and who she can talk to.
/// The neighbour set may contain kSellerId when she is adjacent to the seller.
template <typename V>
struct BuyerType {
  V valuation{};
  std::set<BuyerId> neighbors;

  friend bool operator==(const BuyerType&, const BuyerType&) = default;
};

/// The ground-truth market: seller adjacency, buyer types and the number of
/// homogeneous items for sale. Construction validates the representation:
///  - seller neighbours are known buyers,
///  - buyer neighbour sets reference known buyers or the seller,
///  - the neighbour relation is symmetric (including the seller side),
///  - no buyer lists herself, valuations are non-negative, item count >= 1.
template <typename V>
class Network {
 public:
  Network(std::set<BuyerId> seller_neighbors,
          std::map<BuyerId, BuyerType<V>> buyers, int item_count)
      : seller_neighbors_(std::move(seller_neighbors)),
        buyers_(std::move(buyers)),
        item_count_(item_count) {
    validate();
  }

  const std::set<BuyerId>& seller_neighbors() const { return seller_neighbors_; }
  const std::map<BuyerId, BuyerType<V>>& buyers() const { return buyers_; }
  int item_count() const { return item_count_; }

  bool has_buyer(BuyerId id) const { return buyers_.count(id) != 0; }

  const BuyerType<V>& buyer(BuyerId id) const {
    auto it = buyers_.find(id);
    if (it == buyers_.end())
      throw std::out_of_range("unknown buyer " + id_str(id));
    return it->second;
  }

  Network with_item_count(int k) const {
    return Network(seller_neighbors_, buyers_, k);
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.seller_neighbors_ == b.seller_neighbors_ &&
           a.buyers_ == b.buyers_ && a.item_count_ == b.item_count_;
  }

 private:
  void validate() const {
    if (item_count_ < 1) throw std::invalid_argument("item count must be >= 1");
    for (BuyerId j : seller_neighbors_) {
      if (!has_buyer(j))
        throw std::invalid_argument("seller neighbour " + id_str(j) +
                                    " is not a buyer");
    }
    for (const auto& [id, type] : buyers_) {
      if (id == kSellerId)
        throw std::invalid_argument("buyer id collides with the seller id");
      if (type.valuation < ValueTraits<V>::zero())
        throw std::invalid_argument("buyer " + id_str(id) +
                                    " has a negative valuation");
      if (type.neighbors.count(id))
        throw std::invalid_argument("buyer " + id_str(id) + " lists herself");
      for (BuyerId j : type.neighbors) {
        if (j == kSellerId) {
          if (!seller_neighbors_.count(id))
            throw std::invalid_argument("buyer " + id_str(id) +
                                        " lists the seller asymmetrically");
        } else if (!has_buyer(j)) {
          throw std::invalid_argument("buyer " + id_str(id) +
                                      " lists unknown neighbour " + id_str(j));
        } else if (!buyers_.at(j).neighbors.count(id)) {
          throw std::invalid_argument("edge " + id_str(id) + "-" + id_str(j) +
                                      " is not symmetric");
        }
      }
    }
    for (BuyerId j : seller_neighbors_) {
      if (!buyers_.at(j).neighbors.count(kSellerId))
        throw std::invalid_argument("buyer " + id_str(j) +
                                    " misses the seller edge");
    }
  }

  std::set<BuyerId> seller_neighbors_;
  std::map<BuyerId, BuyerType<V>> buyers_;
  int item_count_;
};

/// Convenience builder that keeps the edge relation symmetric by
/// construction. Used by tests, the instance generator and file loading.
template <typename V>
class NetworkBuilder {
 public:
  NetworkBuilder& buyer(BuyerId id, V valuation) {
    buyers_[id].valuation = std::move(valuation);
    return *this;
  }
  NetworkBuilder& edge(BuyerId a, BuyerId b) {
    buyers_[a].neighbors.insert(b);
    buyers_[b].neighbors.insert(a);
    return *this;
  }
  NetworkBuilder& seller_edge(BuyerId a) {
    seller_neighbors_.insert(a);
    buyers_[a].neighbors.insert(kSellerId);
    return *this;
  }
  NetworkBuilder& items(int k) {
    item_count_ = k;
    return *this;
  }
  Network<V> build() const {
    return Network<V>(seller_neighbors_, buyers_, item_count_);
  }

 private:
  std::set<BuyerId> seller_neighbors_;
  std::map<BuyerId, BuyerType<V>> buyers_;
  int item_count_ = 1;
};

/// Non-nil action of a buyer who joined the sale: her valuation report and
/// the subset of her neighbours she actually invited. Invitations target
/// buyers; the seller needs none, so kSellerId never appears in an invited
/// set even when the buyer is adjacent to the seller.
template <typename V>
struct Report {
  V valuation{};
  std::set<BuyerId> invited;

  friend bool operator==(const Report&, const Report&) = default;
};

/// nil (never invited, or staying silent) is modelled as nullopt.
template <typename V>
using Action = std::optional<Report<V>>;

/// One action per buyer, total over the network's buyer set.
template <typename V>
struct ActionProfile {
  std::map<BuyerId, Action<V>> actions;

  const Action<V>& action(BuyerId id) const {
    auto it = actions.find(id);
    if (it == actions.end())
      throw std::out_of_range("profile misses buyer " + id_str(id));
    return it->second;
  }
  bool is_nil(BuyerId id) const { return !action(id).has_value(); }

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;
};

/// Buyers reachable from the seller through invitation chains: the fixed
/// point of expanding the seller's neighbour set through the invited sets of
/// non-nil buyers. Invitation edges are directed; nil buyers relay nothing.
template <typename V>
std::set<BuyerId> participants(const Network<V>& net,
                               const ActionProfile<V>& profile) {
  std::set<BuyerId> reached;
  std::vector<BuyerId> frontier;
  for (BuyerId j : net.seller_neighbors()) {
    if (reached.insert(j).second) frontier.push_back(j);
  }
  while (!frontier.empty()) {
    BuyerId b = frontier.back();
    frontier.pop_back();
    const Action<V>& act = profile.action(b);
    if (!act) continue;
    for (BuyerId j : act->invited) {
      if (!net.has_buyer(j)) continue;  // seller sentinel or garbage id
      if (reached.insert(j).second) frontier.push_back(j);
    }
  }
  return reached;
}

/// The profile where every buyer reachable under full invitations reports
/// her true type; buyers the diffusion cannot reach stay nil.
template <typename V>
ActionProfile<V> truthful_profile(const Network<V>& net) {
  // Reachability over the ground-truth graph (full invitations) first.
  std::set<BuyerId> reached;
  std::vector<BuyerId> frontier;
  for (BuyerId j : net.seller_neighbors()) {
    if (reached.insert(j).second) frontier.push_back(j);
  }
  while (!frontier.empty()) {
    BuyerId b = frontier.back();
    frontier.pop_back();
    for (BuyerId j : net.buyer(b).neighbors) {
      if (!net.has_buyer(j)) continue;
      if (reached.insert(j).second) frontier.push_back(j);
    }
  }
  ActionProfile<V> profile;
  for (const auto& [id, type] : net.buyers()) {
    if (reached.count(id)) {
      std::set<BuyerId> invited = type.neighbors;
      invited.erase(kSellerId);
      profile.actions[id] = Report<V>{type.valuation, std::move(invited)};
    } else {
      profile.actions[id] = std::nullopt;
    }
  }
  return profile;
}

struct FeasibilityError {
  enum class Kind { kNilButReachable, kReportButUnreachable, kInvitedNonNeighbor };

  Kind kind;
  BuyerId buyer;
  std::optional<BuyerId> invited;

  std::string message() const {
    switch (kind) {
      case Kind::kNilButReachable:
        return "buyer " + id_str(buyer) + " is reachable but nil";
      case Kind::kReportButUnreachable:
        return "buyer " + id_str(buyer) + " reports but is unreachable";
      case Kind::kInvitedNonNeighbor:
        return "buyer " + id_str(buyer) + " invited non-neighbour " +
               id_str(*invited);
    }
    return "unknown feasibility error";
  }
};

/// Validates the two feasibility clauses: a buyer acts exactly when an
/// invitation chain reaches her, and invitations only go to true neighbours.
/// Returns nullopt when the profile is feasible; otherwise the first
/// violation in ascending buyer order.
template <typename V>
std::optional<FeasibilityError> check_feasible(const Network<V>& net,
                                               const ActionProfile<V>& profile) {
  const std::set<BuyerId> reached = participants(net, profile);
  for (const auto& [id, type] : net.buyers()) {
    const Action<V>& act = profile.action(id);
    if (!act) {
      if (reached.count(id))
        return FeasibilityError{FeasibilityError::Kind::kNilButReachable, id, {}};
      continue;
    }
    if (!reached.count(id))
      return FeasibilityError{FeasibilityError::Kind::kReportButUnreachable, id, {}};
    for (BuyerId j : act->invited) {
      if (!type.neighbors.count(j))
        return FeasibilityError{FeasibilityError::Kind::kInvitedNonNeighbor, id, j};
    }
  }
  return std::nullopt;
}

/// Reported valuations of all participants, keyed by buyer.
template <typename V>
std::map<BuyerId, V> reported_valuations(const ActionProfile<V>& profile) {
  std::map<BuyerId, V> values;
  for (const auto& [id, act] : profile.actions) {
    if (act) values.emplace(id, act->valuation);
  }
  return values;
}

}  // namespace netauct
