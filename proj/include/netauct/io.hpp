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

#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netauct/mechanisms.hpp"
#include "netauct/network.hpp"
#include "netauct/verify.hpp"

// File formats. Network files are schema-versioned JSON with valuations as
// decimal strings (so the exact value mode loses nothing). All emitted
// output is deterministic: ascending ids, no timestamps.

namespace netauct {

inline constexpr const char* kNetworkSchema = "netauct/1";

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

template <typename V>
struct LoadedNetwork {
  Network<V> network;
  std::optional<ActionProfile<V>> profile;  // set when the file carries actions
};

namespace detail {

using json = nlohmann::json;

inline const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

inline BuyerId parse_id(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() >= kSellerId)
    throw ParseError(where + ": not a valid buyer id");
  return static_cast<BuyerId>(j.get<std::uint64_t>());
}

template <typename V>
V parse_value(const json& j, const std::string& where) {
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_number_integer()) {
    text = std::to_string(j.get<std::int64_t>());
  } else {
    throw ParseError(where + ": valuation must be a decimal string");
  }
  const std::optional<V> v = ValueTraits<V>::parse(text);
  if (!v) throw ParseError(where + ": malformed decimal value '" + text + "'");
  return *v;
}

template <typename V>
Report<V> parse_action_report(const json& j, const std::string& where) {
  Report<V> report;
  report.valuation = parse_value<V>(field(j, "valuation", where), where + ".valuation");
  for (std::size_t n = 0; n < field(j, "invited", where).size(); ++n) {
    report.invited.insert(parse_id(j.at("invited").at(n),
                                   where + ".invited[" + std::to_string(n) + "]"));
  }
  return report;
}

}  // namespace detail

/// Parses a network file. Actions, when present, may cover any subset of
/// the buyers; unlisted buyers default to acting truthfully whenever an
/// invitation chain still reaches them (computed as a fixed point, since
/// listed deviations can cut buyers off).
template <typename V>
LoadedNetwork<V> parse_network_file(const std::string& text) {
  using detail::field;
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("top level: expected an object");
  const json& schema = field(root, "schema", "top level");
  if (!schema.is_string() || schema.get<std::string>() != kNetworkSchema)
    throw ParseError("top level: unsupported schema (want '" +
                     std::string(kNetworkSchema) + "')");
  const json& items = field(root, "items", "top level");
  if (!items.is_number_integer() || items.get<std::int64_t>() < 1)
    throw ParseError("items: must be a positive integer");

  NetworkBuilder<V> builder;
  builder.items(static_cast<int>(items.get<std::int64_t>()));
  std::set<BuyerId> ids;
  const json& buyers = field(root, "buyers", "top level");
  if (!buyers.is_array()) throw ParseError("buyers: expected an array");
  for (std::size_t n = 0; n < buyers.size(); ++n) {
    const std::string where = "buyers[" + std::to_string(n) + "]";
    const json& b = buyers.at(n);
    const BuyerId id = detail::parse_id(field(b, "id", where), where + ".id");
    if (!ids.insert(id).second) throw ParseError(where + ": duplicate buyer id");
    builder.buyer(id, detail::parse_value<V>(field(b, "valuation", where),
                                             where + ".valuation"));
    for (std::size_t e = 0; e < field(b, "neighbors", where).size(); ++e) {
      const BuyerId other = detail::parse_id(
          b.at("neighbors").at(e), where + ".neighbors[" + std::to_string(e) + "]");
      builder.edge(id, other);
    }
  }
  const json& seller = field(root, "seller_neighbors", "top level");
  if (!seller.is_array()) throw ParseError("seller_neighbors: expected an array");
  for (std::size_t n = 0; n < seller.size(); ++n) {
    builder.seller_edge(detail::parse_id(
        seller.at(n), "seller_neighbors[" + std::to_string(n) + "]"));
  }

  LoadedNetwork<V> loaded{[&] {
                            try {
                              return builder.build();
                            } catch (const std::invalid_argument& e) {
                              throw ParseError(std::string("network: ") + e.what());
                            }
                          }(),
                          std::nullopt};

  if (root.contains("actions")) {
    const json& actions = root.at("actions");
    if (!actions.is_array()) throw ParseError("actions: expected an array");
    std::map<BuyerId, Action<V>> listed;
    for (std::size_t n = 0; n < actions.size(); ++n) {
      const std::string where = "actions[" + std::to_string(n) + "]";
      const json& a = actions.at(n);
      const BuyerId id = detail::parse_id(field(a, "id", where), where + ".id");
      if (!loaded.network.has_buyer(id))
        throw ParseError(where + ": unknown buyer");
      if (listed.count(id)) throw ParseError(where + ": duplicate action");
      if (a.contains("nil") && a.at("nil").is_boolean() && a.at("nil").get<bool>())
        listed.emplace(id, std::nullopt);
      else
        listed.emplace(id, detail::parse_action_report<V>(a, where));
    }
    // Fixed point: unlisted buyers act truthfully iff reachable.
    const ActionProfile<V> truthful = truthful_profile(loaded.network);
    ActionProfile<V> profile = truthful;
    for (const auto& [id, act] : listed) profile.actions.at(id) = act;
    for (;;) {
      const std::set<BuyerId> reached = participants(loaded.network, profile);
      bool changed = false;
      for (auto& [id, act] : profile.actions) {
        if (listed.count(id)) continue;
        const Action<V>& want =
            reached.count(id) ? truthful.actions.at(id) : Action<V>{};
        if (act != want) {
          act = want;
          changed = true;
        }
      }
      if (!changed) break;
    }
    loaded.profile = std::move(profile);
  }
  return loaded;
}

/// Parses a standalone actions file ({"schema": ..., "actions": [...]})
/// against an already-loaded network, with the same defaulting rule as an
/// embedded actions array.
template <typename V>
ActionProfile<V> parse_actions_file(const std::string& text,
                                    const Network<V>& net) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("actions"))
    throw ParseError("top level: expected an object with an 'actions' array");
  json wrapper = json::parse(serialize_network(net));
  wrapper["actions"] = root.at("actions");
  LoadedNetwork<V> loaded = parse_network_file<V>(wrapper.dump());
  return *loaded.profile;
}

/// Canonical serialization; parse(serialize(net)) reproduces the network
/// (and profile) exactly.
template <typename V>
std::string serialize_network(const Network<V>& net,
                              const ActionProfile<V>* profile = nullptr) {
  detail::json root;
  root["schema"] = kNetworkSchema;
  root["items"] = net.item_count();
  root["seller_neighbors"] = detail::json::array();
  for (BuyerId j : net.seller_neighbors()) root["seller_neighbors"].push_back(j);
  root["buyers"] = detail::json::array();
  for (const auto& [id, type] : net.buyers()) {
    detail::json b;
    b["id"] = id;
    b["valuation"] = ValueTraits<V>::str(type.valuation);
    b["neighbors"] = detail::json::array();
    for (BuyerId n : type.neighbors) {
      if (n != kSellerId) b["neighbors"].push_back(n);
    }
    root["buyers"].push_back(std::move(b));
  }
  if (profile) {
    root["actions"] = detail::json::array();
    for (const auto& [id, act] : profile->actions) {
      detail::json a;
      a["id"] = id;
      if (act) {
        a["valuation"] = ValueTraits<V>::str(act->valuation);
        a["invited"] = detail::json::array();
        for (BuyerId j : act->invited) a["invited"].push_back(j);
      } else {
        a["nil"] = true;
      }
      root["actions"].push_back(std::move(a));
    }
  }
  return root.dump(2) + "\n";
}

/// FNV-1a digest of the raw input bytes; identifies inputs in reports.
inline std::string input_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << "fnv1a:" << std::hex << std::setfill('0') << std::setw(16) << h;
  return os.str();
}

template <typename V>
struct ReportContext {
  std::string mechanism;
  int items = 1;
  std::string digest;
  bool include_trace = false;
};

namespace detail {

template <typename V>
V report_welfare(const Network<V>& net, const ActionProfile<V>* profile,
                 const Outcome<V>& outcome) {
  V welfare = ValueTraits<V>::zero();
  for (const auto& [id, item] : outcome.item_of) {
    if (!item) continue;
    if (profile && profile->action(id))
      welfare += profile->action(id)->valuation;
    else
      welfare += net.buyer(id).valuation;
  }
  return welfare;
}

}  // namespace detail

/// Human-readable outcome report: one row per buyer (ascending id), then
/// revenue and welfare. The utility column is the buyer's truthful-type
/// utility under the realized outcome.
template <typename V>
std::string outcome_report_text(const Network<V>& net,
                                const ActionProfile<V>* profile,
                                const Outcome<V>& outcome,
                                const ReportContext<V>& ctx) {
  std::ostringstream os;
  os << "mechanism: " << ctx.mechanism << "\n";
  os << "items: " << ctx.items << "\n";
  os << "input: " << ctx.digest << "\n";
  os << std::left << std::setw(8) << "buyer" << std::setw(6) << "item"
     << std::setw(12) << "payment" << "utility\n";
  for (const auto& [id, type] : net.buyers()) {
    const V u = utility(net, id, outcome);
    os << std::left << std::setw(8) << id << std::setw(6) << outcome.item(id)
       << std::setw(12) << ValueTraits<V>::str(outcome.pay(id))
       << ValueTraits<V>::str(u) << "\n";
  }
  os << "revenue: " << ValueTraits<V>::str(outcome.revenue) << "\n";
  os << "welfare: "
     << ValueTraits<V>::str(detail::report_welfare(net, profile, outcome)) << "\n";
  if (ctx.include_trace) {
    for (const std::string& line : outcome.trace) os << "trace: " << line << "\n";
  }
  return os.str();
}

template <typename V>
std::string outcome_report_json(const Network<V>& net,
                                const ActionProfile<V>* profile,
                                const Outcome<V>& outcome,
                                const ReportContext<V>& ctx) {
  detail::json root;
  root["schema"] = "netauct-report/1";
  root["mechanism"] = ctx.mechanism;
  root["items"] = ctx.items;
  root["input"] = ctx.digest;
  root["buyers"] = detail::json::array();
  for (const auto& [id, type] : net.buyers()) {
    detail::json row;
    row["id"] = id;
    row["item"] = outcome.item(id);
    row["payment"] = ValueTraits<V>::str(outcome.pay(id));
    row["utility"] = ValueTraits<V>::str(utility(net, id, outcome));
    root["buyers"].push_back(std::move(row));
  }
  root["revenue"] = ValueTraits<V>::str(outcome.revenue);
  root["welfare"] =
      ValueTraits<V>::str(detail::report_welfare(net, profile, outcome));
  if (ctx.include_trace) root["trace"] = outcome.trace;
  return root.dump(2) + "\n";
}

/// Allocation tree in DOT dialect. Node labels are "id/value/weight" with
/// the weight as initially constructed.
template <typename V>
std::string dot_export(const AllocationTree<V>& tree) {
  std::ostringstream os;
  os << "digraph allocation_tree {\n";
  os << "  s [shape=box, label=\"s\"];\n";
  for (BuyerId id : tree.node_ids()) {
    os << "  n" << id << " [label=\"" << id << "/"
       << ValueTraits<V>::str(tree.value_of(id)) << "/"
       << tree.initial_weight(id) << "\"];\n";
  }
  for (BuyerId id : tree.node_ids()) {
    const BuyerId p = tree.parent_of(id);
    os << "  " << (p == kSellerId ? std::string("s") : "n" + std::to_string(p))
       << " -> n" << id << ";\n";
  }
  os << "}\n";
  return os.str();
}

/// Campaign report serialization. Violations embed the witnessing instance
/// as a full network file object so they can be replayed with `run`.
template <typename V>
std::string deviation_report_json(const std::string& campaign,
                                  const DeviationReport<V>& report) {
  detail::json root;
  root["schema"] = "netauct-campaign/1";
  root["campaign"] = campaign;
  root["checked_instances"] = report.checked_instances;
  root["checked_deviations"] = report.checked_deviations;
  root["max_gain"] = ValueTraits<V>::str(report.max_gain);
  root["violations"] = detail::json::array();
  for (const DeviationRecord<V>& rec : report.violations) {
    detail::json v;
    v["instance_index"] = rec.instance_index;
    v["instance_seed"] = rec.instance_seed;
    v["items"] = rec.item_count;
    v["buyer"] = rec.buyer;
    v["report"] = ValueTraits<V>::str(rec.action.valuation);
    v["invited"] = detail::json::array();
    for (BuyerId j : rec.action.invited) v["invited"].push_back(j);
    v["truthful_utility"] = ValueTraits<V>::str(rec.truthful_utility);
    v["deviant_utility"] = ValueTraits<V>::str(rec.deviant_utility);
    if (rec.instance)
      v["instance"] =
          detail::json::parse(serialize_network<V>(*rec.instance, nullptr));
    root["violations"].push_back(std::move(v));
  }
  return root.dump(2) + "\n";
}

inline std::string mismatch_report_json(const std::string& campaign,
                                        const MismatchCampaignResult& result,
                                        std::uint64_t extra_runs = 0,
                                        bool informational = false) {
  detail::json root;
  root["schema"] = "netauct-campaign/1";
  root["campaign"] = campaign;
  root["checked_instances"] = result.trials;
  if (extra_runs) root["runs"] = extra_runs;
  root["informational"] = informational;
  root["failures"] = result.failures;
  return root.dump(2) + "\n";
}

}  // namespace netauct
