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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "netauct/mechanisms.hpp"
#include "netauct/network.hpp"

// Brute-force verification of the mechanism properties on seeded random
// instances: incentive compatibility (no unilateral deviation gains),
// individual rationality, the revenue lower bound, budget balance, the
// single-item reduction and the payment decomposition identities. Every
// campaign is deterministic given (config, seed); instances are independent
// and distributed across worker threads, with results aggregated in
// instance order so reports are byte-identical across reruns.

namespace netauct {

/// Deterministic RNG with fully pinned sampling (no standard-library
/// distributions, whose outputs are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, n), bias-free by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  bool chance(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return below(1'000'000'000) <
           static_cast<std::uint64_t>(p * 1'000'000'000.0 + 0.5);
  }

 private:
  std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <typename V>
struct InstanceGenConfig {
  int buyer_count = 1;
  double edge_probability = 0.5;
  std::vector<V> valuation_domain;  // non-empty, strictly ascending, >= 0
  int item_count = 1;
  std::uint64_t seed = 0;
};

/// Seeded Erdős–Rényi-style instance over the seller plus `buyer_count`
/// buyers (ids 1..n): every node pair is an edge with the configured
/// probability and valuations are drawn uniformly from the domain. At least
/// one buyer is attached to the seller (a detached seller makes the
/// instance vacuous), drawn uniformly when the coin flips produced none.
template <typename V>
Network<V> gen_instance(const InstanceGenConfig<V>& cfg) {
  if (cfg.buyer_count < 1) throw std::invalid_argument("buyer_count must be >= 1");
  if (cfg.valuation_domain.empty())
    throw std::invalid_argument("valuation domain must be non-empty");
  for (std::size_t i = 0; i + 1 < cfg.valuation_domain.size(); ++i) {
    if (!(cfg.valuation_domain[i] < cfg.valuation_domain[i + 1]))
      throw std::invalid_argument("valuation domain must be strictly ascending");
  }
  if (cfg.valuation_domain.front() < ValueTraits<V>::zero())
    throw std::invalid_argument("valuation domain must be non-negative");
  if (cfg.edge_probability < 0.0 || cfg.edge_probability > 1.0)
    throw std::invalid_argument("edge probability out of range");

  Rng rng(cfg.seed);
  NetworkBuilder<V> builder;
  builder.items(cfg.item_count);
  const auto n = static_cast<BuyerId>(cfg.buyer_count);
  bool seller_attached = false;
  for (BuyerId b = 1; b <= n; ++b) {
    if (rng.chance(cfg.edge_probability)) {
      builder.seller_edge(b);
      seller_attached = true;
    }
  }
  for (BuyerId a = 1; a <= n; ++a) {
    for (BuyerId b = a + 1; b <= n; ++b) {
      if (rng.chance(cfg.edge_probability)) builder.edge(a, b);
    }
  }
  for (BuyerId b = 1; b <= n; ++b) {
    builder.buyer(b, cfg.valuation_domain[rng.below(cfg.valuation_domain.size())]);
  }
  if (!seller_attached) builder.seller_edge(1 + static_cast<BuyerId>(rng.below(n)));
  return builder.build();
}

/// The misreports worth checking for one buyer. A buyer's outcome as a
/// function of her report is a step function whose breakpoints are the other
/// buyers' reports (the constancy guard below validates this), so domain
/// values, everyone's reports, midpoints between adjacent reports and the
/// two extremes cover all behaviours.
template <typename V>
std::vector<V> misreport_candidates(const Network<V>& net,
                                    const std::vector<V>& valuation_domain,
                                    BuyerId buyer) {
  std::set<V> candidates(valuation_domain.begin(), valuation_domain.end());
  std::set<V> others;
  for (const auto& [id, type] : net.buyers()) {
    if (id != buyer) others.insert(type.valuation);
  }
  candidates.insert(others.begin(), others.end());
  candidates.insert(net.buyer(buyer).valuation);
  for (auto it = others.begin(); it != others.end();) {
    const V& low = *it;
    if (++it == others.end()) break;
    candidates.insert(low + ValueTraits<V>::half(*it - low));
  }
  candidates.insert(ValueTraits<V>::zero());
  candidates.insert(*candidates.rbegin() + ValueTraits<V>::from_int(1));
  return std::vector<V>(candidates.begin(), candidates.end());
}

/// All unilateral deviations of one buyer: misreport candidates crossed with
/// every subset of her true buyer-neighbour set. Full silence is not listed
/// separately; reporting zero and inviting nobody covers it.
template <typename V>
std::vector<Report<V>> enumerate_deviations(const Network<V>& net,
                                            const std::vector<V>& valuation_domain,
                                            BuyerId buyer) {
  const std::vector<V> candidates =
      misreport_candidates(net, valuation_domain, buyer);
  std::vector<BuyerId> neighbors;
  for (BuyerId j : net.buyer(buyer).neighbors) {
    if (j != kSellerId) neighbors.push_back(j);
  }
  std::vector<Report<V>> deviations;
  deviations.reserve(candidates.size() << neighbors.size());
  for (const V& value : candidates) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << neighbors.size());
         ++mask) {
      Report<V> r{value, {}};
      for (std::size_t b = 0; b < neighbors.size(); ++b) {
        if ((mask >> b) & 1) r.invited.insert(neighbors[b]);
      }
      deviations.push_back(std::move(r));
    }
  }
  return deviations;
}

/// The feasible profile that results when `buyer` unilaterally deviates from
/// the truthful profile: everyone else keeps her truthful action as long as
/// an invitation chain still reaches her, and falls silent otherwise.
template <typename V>
ActionProfile<V> deviant_profile(const Network<V>& net,
                                 const ActionProfile<V>& truthful, BuyerId buyer,
                                 const Report<V>& deviation) {
  ActionProfile<V> candidate = truthful;
  candidate.actions.at(buyer) = deviation;
  const std::set<BuyerId> reached = participants(net, candidate);
  ActionProfile<V> result;
  for (const auto& [id, act] : candidate.actions) {
    result.actions[id] = reached.count(id) ? act : Action<V>{};
  }
  return result;
}

template <typename V>
V utility(const Network<V>& net, BuyerId buyer, const Outcome<V>& outcome) {
  V u = ValueTraits<V>::zero();
  if (outcome.item(buyer)) u += net.buyer(buyer).valuation;
  return u - outcome.pay(buyer);
}

/// One violation found by a deviation scan, with everything needed to
/// replay it.
template <typename V>
struct DeviationRecord {
  std::uint64_t instance_index = 0;
  std::uint64_t instance_seed = 0;
  int item_count = 1;
  BuyerId buyer = 0;
  Report<V> action;
  V truthful_utility{};
  V deviant_utility{};
  std::optional<Network<V>> instance;
};

template <typename V>
struct DeviationReport {
  std::uint64_t checked_instances = 0;
  std::uint64_t checked_deviations = 0;
  std::vector<DeviationRecord<V>> violations;
  V max_gain = ValueTraits<V>::zero();  // stays zero without violations

  void note_gain(const V& gain) {
    if (max_gain < gain) max_gain = gain;
  }
};

/// Consistency checks on one multi-item run: the still-set size identity,
/// payment = first - second for everyone the payment rule covers, the
/// child-offset inequality at internal tree nodes, and the revenue
/// telescoping with a non-negative remainder. Returns human-readable
/// violations (empty on a healthy run) plus the remainder.
template <typename V>
struct DecompositionCheck {
  std::vector<std::string> violations;
  V delta{};
};

template <typename V>
DecompositionCheck<V> check_payment_decomposition(const GidmResult<V>& result) {
  DecompositionCheck<V> check;
  const auto table = payment_decomposition(result);
  const PassState<V>& pass = result.pass;

  // Winners and critical parents of winners: the buyers the payment rule
  // covers. A winner's critical parents are exactly its tree ancestors.
  std::set<BuyerId> covered;
  for (BuyerId w : pass.winners) {
    covered.insert(w);
    for (BuyerId p = result.tree.parent_of(w); p != kSellerId;
         p = result.tree.parent_of(p)) {
      covered.insert(p);
    }
  }

  for (const auto& [i, entry] : table) {
    const PopSnapshot<V>& snap = pass.snapshots.at(i);
    if (static_cast<int>(entry.still.size()) !=
        result.item_count - entry.items_received) {
      check.violations.push_back("still-set of " + id_str(i) +
                                 " has the wrong size");
    }
    if (covered.count(i)) {
      if (!ValueTraits<V>::equal(entry.first - entry.second,
                                 result.outcome.pay(i)))
        check.violations.push_back("payment of " + id_str(i) +
                                   " does not match its decomposition");
    }
    if (snap.won && entry.items_received == 1 &&
        !ValueTraits<V>::equal(entry.second, ValueTraits<V>::zero())) {
      check.violations.push_back("second term of single-item winner " +
                                 id_str(i) + " is not zero");
    }
    if (covered.count(i) && !snap.handed.empty()) {
      int handed_total = 0;
      V first_sum = ValueTraits<V>::zero();
      for (const auto& [child, count] : snap.handed) {
        handed_total += count;
        first_sum += table.at(child).first;
      }
      if (handed_total != entry.items_received - (snap.won ? 1 : 0))
        check.violations.push_back("items handed by " + id_str(i) +
                                   " do not account for her stock");
      if (first_sum < entry.second &&
          !ValueTraits<V>::equal(first_sum, entry.second))
        check.violations.push_back("child offsets at " + id_str(i) +
                                   " fall short of her second term");
    }
  }

  V first_sum = ValueTraits<V>::zero();
  for (BuyerId c : result.tree.children_of(kSellerId))
    first_sum += table.at(c).first;
  check.delta = result.outcome.revenue - first_sum;
  if (check.delta < ValueTraits<V>::zero() &&
      !ValueTraits<V>::equal(check.delta, ValueTraits<V>::zero()))
    check.violations.push_back("telescoped revenue remainder is negative");
  return check;
}

/// Exhaustive unilateral-deviation scan of one instance: incentive
/// violations (any deviation strictly beating the truthful utility) and
/// rationality violations (any truthful-valuation deviation with negative
/// utility). Every run is also passed through the decomposition checks.
template <typename V>
struct ScanResult {
  std::uint64_t deviations = 0;
  std::vector<DeviationRecord<V>> ic_violations;
  std::vector<DeviationRecord<V>> ir_violations;
  std::vector<std::string> decomposition_violations;
};

template <typename V>
ScanResult<V> scan_deviations(const Network<V>& net,
                              const std::vector<V>& valuation_domain, int k,
                              ConstraintForm constraints = ConstraintForm::kCorrected) {
  ScanResult<V> result;
  GidmOptions options;
  options.constraints = constraints;
  const ActionProfile<V> truthful = truthful_profile(net);
  const GidmResult<V> base = run_gidm_detailed(net, truthful, k, options);
  for (std::string& v : check_payment_decomposition(base).violations)
    result.decomposition_violations.push_back(std::move(v));

  for (const auto& [buyer, act] : truthful.actions) {
    if (!act) continue;
    const V truthful_u = utility(net, buyer, base.outcome);
    for (const Report<V>& deviation :
         enumerate_deviations(net, valuation_domain, buyer)) {
      ++result.deviations;
      const ActionProfile<V> profile =
          deviant_profile(net, truthful, buyer, deviation);
      if (check_feasible(net, profile))
        throw InternalInvariantError("deviant profile construction is infeasible");
      const GidmResult<V> run = run_gidm_detailed(net, profile, k, options);
      for (std::string& v : check_payment_decomposition(run).violations)
        result.decomposition_violations.push_back(std::move(v));
      const V deviant_u = utility(net, buyer, run.outcome);
      if (ValueTraits<V>::gain_exceeds_tolerance(deviant_u - truthful_u)) {
        result.ic_violations.push_back(DeviationRecord<V>{
            0, 0, k, buyer, deviation, truthful_u, deviant_u, std::nullopt});
      }
      if (deviation.valuation == net.buyer(buyer).valuation &&
          ValueTraits<V>::gain_exceeds_tolerance(ValueTraits<V>::zero() - deviant_u)) {
        result.ir_violations.push_back(DeviationRecord<V>{
            0, 0, k, buyer, deviation, truthful_u, deviant_u, std::nullopt});
      }
    }
  }
  return result;
}

/// Incentive-compatibility check of one instance (Theorem-style property:
/// truthful reporting plus full invitation dominates all deviations).
template <typename V>
DeviationReport<V> check_ic(const Network<V>& net,
                            const std::vector<V>& valuation_domain, int k) {
  ScanResult<V> scan = scan_deviations(net, valuation_domain, k);
  DeviationReport<V> report;
  report.checked_instances = 1;
  report.checked_deviations = scan.deviations;
  for (DeviationRecord<V>& rec : scan.ic_violations) {
    report.note_gain(rec.deviant_utility - rec.truthful_utility);
    report.violations.push_back(std::move(rec));
  }
  return report;
}

/// Individual-rationality check of one instance: truthful-valuation
/// deviations never give negative utility.
template <typename V>
DeviationReport<V> check_ir(const Network<V>& net,
                            const std::vector<V>& valuation_domain, int k) {
  ScanResult<V> scan = scan_deviations(net, valuation_domain, k);
  DeviationReport<V> report;
  report.checked_instances = 1;
  report.checked_deviations = scan.deviations;
  for (DeviationRecord<V>& rec : scan.ir_violations) {
    report.note_gain(ValueTraits<V>::zero() - rec.deviant_utility);
    report.violations.push_back(std::move(rec));
  }
  return report;
}

template <typename V>
struct RevenueBoundCheck {
  V revenue{};
  V bound{};
  V vcg_revenue{};
  bool pass = false;
};

/// Revenue lower bound on the truthful profile: the multi-item revenue is at
/// least k times the (k+1)-th highest valuation among the seller's
/// neighbours (zero bound when she has at most k), and at least the
/// neighbours-only revenue; weak budget balance either way.
template <typename V>
RevenueBoundCheck<V> check_revenue_bound(const Network<V>& net, int k) {
  RevenueBoundCheck<V> check;
  const Outcome<V> gidm = run_gidm(net, truthful_profile(net), k);
  const Outcome<V> vcg = run_vcg_local(net, k);
  check.revenue = gidm.revenue;
  check.vcg_revenue = vcg.revenue;
  check.bound = ValueTraits<V>::zero();
  if (static_cast<int>(net.seller_neighbors().size()) > k) {
    std::map<BuyerId, V> values;
    for (BuyerId j : net.seller_neighbors()) values.emplace(j, net.buyer(j).valuation);
    std::vector<BuyerId> order;
    for (const auto& [id, v] : values) order.push_back(id);
    order = detail::ranked(std::move(order), values);
    const V& price = values.at(order[static_cast<std::size_t>(k)]);
    for (int i = 0; i < k; ++i) check.bound += price;
  }
  check.pass = !(check.revenue < check.bound) &&
               !(check.revenue < check.vcg_revenue) &&
               !(check.revenue < ValueTraits<V>::zero());
  return check;
}

/// With one item for sale the multi-item mechanism and the single-item
/// mechanism must produce identical outcomes.
template <typename V>
bool check_idm_equivalence(const Network<V>& net) {
  const ActionProfile<V> truthful = truthful_profile(net);
  const Outcome<V> idm = run_idm(net, truthful);
  const Outcome<V> gidm = run_gidm(net, truthful, 1);
  return idm.item_of == gidm.item_of && idm.payment == gidm.payment &&
         ValueTraits<V>::equal(idm.revenue, gidm.revenue);
}

/// The profile where every seller neighbour joins truthfully but nobody
/// invites anyone: diffusion never starts.
template <typename V>
ActionProfile<V> no_diffusion_profile(const Network<V>& net) {
  ActionProfile<V> profile;
  for (const auto& [id, type] : net.buyers()) {
    if (net.seller_neighbors().count(id))
      profile.actions[id] = Report<V>{type.valuation, {}};
    else
      profile.actions[id] = std::nullopt;
  }
  return profile;
}

/// Without diffusion the multi-item mechanism collapses to the
/// neighbours-only (k+1)-price sale.
template <typename V>
bool check_no_diffusion_reduction(const Network<V>& net, int k) {
  const Outcome<V> gidm = run_gidm(net, no_diffusion_profile(net), k);
  const Outcome<V> vcg = run_vcg_local(net, k);
  return gidm.item_of == vcg.item_of && gidm.payment == vcg.payment &&
         ValueTraits<V>::equal(gidm.revenue, vcg.revenue);
}

/// Validates the breakpoint assumption behind the misreport candidates: a
/// buyer's report only changes the outcome when it crosses another buyer's
/// report. Samples three interior points of every gap between adjacent
/// breakpoints and requires identical outcomes.
template <typename V>
bool check_breakpoint_constancy(const Network<V>& net, int k) {
  const ActionProfile<V> truthful = truthful_profile(net);
  for (const auto& [buyer, act] : truthful.actions) {
    if (!act) continue;
    std::set<V> breakpoints;
    for (const auto& [id, type] : net.buyers()) {
      if (id != buyer) breakpoints.insert(type.valuation);
    }
    if (breakpoints.empty()) continue;  // lone buyer, nothing to cross
    std::vector<V> sorted(breakpoints.begin(), breakpoints.end());
    sorted.push_back(sorted.back() + ValueTraits<V>::from_int(2));
    for (std::size_t g = 0; g + 1 < sorted.size(); ++g) {
      const V width = sorted[g + 1] - sorted[g];
      const V quarter = ValueTraits<V>::half(ValueTraits<V>::half(width));
      std::optional<Outcome<V>> reference;
      for (int step = 1; step <= 3; ++step) {
        V report = sorted[g];
        for (int q = 0; q < step; ++q) report += quarter;
        Report<V> deviation{report, act->invited};
        const ActionProfile<V> profile =
            deviant_profile(net, truthful, buyer, deviation);
        Outcome<V> outcome = run_gidm(net, profile, k);
        outcome.trace.clear();
        if (!reference) {
          reference = std::move(outcome);
        } else if (!(reference->item_of == outcome.item_of &&
                     reference->payment == outcome.payment)) {
          return false;
        }
      }
    }
  }
  return true;
}

/// Runs the multi-item pass under every combination of sibling push orders
/// (capped) and reports outcome divergences. Divergences are informational:
/// the push order is a documented implementation choice, not a property.
struct OrderSensitivityReport {
  std::uint64_t runs = 0;
  std::vector<std::string> divergences;
};

template <typename V>
OrderSensitivityReport order_sensitivity(const Network<V>& net, int k,
                                         std::uint64_t max_runs = 200) {
  OrderSensitivityReport report;
  const ActionProfile<V> truthful = truthful_profile(net);
  const GidmResult<V> base = run_gidm_detailed(net, truthful, k);
  report.runs = 1;

  std::vector<BuyerId> parents;  // tree nodes with at least two children
  std::vector<std::vector<std::vector<BuyerId>>> orders;
  std::vector<BuyerId> roots{kSellerId};
  for (BuyerId id : base.tree.node_ids()) roots.push_back(id);
  for (BuyerId p : roots) {
    std::vector<BuyerId> children = base.tree.children_of(p);
    if (children.size() < 2) continue;
    parents.push_back(p);
    std::vector<std::vector<BuyerId>> perms;
    std::sort(children.begin(), children.end());
    do {
      perms.push_back(children);
    } while (std::next_permutation(children.begin(), children.end()));
    orders.push_back(std::move(perms));
  }

  std::vector<std::size_t> pick(parents.size(), 0);
  while (report.runs < max_runs) {
    // Advance the odometer; the all-zeros combination is the base run.
    std::size_t d = 0;
    while (d < pick.size() && ++pick[d] == orders[d].size()) pick[d++] = 0;
    if (d == pick.size()) break;
    GidmOptions options;
    for (std::size_t i = 0; i < parents.size(); ++i)
      options.push_order[parents[i]] = orders[i][pick[i]];
    const GidmResult<V> run = run_gidm_detailed(net, truthful, k, options);
    ++report.runs;
    if (!(run.outcome.item_of == base.outcome.item_of &&
          run.outcome.payment == base.outcome.payment)) {
      std::ostringstream os;
      os << "push order";
      for (std::size_t i = 0; i < parents.size(); ++i) {
        os << " " << id_str(parents[i]) << ":(";
        for (std::size_t j = 0; j < orders[i][pick[i]].size(); ++j)
          os << (j ? "," : "") << id_str(orders[i][pick[i]][j]);
        os << ")";
      }
      os << " changes the outcome";
      report.divergences.push_back(os.str());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Campaigns: the same checks over many seeded random instances.

template <typename V>
struct CampaignConfig {
  std::uint64_t trials = 100;
  int min_buyers = 2;
  int max_buyers = 8;
  std::vector<int> item_counts = {1};
  std::uint64_t seed = 1;
  std::optional<double> edge_probability;  // varied per instance when unset
  std::vector<V> valuation_domain = default_domain();
  int jobs = 1;
  ConstraintForm constraints = ConstraintForm::kCorrected;

  static std::vector<V> default_domain() {
    std::vector<V> d;
    for (int v = 0; v <= 9; ++v) d.push_back(ValueTraits<V>::from_int(v));
    return d;
  }
};

namespace detail {

inline void parallel_for(std::uint64_t count, int jobs,
                         const std::function<void(std::uint64_t)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string error;
  std::vector<std::thread> workers;
  const int worker_count = std::min<std::uint64_t>(jobs, count);
  workers.reserve(static_cast<std::size_t>(worker_count));
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) error = e.what();
          return;
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (failed.load()) throw InternalInvariantError("campaign worker failed: " + error);
}

}  // namespace detail

/// Per-trial instance derivation: buyer count uniform in
/// [min_buyers, max_buyers], edge probability per config (or cycled through
/// a spread of densities), fully determined by (config.seed, trial).
template <typename V>
Network<V> campaign_instance(const CampaignConfig<V>& cfg, std::uint64_t trial) {
  const std::uint64_t seed = splitmix64(cfg.seed ^ splitmix64(trial + 1));
  Rng rng(seed);
  InstanceGenConfig<V> gen;
  gen.buyer_count =
      cfg.min_buyers +
      static_cast<int>(rng.below(static_cast<std::uint64_t>(
          cfg.max_buyers - cfg.min_buyers + 1)));
  static constexpr double kDensities[] = {0.2, 0.35, 0.5, 0.8};
  gen.edge_probability =
      cfg.edge_probability.value_or(kDensities[rng.below(4)]);
  gen.valuation_domain = cfg.valuation_domain;
  gen.item_count = cfg.item_counts.front();
  gen.seed = rng.next();
  return gen_instance(gen);
}

/// Adds seller edges (drawn uniformly among unattached buyers) until the
/// seller has at least `degree` neighbours or runs out of buyers.
template <typename V>
Network<V> with_seller_degree(const Network<V>& net, int degree,
                              std::uint64_t seed) {
  if (static_cast<int>(net.seller_neighbors().size()) >= degree) return net;
  Rng rng(seed);
  std::set<BuyerId> seller = net.seller_neighbors();
  std::vector<BuyerId> unattached;
  for (const auto& [id, type] : net.buyers()) {
    if (!seller.count(id)) unattached.push_back(id);
  }
  while (static_cast<int>(seller.size()) < degree && !unattached.empty()) {
    const std::size_t pick = rng.below(unattached.size());
    seller.insert(unattached[pick]);
    unattached.erase(unattached.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::map<BuyerId, BuyerType<V>> buyers = net.buyers();
  for (BuyerId j : seller) buyers.at(j).neighbors.insert(kSellerId);
  return Network<V>(std::move(seller), std::move(buyers), net.item_count());
}

/// Random invited-subset profile derived from the truthful one (re-closed to
/// stay feasible). Exercises asymmetric invitation graphs.
template <typename V>
ActionProfile<V> random_subprofile(const Network<V>& net, std::uint64_t seed) {
  Rng rng(seed);
  ActionProfile<V> profile = truthful_profile(net);
  for (auto& [id, act] : profile.actions) {
    if (!act) continue;
    std::set<BuyerId> kept;
    for (BuyerId j : act->invited) {
      if (rng.chance(0.7)) kept.insert(j);
    }
    act->invited = std::move(kept);
  }
  const std::set<BuyerId> reached = participants(net, profile);
  for (auto& [id, act] : profile.actions) {
    if (!reached.count(id)) act = std::nullopt;
  }
  return profile;
}

template <typename V>
struct IcIrCampaignResult {
  DeviationReport<V> ic;
  DeviationReport<V> ir;
  std::vector<std::string> decomposition_violations;
};

/// Exhaustive deviation campaign: incentive compatibility and individual
/// rationality over `trials` instances, each checked at every configured
/// item count, with the decomposition identities checked on every run.
template <typename V>
IcIrCampaignResult<V> campaign_ic_ir(const CampaignConfig<V>& cfg) {
  IcIrCampaignResult<V> result;
  std::vector<ScanResult<V>> scans(cfg.trials * cfg.item_counts.size());
  std::vector<std::uint64_t> seeds(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    seeds[trial] = splitmix64(cfg.seed ^ splitmix64(trial + 1));
    for (std::size_t ki = 0; ki < cfg.item_counts.size(); ++ki) {
      scans[trial * cfg.item_counts.size() + ki] = scan_deviations(
          net, cfg.valuation_domain, cfg.item_counts[ki], cfg.constraints);
    }
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    for (std::size_t ki = 0; ki < cfg.item_counts.size(); ++ki) {
      ScanResult<V>& scan = scans[trial * cfg.item_counts.size() + ki];
      result.ic.checked_deviations += scan.deviations;
      result.ir.checked_deviations += scan.deviations;
      const auto attach = [&](std::vector<DeviationRecord<V>>& from,
                              DeviationReport<V>& to, bool ir) {
        for (DeviationRecord<V>& rec : from) {
          rec.instance_index = trial;
          rec.instance_seed = seeds[trial];
          rec.instance = campaign_instance(cfg, trial);
          to.note_gain(ir ? ValueTraits<V>::zero() - rec.deviant_utility
                          : rec.deviant_utility - rec.truthful_utility);
          to.violations.push_back(std::move(rec));
        }
      };
      attach(scan.ic_violations, result.ic, false);
      attach(scan.ir_violations, result.ir, true);
      for (std::string& v : scan.decomposition_violations) {
        result.decomposition_violations.push_back(
            "instance " + std::to_string(trial) + ": " + std::move(v));
      }
    }
  }
  result.ic.checked_instances = result.ir.checked_instances = cfg.trials;
  return result;
}

struct MismatchCampaignResult {
  std::uint64_t trials = 0;
  std::vector<std::string> failures;
};

/// Dominator-based critical structure against the node-removal oracle, on
/// the truthful profile and on a random sub-profile of every instance.
template <typename V>
MismatchCampaignResult campaign_critical_oracle(const CampaignConfig<V>& cfg) {
  MismatchCampaignResult result;
  result.trials = cfg.trials;
  std::vector<std::string> failures(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    const std::uint64_t seed = splitmix64(cfg.seed ^ splitmix64(trial + 1));
    const ActionProfile<V> profiles[] = {truthful_profile(net),
                                         random_subprofile(net, seed)};
    for (const ActionProfile<V>& profile : profiles) {
      const CriticalStructure fast = critical_structure(net, profile);
      const CriticalStructure slow = critical_structure_oracle(net, profile);
      if (fast.participants() != slow.participants()) {
        failures[trial] = "participant sets disagree";
        return;
      }
      for (BuyerId id : fast.participants()) {
        if (fast.parents_of(id) != slow.parents_of(id) ||
            fast.children_of(id) != slow.children_of(id)) {
          failures[trial] = "critical structure of buyer " + id_str(id) +
                            " disagrees with the removal oracle";
          return;
        }
      }
    }
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    if (!failures[trial].empty())
      result.failures.push_back("instance " + std::to_string(trial) + ": " +
                                failures[trial]);
  }
  return result;
}

/// Revenue bound and weak budget balance. Instances are re-attached so the
/// seller has more than k neighbours for the bound part; budget balance is
/// additionally checked on the unmodified instance.
template <typename V>
MismatchCampaignResult campaign_revenue(const CampaignConfig<V>& cfg) {
  MismatchCampaignResult result;
  result.trials = cfg.trials;
  std::vector<std::string> failures(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    const std::uint64_t seed = splitmix64(cfg.seed ^ splitmix64(trial + 3));
    for (int k : cfg.item_counts) {
      if (static_cast<int>(net.buyers().size()) > k) {
        const Network<V> wide = with_seller_degree(net, k + 1, seed);
        const RevenueBoundCheck<V> check = check_revenue_bound(wide, k);
        if (!check.pass) {
          failures[trial] = "revenue bound fails at k=" + std::to_string(k);
          return;
        }
      }
      const RevenueBoundCheck<V> plain = check_revenue_bound(net, k);
      if (plain.revenue < ValueTraits<V>::zero() || !plain.pass) {
        failures[trial] = "budget balance fails at k=" + std::to_string(k);
        return;
      }
      const auto detailed = run_gidm_detailed(net, truthful_profile(net), k);
      const auto decomposition = check_payment_decomposition(detailed);
      if (!decomposition.violations.empty()) {
        failures[trial] = "decomposition: " + decomposition.violations.front();
        return;
      }
    }
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    if (!failures[trial].empty())
      result.failures.push_back("instance " + std::to_string(trial) + ": " +
                                failures[trial]);
  }
  return result;
}

/// Single-item reduction campaign: the multi-item mechanism at k=1 equals
/// the single-item mechanism outcome for outcome.
template <typename V>
MismatchCampaignResult campaign_idm_equivalence(const CampaignConfig<V>& cfg) {
  MismatchCampaignResult result;
  result.trials = cfg.trials;
  std::vector<std::string> failures(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    if (!check_idm_equivalence(net)) {
      failures[trial] = "k=1 outcome differs between the two mechanisms";
      return;
    }
    const auto detailed = run_gidm_detailed(net, truthful_profile(net), 1);
    const auto decomposition = check_payment_decomposition(detailed);
    if (!decomposition.violations.empty())
      failures[trial] = "decomposition: " + decomposition.violations.front();
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    if (!failures[trial].empty())
      result.failures.push_back("instance " + std::to_string(trial) + ": " +
                                failures[trial]);
  }
  return result;
}

/// No-diffusion reduction campaign: with every invitation withheld the
/// multi-item mechanism equals the neighbours-only (k+1)-price sale.
template <typename V>
MismatchCampaignResult campaign_no_diffusion(const CampaignConfig<V>& cfg) {
  MismatchCampaignResult result;
  result.trials = cfg.trials;
  std::vector<std::string> failures(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    for (int k : cfg.item_counts) {
      if (!check_no_diffusion_reduction(net, k)) {
        failures[trial] = "no-diffusion outcome differs at k=" + std::to_string(k);
        return;
      }
      const auto detailed = run_gidm_detailed(net, no_diffusion_profile(net), k);
      const auto decomposition = check_payment_decomposition(detailed);
      if (!decomposition.violations.empty()) {
        failures[trial] = "decomposition: " + decomposition.violations.front();
        return;
      }
    }
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    if (!failures[trial].empty())
      result.failures.push_back("instance " + std::to_string(trial) + ": " +
                                failures[trial]);
  }
  return result;
}

struct OrderSensitivityCampaignResult {
  std::uint64_t trials = 0;
  std::uint64_t runs = 0;
  std::vector<std::string> divergences;  // informational, never a failure
};

template <typename V>
OrderSensitivityCampaignResult campaign_order_sensitivity(
    const CampaignConfig<V>& cfg) {
  OrderSensitivityCampaignResult result;
  result.trials = cfg.trials;
  std::vector<OrderSensitivityReport> reports(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::uint64_t trial) {
    const Network<V> net = campaign_instance(cfg, trial);
    reports[trial] = order_sensitivity(net, cfg.item_counts.front());
  });
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    result.runs += reports[trial].runs;
    for (const std::string& d : reports[trial].divergences)
      result.divergences.push_back("instance " + std::to_string(trial) + ": " + d);
  }
  return result;
}

}  // namespace netauct
