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
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "netauct/io.hpp"
#include "netauct/mechanisms.hpp"
#include "netauct/network.hpp"
#include "netauct/verify.hpp"

// Command-line front end.
//
//   netauct run    --mechanism {idm|gidm|vcg-local} --network FILE ...
//   netauct gen    --buyers N --edge-prob P --seed S --out FILE ...
//   netauct verify {ic|ir|revenue|idm-equiv|critical-oracle|order-sensitivity}
//
// Exit codes: 0 success, 1 verification violations, 2 parse/config error,
// 3 infeasible action profile, 4 internal invariant breach.

namespace netauct {

namespace cli_detail {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitParse = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
  bool use_float = false;
};

struct RunArgs : CommonArgs {
  std::string mechanism;
  std::string network_path;
  std::string actions_path;
  std::string out_path;
  std::string dot_path;
  std::string format = "text";
  int items = 0;  // 0 = take the network file's item count
  bool trace = false;
};

struct GenArgs : CommonArgs {
  int buyers = 1;
  double edge_prob = 0.5;
  int items = 1;
  std::uint64_t seed = 1;
  std::string values = "0..9";
  std::string out_path;
};

struct VerifyArgs : CommonArgs {
  std::string campaign;
  std::uint64_t trials = 0;  // 0 = campaign default
  int buyers = 0;            // 0 = campaign default
  int items = 1;
  std::uint64_t seed = 1;
  std::optional<double> edge_prob;
  std::string values = "0..9";
  int jobs = 0;  // 0 = NETAUCT_JOBS or hardware concurrency
  std::string out_path;
};

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

/// "lo..hi" for an integer range, otherwise a comma list of decimal values.
template <typename V>
std::vector<V> parse_value_spec(const std::string& spec) {
  std::vector<V> values;
  const std::size_t dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::optional<V> lo = ValueTraits<V>::parse(spec.substr(0, dots));
    const std::optional<V> hi = ValueTraits<V>::parse(spec.substr(dots + 2));
    if (!lo || !hi || *hi < *lo)
      throw ParseError("bad value range '" + spec + "'");
    for (V v = *lo; !(*hi < v); v += ValueTraits<V>::from_int(1)) values.push_back(v);
    if (values.size() > 1000) throw ParseError("value range too large");
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::optional<V> v = ValueTraits<V>::parse(item);
      if (!v) throw ParseError("bad value '" + item + "' in list");
      values.push_back(*v);
    }
  }
  if (values.empty()) throw ParseError("empty value spec");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

inline int default_jobs() {
  if (const char* env = std::getenv("NETAUCT_JOBS")) {
    const int jobs = std::atoi(env);
    if (jobs > 0) return jobs;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline int emit(const std::string& content, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
  if (out_path.empty()) {
    out << content;
    return kExitOk;
  }
  if (!write_file(out_path, content)) {
    err << "error: cannot write " << out_path << "\n";
    return kExitParse;
  }
  return kExitOk;
}

template <typename V>
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const std::optional<std::string> bytes = read_file(args.network_path);
  if (!bytes) {
    err << "error: cannot read " << args.network_path << "\n";
    return kExitParse;
  }
  LoadedNetwork<V> loaded = parse_network_file<V>(*bytes);
  const Network<V>& net = loaded.network;
  const int items = args.items > 0 ? args.items : net.item_count();

  ActionProfile<V> profile = truthful_profile(net);
  if (!args.actions_path.empty()) {
    const std::optional<std::string> action_bytes = read_file(args.actions_path);
    if (!action_bytes) {
      err << "error: cannot read " << args.actions_path << "\n";
      return kExitParse;
    }
    profile = parse_actions_file<V>(*action_bytes, net);
  } else if (loaded.profile) {
    profile = *loaded.profile;
  }

  if (net.seller_neighbors().empty())
    err << "warning: the seller has no neighbours; nothing can be sold\n";

  if (args.mechanism != "vcg-local") {
    if (const auto error = check_feasible(net, profile)) {
      err << "error: " << error->message() << "\n";
      return kExitInfeasible;
    }
  }

  ReportContext<V> ctx;
  ctx.mechanism = args.mechanism;
  ctx.items = args.mechanism == "idm" ? 1 : items;
  ctx.digest = input_digest(*bytes);
  ctx.include_trace = args.trace;

  Outcome<V> outcome;
  std::string dot;
  if (args.mechanism == "idm") {
    if (args.items > 1)
      err << "warning: idm sells a single item; --items " << args.items
          << " ignored\n";
    outcome = run_idm(net, profile);
    if (!args.dot_path.empty()) {
      const CriticalStructure cs = critical_structure(net, profile);
      dot = dot_export(build_allocation_tree(net, profile, cs, 1));
    }
  } else if (args.mechanism == "gidm") {
    GidmResult<V> result = run_gidm_detailed(net, profile, items);
    outcome = std::move(result.outcome);
    if (!args.dot_path.empty()) dot = dot_export(result.tree);
  } else if (args.mechanism == "vcg-local") {
    outcome = run_vcg_local(net, items);
    if (!args.dot_path.empty()) {
      err << "error: --dot requires idm or gidm\n";
      return kExitParse;
    }
  } else {
    err << "error: unknown mechanism '" << args.mechanism << "'\n";
    return kExitParse;
  }

  if (!dot.empty() && !write_file(args.dot_path, dot)) {
    err << "error: cannot write " << args.dot_path << "\n";
    return kExitParse;
  }
  const ActionProfile<V>* report_profile =
      args.mechanism == "vcg-local" ? nullptr : &profile;
  const std::string report =
      args.format == "structured"
          ? outcome_report_json(net, report_profile, outcome, ctx)
          : outcome_report_text(net, report_profile, outcome, ctx);
  return emit(report, args.out_path, out, err);
}

template <typename V>
int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  InstanceGenConfig<V> cfg;
  cfg.buyer_count = args.buyers;
  cfg.edge_probability = args.edge_prob;
  cfg.item_count = args.items;
  cfg.seed = args.seed;
  cfg.valuation_domain = parse_value_spec<V>(args.values);
  const Network<V> net = gen_instance(cfg);
  return emit(serialize_network(net), args.out_path, out, err);
}

template <typename V>
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  CampaignConfig<V> cfg;
  cfg.seed = args.seed;
  cfg.item_counts = {args.items};
  cfg.edge_probability = args.edge_prob;
  cfg.valuation_domain = parse_value_spec<V>(args.values);
  cfg.jobs = args.jobs > 0 ? args.jobs : default_jobs();

  const auto defaulted = [&](std::uint64_t trials, int max_buyers, int min_buyers) {
    cfg.trials = args.trials > 0 ? args.trials : trials;
    cfg.max_buyers = args.buyers > 0 ? args.buyers : max_buyers;
    cfg.min_buyers = std::min(min_buyers, cfg.max_buyers);
  };

  std::string report;
  bool violations = false;
  if (args.campaign == "ic" || args.campaign == "ir") {
    defaulted(200, 8, 2);
    const IcIrCampaignResult<V> result = campaign_ic_ir(cfg);
    const DeviationReport<V>& rep = args.campaign == "ic" ? result.ic : result.ir;
    violations =
        !rep.violations.empty() || !result.decomposition_violations.empty();
    report = deviation_report_json(args.campaign, rep);
    if (!result.decomposition_violations.empty()) {
      for (const std::string& v : result.decomposition_violations)
        err << "decomposition violation: " << v << "\n";
    }
  } else if (args.campaign == "revenue") {
    defaulted(1000, 10, 2);
    const MismatchCampaignResult result = campaign_revenue(cfg);
    violations = !result.failures.empty();
    report = mismatch_report_json(args.campaign, result);
  } else if (args.campaign == "idm-equiv") {
    defaulted(500, 10, 1);
    const MismatchCampaignResult result = campaign_idm_equivalence(cfg);
    violations = !result.failures.empty();
    report = mismatch_report_json(args.campaign, result);
  } else if (args.campaign == "critical-oracle") {
    defaulted(1000, 12, 1);
    const MismatchCampaignResult result = campaign_critical_oracle(cfg);
    violations = !result.failures.empty();
    report = mismatch_report_json(args.campaign, result);
  } else if (args.campaign == "order-sensitivity") {
    defaulted(100, 6, 2);
    const OrderSensitivityCampaignResult result = campaign_order_sensitivity(cfg);
    MismatchCampaignResult as_mismatch;
    as_mismatch.trials = result.trials;
    as_mismatch.failures = result.divergences;
    report = mismatch_report_json(args.campaign, as_mismatch, result.runs,
                                  /*informational=*/true);
  } else {
    err << "error: unknown campaign '" << args.campaign << "'\n";
    return kExitParse;
  }

  const int emitted = emit(report, args.out_path, out, err);
  if (emitted != kExitOk) return emitted;
  return violations ? kExitViolations : kExitOk;
}

}  // namespace cli_detail

/// Runs the command line given `args` (without the program name), writing
/// reports to `out` and diagnostics to `err`. Returns the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  using namespace cli_detail;

  CLI::App app{"Diffusion auctions over social networks", "netauct"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run a mechanism on a network file");
  run->add_option("--mechanism", run_args.mechanism,
                  "Mechanism: idm, gidm or vcg-local")
      ->required();
  run->add_option("--network", run_args.network_path, "Network file (JSON)")
      ->required();
  run->add_option("--items", run_args.items, "Item count (default: from file)");
  run->add_option("--actions", run_args.actions_path, "Actions file (JSON)");
  run->add_option("--out", run_args.out_path, "Report file (default: stdout)");
  run->add_option("--format", run_args.format, "Report format: text or structured")
      ->check(CLI::IsMember({"text", "structured"}));
  run->add_flag("--trace", run_args.trace, "Include the pass trace in the report");
  run->add_option("--dot", run_args.dot_path, "Write the allocation tree (DOT)");
  run->add_flag("--float", run_args.use_float, "Floating-point value mode");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--buyers", gen_args.buyers, "Number of buyers")->required();
  gen->add_option("--edge-prob", gen_args.edge_prob, "Edge probability")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--items", gen_args.items, "Item count");
  gen->add_option("--seed", gen_args.seed, "Seed");
  gen->add_option("--values", gen_args.values, "Valuation domain (lo..hi or list)");
  gen->add_option("--out", gen_args.out_path, "Output file (default: stdout)");
  gen->add_flag("--float", gen_args.use_float, "Floating-point value mode");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "Run a verification campaign");
  verify
      ->add_option("campaign", verify_args.campaign,
                   "ic, ir, revenue, idm-equiv, critical-oracle or "
                   "order-sensitivity")
      ->required();
  verify->add_option("--trials", verify_args.trials, "Number of instances");
  verify->add_option("--buyers", verify_args.buyers, "Maximum buyer count");
  verify->add_option("--items", verify_args.items, "Item count");
  verify->add_option("--seed", verify_args.seed, "Seed");
  verify->add_option("--edge-prob", verify_args.edge_prob,
                     "Fixed edge probability (default: varied)");
  verify->add_option("--values", verify_args.values, "Valuation domain");
  verify->add_option("--jobs", verify_args.jobs,
                     "Worker threads (default: NETAUCT_JOBS or all cores)");
  verify->add_option("--out", verify_args.out_path, "Report file");
  verify->add_flag("--float", verify_args.use_float, "Floating-point value mode");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    if (run->parsed()) {
      return run_args.use_float ? cmd_run<double>(run_args, out, err)
                                : cmd_run<Rational>(run_args, out, err);
    }
    if (gen->parsed()) {
      return gen_args.use_float ? cmd_gen<double>(gen_args, out, err)
                                : cmd_gen<Rational>(gen_args, out, err);
    }
    return verify_args.use_float ? cmd_verify<double>(verify_args, out, err)
                                 : cmd_verify<Rational>(verify_args, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InternalInvariantError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
}

}  // namespace netauct
