// Copyright 2026 The compnet Authors
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


#include "compnet/cli.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "compnet/compiler.h"
#include "compnet/scenarios.h"
#include "compnet/topology_format.h"
#include "compnet/trace.h"
#include "compnet/validate.h"
#include "compnet/verifier.h"

namespace compnet {
namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;

constexpr char kScenarioPrefix[] = "scenario:";

absl::StatusOr<Topology> Load(const std::string& source) {
  if (source.rfind(kScenarioPrefix, 0) == 0) {
    return Scenario(source.substr(sizeof(kScenarioPrefix) - 1));
  }
  std::ifstream in(source);
  if (!in) return absl::NotFoundError("cannot read " + source);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseTopology(buffer.str());
}

// Header from "k=v,k=v"; fields left out take the first value of their
// domain.
absl::StatusOr<FieldMap> BuildHeader(const HeaderSchema& schema,
                                     const std::string& text) {
  FieldMap header;
  for (const FieldSpec& field : schema.fields) header[field.name] = field.domain.front();
  if (text.empty()) return header;
  std::vector<std::string> pairs = absl::StrSplit(text, ',', absl::SkipEmpty());
  for (const std::string& pair : pairs) {
    std::vector<std::string> kv = absl::StrSplit(pair, absl::MaxSplits('=', 1));
    if (kv.size() != 2 || schema.Find(kv[0]) == nullptr) {
      return absl::InvalidArgumentError("bad header assignment '" + pair + "'");
    }
    header[kv[0]] = kv[1];
  }
  return header;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int Run(const std::vector<std::string>& args) {
    CLI::App app{"Compositional network model: trace, verify and compile."};
    app.name("compnet");
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Check a topology for consistency");
    validate->add_option("file", file_, "Topology file or scenario:<id>")->required();
    validate->callback([this] { code_ = Validate(); });

    auto* trace = app.add_subcommand("trace", "Trace one packet through the pipeline");
    trace->add_option("file", file_, "Topology file or scenario:<id>")->required();
    trace->add_option("--from", from_, "Originating member")->required();
    trace->add_option("--net", net_, "Network of the originating member")->required();
    trace->add_option("--link", link_, "Inject on this local link instead of originating");
    trace->add_option("--header", header_, "Header fields k=v,...");
    trace->add_flag("--json", json_, "Emit the trace as JSON");
    trace->callback([this] { code_ = Trace(); });

    auto* verify = app.add_subcommand("verify", "Check declared properties");
    verify->add_option("file", file_, "Topology file or scenario:<id>")->required();
    verify->add_option("--property", property_, "Only this property");
    verify->callback([this] { code_ = Verify(); });

    auto* fuse = app.add_subcommand("fuse", "Fuse a machine's stages and check equivalence");
    fuse->add_option("file", file_, "Topology file or scenario:<id>")->required();
    fuse->add_option("--machine", machine_, "Machine")->required();
    fuse->add_option("--assume", assume_, "Fact: links-external:O:U or links-primitive:U");
    fuse->callback([this] { code_ = Fuse(); });

    auto* exp = app.add_subcommand("export", "Dump a machine's tables and stage plan");
    exp->add_option("file", file_, "Topology file or scenario:<id>")->required();
    exp->add_option("--machine", machine_, "Machine")->required();
    exp->add_option("--assume", assume_, "Fact: links-external:O:U or links-primitive:U");
    exp->callback([this] { code_ = Export(); });

    auto* stats = app.add_subcommand("stats", "Rule counts per network and machine");
    stats->add_option("file", file_, "Topology file or scenario:<id>")->required();
    stats->callback([this] { code_ = Stats(); });

    auto* scenario = app.add_subcommand("scenario", "Show a built-in scenario");
    scenario->add_option("id", scenario_, "Scenario id")->required();
    scenario->add_flag("--emit", emit_, "Print the scenario's topology text");
    scenario->callback([this] { code_ = ShowScenario(); });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e, out_, err_);
      return code == 0 ? kOk : kUsage;
    }
    return code_;
  }

 private:
  std::optional<Topology> LoadOrReport() {
    absl::StatusOr<Topology> topology = Load(file_);
    if (!topology.ok()) {
      err_ << "error: " << topology.status().message() << "\n";
      return std::nullopt;
    }
    return *std::move(topology);
  }

  std::optional<std::vector<Assumption>> Assumptions() {
    std::vector<Assumption> out;
    for (const std::string& text : assume_) {
      absl::StatusOr<Assumption> a = ParseAssumption(text);
      if (!a.ok()) {
        err_ << "error: " << a.status().message() << "\n";
        return std::nullopt;
      }
      out.push_back(*a);
    }
    return out;
  }

  int Validate() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    ValidationReport report = ValidateTopology(*t);
    if (report.ok()) {
      size_t members = 0;
      for (const auto& [net, by_name] : t->members) members += by_name.size();
      out_ << "ok: " << t->networks.size() << " networks, " << t->machines.size()
           << " machines, " << members << " members\n";
      return kOk;
    }
    out_ << report.ToString();
    return kNegative;
  }

  int Trace() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    const Network* network = t->FindNetwork(NetworkId(net_));
    if (network == nullptr) {
      err_ << "error: unknown network " << net_ << "\n";
      return kUsage;
    }
    MemberRef origin{NetworkId(net_), MemberName(from_)};
    if (t->FindMember(origin) == nullptr) {
      err_ << "error: unknown member " << origin.ToString() << "\n";
      return kUsage;
    }
    absl::StatusOr<FieldMap> header = BuildHeader(network->schema, header_);
    if (!header.ok()) {
      err_ << "error: " << header.status().message() << "\n";
      return kUsage;
    }
    Packet packet(origin.network, *header, "payload");
    absl::StatusOr<compnet::Trace> trace =
        link_.empty() ? Originate(*t, origin, packet)
                      : Inject(*t, origin, packet, LocalLinkId(link_));
    if (!trace.ok()) {
      err_ << "error: " << trace.status().message() << "\n";
      return kUsage;
    }
    out_ << (json_ ? TraceToJson(*t, *trace) + "\n" : FormatTrace(*t, *trace));
    return trace->delivered() ? kOk : kNegative;
  }

  int Verify() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    bool all_hold = true;
    bool found = property_.empty();
    for (const PropertyDecl& decl : t->properties) {
      if (!property_.empty() && decl.name != property_) continue;
      found = true;
      absl::StatusOr<PropertyResult> result = RunProperty(*t, decl);
      if (!result.ok()) {
        err_ << "error: " << result.status().message() << "\n";
        return kUsage;
      }
      out_ << result->ToString() << "\n";
      all_hold = all_hold && result->holds;
    }
    if (!found) {
      err_ << "error: no property named " << property_ << "\n";
      return kUsage;
    }
    return all_hold ? kOk : kNegative;
  }

  int Fuse() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    std::optional<std::vector<Assumption>> facts = Assumptions();
    if (!facts) return kUsage;
    MachineId machine(machine_);
    absl::StatusOr<StagePlan> before = compnet::Fuse(*t, machine);
    if (!before.ok()) {
      err_ << "error: " << before.status().message() << "\n";
      return kUsage;
    }
    absl::StatusOr<StagePlan> after = compnet::Fuse(*t, machine, *facts);
    if (!after.ok()) {
      err_ << "error: " << after.status().message() << "\n";
      return absl::IsFailedPrecondition(after.status()) ? kNegative : kUsage;
    }
    absl::StatusOr<EquivalenceReport> eq = CheckEquivalence(*t, *after);
    if (!eq.ok()) {
      err_ << "error: " << eq.status().message() << "\n";
      return kUsage;
    }
    out_ << "machine " << machine_ << ": stages " << before->stage_count << " -> "
         << after->stage_count << ", rules " << before->RuleCount() << " -> "
         << after->RuleCount() << "\n";
    out_ << "equivalence: " << (eq->equivalent ? "equivalent" : "NOT equivalent")
         << " over " << eq->packets_checked << " packets\n";
    if (!eq->equivalent) out_ << "counterexample: " << eq->counterexample << "\n";
    return eq->equivalent ? kOk : kNegative;
  }

  int Export() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    std::optional<std::vector<Assumption>> facts = Assumptions();
    if (!facts) return kUsage;
    absl::StatusOr<std::string> dump = ExportTables(*t, MachineId(machine_), *facts);
    if (!dump.ok()) {
      err_ << "error: " << dump.status().message() << "\n";
      return absl::IsFailedPrecondition(dump.status()) ? kNegative : kUsage;
    }
    out_ << *dump;
    return kOk;
  }

  int Stats() {
    std::optional<Topology> t = LoadOrReport();
    if (!t) return kUsage;
    absl::StatusOr<RuleStats> stats = ComputeRuleStats(*t);
    if (!stats.ok()) {
      err_ << "error: " << stats.status().message() << "\n";
      return kUsage;
    }
    for (const auto& [net, count] : stats->per_network) {
      out_ << "network " << net.value() << ": " << count << " rules\n";
    }
    out_ << "total: " << stats->total << "\nflattened per machine: " << stats->flattened
         << "\nfused: " << stats->fused << "\n";
    return kOk;
  }

  int ShowScenario() {
    absl::StatusOr<std::string> text = ScenarioText(scenario_);
    if (!text.ok()) {
      err_ << "error: " << text.status().message() << "\nknown scenarios:";
      for (const std::string& id : ScenarioIds()) err_ << " " << id;
      err_ << "\n";
      return kUsage;
    }
    if (emit_) {
      out_ << *text;
      return kOk;
    }
    absl::StatusOr<Topology> t = ParseTopology(*text);
    if (!t.ok()) {
      err_ << "error: " << t.status().message() << "\n";
      return kUsage;
    }
    out_ << "scenario " << scenario_ << "\n";
    for (const auto& [id, network] : t->networks) {
      auto members = t->members.find(id);
      out_ << "  network " << id.value() << ": "
           << (members == t->members.end() ? 0 : members->second.size())
           << " members\n";
    }
    out_ << "  machines: " << t->machines.size() << "\n";
    for (const PropertyDecl& p : t->properties) {
      out_ << "  property " << p.name << " " << p.check << " " << p.network.value()
           << "\n";
    }
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  int code_ = kOk;
  std::string file_, from_, net_, link_, header_, property_, machine_, scenario_;
  std::vector<std::string> assume_;
  bool json_ = false;
  bool emit_ = false;
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  return Cli(out, err).Run(args);
}

}  // namespace compnet
