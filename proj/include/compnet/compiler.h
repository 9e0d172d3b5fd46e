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


// Machine-local compilation of member tables into a staged pipeline.
//
// The tables of all members placed on one machine form a graph of stages:
// one node per (member, function) and an edge wherever one function hands a
// packet to another on the same machine. A plan assigns nodes to stages;
// verified assumptions about a member's links allow adjacent stages to be
// fused, and every stage carries rules compiled from the tables it covers.

#ifndef COMPNET_COMPILER_H_
#define COMPNET_COMPILER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/packet.h"
#include "compnet/pipeline.h"
#include "compnet/topology.h"

namespace compnet {

// A fact about a member's links that licenses fusion.
//   links-external:O:U  every link of O is implemented by a session that U
//                       sends, so O's Transmit always hands over to U.
//   links-primitive:U   every link of U is Primitive, so U's Transmit always
//                       emits.
struct Assumption {
  enum class Kind { kLinksExternal, kLinksPrimitive };
  Kind kind = Kind::kLinksPrimitive;
  std::string overlay;   // O; empty for kLinksPrimitive.
  std::string underlay;  // U.

  std::string ToString() const;
  friend bool operator==(const Assumption&, const Assumption&) = default;
};

absl::StatusOr<Assumption> ParseAssumption(std::string_view text);

struct StageNode {
  MemberRef member;
  Function function = Function::kForward;
  std::string ToString() const;
};

// One step of a compiled rule. Guards may fail, which moves evaluation to
// the next rule; the other operations transform the packet.
struct FusedOp {
  enum class Kind {
    kRequireNetwork,  // Error unless the outer header belongs to `network`.
    kRequireSession,  // Error unless the packet carries a sessIdent.
    kLoadInLink,      // inLink := the link the stage was entered with.
    kGuardLink,       // The entry link equals `link`.
    kGuardMatch,      // `match` accepts inLink and the outer header.
    kGuardNoKey,      // The outer header yields no session key.
    kGuardKey,        // The outer header's session key equals `session`.
    kGuardSession,    // sessIdent equals `session`.
    kSetSession,      // sessIdent := `session`.
    kEncap,           // Push (`network`, `header`) sealed by `seal`; inLink := Self.
    kStrip,           // Pop the outer header into `network`; inLink := `link`.
  };
  Kind kind = Kind::kGuardMatch;
  NetworkId network;
  MemberRef member;  // Owner; names the drop site for kStrip failures.
  std::optional<LocalLinkId> link;
  Match match;
  HeaderSchema key_schema;  // kGuardKey, kGuardNoKey: the session key fields.
  SessionId session;
  FieldMap header;
  std::optional<SessionRef> seal;
};

struct FusedAction {
  enum class Kind { kDrop, kEmit, kContinue, kDeliver, kError };
  Kind kind = Kind::kDrop;
  MemberRef member;
  Function function = Function::kForward;  // kDrop: the function that dropped.
  DropMarker marker = DropMarker::kNoRule;
  LocalLinkId link;   // kEmit: local link; kContinue: entry link, if any.
  bool has_link = false;
  std::string port;   // kEmit.
  int next = -1;      // kContinue: node index.
  std::string error;  // kError.
};

struct FusedRule {
  int entry = -1;  // Node index the rule applies to on stage entry.
  std::vector<FusedOp> ops;
  FusedAction action;

  std::string ToString(const std::vector<StageNode>& nodes) const;
};

struct Stage {
  int level = 0;
  std::vector<int> nodes;
  std::vector<FusedRule> rules;
};

struct StagePlan {
  MachineId machine;
  std::vector<Assumption> assumptions;
  std::vector<StageNode> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> node_stage;
  std::vector<Stage> stages;  // Sorted by level, then first node.
  int stage_count = 0;        // Number of distinct levels.

  int NodeIndex(const MemberRef& member, Function function) const;
  size_t RuleCount() const;
};

// Checks an assumption against the machine's members and links;
// FailedPrecondition ("InvalidAssumption: ...") if the topology contradicts
// it.
absl::Status CheckAssumption(const Topology& topology, const MachineId& machine,
                             const Assumption& assumption);

// Every assumption that holds on the machine.
std::vector<Assumption> DeriveAssumptions(const Topology& topology,
                                          const MachineId& machine);

// Builds the stage plan of a machine; without assumptions every node is its
// own stage. NotFound ("UnknownMachine") for unknown machines.
absl::StatusOr<StagePlan> Fuse(const Topology& topology,
                               const MachineId& machine,
                               const std::vector<Assumption>& assumptions = {});

// Where a packet enters a machine: Acquire on a wire or bridge port, or
// Forward for a packet originated with inLink Self.
struct Ingress {
  MemberRef member;
  Function function = Function::kAcquire;
  std::optional<LocalLinkId> in_link;
};

struct MachineResult {
  StepOutcome outcome;
  Packet packet;
};

// Reference executor: applies the member table functions one at a time until
// the packet leaves the machine, is delivered, or is dropped.
absl::StatusOr<MachineResult> RunUnfused(const Topology& topology,
                                         const Ingress& ingress, Packet packet);

// Executes a plan's compiled rules.
absl::StatusOr<MachineResult> RunFused(const StagePlan& plan,
                                       const Ingress& ingress, Packet packet);

struct EquivalenceReport {
  bool equivalent = true;
  uint64_t packets_checked = 0;
  std::string counterexample;
};

// Runs both executors over every ingress of the machine: arrivals on each
// Primitive link and bridge port (outer headers, optionally carrying an
// overlay packet) and originations at each member.
absl::StatusOr<EquivalenceReport> CheckEquivalence(const Topology& topology,
                                                   const StagePlan& plan);

struct RuleStats {
  std::map<NetworkId, uint64_t> per_network;
  uint64_t total = 0;
  // Cross product of the tables of co-located members, summed over machines.
  uint64_t flattened = 0;
  // Compiled rules of the plans fused under every derivable assumption.
  uint64_t fused = 0;
};

absl::StatusOr<RuleStats> ComputeRuleStats(const Topology& topology);

// Deterministic dump of a machine's tables, followed by its stage plan.
absl::StatusOr<std::string> ExportTables(
    const Topology& topology, const MachineId& machine,
    const std::vector<Assumption>& assumptions = {});

}  // namespace compnet

#endif  // COMPNET_COMPILER_H_
