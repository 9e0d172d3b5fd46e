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


// Drives a packet across machines, links and layers until it is delivered,
// dropped, or exceeds the hop budget, recording every table application.

#ifndef COMPNET_TRACE_H_
#define COMPNET_TRACE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/packet.h"
#include "compnet/pipeline.h"
#include "compnet/topology.h"

namespace compnet {

struct TraceEvent {
  int step = 0;
  MachineId machine;
  NetworkId network;
  MemberName member;
  Function function = Function::kTransmit;
  std::string key;
  std::string action;
  Snapshot snapshot;  // Taken after the action applied.

  MemberRef member_ref() const { return {network, member}; }
};

struct TraceOutcome {
  enum class Kind { kDelivered, kDropped, kLoopDetected };
  Kind kind = Kind::kLoopDetected;
  MemberRef member;  // Unset for kLoopDetected.
  Function function = Function::kForward;
  DropMarker marker = DropMarker::kNoRule;

  std::string ToString() const;
};

struct Trace {
  std::vector<TraceEvent> events;
  TraceOutcome outcome;
  Packet final_packet;

  bool delivered() const {
    return outcome.kind == TraceOutcome::Kind::kDelivered;
  }
};

struct TraceOptions {
  // Bound on link traversals (Transmit applications) per injection.
  int max_hops = 64;
};

// Starts with Transmit at `origin` on `local_link`.
absl::StatusOr<Trace> Inject(const Topology& topology, const MemberRef& origin,
                             Packet packet, const LocalLinkId& local_link,
                             const TraceOptions& options = {});

// Starts with Forward at `origin` with inLink Self, as for a packet the
// member's own software originates.
absl::StatusOr<Trace> Originate(const Topology& topology,
                                const MemberRef& origin, Packet packet,
                                const TraceOptions& options = {});

struct ProvenanceEntry {
  LinkRef link;
  SessionRef session;
  friend bool operator==(const ProvenanceEntry&, const ProvenanceEntry&) = default;
};

// (network, link, implementing session) triples a trace crossed, in the
// order the links were entered, outermost overlay first.
using ProvenanceChain = std::vector<ProvenanceEntry>;

ProvenanceChain Provenance(const Topology& topology, const Trace& trace);

// Member sequence of the events that belong to `network`, with consecutive
// repeats collapsed.
std::vector<MemberName> ProjectPath(const Trace& trace,
                                    const NetworkId& network);

// Line format: `step machine network member function key -> action |
// header=k=v,...` followed by one `outcome ...` line.
std::string FormatTrace(const Topology& topology, const Trace& trace);
// Same data as nested JSON records.
std::string TraceToJson(const Topology& topology, const Trace& trace);

}  // namespace compnet

#endif  // COMPNET_TRACE_H_
