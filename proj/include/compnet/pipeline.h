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


// The five match-action functions a member applies to a packet: Transmit,
// Send, Forward, Acquire and Receive. Each call performs exactly one table
// lookup and says where processing continues.

#ifndef COMPNET_PIPELINE_H_
#define COMPNET_PIPELINE_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/packet.h"
#include "compnet/topology.h"

namespace compnet {

enum class Function {
  kTransmit,
  kSend,
  kForward,
  kAcquire,
  kReceive,
  kBridgeRewrite,
  kWireHop,
};

std::string ToString(Function function);

enum class DropMarker {
  kPolicy,     // A Forward rule said Drop.
  kNoRule,     // No table entry matched: a configuration hole.
  kMalformed,  // The packet cannot be processed (e.g. nothing to strip).
};

std::string ToString(DropMarker marker);

// Continue with `function` at `member`. `link` is the outgoing link for
// Transmit and the arrival link for Acquire.
struct Next {
  Function function;
  MemberRef member;
  std::optional<LocalLinkId> link;
  friend bool operator==(const Next&, const Next&) = default;
};

// The packet leaves the machine on a physical port.
struct Emit {
  MemberRef member;
  LocalLinkId link;
  std::string port;
  friend bool operator==(const Emit&, const Emit&) = default;
};

// The packet is handed to the machine's own software.
struct Delivered {
  MemberRef member;
  friend bool operator==(const Delivered&, const Delivered&) = default;
};

struct Dropped {
  MemberRef member;
  Function function;
  DropMarker marker;
  friend bool operator==(const Dropped&, const Dropped&) = default;
};

using StepOutcome = std::variant<Next, Emit, Delivered, Dropped>;

std::string ToString(const StepOutcome& outcome);

struct StepResult {
  StepOutcome outcome;
  Packet packet;
  std::string key;     // The table key that was looked up.
  std::string action;  // The applied action, for tracing.
};

absl::StatusOr<StepResult> FnTransmit(const Topology& topology,
                                      const Member& member, Packet packet,
                                      const LocalLinkId& link);
absl::StatusOr<StepResult> FnSend(const Topology& topology,
                                  const Member& member, Packet packet);
absl::StatusOr<StepResult> FnForward(const Topology& topology,
                                     const Member& member, Packet packet);
absl::StatusOr<StepResult> FnAcquire(const Topology& topology,
                                     const Member& member, Packet packet,
                                     const LocalLinkId& in_link);
absl::StatusOr<StepResult> FnReceive(const Topology& topology,
                                     const Member& member, Packet packet);

// Dispatches a Next to the matching function.
absl::StatusOr<StepResult> Apply(const Topology& topology, const Next& next,
                                 Packet packet);

// Moves a packet through `bridge` from the side `from`: rewrites the outer
// header and retypes it to the peer network. Inner headers are untouched.
Packet CrossBridge(const Bridge& bridge, const MemberRef& from, Packet packet);

// What a machine can read of a packet: headers from the outside in, stopping
// at a layer sealed by a session the machine is not an endpoint of.
struct Snapshot {
  std::vector<Layer> visible;  // Outermost first.
  bool sealed = false;         // More layers exist but are opaque.
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

Snapshot VisibleTo(const Topology& topology, const Packet& packet,
                   const MachineId& viewer);

}  // namespace compnet

#endif  // COMPNET_PIPELINE_H_
