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


#include "compnet/pipeline.h"

#include "absl/strings/str_cat.h"

namespace compnet {
namespace {

absl::Status CheckNetwork(const Member& member, const Packet& packet,
                          std::string_view function) {
  if (packet.depth() == 0 || packet.network() != member.network) {
    return absl::FailedPreconditionError(absl::StrCat(
        std::string(function), " at ", member.ref().ToString(), ": packet is not a ",
        member.network.value(), " packet"));
  }
  return absl::OkStatus();
}

StepResult Drop(const Member& member, Function function, DropMarker marker,
                Packet packet, std::string key) {
  std::string action = ToString(marker);
  return {Dropped{member.ref(), function, marker}, std::move(packet),
          std::move(key), std::move(action)};
}

std::string InLinkKey(const Packet& packet) {
  return "inLink=" +
         (packet.meta().in_link.has_value() ? packet.meta().in_link->value()
                                            : std::string("-"));
}

}  // namespace

std::string ToString(Function function) {
  switch (function) {
    case Function::kTransmit:
      return "Transmit";
    case Function::kSend:
      return "Send";
    case Function::kForward:
      return "Forward";
    case Function::kAcquire:
      return "Acquire";
    case Function::kReceive:
      return "Receive";
    case Function::kBridgeRewrite:
      return "BridgeRewrite";
    case Function::kWireHop:
      return "WireHop";
  }
  return "?";
}

std::string ToString(DropMarker marker) {
  switch (marker) {
    case DropMarker::kPolicy:
      return "drop";
    case DropMarker::kNoRule:
      return "no-rule";
    case DropMarker::kMalformed:
      return "malformed";
  }
  return "?";
}

std::string ToString(const StepOutcome& outcome) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Next>) {
          return absl::StrCat("next ", ToString(o.function), " ",
                              o.member.ToString(),
                              o.link ? " " + o.link->value() : "");
        } else if constexpr (std::is_same_v<T, Emit>) {
          return absl::StrCat("emit ", o.member.ToString(), " port ", o.port);
        } else if constexpr (std::is_same_v<T, Delivered>) {
          return "delivered " + o.member.ToString();
        } else {
          return absl::StrCat("dropped ", o.member.ToString(), " ",
                              ToString(o.function), " ", ToString(o.marker));
        }
      },
      outcome);
}

absl::StatusOr<StepResult> FnTransmit(const Topology& topology,
                                      const Member& member, Packet packet,
                                      const LocalLinkId& link) {
  if (auto s = CheckNetwork(member, packet, "Transmit"); !s.ok()) return s;
  auto it = member.tables.transmit.find(link);
  if (it == member.tables.transmit.end()) {
    return Drop(member, Function::kTransmit, DropMarker::kNoRule,
                std::move(packet), link.value());
  }
  std::string action = ToString(it->second);
  if (const auto* port = std::get_if<PrimitivePort>(&it->second)) {
    return StepResult{Emit{member.ref(), link, port->port}, std::move(packet),
                      link.value(), std::move(action)};
  }
  const SessionRef& session = std::get<ExternalSession>(it->second).session;
  const Member* sender =
      topology.MemberOnMachineInGroup(member.machine, session.network);
  if (sender == nullptr) {
    return absl::FailedPreconditionError(absl::StrCat(
        "machine ", member.machine.value(), " has no member in ",
        session.network.value(), " to send session ", session.id.value()));
  }
  packet.meta().sess_ident = session.id;
  return StepResult{Next{Function::kSend, sender->ref(), std::nullopt},
                    std::move(packet), link.value(), std::move(action)};
}

absl::StatusOr<StepResult> FnSend(const Topology& topology,
                                  const Member& member, Packet packet) {
  if (!packet.meta().sess_ident.has_value()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Send at ", member.ref().ToString(), ": packet carries no sessIdent"));
  }
  const SessionId sid = *packet.meta().sess_ident;
  auto it = member.tables.send.find(sid);
  if (it == member.tables.send.end()) {
    return Drop(member, Function::kSend, DropMarker::kNoRule,
                std::move(packet), sid.value());
  }
  std::optional<SessionRef> seal;
  if (const Session* session = topology.FindSessionInGroup(member.network, sid);
      session != nullptr && session->encrypting()) {
    seal = session->ref();
  }
  packet.Encapsulate(member.network, it->second, seal);
  packet.meta().in_link = SelfLink();
  return StepResult{Next{Function::kForward, member.ref(), std::nullopt},
                    std::move(packet), sid.value(),
                    "encap " + FieldMapToString(it->second) +
                        (seal ? " sealed" : "")};
}

absl::StatusOr<StepResult> FnForward(const Topology& topology,
                                     const Member& member, Packet packet) {
  (void)topology;
  if (auto s = CheckNetwork(member, packet, "Forward"); !s.ok()) return s;
  std::string key = InLinkKey(packet);
  const ForwardRule* rule =
      member.tables.forward.Lookup(packet.meta().in_link, packet.header());
  if (rule == nullptr) {
    return Drop(member, Function::kForward, DropMarker::kNoRule,
                std::move(packet), std::move(key));
  }
  std::string action =
      absl::StrCat(ToString(rule->action), " [", rule->priority, "]");
  if (std::holds_alternative<DropAction>(rule->action)) {
    StepResult result = Drop(member, Function::kForward, DropMarker::kPolicy,
                             std::move(packet), std::move(key));
    result.action = std::move(action);
    return result;
  }
  const LocalLinkId& out = std::get<OutLink>(rule->action).link;
  return StepResult{Next{Function::kTransmit, member.ref(), out},
                    std::move(packet), std::move(key), std::move(action)};
}

absl::StatusOr<StepResult> FnAcquire(const Topology& topology,
                                     const Member& member, Packet packet,
                                     const LocalLinkId& in_link) {
  (void)topology;
  if (auto s = CheckNetwork(member, packet, "Acquire"); !s.ok()) return s;
  packet.meta().in_link = in_link;
  std::string key = InLinkKey(packet);
  const AcquireRule* rule =
      member.tables.acquire.Lookup(packet.meta().in_link, packet.header());
  if (rule == nullptr) {
    return Drop(member, Function::kAcquire, DropMarker::kNoRule,
                std::move(packet), std::move(key));
  }
  Function next = rule->action == AcquireAction::kReceive ? Function::kReceive
                                                          : Function::kForward;
  return StepResult{Next{next, member.ref(), std::nullopt}, std::move(packet),
                    std::move(key),
                    absl::StrCat(ToString(rule->action), " [", rule->priority,
                                 "]")};
}

absl::StatusOr<StepResult> FnReceive(const Topology& topology,
                                     const Member& member, Packet packet) {
  if (auto s = CheckNetwork(member, packet, "Receive"); !s.ok()) return s;
  const Network* network = topology.FindNetwork(member.network);
  if (network == nullptr) {
    return absl::FailedPreconditionError("unknown network " +
                                         member.network.value());
  }
  std::optional<SessionId> sid = SessionKeyOf(network->schema, packet.header());
  if (!sid.has_value()) {
    return Drop(member, Function::kReceive, DropMarker::kMalformed,
                std::move(packet), "-");
  }
  auto it = member.tables.receive.find(*sid);
  if (it == member.tables.receive.end()) {
    return Drop(member, Function::kReceive, DropMarker::kNoRule,
                std::move(packet), sid->value());
  }
  std::string action = ToString(it->second);
  if (std::holds_alternative<PrimitiveDelivery>(it->second)) {
    return StepResult{Delivered{member.ref()}, std::move(packet), sid->value(),
                      std::move(action)};
  }
  const LinkRef& target = std::get<ExternalLink>(it->second).link;
  const Member* upper = topology.MemberOnMachine(member.machine, target.network);
  const Link* link = topology.FindLink(target);
  std::optional<LocalLinkId> local;
  if (upper != nullptr && link != nullptr) {
    local = topology.LocalIdOf(*link, upper->name);
  }
  if (!local.has_value()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Receive at ", member.ref().ToString(), ": no member of link ",
        target.ToString(), " on machine ", member.machine.value()));
  }
  if (!packet.Decapsulate() || packet.network() != target.network) {
    return Drop(member, Function::kReceive, DropMarker::kMalformed,
                std::move(packet), sid->value());
  }
  packet.meta().in_link = *local;
  packet.meta().sess_ident.reset();
  return StepResult{Next{Function::kAcquire, upper->ref(), *local},
                    std::move(packet), sid->value(), std::move(action)};
}

absl::StatusOr<StepResult> Apply(const Topology& topology, const Next& next,
                                 Packet packet) {
  const Member* member = topology.FindMember(next.member);
  if (member == nullptr) {
    return absl::NotFoundError("unknown member " + next.member.ToString());
  }
  switch (next.function) {
    case Function::kTransmit:
      if (!next.link.has_value()) {
        return absl::InvalidArgumentError("Transmit needs a link");
      }
      return FnTransmit(topology, *member, std::move(packet), *next.link);
    case Function::kSend:
      return FnSend(topology, *member, std::move(packet));
    case Function::kForward:
      return FnForward(topology, *member, std::move(packet));
    case Function::kAcquire:
      if (!next.link.has_value()) {
        return absl::InvalidArgumentError("Acquire needs an inLink");
      }
      return FnAcquire(topology, *member, std::move(packet), *next.link);
    case Function::kReceive:
      return FnReceive(topology, *member, std::move(packet));
    default:
      return absl::InvalidArgumentError("not a table function: " +
                                        ToString(next.function));
  }
}

Packet CrossBridge(const Bridge& bridge, const MemberRef& from, Packet packet) {
  const BridgePort& peer = bridge.Peer(from);
  Layer& outer = packet.mutable_outer();
  for (const Rewrite& rewrite : bridge.rewrites) {
    if (rewrite.from_network != from.network) continue;
    auto it = outer.header.find(rewrite.field);
    if (it != outer.header.end() && it->second == rewrite.from) {
      it->second = rewrite.to;
    }
  }
  outer.network = peer.network;
  return packet;
}

Snapshot VisibleTo(const Topology& topology, const Packet& packet,
                   const MachineId& viewer) {
  Snapshot snapshot;
  const auto& layers = packet.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    snapshot.visible.push_back(*it);
    if (std::next(it) == layers.rend()) break;
    if (it->sealed_by.has_value() &&
        !topology.EndpointMachines(*it->sealed_by).contains(viewer)) {
      snapshot.sealed = true;
      break;
    }
  }
  return snapshot;
}

}  // namespace compnet
