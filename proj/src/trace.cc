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


#include "compnet/trace.h"

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"

namespace compnet {
namespace {

class Driver {
 public:
  Driver(const Topology& topology, const TraceOptions& options)
      : topology_(topology), options_(options) {}

  absl::StatusOr<Trace> Run(Next next, Packet packet) {
    int transmits = 0;
    // Every cycle through the tables crosses a Transmit; the event cap only
    // guards against malformed inputs.
    const size_t event_cap = 16 * static_cast<size_t>(options_.max_hops + 4);
    while (true) {
      if (next.function == Function::kTransmit &&
          ++transmits > options_.max_hops) {
        trace_.outcome.kind = TraceOutcome::Kind::kLoopDetected;
        break;
      }
      if (trace_.events.size() > event_cap) {
        trace_.outcome.kind = TraceOutcome::Kind::kLoopDetected;
        break;
      }
      const Member* member = topology_.FindMember(next.member);
      if (member == nullptr) {
        return absl::NotFoundError("unknown member " + next.member.ToString());
      }
      absl::StatusOr<StepResult> step = Apply(topology_, next, std::move(packet));
      if (!step.ok()) return step.status();
      packet = std::move(step->packet);
      Record(*member, next.function, step->key, step->action, packet);

      if (const auto* n = std::get_if<Next>(&step->outcome)) {
        next = *n;
      } else if (const auto* emit = std::get_if<Emit>(&step->outcome)) {
        absl::StatusOr<Next> hop = Hop(*member, *emit, packet);
        if (!hop.ok()) return hop.status();
        next = *hop;
      } else if (const auto* d = std::get_if<Delivered>(&step->outcome)) {
        trace_.outcome = {TraceOutcome::Kind::kDelivered, d->member,
                          Function::kReceive, DropMarker::kNoRule};
        break;
      } else {
        const auto& dropped = std::get<Dropped>(step->outcome);
        trace_.outcome = {TraceOutcome::Kind::kDropped, dropped.member,
                          dropped.function, dropped.marker};
        break;
      }
    }
    trace_.final_packet = std::move(packet);
    return std::move(trace_);
  }

 private:
  void Record(const Member& member, Function function, std::string key,
              std::string action, const Packet& packet) {
    TraceEvent event;
    event.step = static_cast<int>(trace_.events.size()) + 1;
    event.machine = member.machine;
    event.network = member.network;
    event.member = member.name;
    event.function = function;
    event.key = std::move(key);
    event.action = std::move(action);
    event.snapshot = VisibleTo(topology_, packet, member.machine);
    trace_.events.push_back(std::move(event));
  }

  // Moves an emitted packet to the next member: across a bridge on the same
  // machine, or over the wire of a Primitive link.
  absl::StatusOr<Next> Hop(const Member& member, const Emit& emit,
                           Packet& packet) {
    if (const Bridge* bridge = topology_.BridgeAt(member.ref(), emit.link)) {
      const BridgePort& peer = bridge->Peer(member.ref());
      FieldMap before = packet.header();
      packet = CrossBridge(*bridge, member.ref(), std::move(packet));
      std::vector<std::string> changes;
      for (const auto& [field, value] : packet.header()) {
        if (before[field] != value) {
          changes.push_back(absl::StrCat(field, ":", before[field], ">", value));
        }
      }
      Record(member, Function::kBridgeRewrite, emit.port,
             absl::StrCat(peer.ref().ToString(), ":", peer.port.value(),
                          changes.empty() ? "" : " ",
                          absl::StrJoin(changes, ",")),
             packet);
      return Next{Function::kAcquire, peer.ref(), peer.port};
    }
    const Link* link = topology_.LinkAt(member.ref(), emit.link);
    std::optional<LinkEnd> far;
    if (link != nullptr) far = topology_.FarEnd(*link, member.name);
    if (!far.has_value()) {
      return absl::FailedPreconditionError(
          absl::StrCat("emit at ", member.ref().ToString(), " on ",
                       emit.link.value(), ": no link or bridge"));
    }
    Record(member, Function::kWireHop, emit.port,
           absl::StrCat(far->member.value(), ":", far->local.value()), packet);
    return Next{Function::kAcquire, {member.network, far->member}, far->local};
  }

  const Topology& topology_;
  const TraceOptions& options_;
  Trace trace_;
};

std::string FormatFields(const Topology& topology, const Layer& layer) {
  std::vector<std::string> parts;
  const Network* network = topology.FindNetwork(layer.network);
  if (network != nullptr) {
    for (const FieldSpec& field : network->schema.fields) {
      auto it = layer.header.find(field.name);
      if (it != layer.header.end()) {
        parts.push_back(absl::StrCat(field.name, "=", it->second));
      }
    }
  }
  if (parts.size() != layer.header.size()) {
    parts.clear();
    for (const auto& [k, v] : layer.header) parts.push_back(absl::StrCat(k, "=", v));
  }
  return absl::StrJoin(parts, ",");
}

}  // namespace

std::string TraceOutcome::ToString() const {
  switch (kind) {
    case Kind::kDelivered:
      return "Delivered " + member.ToString();
    case Kind::kDropped:
      return absl::StrCat("Dropped ", member.ToString(), " ",
                          compnet::ToString(function), " ",
                          compnet::ToString(marker));
    case Kind::kLoopDetected:
      return "LoopDetected";
  }
  return "?";
}

absl::StatusOr<Trace> Inject(const Topology& topology, const MemberRef& origin,
                             Packet packet, const LocalLinkId& local_link,
                             const TraceOptions& options) {
  if (topology.FindMember(origin) == nullptr) {
    return absl::NotFoundError("unknown member " + origin.ToString());
  }
  return Driver(topology, options)
      .Run(Next{Function::kTransmit, origin, local_link}, std::move(packet));
}

absl::StatusOr<Trace> Originate(const Topology& topology,
                                const MemberRef& origin, Packet packet,
                                const TraceOptions& options) {
  if (topology.FindMember(origin) == nullptr) {
    return absl::NotFoundError("unknown member " + origin.ToString());
  }
  packet.meta().in_link = SelfLink();
  return Driver(topology, options)
      .Run(Next{Function::kForward, origin, std::nullopt}, std::move(packet));
}

ProvenanceChain Provenance(const Topology& topology, const Trace& trace) {
  ProvenanceChain chain;
  for (const TraceEvent& event : trace.events) {
    if (event.function != Function::kTransmit) continue;
    const Link* link =
        topology.LinkAt(event.member_ref(), LocalLinkId(event.key));
    if (link == nullptr || !link->external.has_value()) continue;
    chain.push_back({link->ref(), *link->external});
  }
  return chain;
}

std::vector<MemberName> ProjectPath(const Trace& trace,
                                    const NetworkId& network) {
  std::vector<MemberName> path;
  for (const TraceEvent& event : trace.events) {
    if (event.network != network) continue;
    if (path.empty() || path.back() != event.member) {
      path.push_back(event.member);
    }
  }
  return path;
}

std::string FormatTrace(const Topology& topology, const Trace& trace) {
  std::string out;
  for (const TraceEvent& e : trace.events) {
    absl::StrAppend(&out, e.step, " ", e.machine.value(), " ",
                    e.network.value(), " ", e.member.value(), " ",
                    ToString(e.function), " ", e.key, " -> ", e.action);
    for (size_t i = 0; i < e.snapshot.visible.size(); ++i) {
      absl::StrAppend(&out, i == 0 ? " | header=" : " | inner=",
                      FormatFields(topology, e.snapshot.visible[i]));
    }
    if (e.snapshot.sealed) absl::StrAppend(&out, " | inner=<sealed>");
    out += "\n";
  }
  absl::StrAppend(&out, "outcome ", trace.outcome.ToString(), "\n");
  return out;
}

std::string TraceToJson(const Topology& topology, const Trace& trace) {
  (void)topology;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const TraceEvent& e : trace.events) {
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const Layer& layer : e.snapshot.visible) {
      layers.push_back({{"network", layer.network.value()},
                        {"header", layer.header}});
    }
    events.push_back({{"step", e.step},
                      {"machine", e.machine.value()},
                      {"network", e.network.value()},
                      {"member", e.member.value()},
                      {"function", ToString(e.function)},
                      {"key", e.key},
                      {"action", e.action},
                      {"layers", layers},
                      {"sealed", e.snapshot.sealed}});
  }
  nlohmann::ordered_json outcome = {{"text", trace.outcome.ToString()}};
  switch (trace.outcome.kind) {
    case TraceOutcome::Kind::kDelivered:
      outcome["kind"] = "Delivered";
      break;
    case TraceOutcome::Kind::kDropped:
      outcome["kind"] = "Dropped";
      outcome["marker"] = ToString(trace.outcome.marker);
      break;
    case TraceOutcome::Kind::kLoopDetected:
      outcome["kind"] = "LoopDetected";
      break;
  }
  if (trace.outcome.kind != TraceOutcome::Kind::kLoopDetected) {
    outcome["member"] = trace.outcome.member.ToString();
  }
  nlohmann::ordered_json doc = {{"events", events}, {"outcome", outcome}};
  return doc.dump(2) + "\n";
}

}  // namespace compnet
