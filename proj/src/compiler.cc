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


#include "compnet/compiler.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "compnet/header_space.h"

namespace compnet {
namespace {

constexpr Function kNodeFunctions[] = {Function::kTransmit, Function::kSend,
                                       Function::kForward, Function::kAcquire,
                                       Function::kReceive};
constexpr uint64_t kExhaustiveHeaders = 256;

absl::Status Invalid(const Assumption& assumption, const std::string& why) {
  return absl::FailedPreconditionError(
      absl::StrCat("InvalidAssumption: ", assumption.ToString(), ": ", why));
}

absl::Status UnknownMachine(const MachineId& machine) {
  return absl::NotFoundError("UnknownMachine: " + machine.value());
}

// A member on `machine` named either "name" (when unambiguous) or "net.name".
const Member* MemberOnMachineNamed(const Topology& topology,
                                   const MachineId& machine,
                                   const std::string& name) {
  const Member* found = nullptr;
  for (const Member* m : topology.MembersOnMachine(machine)) {
    if (m->ref().ToString() == name) return m;
    if (m->name.value() == name) {
      if (found != nullptr) return nullptr;
      found = m;
    }
  }
  return found;
}

std::string FactName(const Topology& topology, const Member& member) {
  const Member* by_name =
      MemberOnMachineNamed(topology, member.machine, member.name.value());
  return by_name == &member ? member.name.value() : member.ref().ToString();
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

// Compiles the rules of one stage by walking the tables from each entry node
// until the packet terminates or leaves the stage.
class StageCompiler {
 public:
  StageCompiler(const Topology& topology, const StagePlan& plan, int stage)
      : topology_(topology), plan_(plan), stage_(stage) {}

  std::vector<FusedRule> Compile(int entry) {
    entry_ = entry;
    rules_.clear();
    prefix_.clear();
    Visit(entry, /*entering=*/true, std::nullopt, std::nullopt);
    return std::move(rules_);
  }

 private:
  int Node(const MemberRef& member, Function function) const {
    return plan_.NodeIndex(member, function);
  }

  void Emit(FusedAction action) {
    rules_.push_back({entry_, prefix_, std::move(action)});
  }

  void Drop(const Member& m, Function f, DropMarker marker) {
    FusedAction a;
    a.kind = FusedAction::Kind::kDrop;
    a.member = m.ref();
    a.function = f;
    a.marker = marker;
    Emit(std::move(a));
  }

  void Error(std::string message) {
    FusedAction a;
    a.kind = FusedAction::Kind::kError;
    a.error = std::move(message);
    Emit(std::move(a));
  }

  FusedOp Op(FusedOp::Kind kind, const Member& m) {
    FusedOp op;
    op.kind = kind;
    op.member = m.ref();
    op.network = m.network;
    return op;
  }

  void Push(FusedOp op) { prefix_.push_back(std::move(op)); }
  void Pop() { prefix_.pop_back(); }

  void Visit(int node, bool entering, std::optional<LocalLinkId> link,
             std::optional<SessionId> session) {
    if (!entering && plan_.node_stage[node] != stage_) {
      FusedAction a;
      a.kind = FusedAction::Kind::kContinue;
      a.next = node;
      if (link.has_value()) {
        a.link = *link;
        a.has_link = true;
      }
      Emit(std::move(a));
      return;
    }
    const StageNode& sn = plan_.nodes[node];
    const Member& m = *topology_.FindMember(sn.member);
    switch (sn.function) {
      case Function::kTransmit:
        Transmit(m, link);
        break;
      case Function::kSend:
        Send(m, session);
        break;
      case Function::kForward:
        Forward(m);
        break;
      case Function::kAcquire:
        Acquire(m, entering);
        break;
      case Function::kReceive:
        Receive(m);
        break;
      default:
        break;
    }
  }

  void Transmit(const Member& m, const std::optional<LocalLinkId>& link) {
    Push(Op(FusedOp::Kind::kRequireNetwork, m));
    if (link.has_value()) {
      TransmitOn(m, *link);
    } else {
      for (const auto& [local, action] : m.tables.transmit) {
        FusedOp guard = Op(FusedOp::Kind::kGuardLink, m);
        guard.link = local;
        Push(std::move(guard));
        TransmitOn(m, local);
        Pop();
      }
      Drop(m, Function::kTransmit, DropMarker::kNoRule);
    }
    Pop();
  }

  void TransmitOn(const Member& m, const LocalLinkId& local) {
    auto it = m.tables.transmit.find(local);
    if (it == m.tables.transmit.end()) {
      Drop(m, Function::kTransmit, DropMarker::kNoRule);
      return;
    }
    if (const auto* port = std::get_if<PrimitivePort>(&it->second)) {
      FusedAction a;
      a.kind = FusedAction::Kind::kEmit;
      a.member = m.ref();
      a.link = local;
      a.has_link = true;
      a.port = port->port;
      Emit(std::move(a));
      return;
    }
    const SessionRef& session = std::get<ExternalSession>(it->second).session;
    const Member* sender =
        topology_.MemberOnMachineInGroup(m.machine, session.network);
    if (sender == nullptr) {
      Error(absl::StrCat("machine ", m.machine.value(), " has no member in ",
                         session.network.value(), " to send session ",
                         session.id.value()));
      return;
    }
    FusedOp set = Op(FusedOp::Kind::kSetSession, m);
    set.session = session.id;
    Push(std::move(set));
    Visit(Node(sender->ref(), Function::kSend), false, std::nullopt, session.id);
    Pop();
  }

  void Send(const Member& u, const std::optional<SessionId>& session) {
    if (session.has_value()) {
      SendOn(u, *session);
      return;
    }
    Push(Op(FusedOp::Kind::kRequireSession, u));
    for (const auto& [sid, encoding] : u.tables.send) {
      FusedOp guard = Op(FusedOp::Kind::kGuardSession, u);
      guard.session = sid;
      Push(std::move(guard));
      SendOn(u, sid);
      Pop();
    }
    Drop(u, Function::kSend, DropMarker::kNoRule);
    Pop();
  }

  void SendOn(const Member& u, const SessionId& sid) {
    auto it = u.tables.send.find(sid);
    if (it == u.tables.send.end()) {
      Drop(u, Function::kSend, DropMarker::kNoRule);
      return;
    }
    FusedOp encap = Op(FusedOp::Kind::kEncap, u);
    encap.header = it->second;
    if (const Session* s = topology_.FindSessionInGroup(u.network, sid);
        s != nullptr && s->encrypting()) {
      encap.seal = s->ref();
    }
    Push(std::move(encap));
    Visit(Node(u.ref(), Function::kForward), false, std::nullopt, std::nullopt);
    Pop();
  }

  void Forward(const Member& m) {
    Push(Op(FusedOp::Kind::kRequireNetwork, m));
    for (const ForwardRule& rule : m.tables.forward.rules()) {
      FusedOp guard = Op(FusedOp::Kind::kGuardMatch, m);
      guard.match = rule.match;
      Push(std::move(guard));
      if (const auto* out = std::get_if<OutLink>(&rule.action)) {
        Visit(Node(m.ref(), Function::kTransmit), false, out->link, std::nullopt);
      } else {
        Drop(m, Function::kForward, DropMarker::kPolicy);
      }
      Pop();
    }
    Drop(m, Function::kForward, DropMarker::kNoRule);
    Pop();
  }

  void Acquire(const Member& m, bool entering) {
    Push(Op(FusedOp::Kind::kRequireNetwork, m));
    if (entering) Push(Op(FusedOp::Kind::kLoadInLink, m));
    for (const AcquireRule& rule : m.tables.acquire.rules()) {
      FusedOp guard = Op(FusedOp::Kind::kGuardMatch, m);
      guard.match = rule.match;
      Push(std::move(guard));
      Function next = rule.action == AcquireAction::kReceive ? Function::kReceive
                                                             : Function::kForward;
      Visit(Node(m.ref(), next), false, std::nullopt, std::nullopt);
      Pop();
    }
    Drop(m, Function::kAcquire, DropMarker::kNoRule);
    if (entering) Pop();
    Pop();
  }

  void Receive(const Member& m) {
    HeaderSchema key_schema;
    if (const Network* net = topology_.FindNetwork(m.network)) {
      for (const std::string& name : net->schema.SessionKeyFields()) {
        key_schema.fields.push_back(*net->schema.Find(name));
      }
    }
    Push(Op(FusedOp::Kind::kRequireNetwork, m));
    FusedOp no_key = Op(FusedOp::Kind::kGuardNoKey, m);
    no_key.key_schema = key_schema;
    Push(std::move(no_key));
    Drop(m, Function::kReceive, DropMarker::kMalformed);
    Pop();
    for (const auto& [sid, action] : m.tables.receive) {
      FusedOp guard = Op(FusedOp::Kind::kGuardKey, m);
      guard.key_schema = key_schema;
      guard.session = sid;
      Push(std::move(guard));
      if (std::holds_alternative<PrimitiveDelivery>(action)) {
        FusedAction a;
        a.kind = FusedAction::Kind::kDeliver;
        a.member = m.ref();
        Emit(std::move(a));
      } else {
        ReceiveInto(m, std::get<ExternalLink>(action).link);
      }
      Pop();
    }
    Drop(m, Function::kReceive, DropMarker::kNoRule);
    Pop();
  }

  void ReceiveInto(const Member& m, const LinkRef& target) {
    const Member* upper = topology_.MemberOnMachine(m.machine, target.network);
    const Link* link = topology_.FindLink(target);
    std::optional<LocalLinkId> local;
    if (upper != nullptr && link != nullptr) {
      local = topology_.LocalIdOf(*link, upper->name);
    }
    if (!local.has_value()) {
      Error(absl::StrCat("Receive at ", m.ref().ToString(), ": no member of link ",
                         target.ToString(), " on machine ", m.machine.value()));
      return;
    }
    FusedOp strip = Op(FusedOp::Kind::kStrip, m);
    strip.network = target.network;
    strip.link = *local;
    Push(std::move(strip));
    Visit(Node(upper->ref(), Function::kAcquire), false, *local, std::nullopt);
    Pop();
  }

  const Topology& topology_;
  const StagePlan& plan_;
  const int stage_;
  int entry_ = -1;
  std::vector<FusedOp> prefix_;
  std::vector<FusedRule> rules_;
};

std::string OpString(const FusedOp& op) {
  switch (op.kind) {
    case FusedOp::Kind::kRequireNetwork:
      return "net=" + op.network.value();
    case FusedOp::Kind::kRequireSession:
      return "sessIdent?";
    case FusedOp::Kind::kLoadInLink:
      return "load-inLink";
    case FusedOp::Kind::kGuardLink:
      return "link=" + op.link->value();
    case FusedOp::Kind::kGuardMatch:
      return "[" + op.match.ToString() + "]";
    case FusedOp::Kind::kGuardNoKey:
      return "key=none";
    case FusedOp::Kind::kGuardKey:
      return "key=" + op.session.value();
    case FusedOp::Kind::kGuardSession:
      return "sessIdent=" + op.session.value();
    case FusedOp::Kind::kSetSession:
      return "set-sessIdent " + op.session.value();
    case FusedOp::Kind::kEncap:
      return absl::StrCat("encap ", op.network.value(), "(",
                          FieldMapToString(op.header), ")",
                          op.seal ? " sealed" : "");
    case FusedOp::Kind::kStrip:
      return absl::StrCat("strip ", op.network.value(), " inLink=",
                          op.link->value());
  }
  return "?";
}

enum class OpResult { kPass, kFail, kDropped };

// Applies one op to `packet`; errors mirror the table functions' preconditions.
absl::StatusOr<OpResult> Eval(const FusedOp& op, const std::optional<LocalLinkId>& link,
                              Packet& packet) {
  switch (op.kind) {
    case FusedOp::Kind::kRequireNetwork:
      if (packet.depth() == 0 || packet.network() != op.network) {
        return absl::FailedPreconditionError(
            absl::StrCat("at ", op.member.ToString(), ": packet is not a ",
                         op.network.value(), " packet"));
      }
      return OpResult::kPass;
    case FusedOp::Kind::kRequireSession:
      if (!packet.meta().sess_ident.has_value()) {
        return absl::FailedPreconditionError(absl::StrCat(
            "Send at ", op.member.ToString(), ": packet carries no sessIdent"));
      }
      return OpResult::kPass;
    case FusedOp::Kind::kLoadInLink:
      if (!link.has_value()) {
        return absl::InvalidArgumentError("Acquire needs an inLink");
      }
      packet.meta().in_link = link;
      return OpResult::kPass;
    case FusedOp::Kind::kGuardLink:
      return link == op.link ? OpResult::kPass : OpResult::kFail;
    case FusedOp::Kind::kGuardMatch:
      return op.match.Matches(packet.meta().in_link, packet.header())
                 ? OpResult::kPass
                 : OpResult::kFail;
    case FusedOp::Kind::kGuardNoKey:
      return SessionKeyOf(op.key_schema, packet.header()).has_value()
                 ? OpResult::kFail
                 : OpResult::kPass;
    case FusedOp::Kind::kGuardKey:
      return SessionKeyOf(op.key_schema, packet.header()) == op.session
                 ? OpResult::kPass
                 : OpResult::kFail;
    case FusedOp::Kind::kGuardSession:
      return packet.meta().sess_ident == op.session ? OpResult::kPass
                                                    : OpResult::kFail;
    case FusedOp::Kind::kSetSession:
      packet.meta().sess_ident = op.session;
      return OpResult::kPass;
    case FusedOp::Kind::kEncap:
      packet.Encapsulate(op.network, op.header, op.seal);
      packet.meta().in_link = SelfLink();
      return OpResult::kPass;
    case FusedOp::Kind::kStrip:
      if (!packet.Decapsulate() || packet.network() != op.network) {
        return OpResult::kDropped;
      }
      packet.meta().in_link = op.link;
      packet.meta().sess_ident.reset();
      return OpResult::kPass;
  }
  return OpResult::kFail;
}

std::vector<FieldMap> SampleHeaders(const Topology& topology,
                                    const NetworkId& network) {
  const Network* net = topology.FindNetwork(network);
  if (net == nullptr) return {};
  HeaderSet universe = HeaderSet::Universe(net->schema);
  if (universe.Count() <= kExhaustiveHeaders) return universe.Enumerate();
  // Too many to enumerate: one header per rule match, plus every single-field
  // variation of the smallest header.
  std::set<FieldMap> out;
  auto add = [&](const Match& match) {
    if (auto h = HeaderSet::FromMatch(net->schema, match).Witness()) out.insert(*h);
  };
  add(Match{});
  auto it = topology.members.find(network);
  if (it != topology.members.end()) {
    for (const auto& [name, m] : it->second) {
      for (const ForwardRule& r : m.tables.forward.rules()) add(r.match);
      for (const AcquireRule& r : m.tables.acquire.rules()) add(r.match);
    }
  }
  FieldMap base = *universe.Witness();
  for (const FieldSpec& field : net->schema.fields) {
    for (const std::string& value : field.domain) {
      FieldMap h = base;
      h[field.name] = value;
      out.insert(std::move(h));
    }
  }
  return {out.begin(), out.end()};
}

std::string ResultString(const absl::StatusOr<MachineResult>& r) {
  if (!r.ok()) return "error(" + r.status().ToString() + ")";
  std::vector<std::string> layers;
  for (const Layer& layer : r->packet.layers()) {
    layers.push_back(absl::StrCat(layer.network.value(), "(",
                                  FieldMapToString(layer.header), ")"));
  }
  return absl::StrCat(ToString(r->outcome), " packet=", absl::StrJoin(layers, "/"));
}

bool SameResult(const absl::StatusOr<MachineResult>& a,
                const absl::StatusOr<MachineResult>& b) {
  if (!a.ok() || !b.ok()) {
    return !a.ok() && !b.ok() && a.status().code() == b.status().code();
  }
  return ToString(a->outcome) == ToString(b->outcome) && a->packet == b->packet;
}

}  // namespace

std::string Assumption::ToString() const {
  if (kind == Kind::kLinksExternal) {
    return absl::StrCat("links-external:", overlay, ":", underlay);
  }
  return "links-primitive:" + underlay;
}

absl::StatusOr<Assumption> ParseAssumption(std::string_view text) {
  std::vector<std::string> parts = absl::StrSplit(std::string(text), ':');
  if (parts.size() == 3 && parts[0] == "links-external" && !parts[1].empty() &&
      !parts[2].empty()) {
    return Assumption{Assumption::Kind::kLinksExternal, parts[1], parts[2]};
  }
  if (parts.size() == 2 && parts[0] == "links-primitive" && !parts[1].empty()) {
    return Assumption{Assumption::Kind::kLinksPrimitive, "", parts[1]};
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "bad assumption '", std::string(text),
      "'; expected links-external:O:U or links-primitive:U"));
}

std::string StageNode::ToString() const {
  return absl::StrCat(member.ToString(), " ", compnet::ToString(function));
}

std::string FusedRule::ToString(const std::vector<StageNode>& nodes) const {
  std::vector<std::string> ops_text;
  for (const FusedOp& op : ops) ops_text.push_back(OpString(op));
  std::string action_text;
  switch (action.kind) {
    case FusedAction::Kind::kDrop:
      action_text = absl::StrCat("drop ", compnet::ToString(action.marker), " at ",
                                 action.member.ToString(), " ",
                                 compnet::ToString(action.function));
      break;
    case FusedAction::Kind::kEmit:
      action_text = absl::StrCat("emit ", action.link.value(), " port ", action.port);
      break;
    case FusedAction::Kind::kContinue:
      action_text = absl::StrCat("goto ", nodes[action.next].ToString(),
                                 action.has_link ? " " + action.link.value() : "");
      break;
    case FusedAction::Kind::kDeliver:
      action_text = "deliver " + action.member.ToString();
      break;
    case FusedAction::Kind::kError:
      action_text = "error " + action.error;
      break;
  }
  return absl::StrCat(nodes[entry].ToString(), ": ",
                      ops_text.empty() ? "*" : absl::StrJoin(ops_text, " "),
                      " -> ", action_text);
}

int StagePlan::NodeIndex(const MemberRef& member, Function function) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].member == member && nodes[i].function == function) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

size_t StagePlan::RuleCount() const {
  size_t n = 0;
  for (const Stage& stage : stages) n += stage.rules.size();
  return n;
}

absl::Status CheckAssumption(const Topology& topology, const MachineId& machine,
                             const Assumption& assumption) {
  if (!topology.machines.contains(machine)) return UnknownMachine(machine);
  const Member* u = MemberOnMachineNamed(topology, machine, assumption.underlay);
  if (u == nullptr) {
    return Invalid(assumption, absl::StrCat("no member ", assumption.underlay,
                                            " on ", machine.value()));
  }
  if (assumption.kind == Assumption::Kind::kLinksPrimitive) {
    if (u->local_links.empty()) return Invalid(assumption, "member has no links");
    for (const auto& [local, link_id] : u->local_links) {
      const Link* link = topology.FindLink({u->network, link_id});
      if (link == nullptr || !link->primitive()) {
        return Invalid(assumption, absl::StrCat("link ", link_id.value(),
                                                " is not Primitive"));
      }
    }
    for (const auto& [local, action] : u->tables.transmit) {
      if (!std::holds_alternative<PrimitivePort>(action)) {
        return Invalid(assumption, absl::StrCat("Transmit on ", local.value(),
                                                " starts a session"));
      }
    }
    return absl::OkStatus();
  }
  const Member* o = MemberOnMachineNamed(topology, machine, assumption.overlay);
  if (o == nullptr) {
    return Invalid(assumption, absl::StrCat("no member ", assumption.overlay,
                                            " on ", machine.value()));
  }
  if (o == u) return Invalid(assumption, "overlay and underlay coincide");
  if (o->local_links.empty()) return Invalid(assumption, "member has no links");
  auto sent_by_u = [&](const SessionRef& session) {
    return topology.MemberOnMachineInGroup(machine, session.network) == u;
  };
  for (const auto& [local, link_id] : o->local_links) {
    const Link* link = topology.FindLink({o->network, link_id});
    if (link == nullptr || link->primitive()) {
      return Invalid(assumption,
                     absl::StrCat("link ", link_id.value(), " is Primitive"));
    }
    if (!sent_by_u(*link->external)) {
      return Invalid(assumption, absl::StrCat("link ", link_id.value(),
                                              " is not carried by ",
                                              assumption.underlay));
    }
  }
  for (const auto& [local, action] : o->tables.transmit) {
    const auto* ext = std::get_if<ExternalSession>(&action);
    if (ext == nullptr || !sent_by_u(ext->session)) {
      return Invalid(assumption, absl::StrCat("Transmit on ", local.value(),
                                              " does not hand over to ",
                                              assumption.underlay));
    }
  }
  return absl::OkStatus();
}

std::vector<Assumption> DeriveAssumptions(const Topology& topology,
                                          const MachineId& machine) {
  std::vector<Assumption> out;
  std::vector<const Member*> members = topology.MembersOnMachine(machine);
  for (const Member* o : members) {
    for (const Member* u : members) {
      if (o == u) continue;
      Assumption a{Assumption::Kind::kLinksExternal, FactName(topology, *o),
                   FactName(topology, *u)};
      if (CheckAssumption(topology, machine, a).ok()) out.push_back(a);
    }
  }
  for (const Member* u : members) {
    Assumption a{Assumption::Kind::kLinksPrimitive, "", FactName(topology, *u)};
    if (CheckAssumption(topology, machine, a).ok()) out.push_back(a);
  }
  return out;
}

absl::StatusOr<StagePlan> Fuse(const Topology& topology,
                               const MachineId& machine,
                               const std::vector<Assumption>& assumptions) {
  if (!topology.machines.contains(machine)) return UnknownMachine(machine);
  StagePlan plan;
  plan.machine = machine;
  plan.assumptions = assumptions;
  const std::vector<const Member*> members = topology.MembersOnMachine(machine);
  for (const Member* m : members) {
    for (Function f : kNodeFunctions) plan.nodes.push_back({m->ref(), f});
  }
  auto node = [&](const Member& m, Function f) { return plan.NodeIndex(m.ref(), f); };

  std::set<std::pair<int, int>> edges;
  for (const Member* m : members) {
    edges.insert({node(*m, Function::kAcquire), node(*m, Function::kReceive)});
    edges.insert({node(*m, Function::kAcquire), node(*m, Function::kForward)});
    edges.insert({node(*m, Function::kForward), node(*m, Function::kTransmit)});
    edges.insert({node(*m, Function::kSend), node(*m, Function::kForward)});
  }
  for (const Member* o : members) {
    std::vector<SessionRef> sessions;
    for (const auto& [local, link_id] : o->local_links) {
      const Link* link = topology.FindLink({o->network, link_id});
      if (link != nullptr && link->external) sessions.push_back(*link->external);
    }
    for (const auto& [local, action] : o->tables.transmit) {
      if (const auto* ext = std::get_if<ExternalSession>(&action)) {
        sessions.push_back(ext->session);
      }
    }
    for (const SessionRef& s : sessions) {
      const Member* u = topology.MemberOnMachineInGroup(machine, s.network);
      if (u == nullptr || u == o) continue;
      edges.insert({node(*o, Function::kTransmit), node(*u, Function::kSend)});
      edges.insert({node(*u, Function::kReceive), node(*o, Function::kAcquire)});
    }
  }
  plan.edges.assign(edges.begin(), edges.end());

  const int n = static_cast<int>(plan.nodes.size());
  UnionFind groups(n);
  for (const Assumption& a : assumptions) {
    if (absl::Status s = CheckAssumption(topology, machine, a); !s.ok()) return s;
    const Member* u = MemberOnMachineNamed(topology, machine, a.underlay);
    if (a.kind == Assumption::Kind::kLinksPrimitive) {
      groups.Union(node(*u, Function::kForward), node(*u, Function::kTransmit));
      continue;
    }
    const Member* o = MemberOnMachineNamed(topology, machine, a.overlay);
    groups.Union(node(*o, Function::kForward), node(*o, Function::kTransmit));
    groups.Union(node(*o, Function::kTransmit), node(*u, Function::kSend));
    groups.Union(node(*u, Function::kReceive), node(*o, Function::kAcquire));
  }

  // Longest-path levels over the contracted graph.
  std::map<int, std::set<int>> succ;
  std::map<int, int> indegree;
  for (int i = 0; i < n; ++i) indegree.try_emplace(groups.Find(i), 0);
  for (const auto& [a, b] : plan.edges) {
    int ga = groups.Find(a), gb = groups.Find(b);
    if (ga != gb && succ[ga].insert(gb).second) ++indegree[gb];
  }
  std::map<int, int> level;
  std::vector<int> ready;
  for (const auto& [g, d] : indegree) {
    if (d == 0) ready.push_back(g);
  }
  size_t visited = 0;
  while (!ready.empty()) {
    int g = ready.back();
    ready.pop_back();
    ++visited;
    for (int s : succ[g]) {
      level[s] = std::max(level[s], level[g] + 1);
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  if (visited != indegree.size()) {
    return absl::FailedPreconditionError(
        "InvalidAssumption: fusion creates a cycle between stages");
  }

  std::map<int, int> stage_of_group;
  std::vector<std::pair<std::pair<int, int>, int>> order;  // ((level, group), _)
  for (const auto& [g, d] : indegree) order.push_back({{level[g], g}, g});
  std::sort(order.begin(), order.end());
  for (const auto& [key, g] : order) {
    stage_of_group[g] = static_cast<int>(plan.stages.size());
    plan.stages.push_back(Stage{key.first, {}, {}});
    plan.stage_count = std::max(plan.stage_count, key.first + 1);
  }
  plan.node_stage.resize(n);
  for (int i = 0; i < n; ++i) {
    plan.node_stage[i] = stage_of_group[groups.Find(i)];
    plan.stages[plan.node_stage[i]].nodes.push_back(i);
  }

  for (int s = 0; s < static_cast<int>(plan.stages.size()); ++s) {
    StageCompiler compiler(topology, plan, s);
    for (int entry : plan.stages[s].nodes) {
      Function f = plan.nodes[entry].function;
      bool is_entry = f == Function::kAcquire || f == Function::kForward;
      bool inner_pred = false;
      for (const auto& [a, b] : plan.edges) {
        if (b != entry) continue;
        if (plan.node_stage[a] == s) {
          inner_pred = true;
        } else {
          is_entry = true;
        }
      }
      if (!inner_pred) is_entry = true;
      if (!is_entry) continue;
      std::vector<FusedRule> rules = compiler.Compile(entry);
      auto& dest = plan.stages[s].rules;
      dest.insert(dest.end(), std::make_move_iterator(rules.begin()),
                  std::make_move_iterator(rules.end()));
    }
  }
  return plan;
}

absl::StatusOr<MachineResult> RunUnfused(const Topology& topology,
                                         const Ingress& ingress, Packet packet) {
  Next next{ingress.function, ingress.member, ingress.in_link};
  for (int steps = 0; steps < 256; ++steps) {
    absl::StatusOr<StepResult> step = Apply(topology, next, std::move(packet));
    if (!step.ok()) return step.status();
    packet = std::move(step->packet);
    if (const auto* n = std::get_if<Next>(&step->outcome)) {
      next = *n;
      continue;
    }
    return MachineResult{step->outcome, std::move(packet)};
  }
  return absl::InternalError("machine-local processing did not terminate");
}

absl::StatusOr<MachineResult> RunFused(const StagePlan& plan,
                                       const Ingress& ingress, Packet packet) {
  int node = plan.NodeIndex(ingress.member, ingress.function);
  if (node < 0) {
    return absl::NotFoundError(absl::StrCat("no stage for ", ingress.member.ToString(),
                                            " ", ToString(ingress.function)));
  }
  std::optional<LocalLinkId> link = ingress.in_link;
  for (size_t hops = 0; hops <= plan.nodes.size() + 1; ++hops) {
    const Stage& stage = plan.stages[plan.node_stage[node]];
    const FusedRule* chosen = nullptr;
    Packet work;
    for (const FusedRule& rule : stage.rules) {
      if (rule.entry != node) continue;
      work = packet;
      OpResult result = OpResult::kPass;
      const FusedOp* last = nullptr;
      for (const FusedOp& op : rule.ops) {
        absl::StatusOr<OpResult> r = Eval(op, link, work);
        if (!r.ok()) return r.status();
        result = *r;
        last = &op;
        if (result != OpResult::kPass) break;
      }
      if (result == OpResult::kFail) continue;
      if (result == OpResult::kDropped) {
        return MachineResult{Dropped{last->member, Function::kReceive,
                                     DropMarker::kMalformed},
                             std::move(work)};
      }
      chosen = &rule;
      break;
    }
    if (chosen == nullptr) {
      return absl::InternalError("no compiled rule for " +
                                 plan.nodes[node].ToString());
    }
    const FusedAction& a = chosen->action;
    switch (a.kind) {
      case FusedAction::Kind::kDrop:
        return MachineResult{Dropped{a.member, a.function, a.marker},
                             std::move(work)};
      case FusedAction::Kind::kEmit:
        return MachineResult{Emit{a.member, a.link, a.port}, std::move(work)};
      case FusedAction::Kind::kDeliver:
        return MachineResult{Delivered{a.member}, std::move(work)};
      case FusedAction::Kind::kError:
        return absl::FailedPreconditionError(a.error);
      case FusedAction::Kind::kContinue:
        node = a.next;
        link = a.has_link ? std::optional<LocalLinkId>(a.link) : std::nullopt;
        packet = std::move(work);
        break;
    }
  }
  return absl::InternalError("stage plan did not terminate");
}

absl::StatusOr<EquivalenceReport> CheckEquivalence(const Topology& topology,
                                                   const StagePlan& plan) {
  if (!topology.machines.contains(plan.machine)) return UnknownMachine(plan.machine);
  EquivalenceReport report;
  auto check = [&](const Ingress& ingress, const Packet& packet) {
    ++report.packets_checked;
    absl::StatusOr<MachineResult> expected = RunUnfused(topology, ingress, packet);
    absl::StatusOr<MachineResult> actual = RunFused(plan, ingress, packet);
    if (SameResult(expected, actual)) return true;
    std::vector<std::string> layers;
    for (const Layer& layer : packet.layers()) {
      layers.push_back(absl::StrCat(layer.network.value(), "(",
                                    FieldMapToString(layer.header), ")"));
    }
    report.equivalent = false;
    report.counterexample = absl::StrCat(
        ToString(ingress.function), " at ", ingress.member.ToString(),
        ingress.in_link ? " inLink=" + ingress.in_link->value() : "",
        " packet=", absl::StrJoin(layers, "/"), "\n  tables: ",
        ResultString(expected), "\n  plan:   ", ResultString(actual));
    return false;
  };

  for (const Member* m : topology.MembersOnMachine(plan.machine)) {
    const std::vector<FieldMap> outer = SampleHeaders(topology, m->network);
    // Overlay packets that may ride in m's network.
    std::vector<std::pair<NetworkId, std::vector<FieldMap>>> overlays;
    const std::set<NetworkId> group = topology.BridgeGroup(m->network);
    for (const auto& [net, links] : topology.links) {
      bool carried = std::any_of(links.begin(), links.end(), [&](const auto& kv) {
        return kv.second.external && group.contains(kv.second.external->network);
      });
      if (carried) overlays.push_back({net, SampleHeaders(topology, net)});
    }
    std::vector<LocalLinkId> arrivals;
    for (const auto& [local, link_id] : m->local_links) {
      const Link* link = topology.FindLink({m->network, link_id});
      if (link != nullptr && link->primitive()) arrivals.push_back(local);
    }
    for (const Bridge& b : topology.bridges) {
      for (const BridgePort* port : {&b.side_a, &b.side_b}) {
        if (port->ref() == m->ref()) arrivals.push_back(port->port);
      }
    }
    for (const LocalLinkId& in_link : arrivals) {
      Ingress ingress{m->ref(), Function::kAcquire, in_link};
      for (const FieldMap& header : outer) {
        Packet bare(m->network, header, "p");
        if (!check(ingress, bare)) return report;
        for (const auto& [net, inner_headers] : overlays) {
          for (const FieldMap& inner : inner_headers) {
            Packet packet(net, inner, "p");
            packet.Encapsulate(m->network, header, std::nullopt);
            if (!check(ingress, packet)) return report;
          }
        }
      }
    }
    Ingress origin{m->ref(), Function::kForward, std::nullopt};
    for (const FieldMap& header : outer) {
      Packet packet(m->network, header, "p");
      packet.meta().in_link = SelfLink();
      if (!check(origin, packet)) return report;
    }
  }
  return report;
}

absl::StatusOr<RuleStats> ComputeRuleStats(const Topology& topology) {
  RuleStats stats;
  for (const auto& [net, by_name] : topology.members) {
    uint64_t& count = stats.per_network[net];
    for (const auto& [name, m] : by_name) count += m.tables.RuleCount();
    stats.total += count;
  }
  for (const auto& [id, machine] : topology.machines) {
    std::vector<const Member*> members = topology.MembersOnMachine(id);
    if (members.empty()) continue;
    uint64_t product = 1;
    for (const Member* m : members) {
      product *= std::max<uint64_t>(1, m->tables.RuleCount());
    }
    stats.flattened += product;
    absl::StatusOr<StagePlan> plan = Fuse(topology, id, DeriveAssumptions(topology, id));
    if (!plan.ok()) return plan.status();
    stats.fused += plan->RuleCount();
  }
  return stats;
}

absl::StatusOr<std::string> ExportTables(const Topology& topology,
                                         const MachineId& machine,
                                         const std::vector<Assumption>& assumptions) {
  if (!topology.machines.contains(machine)) return UnknownMachine(machine);
  std::vector<const Member*> members = topology.MembersOnMachine(machine);
  if (members.empty()) return std::string();
  absl::StatusOr<StagePlan> plan = Fuse(topology, machine, assumptions);
  if (!plan.ok()) return plan.status();

  std::string out = absl::StrCat("# machine ", machine.value(), "\n");
  auto section = [&](const Member& m, const char* fn,
                     const std::vector<std::string>& lines) {
    if (lines.empty()) return;
    absl::StrAppend(&out, "[", m.ref().ToString(), " ", fn, "]\n");
    for (const std::string& line : lines) absl::StrAppend(&out, line, "\n");
  };
  for (const Member* m : members) {
    std::vector<std::string> lines;
    for (const auto& [local, action] : m->tables.transmit) {
      lines.push_back(absl::StrCat("* | ", local.value(), " | ", ToString(action)));
    }
    section(*m, "transmit", lines);
    lines.clear();
    for (const auto& [sid, enc] : m->tables.send) {
      lines.push_back(absl::StrCat("* | ", sid.value(), " | encap ",
                                   FieldMapToString(enc)));
    }
    section(*m, "send", lines);
    lines.clear();
    for (const ForwardRule& r : m->tables.forward.rules()) {
      lines.push_back(absl::StrCat(r.priority, " | ", r.match.ToString(), " | ",
                                   ToString(r.action)));
    }
    section(*m, "forward", lines);
    lines.clear();
    for (const AcquireRule& r : m->tables.acquire.rules()) {
      lines.push_back(absl::StrCat(r.priority, " | ", r.match.ToString(), " | ",
                                   ToString(r.action)));
    }
    section(*m, "acquire", lines);
    lines.clear();
    for (const auto& [sid, action] : m->tables.receive) {
      lines.push_back(absl::StrCat("* | ", sid.value(), " | ", ToString(action)));
    }
    section(*m, "receive", lines);
  }
  std::vector<std::string> facts;
  for (const Assumption& a : assumptions) facts.push_back(a.ToString());
  absl::StrAppend(&out, "[plan]\nassumptions: ",
                  facts.empty() ? "none" : absl::StrJoin(facts, " "), "\n");
  for (size_t s = 0; s < plan->stages.size(); ++s) {
    std::vector<std::string> names;
    for (int node : plan->stages[s].nodes) names.push_back(plan->nodes[node].ToString());
    absl::StrAppend(&out, "stage ", s, " level ", plan->stages[s].level, ": ",
                    absl::StrJoin(names, " + "), " (", plan->stages[s].rules.size(),
                    " rules)\n");
  }
  absl::StrAppend(&out, "stages: ", plan->stage_count, "\n");
  return out;
}

}  // namespace compnet
