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


#include "compnet/topology.h"

#include <deque>

#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace compnet {

std::string ToString(FieldKind kind) {
  switch (kind) {
    case FieldKind::kAddress:
      return "address";
    case FieldKind::kPort:
      return "port";
    case FieldKind::kProtocol:
      return "protocol";
    case FieldKind::kSessionId:
      return "sessionId";
    case FieldKind::kOpaque:
      return "opaque";
  }
  return "opaque";
}

std::optional<FieldKind> ParseFieldKind(std::string_view text) {
  for (FieldKind kind : {FieldKind::kAddress, FieldKind::kPort,
                         FieldKind::kProtocol, FieldKind::kSessionId,
                         FieldKind::kOpaque}) {
    if (ToString(kind) == text) return kind;
  }
  return std::nullopt;
}

const FieldSpec* HeaderSchema::Find(std::string_view name) const {
  for (const FieldSpec& field : fields) {
    if (field.name == name) return &field;
  }
  return nullptr;
}

int HeaderSchema::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> HeaderSchema::SessionKeyFields() const {
  std::vector<std::string> out;
  for (const FieldSpec& field : fields) {
    if (field.kind == FieldKind::kSessionId) out.push_back(field.name);
  }
  if (!out.empty()) return out;
  for (const FieldSpec& field : fields) {
    if (field.kind == FieldKind::kAddress || field.kind == FieldKind::kPort) {
      out.push_back(field.name);
    }
  }
  return out;
}

uint64_t HeaderSchema::UniverseSize() const {
  uint64_t size = 1;
  for (const FieldSpec& field : fields) size *= field.domain.size();
  return size;
}

std::optional<SessionId> SessionKeyOf(const HeaderSchema& schema,
                                      const FieldMap& header) {
  std::vector<std::string> values;
  for (const std::string& name : schema.SessionKeyFields()) {
    auto it = header.find(name);
    if (it == header.end()) return std::nullopt;
    values.push_back(it->second);
  }
  if (values.empty()) return std::nullopt;
  return SessionId(absl::StrJoin(values, ","));
}

bool Role::IsMiddleboxOfAny(const std::set<std::string>& kinds) const {
  if (kind != Kind::kMiddlebox) return false;
  for (const std::string& k : middlebox_kinds) {
    if (kinds.contains(k)) return true;
  }
  return false;
}

std::string Role::ToString() const {
  switch (kind) {
    case Kind::kHost:
      return "host";
    case Kind::kForwarder:
      return "forwarder";
    case Kind::kMiddlebox:
      return "middlebox:" + absl::StrJoin(middlebox_kinds, "+");
  }
  return "host";
}

std::optional<Role> Role::Parse(std::string_view text) {
  if (text == "host") return Role{Kind::kHost, {}};
  if (text == "forwarder") return Role{Kind::kForwarder, {}};
  constexpr std::string_view kPrefix = "middlebox:";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    Role role{Kind::kMiddlebox, {}};
    for (absl::string_view k :
         absl::StrSplit(std::string(text.substr(kPrefix.size())), '+', absl::SkipEmpty())) {
      role.middlebox_kinds.insert(std::string(k));
    }
    if (role.middlebox_kinds.empty()) return std::nullopt;
    return role;
  }
  return std::nullopt;
}

const BridgePort& Bridge::Peer(const MemberRef& from) const {
  return side_a.ref() == from ? side_b : side_a;
}

const Network* Topology::FindNetwork(const NetworkId& id) const {
  auto it = networks.find(id);
  return it == networks.end() ? nullptr : &it->second;
}

const Member* Topology::FindMember(const MemberRef& ref) const {
  auto net = members.find(ref.network);
  if (net == members.end()) return nullptr;
  auto it = net->second.find(ref.name);
  return it == net->second.end() ? nullptr : &it->second;
}

Member* Topology::FindMutableMember(const MemberRef& ref) {
  return const_cast<Member*>(std::as_const(*this).FindMember(ref));
}

const Link* Topology::FindLink(const LinkRef& ref) const {
  auto net = links.find(ref.network);
  if (net == links.end()) return nullptr;
  auto it = net->second.find(ref.id);
  return it == net->second.end() ? nullptr : &it->second;
}

const Session* Topology::FindSession(const SessionRef& ref) const {
  auto net = sessions.find(ref.network);
  if (net == sessions.end()) return nullptr;
  auto it = net->second.find(ref.id);
  return it == net->second.end() ? nullptr : &it->second;
}

std::set<NetworkId> Topology::BridgeGroup(const NetworkId& network) const {
  std::set<NetworkId> group{network};
  std::deque<NetworkId> frontier{network};
  while (!frontier.empty()) {
    NetworkId current = frontier.front();
    frontier.pop_front();
    for (const Bridge& bridge : bridges) {
      for (const auto& [here, there] :
           {std::pair{bridge.side_a.network, bridge.side_b.network},
            std::pair{bridge.side_b.network, bridge.side_a.network}}) {
        if (here == current && group.insert(there).second) {
          frontier.push_back(there);
        }
      }
    }
  }
  return group;
}

const Session* Topology::FindSessionInGroup(const NetworkId& network,
                                            const SessionId& id) const {
  if (const Session* s = FindSession({network, id})) return s;
  for (const NetworkId& other : BridgeGroup(network)) {
    if (const Session* s = FindSession({other, id})) return s;
  }
  return nullptr;
}

std::vector<const Member*> Topology::MembersOnMachine(
    const MachineId& machine) const {
  std::vector<const Member*> out;
  for (const auto& [net, by_name] : members) {
    for (const auto& [name, member] : by_name) {
      if (member.machine == machine) out.push_back(&member);
    }
  }
  return out;
}

const Member* Topology::MemberOnMachine(const MachineId& machine,
                                        const NetworkId& network) const {
  auto net = members.find(network);
  if (net == members.end()) return nullptr;
  for (const auto& [name, member] : net->second) {
    if (member.machine == machine) return &member;
  }
  return nullptr;
}

const Member* Topology::MemberOnMachineInGroup(const MachineId& machine,
                                               const NetworkId& network) const {
  if (const Member* m = MemberOnMachine(machine, network)) return m;
  for (const NetworkId& other : BridgeGroup(network)) {
    if (const Member* m = MemberOnMachine(machine, other)) return m;
  }
  return nullptr;
}

const Member* Topology::ResolveEndpoint(const Session& session,
                                        const MemberName& name) const {
  if (const Member* m = FindMember({session.network, name})) return m;
  for (const NetworkId& other : BridgeGroup(session.network)) {
    if (const Member* m = FindMember({other, name})) return m;
  }
  return nullptr;
}

std::set<MachineId> Topology::EndpointMachines(const SessionRef& ref) const {
  std::set<MachineId> out;
  const Session* session = FindSession(ref);
  if (session == nullptr) return out;
  for (const MemberName& name : {session->initiator, session->responder}) {
    if (const Member* m = ResolveEndpoint(*session, name)) {
      out.insert(m->machine);
    }
  }
  return out;
}

const Bridge* Topology::BridgeAt(const MemberRef& member,
                                 const LocalLinkId& port) const {
  for (const Bridge& bridge : bridges) {
    for (const BridgePort* side : {&bridge.side_a, &bridge.side_b}) {
      if (side->ref() == member && side->port == port) return &bridge;
    }
  }
  return nullptr;
}

std::optional<LinkEnd> Topology::FarEnd(const Link& link,
                                        const MemberName& from) const {
  if (link.end_a.member == from) return link.end_b;
  if (link.end_b.member == from) return link.end_a;
  return std::nullopt;
}

const Link* Topology::LinkAt(const MemberRef& member,
                             const LocalLinkId& local) const {
  const Member* m = FindMember(member);
  if (m == nullptr) return nullptr;
  auto it = m->local_links.find(local);
  if (it == m->local_links.end()) return nullptr;
  return FindLink({member.network, it->second});
}

std::optional<LocalLinkId> Topology::LocalIdOf(const Link& link,
                                               const MemberName& member) const {
  if (link.end_a.member == member) return link.end_a.local;
  if (link.end_b.member == member) return link.end_b.local;
  return std::nullopt;
}

const Link* Topology::LinkForSession(const SessionRef& session) const {
  for (const auto& [net, by_id] : links) {
    for (const auto& [id, link] : by_id) {
      if (link.external == session) return &link;
    }
  }
  return nullptr;
}

}  // namespace compnet
