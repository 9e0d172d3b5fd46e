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


// Domain model of a set of composed networks: networks with header schemas,
// machines, members, links, sessions, bridges, plus the axioms and property
// declarations that travel with a topology file.

#ifndef COMPNET_TOPOLOGY_H_
#define COMPNET_TOPOLOGY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "compnet/id.h"
#include "compnet/tables.h"

namespace compnet {

enum class FieldKind { kAddress, kPort, kProtocol, kSessionId, kOpaque };

std::string ToString(FieldKind kind);
std::optional<FieldKind> ParseFieldKind(std::string_view text);

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kOpaque;
  // Finite set of values the field may take; bounds path exploration.
  std::vector<std::string> domain;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct HeaderSchema {
  std::vector<FieldSpec> fields;

  const FieldSpec* Find(std::string_view name) const;
  int IndexOf(std::string_view name) const;  // -1 when absent.
  // Fields whose values identify a session: every sessionId field, or, when
  // there is none, the address and port fields that compose one.
  std::vector<std::string> SessionKeyFields() const;
  // Number of concrete headers in the field domains.
  uint64_t UniverseSize() const;

  friend bool operator==(const HeaderSchema&, const HeaderSchema&) = default;
};

// Session identifier carried in a header, or nullopt if the schema cannot
// compose one from `header`.
std::optional<SessionId> SessionKeyOf(const HeaderSchema& schema,
                                      const FieldMap& header);

struct Network {
  NetworkId id;
  HeaderSchema schema;
  friend bool operator==(const Network&, const Network&) = default;
};

struct Machine {
  MachineId id;
  friend bool operator==(const Machine&, const Machine&) = default;
};

struct Role {
  enum class Kind { kHost, kForwarder, kMiddlebox };
  Kind kind = Kind::kHost;
  std::set<std::string> middlebox_kinds;  // Only for kMiddlebox.

  bool IsMiddleboxOfAny(const std::set<std::string>& kinds) const;
  std::string ToString() const;
  static std::optional<Role> Parse(std::string_view text);

  friend bool operator==(const Role&, const Role&) = default;
};

struct Member {
  MemberName name;
  NetworkId network;
  MachineId machine;
  Role role;
  std::map<LocalLinkId, LinkId> local_links;
  // Names this member is entitled to put in source fields by physical
  // assignment. Empty for members whose identity must be authenticated.
  std::set<std::string> owns;
  MemberTables tables;

  MemberRef ref() const { return {network, name}; }
  friend bool operator==(const Member&, const Member&) = default;
};

struct LinkEnd {
  MemberName member;
  LocalLinkId local;
  friend auto operator<=>(const LinkEnd&, const LinkEnd&) = default;
  friend bool operator==(const LinkEnd&, const LinkEnd&) = default;
};

struct Link {
  LinkId id;
  NetworkId network;
  LinkEnd end_a;
  LinkEnd end_b;
  std::optional<SessionRef> external;  // nullopt: Primitive.
  std::set<std::string> tags;

  LinkRef ref() const { return {network, id}; }
  bool primitive() const { return !external.has_value(); }
  friend bool operator==(const Link&, const Link&) = default;
};

struct Session {
  SessionId id;
  NetworkId network;
  MemberName initiator;
  MemberName responder;
  FieldMap header_template;
  std::set<std::string> attributes;
  std::optional<LinkRef> implements;

  SessionRef ref() const { return {network, id}; }
  bool encrypting() const { return attributes.contains("encrypting"); }
  friend bool operator==(const Session&, const Session&) = default;
};

// One side of a bridge: the member and the local port the bridge attaches to.
struct BridgePort {
  NetworkId network;
  MemberName member;
  LocalLinkId port;
  MemberRef ref() const { return {network, member}; }
  friend bool operator==(const BridgePort&, const BridgePort&) = default;
};

// Outer-header substitution applied when a packet leaves `from_network`
// through the bridge.
struct Rewrite {
  NetworkId from_network;
  std::string field;
  std::string from;
  std::string to;
  friend bool operator==(const Rewrite&, const Rewrite&) = default;
};

struct Bridge {
  std::string id;
  MachineId machine;
  BridgePort side_a;
  BridgePort side_b;
  std::vector<Rewrite> rewrites;

  // The other side, given the side a packet is leaving from.
  const BridgePort& Peer(const MemberRef& from) const;
  friend bool operator==(const Bridge&, const Bridge&) = default;
};

struct PropertyDecl {
  std::string name;
  std::string check;
  NetworkId network;
  std::map<std::string, std::vector<std::string>> params;
  friend bool operator==(const PropertyDecl&, const PropertyDecl&) = default;
};

using TagSet = std::set<std::string>;

struct Topology {
  std::map<NetworkId, Network> networks;
  std::map<MachineId, Machine> machines;
  std::map<NetworkId, std::map<MemberName, Member>> members;
  std::map<NetworkId, std::map<LinkId, Link>> links;
  std::map<NetworkId, std::map<SessionId, Session>> sessions;
  std::vector<Bridge> bridges;
  std::map<SessionRef, TagSet> session_axioms;
  std::vector<PropertyDecl> properties;

  const Network* FindNetwork(const NetworkId& id) const;
  const Member* FindMember(const MemberRef& ref) const;
  Member* FindMutableMember(const MemberRef& ref);
  const Link* FindLink(const LinkRef& ref) const;
  const Session* FindSession(const SessionRef& ref) const;

  // Networks reachable from `network` through bridges, including itself.
  std::set<NetworkId> BridgeGroup(const NetworkId& network) const;
  // Session `id` of `network` or of a network bridged to it.
  const Session* FindSessionInGroup(const NetworkId& network,
                                    const SessionId& id) const;

  std::vector<const Member*> MembersOnMachine(const MachineId& machine) const;
  // The machine's member in exactly `network`.
  const Member* MemberOnMachine(const MachineId& machine,
                                const NetworkId& network) const;
  // The machine's member in `network`, else in a network bridged to it.
  const Member* MemberOnMachineInGroup(const MachineId& machine,
                                       const NetworkId& network) const;
  // Resolves a session endpoint name within the session's bridge group.
  const Member* ResolveEndpoint(const Session& session,
                                const MemberName& name) const;
  std::set<MachineId> EndpointMachines(const SessionRef& session) const;

  // The bridge attached to `member` at `port`, if any.
  const Bridge* BridgeAt(const MemberRef& member, const LocalLinkId& port) const;
  // Far end of a link as seen from one of its ends.
  std::optional<LinkEnd> FarEnd(const Link& link, const MemberName& from) const;
  // Link attached to `member` at local id `local`.
  const Link* LinkAt(const MemberRef& member, const LocalLinkId& local) const;
  // Local id of `link` at `member`, if the member is one of its ends.
  std::optional<LocalLinkId> LocalIdOf(const Link& link,
                                       const MemberName& member) const;
  // The link a session implements, through the link side of the seam.
  const Link* LinkForSession(const SessionRef& session) const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

}  // namespace compnet

#endif  // COMPNET_TOPOLOGY_H_
