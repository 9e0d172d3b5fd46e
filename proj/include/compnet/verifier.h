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


// Per-network property verification. Every check reads only the tables of
// the members of the network under study; links implemented by sessions are
// taken as single hops to their far end, so a lower network is summarized by
// the session that implements the link rather than by its tables.

#ifndef COMPNET_VERIFIER_H_
#define COMPNET_VERIFIER_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/header_space.h"
#include "compnet/topology.h"

namespace compnet {

// Read access to one network, recording whose tables were consulted.
class NetworkView {
 public:
  NetworkView(const Topology& topology, const NetworkId& network);

  const Topology& topology() const { return topology_; }
  const Network& network() const { return *network_; }
  const HeaderSchema& schema() const { return network_->schema; }
  // Members of the network, sorted by name.
  std::vector<const Member*> members() const;
  const Member* member(const MemberName& name) const;
  // Tables of a member of this network; the read is recorded.
  const MemberTables& tables(const Member& member) const;

  const std::set<MemberRef>& table_reads() const { return reads_; }

 private:
  const Topology& topology_;
  const Network* network_;
  mutable std::set<MemberRef> reads_;
};

// A forwarding path inside one network and the headers that take it.
struct SymbolicPath {
  enum class End {
    kDelivered,  // An Acquire handed the packet to Receive at the last member.
    kDropped,    // A drop rule or a missing rule at the last member.
    kExit,       // Left the network through a bridge port of the last member.
  };
  std::vector<MemberName> members;
  End end = End::kDropped;
  HeaderSet headers;

  const MemberName& source() const { return members.front(); }
  const MemberName& last() const { return members.back(); }
};

std::string ToString(SymbolicPath::End end);

struct PathSet {
  NetworkId network;
  // Sorted by (source, members, end); paths that revisit a member are
  // discarded.
  std::vector<SymbolicPath> paths;
  std::set<MemberRef> table_reads;
};

// Paths of packets originated (Forward with inLink Self) at `source`, or at
// every member when `source` is unset, over the full header space.
absl::StatusOr<PathSet> Reachability(
    const Topology& topology, const NetworkId& network,
    const std::optional<MemberName>& source = std::nullopt);

// Destination selector: member names, "@net" for members placed on machines
// that host a member of `net`, or "*" for every member.
absl::StatusOr<std::set<MemberName>> ResolveDstPredicate(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& selectors);

struct Witness {
  std::optional<MemberName> src;
  std::vector<FieldMap> headers;
  std::vector<std::vector<MemberName>> paths;
  std::optional<LinkRef> link;
  // Where to inject the witness header for replay; unset for originated
  // replays.
  std::optional<MemberRef> inject_member;
  std::optional<LocalLinkId> inject_link;
  std::string bridge;
  std::string field;
};

struct PropertyResult {
  std::string name;
  std::string check;
  NetworkId network;
  bool holds = true;
  std::string detail;
  std::optional<Witness> witness;
  std::set<MemberRef> table_reads;

  std::string ToString() const;
};

absl::StatusOr<PropertyResult> Waypoint(const Topology& topology,
                                        const NetworkId& network,
                                        const std::set<MemberName>& dst,
                                        const std::set<std::string>& kinds);

// Every two distinct paths between the same endpoints carry disjoint
// session keys (address, port, protocol and sessionId fields).
absl::StatusOr<PropertyResult> PathUniqueness(const Topology& topology,
                                              const NetworkId& network);

absl::StatusOr<PropertyResult> HeaderImmutability(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& fields);

// Tags of a link: its declared tags, plus the axioms of the session that
// implements it.
TagSet Propagate(const Topology& topology, const Link& link);

absl::StatusOr<PropertyResult> AllLinksSecure(const Topology& topology,
                                              const NetworkId& network,
                                              const std::string& tag = "secure");

// A host may only place values of `field` it owns on its links, unless the
// neighbor is a middlebox of one of `authenticators`. Only values in `block`
// are considered.
absl::StatusOr<PropertyResult> SourceAuthenticity(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& block,
    const std::set<std::string>& authenticators,
    const std::string& field = "src");

absl::StatusOr<PropertyResult> Reachable(const Topology& topology,
                                         const NetworkId& network,
                                         const MemberName& src,
                                         const MemberName& dst);

// Runs a declared property. Checks: waypoint (dst=, kinds=), uniqueness,
// immutability (fields=), secure (tag=), authenticity (block=, kinds=,
// field=), reachable (src=, dst=).
absl::StatusOr<PropertyResult> RunProperty(const Topology& topology,
                                           const PropertyDecl& decl);
absl::StatusOr<std::vector<PropertyResult>> RunProperties(
    const Topology& topology);

// Replays the witness of a failed property through the packet pipeline and
// reports whether the concrete run exhibits the violation.
absl::StatusOr<bool> ReplayReproduces(const Topology& topology,
                                      const PropertyResult& result);

}  // namespace compnet

#endif  // COMPNET_VERIFIER_H_
