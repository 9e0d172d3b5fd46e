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


#include "compnet/validate.h"

#include <map>
#include <set>

#include "absl/strings/str_cat.h"

namespace compnet {
namespace {

class Checker {
 public:
  explicit Checker(const Topology& topology) : t_(topology) {}

  ValidationReport Run() {
    CheckNetworks();
    CheckMembers();
    CheckLinks();
    CheckSessions();
    CheckBridges();
    CheckTables();
    CheckAxiomsAndProperties();
    return std::move(report_);
  }

 private:
  template <typename... Args>
  void Add(ViolationCode code, const Args&... args) {
    report_.violations.push_back({code, absl::StrCat(args...)});
  }

  void CheckNetworks() {
    for (const auto& [id, network] : t_.networks) {
      if (network.id != id) {
        Add(ViolationCode::kSchema, "network ", id.value(), " keyed as ",
            network.id.value());
      }
      std::set<std::string> names;
      for (const FieldSpec& field : network.schema.fields) {
        if (!names.insert(field.name).second) {
          Add(ViolationCode::kSchema, "network ", id.value(),
              ": duplicate field ", field.name);
        }
        std::set<std::string> values(field.domain.begin(), field.domain.end());
        if (field.domain.empty() || field.domain.size() > 64 ||
            values.size() != field.domain.size()) {
          Add(ViolationCode::kSchema, "network ", id.value(), ": field ",
              field.name, " needs 1..64 distinct domain values");
        }
      }
      if (network.schema.SessionKeyFields().empty()) {
        Add(ViolationCode::kSchema, "network ", id.value(),
            ": schema has no sessionId field and no address/port fields");
      }
    }
  }

  void CheckMembers() {
    std::map<std::pair<MachineId, NetworkId>, MemberName> hosted;
    for (const auto& [net, by_name] : t_.members) {
      if (t_.FindNetwork(net) == nullptr) {
        Add(ViolationCode::kUnknownNetwork, "members declared in unknown network ",
            net.value());
      }
      for (const auto& [name, member] : by_name) {
        if (member.name != name || member.network != net) {
          Add(ViolationCode::kLinkEnd, "member ", net.value(), ".",
              name.value(), " is filed under the wrong key");
        }
        if (!t_.machines.contains(member.machine)) {
          Add(ViolationCode::kUnknownMachine, "member ", member.ref().ToString(),
              " is on unknown machine ", member.machine.value());
        }
        auto [it, inserted] = hosted.emplace(std::pair{member.machine, net}, name);
        if (!inserted) {
          Add(ViolationCode::kMachineMembers, "machine ", member.machine.value(),
              " hosts both ", it->second.value(), " and ", name.value(),
              " in network ", net.value());
        }
        for (const auto& [local, link_id] : member.local_links) {
          const Link* link = t_.FindLink({net, link_id});
          if (link == nullptr || t_.LocalIdOf(*link, name) != local) {
            Add(ViolationCode::kLocalLink, "member ", member.ref().ToString(),
                " local link ", local.value(), " does not match link ",
                link_id.value());
          }
          if (local == SelfLink()) {
            Add(ViolationCode::kLocalLink, "member ", member.ref().ToString(),
                " uses the reserved local id Self");
          }
        }
      }
    }
  }

  void CheckLinkEnd(const Link& link, const LinkEnd& end) {
    const Member* member = t_.FindMember({link.network, end.member});
    if (member == nullptr) {
      Add(ViolationCode::kLinkEnd, "link ", link.ref().ToString(), " end ",
          end.member.value(), " is not a member of network ",
          link.network.value());
      return;
    }
    auto it = member->local_links.find(end.local);
    if (it == member->local_links.end() || it->second != link.id) {
      Add(ViolationCode::kLocalLink, "link ", link.ref().ToString(), " end ",
          end.member.value(), ":", end.local.value(),
          " is not registered at the member");
    }
  }

  void CheckLinks() {
    std::map<SessionRef, LinkRef> implementer;
    for (const auto& [net, by_id] : t_.links) {
      if (t_.FindNetwork(net) == nullptr) {
        Add(ViolationCode::kUnknownNetwork, "links declared in unknown network ",
            net.value());
      }
      for (const auto& [id, link] : by_id) {
        CheckLinkEnd(link, link.end_a);
        CheckLinkEnd(link, link.end_b);
        if (link.end_a.member == link.end_b.member) {
          Add(ViolationCode::kLinkEnd, "link ", link.ref().ToString(),
              " connects a member to itself");
        }
        if (!link.external.has_value()) continue;
        const SessionRef& ref = *link.external;
        const Session* session = t_.FindSession(ref);
        if (session == nullptr) {
          Add(ViolationCode::kDanglingSession, "link ", link.ref().ToString(),
              " is implemented by unknown session ", ref.ToString());
          continue;
        }
        if (ref.network == link.network) {
          Add(ViolationCode::kSessionNetwork, "link ", link.ref().ToString(),
              " is implemented by a session of its own network");
        }
        auto [it, inserted] = implementer.emplace(ref, link.ref());
        if (!inserted) {
          Add(ViolationCode::kSeamBijection, "session ", ref.ToString(),
              " implements both ", it->second.ToString(), " and ",
              link.ref().ToString());
        }
        if (session->implements != link.ref()) {
          Add(ViolationCode::kSeamBijection, "session ", ref.ToString(),
              " does not declare that it implements ", link.ref().ToString());
        }
      }
    }
  }

  void CheckSessions() {
    for (const auto& [net, by_id] : t_.sessions) {
      if (t_.FindNetwork(net) == nullptr) {
        Add(ViolationCode::kUnknownNetwork, "sessions declared in unknown network ",
            net.value());
      }
      for (const auto& [id, session] : by_id) {
        for (const MemberName& end : {session.initiator, session.responder}) {
          if (t_.ResolveEndpoint(session, end) == nullptr) {
            Add(ViolationCode::kSessionEndpoint, "session ",
                session.ref().ToString(), " endpoint ", end.value(),
                " is not a member of ", net.value(), " or a bridged network");
          }
        }
        if (!session.implements.has_value()) continue;
        const Link* link = t_.FindLink(*session.implements);
        if (link == nullptr || link->external != session.ref()) {
          Add(ViolationCode::kSeamBijection, "session ", session.ref().ToString(),
              " claims link ", session.implements->ToString(),
              " which is not implemented by it");
        }
      }
    }
  }

  void CheckBridges() {
    std::set<std::string> ids;
    for (const Bridge& bridge : t_.bridges) {
      if (!ids.insert(bridge.id).second) {
        Add(ViolationCode::kBridge, "duplicate bridge ", bridge.id);
      }
      if (!t_.machines.contains(bridge.machine)) {
        Add(ViolationCode::kUnknownMachine, "bridge ", bridge.id,
            " is on unknown machine ", bridge.machine.value());
      }
      for (const BridgePort* side : {&bridge.side_a, &bridge.side_b}) {
        const Member* member = t_.FindMember(side->ref());
        if (member == nullptr || member->machine != bridge.machine) {
          Add(ViolationCode::kBridge, "bridge ", bridge.id, " side ",
              side->ref().ToString(), " is not a member on machine ",
              bridge.machine.value());
        } else if (member->local_links.contains(side->port)) {
          Add(ViolationCode::kLocalLink, "bridge ", bridge.id, " port ",
              side->port.value(), " collides with a link at ",
              side->ref().ToString());
        }
      }
      if (bridge.side_a.network == bridge.side_b.network) {
        Add(ViolationCode::kBridge, "bridge ", bridge.id,
            " joins a network to itself");
      }
      const Network* a = t_.FindNetwork(bridge.side_a.network);
      const Network* b = t_.FindNetwork(bridge.side_b.network);
      if (a == nullptr || b == nullptr) continue;
      std::vector<std::string> names_a, names_b;
      for (const FieldSpec& f : a->schema.fields) names_a.push_back(f.name);
      for (const FieldSpec& f : b->schema.fields) names_b.push_back(f.name);
      if (names_a != names_b) {
        Add(ViolationCode::kBridge, "bridge ", bridge.id,
            " joins networks with different header fields");
      }
      for (const Rewrite& rewrite : bridge.rewrites) {
        if (rewrite.from_network != a->id && rewrite.from_network != b->id) {
          Add(ViolationCode::kBridge, "bridge ", bridge.id,
              " rewrite names network ", rewrite.from_network.value());
        } else if (a->schema.Find(rewrite.field) == nullptr) {
          Add(ViolationCode::kBridge, "bridge ", bridge.id,
              " rewrite names field ", rewrite.field,
              " outside the outer header");
        }
      }
    }
  }

  bool IsPort(const Member& member, const LocalLinkId& local) const {
    return member.local_links.contains(local) ||
           t_.BridgeAt(member.ref(), local) != nullptr;
  }

  void CheckMatch(const Member& member, const Network& network,
                  const Match& match, const std::string& table) {
    if (match.in_link.has_value() && *match.in_link != SelfLink() &&
        !IsPort(member, *match.in_link)) {
      Add(ViolationCode::kTable, table, " table of ", member.ref().ToString(),
          " matches unknown inLink ", match.in_link->value());
    }
    for (const auto& [field, predicate] : match.fields) {
      if (network.schema.Find(field) == nullptr) {
        Add(ViolationCode::kTable, table, " table of ", member.ref().ToString(),
            " matches unknown field ", field);
      }
    }
  }

  void CheckTables() {
    for (const auto& [net, by_name] : t_.members) {
      const Network* network = t_.FindNetwork(net);
      if (network == nullptr) continue;
      for (const auto& [name, member] : by_name) {
        CheckMemberTables(member, *network);
      }
    }
  }

  void CheckMemberTables(const Member& member, const Network& network) {
    const std::string who = member.ref().ToString();
    const MemberTables& tables = member.tables;
    for (const auto& [local, action] : tables.transmit) {
      if (!IsPort(member, local)) {
        Add(ViolationCode::kTable, "transmit table of ", who,
            " has key ", local.value(), " that is not one of its links");
        continue;
      }
      const Link* link = t_.LinkAt(member.ref(), local);
      const auto* external = std::get_if<ExternalSession>(&action);
      if (link == nullptr) {
        if (external != nullptr) {
          Add(ViolationCode::kTable, "transmit table of ", who,
              " sends bridge port ", local.value(), " into a session");
        }
        continue;
      }
      if (external == nullptr && link->external.has_value()) {
        Add(ViolationCode::kTable, "transmit table of ", who, " treats link ",
            link->id.value(), " as primitive but it is implemented by ",
            link->external->ToString());
      } else if (external != nullptr && link->external != external->session) {
        Add(ViolationCode::kTable, "transmit table of ", who, " maps link ",
            link->id.value(), " to session ", external->session.ToString(),
            " which does not implement it");
      }
    }
    for (const auto& [sid, encoding] : tables.send) {
      if (t_.FindSessionInGroup(network.id, sid) == nullptr) {
        Add(ViolationCode::kTable, "send table of ", who, " names unknown session ",
            sid.value());
      }
      for (const auto& [field, value] : encoding) {
        if (network.schema.Find(field) == nullptr) {
          Add(ViolationCode::kTable, "send table of ", who,
              " encodes unknown field ", field);
        }
      }
    }
    for (const ForwardRule& rule : tables.forward.rules()) {
      CheckMatch(member, network, rule.match, "forward");
      if (const auto* out = std::get_if<OutLink>(&rule.action);
          out != nullptr && !IsPort(member, out->link)) {
        Add(ViolationCode::kTable, "forward table of ", who,
            " outputs to unknown link ", out->link.value());
      }
    }
    for (const AcquireRule& rule : tables.acquire.rules()) {
      CheckMatch(member, network, rule.match, "acquire");
    }
    for (const auto& [sid, action] : tables.receive) {
      const auto* external = std::get_if<ExternalLink>(&action);
      if (external == nullptr) continue;
      const Session* session = t_.FindSessionInGroup(network.id, sid);
      if (session == nullptr || session->implements != external->link) {
        Add(ViolationCode::kTable, "receive table of ", who, " maps session ",
            sid.value(), " to link ", external->link.ToString(),
            " which the session does not implement");
      }
    }
  }

  void CheckAxiomsAndProperties() {
    for (const auto& [ref, tags] : t_.session_axioms) {
      if (t_.FindSession(ref) == nullptr) {
        Add(ViolationCode::kAxiom, "axiom names unknown session ", ref.ToString());
      }
    }
    for (const PropertyDecl& decl : t_.properties) {
      if (t_.FindNetwork(decl.network) == nullptr) {
        Add(ViolationCode::kProperty, "property ", decl.name,
            " names unknown network ", decl.network.value());
      }
    }
  }

  const Topology& t_;
  ValidationReport report_;
};

}  // namespace

std::string ToString(ViolationCode code) {
  switch (code) {
    case ViolationCode::kUnknownNetwork:
      return "unknown-network";
    case ViolationCode::kUnknownMachine:
      return "unknown-machine";
    case ViolationCode::kMachineMembers:
      return "machine-members";
    case ViolationCode::kSchema:
      return "schema";
    case ViolationCode::kLinkEnd:
      return "link-end";
    case ViolationCode::kLocalLink:
      return "local-link";
    case ViolationCode::kDanglingSession:
      return "dangling-session";
    case ViolationCode::kSessionNetwork:
      return "session-network";
    case ViolationCode::kSeamBijection:
      return "seam-bijection";
    case ViolationCode::kSessionEndpoint:
      return "session-endpoint";
    case ViolationCode::kTable:
      return "table";
    case ViolationCode::kBridge:
      return "bridge";
    case ViolationCode::kAxiom:
      return "axiom";
    case ViolationCode::kProperty:
      return "property";
  }
  return "unknown";
}

bool ValidationReport::Has(ViolationCode code) const {
  for (const Violation& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

std::string ValidationReport::ToString() const {
  std::string out;
  for (const Violation& v : violations) {
    absl::StrAppend(&out, compnet::ToString(v.code), ": ", v.message, "\n");
  }
  return out;
}

ValidationReport ValidateTopology(const Topology& topology) {
  return Checker(topology).Run();
}

absl::StatusOr<std::optional<SessionRef>> SessionForLink(
    const Topology& topology, const NetworkId& network, const LinkId& link) {
  const Link* found = topology.FindLink({network, link});
  if (found == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("UnknownLink: ", network.value(), ".", link.value()));
  }
  return found->external;
}

absl::StatusOr<std::optional<LinkRef>> LinkForSession(
    const Topology& topology, const SessionRef& session) {
  if (topology.FindSession(session) == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("UnknownSession: ", session.ToString()));
  }
  if (const Link* link = topology.LinkForSession(session)) return link->ref();
  return std::nullopt;
}

}  // namespace compnet
