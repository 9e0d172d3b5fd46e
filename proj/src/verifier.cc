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


#include "compnet/verifier.h"

#include <algorithm>
#include <map>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "compnet/pipeline.h"
#include "compnet/trace.h"

namespace compnet {
namespace {

constexpr uint64_t kExhaustiveLimit = 4096;

std::string PathString(const std::vector<MemberName>& members) {
  std::vector<std::string> names;
  for (const MemberName& m : members) names.push_back(m.value());
  return absl::StrJoin(names, ">");
}

bool OnPath(const std::vector<MemberName>& path, const MemberName& name) {
  return std::find(path.begin(), path.end(), name) != path.end();
}

bool InLinkApplies(const Match& match, const LocalLinkId& in_link) {
  return !match.in_link.has_value() || *match.in_link == in_link;
}

// Depth-first symbolic walk over one network's tables.
class Explorer {
 public:
  explicit Explorer(const NetworkView& view) : view_(view) {}

  void FromSource(const Member& source) {
    std::vector<MemberName> path = {source.name};
    Forward(source, SelfLink(), HeaderSet::Universe(view_.schema()), path);
  }

  std::vector<SymbolicPath> TakePaths() {
    std::vector<SymbolicPath> out;
    for (auto& [key, headers] : found_) {
      out.push_back({key.first, key.second, std::move(headers)});
    }
    found_.clear();
    return out;
  }

 private:
  using Key = std::pair<std::vector<MemberName>, SymbolicPath::End>;

  void End(const std::vector<MemberName>& path, SymbolicPath::End end,
           const HeaderSet& headers) {
    if (headers.IsEmpty()) return;
    auto [it, inserted] = found_.try_emplace(Key{path, end}, headers);
    if (!inserted) it->second = it->second.Union(headers);
  }

  void Forward(const Member& member, const LocalLinkId& in_link,
               HeaderSet headers, std::vector<MemberName>& path) {
    const MemberTables& tables = view_.tables(member);
    for (const ForwardRule& rule : tables.forward.rules()) {
      if (headers.IsEmpty()) break;
      if (!InLinkApplies(rule.match, in_link)) continue;
      HeaderSet hit =
          headers.Intersect(HeaderSet::FromMatch(view_.schema(), rule.match));
      if (hit.IsEmpty()) continue;
      headers = headers.Subtract(hit);
      if (const auto* out = std::get_if<OutLink>(&rule.action)) {
        Transmit(member, out->link, hit, path);
      } else {
        End(path, SymbolicPath::End::kDropped, hit);
      }
    }
    End(path, SymbolicPath::End::kDropped, headers);
  }

  void Transmit(const Member& member, const LocalLinkId& local,
                const HeaderSet& headers, std::vector<MemberName>& path) {
    const MemberTables& tables = view_.tables(member);
    if (!tables.transmit.contains(local)) {
      End(path, SymbolicPath::End::kDropped, headers);
      return;
    }
    const Topology& topology = view_.topology();
    if (topology.BridgeAt(member.ref(), local) != nullptr) {
      End(path, SymbolicPath::End::kExit, headers);
      return;
    }
    const Link* link = topology.LinkAt(member.ref(), local);
    std::optional<LinkEnd> far;
    if (link != nullptr) far = topology.FarEnd(*link, member.name);
    const Member* next = far ? view_.member(far->member) : nullptr;
    if (next == nullptr) {
      End(path, SymbolicPath::End::kDropped, headers);
      return;
    }
    if (OnPath(path, next->name)) return;
    path.push_back(next->name);
    Acquire(*next, far->local, headers, path);
    path.pop_back();
  }

  void Acquire(const Member& member, const LocalLinkId& in_link,
               HeaderSet headers, std::vector<MemberName>& path) {
    const MemberTables& tables = view_.tables(member);
    for (const AcquireRule& rule : tables.acquire.rules()) {
      if (headers.IsEmpty()) break;
      if (!InLinkApplies(rule.match, in_link)) continue;
      HeaderSet hit =
          headers.Intersect(HeaderSet::FromMatch(view_.schema(), rule.match));
      if (hit.IsEmpty()) continue;
      headers = headers.Subtract(hit);
      if (rule.action == AcquireAction::kReceive) {
        End(path, SymbolicPath::End::kDelivered, hit);
      } else {
        Forward(member, in_link, hit, path);
      }
    }
    End(path, SymbolicPath::End::kDropped, headers);
  }

  const NetworkView& view_;
  std::map<Key, HeaderSet> found_;
};

// Headers a neighbor takes in from `in_link`: delivered locally or forwarded
// onto one of its links.
HeaderSet AcceptedAt(const NetworkView& view, const Member& member,
                     const LocalLinkId& in_link, HeaderSet headers) {
  HeaderSet accepted = HeaderSet::Empty(view.schema());
  HeaderSet to_forward = HeaderSet::Empty(view.schema());
  const MemberTables& tables = view.tables(member);
  for (const AcquireRule& rule : tables.acquire.rules()) {
    if (!InLinkApplies(rule.match, in_link)) continue;
    HeaderSet hit =
        headers.Intersect(HeaderSet::FromMatch(view.schema(), rule.match));
    headers = headers.Subtract(hit);
    if (rule.action == AcquireAction::kReceive) {
      accepted = accepted.Union(hit);
    } else {
      to_forward = to_forward.Union(hit);
    }
  }
  for (const ForwardRule& rule : tables.forward.rules()) {
    if (!InLinkApplies(rule.match, in_link)) continue;
    HeaderSet hit =
        to_forward.Intersect(HeaderSet::FromMatch(view.schema(), rule.match));
    to_forward = to_forward.Subtract(hit);
    if (std::holds_alternative<OutLink>(rule.action)) {
      accepted = accepted.Union(hit);
    }
  }
  return accepted;
}

std::vector<std::string> SessionKeyFieldsForPaths(const HeaderSchema& schema) {
  std::vector<std::string> out;
  for (const FieldSpec& field : schema.fields) {
    if (field.kind != FieldKind::kOpaque) out.push_back(field.name);
  }
  return out;
}

PropertyResult Begin(std::string check, const NetworkId& network) {
  PropertyResult result;
  result.check = std::move(check);
  result.network = network;
  return result;
}

absl::Status RequireNetwork(const Topology& topology, const NetworkId& network) {
  if (topology.FindNetwork(network) == nullptr) {
    return absl::NotFoundError("unknown network " + network.value());
  }
  return absl::OkStatus();
}

// The layer the witness started in, or nullptr while it is hidden.
const Layer* OriginalLayer(const TraceEvent& event) {
  if (event.snapshot.sealed || event.snapshot.visible.empty()) return nullptr;
  return &event.snapshot.visible.back();
}

}  // namespace

NetworkView::NetworkView(const Topology& topology, const NetworkId& network)
    : topology_(topology), network_(topology.FindNetwork(network)) {}

std::vector<const Member*> NetworkView::members() const {
  std::vector<const Member*> out;
  auto it = topology_.members.find(network_->id);
  if (it == topology_.members.end()) return out;
  for (const auto& [name, member] : it->second) out.push_back(&member);
  return out;
}

const Member* NetworkView::member(const MemberName& name) const {
  return topology_.FindMember({network_->id, name});
}

const MemberTables& NetworkView::tables(const Member& member) const {
  reads_.insert(member.ref());
  return member.tables;
}

std::string ToString(SymbolicPath::End end) {
  switch (end) {
    case SymbolicPath::End::kDelivered:
      return "delivered";
    case SymbolicPath::End::kDropped:
      return "dropped";
    case SymbolicPath::End::kExit:
      return "exit";
  }
  return "?";
}

absl::StatusOr<PathSet> Reachability(const Topology& topology,
                                     const NetworkId& network,
                                     const std::optional<MemberName>& source) {
  if (auto s = RequireNetwork(topology, network); !s.ok()) return s;
  NetworkView view(topology, network);
  Explorer explorer(view);
  if (source.has_value()) {
    const Member* member = view.member(*source);
    if (member == nullptr) {
      return absl::NotFoundError(absl::StrCat("UnknownMember: ", network.value(),
                                              ".", source->value()));
    }
    explorer.FromSource(*member);
  } else {
    for (const Member* member : view.members()) explorer.FromSource(*member);
  }
  PathSet set;
  set.network = network;
  set.paths = explorer.TakePaths();
  set.table_reads = view.table_reads();
  return set;
}

absl::StatusOr<std::set<MemberName>> ResolveDstPredicate(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& selectors) {
  if (auto s = RequireNetwork(topology, network); !s.ok()) return s;
  std::set<MemberName> out;
  const auto members_it = topology.members.find(network);
  for (const std::string& selector : selectors) {
    if (selector == "*") {
      if (members_it == topology.members.end()) continue;
      for (const auto& [name, member] : members_it->second) out.insert(name);
    } else if (!selector.empty() && selector[0] == '@') {
      NetworkId other(selector.substr(1));
      if (topology.FindNetwork(other) == nullptr) {
        return absl::NotFoundError("unknown network " + other.value());
      }
      if (members_it == topology.members.end()) continue;
      for (const auto& [name, member] : members_it->second) {
        if (topology.MemberOnMachine(member.machine, other) != nullptr) {
          out.insert(name);
        }
      }
    } else {
      if (topology.FindMember({network, MemberName(selector)}) == nullptr) {
        return absl::NotFoundError(absl::StrCat("UnknownMember: ", network.value(),
                                                ".", selector));
      }
      out.insert(MemberName(selector));
    }
  }
  return out;
}

absl::StatusOr<PropertyResult> Waypoint(const Topology& topology,
                                        const NetworkId& network,
                                        const std::set<MemberName>& dst,
                                        const std::set<std::string>& kinds) {
  absl::StatusOr<PathSet> paths = Reachability(topology, network);
  if (!paths.ok()) return paths.status();
  PropertyResult result = Begin("waypoint", network);
  result.table_reads = paths->table_reads;
  int checked = 0;
  for (const SymbolicPath& path : paths->paths) {
    if (path.end != SymbolicPath::End::kDelivered) continue;
    if (!dst.contains(path.last()) || dst.contains(path.source())) continue;
    ++checked;
    bool waypointed = std::any_of(
        path.members.begin(), path.members.end(), [&](const MemberName& name) {
          const Member* m = topology.FindMember({network, name});
          return m != nullptr && m->role.IsMiddleboxOfAny(kinds);
        });
    if (waypointed) continue;
    result.holds = false;
    result.detail = absl::StrCat("path ", PathString(path.members),
                                 " reaches ", path.last().value(),
                                 " without a ", absl::StrJoin(kinds, "/"));
    Witness w;
    w.src = path.source();
    w.headers.push_back(*path.headers.Witness());
    w.paths.push_back(path.members);
    result.witness = std::move(w);
    return result;
  }
  result.detail = absl::StrCat(checked, " paths checked");
  return result;
}

absl::StatusOr<PropertyResult> PathUniqueness(const Topology& topology,
                                              const NetworkId& network) {
  absl::StatusOr<PathSet> paths = Reachability(topology, network);
  if (!paths.ok()) return paths.status();
  PropertyResult result = Begin("uniqueness", network);
  result.table_reads = paths->table_reads;
  const HeaderSchema& schema = topology.FindNetwork(network)->schema;
  const std::vector<std::string> key = SessionKeyFieldsForPaths(schema);
  std::map<std::pair<MemberName, MemberName>, std::vector<const SymbolicPath*>>
      by_endpoints;
  for (const SymbolicPath& path : paths->paths) {
    if (path.end != SymbolicPath::End::kDelivered) continue;
    by_endpoints[{path.source(), path.last()}].push_back(&path);
  }
  for (const auto& [endpoints, group] : by_endpoints) {
    for (size_t i = 0; i < group.size(); ++i) {
      for (size_t j = i + 1; j < group.size(); ++j) {
        HeaderSet shared = group[i]->headers.Project(key).Intersect(
            group[j]->headers.Project(key));
        if (shared.IsEmpty()) continue;
        // Narrow to one session so that both witnesses share it.
        const FieldMap sample = *shared.Witness();
        HeaderSet one_session = HeaderSet::FromMatch(schema, [&] {
          Match m;
          for (const auto& [f, v] : sample) {
            if (std::find(key.begin(), key.end(), f) != key.end()) {
              m.fields.emplace(f, FieldPredicate::Exact(v));
            }
          }
          return m;
        }());
        Witness w;
        w.src = endpoints.first;
        w.headers.push_back(*group[i]->headers.Intersect(one_session).Witness());
        w.headers.push_back(*group[j]->headers.Intersect(one_session).Witness());
        w.paths.push_back(group[i]->members);
        w.paths.push_back(group[j]->members);
        result.holds = false;
        result.detail = absl::StrCat(
            "one session from ", endpoints.first.value(), " to ",
            endpoints.second.value(), " takes ", PathString(group[i]->members),
            " and ", PathString(group[j]->members));
        result.witness = std::move(w);
        return result;
      }
    }
  }
  result.detail = absl::StrCat(by_endpoints.size(), " endpoint pairs checked");
  return result;
}

absl::StatusOr<PropertyResult> HeaderImmutability(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& fields) {
  if (auto s = RequireNetwork(topology, network); !s.ok()) return s;
  NetworkView view(topology, network);
  PropertyResult result = Begin("immutability", network);
  const HeaderSchema& schema = view.schema();

  // Rewrites by bridges on the network's border.
  for (const Bridge& bridge : topology.bridges) {
    if (bridge.side_a.network != network && bridge.side_b.network != network) {
      continue;
    }
    for (const Rewrite& rewrite : bridge.rewrites) {
      if (std::find(fields.begin(), fields.end(), rewrite.field) == fields.end()) {
        continue;
      }
      const BridgePort& from = bridge.side_a.network == rewrite.from_network
                                   ? bridge.side_a
                                   : bridge.side_b;
      const Network* from_net = topology.FindNetwork(from.network);
      if (from_net == nullptr) continue;
      std::optional<FieldMap> header =
          HeaderSet::FieldIn(from_net->schema, rewrite.field, {rewrite.from})
              .Witness();
      if (!header.has_value()) continue;
      Witness w;
      w.headers.push_back(*header);
      w.inject_member = from.ref();
      w.inject_link = from.port;
      w.bridge = bridge.id;
      w.field = rewrite.field;
      result.holds = false;
      result.detail =
          absl::StrCat("bridge ", bridge.id, " rewrites ", rewrite.field, " ",
                       rewrite.from, " to ", rewrite.to, " leaving ",
                       rewrite.from_network.value());
      result.witness = std::move(w);
      result.table_reads = view.table_reads();
      return result;
    }
  }

  // Table functions, applied to concrete headers.
  HeaderSet universe = HeaderSet::Universe(schema);
  for (const Member* member : view.members()) {
    const MemberTables& tables = view.tables(*member);
    std::vector<FieldMap> headers;
    if (universe.Count() <= kExhaustiveLimit) {
      headers = universe.Enumerate();
    } else {
      auto add = [&](const Match& match) {
        if (auto h = HeaderSet::FromMatch(schema, match).Witness()) {
          headers.push_back(*h);
        }
      };
      add(Match{});
      for (const ForwardRule& r : tables.forward.rules()) add(r.match);
      for (const AcquireRule& r : tables.acquire.rules()) add(r.match);
    }
    std::vector<LocalLinkId> in_links = {SelfLink()};
    for (const auto& [local, link] : member->local_links) in_links.push_back(local);
    for (const FieldMap& header : headers) {
      for (const LocalLinkId& in_link : in_links) {
        std::vector<std::pair<Function, absl::StatusOr<StepResult>>> steps;
        Packet packet(network, header, "");
        packet.meta().in_link = in_link;
        steps.emplace_back(Function::kForward, FnForward(topology, *member, packet));
        if (in_link != SelfLink()) {
          steps.emplace_back(Function::kAcquire,
                             FnAcquire(topology, *member, packet, in_link));
          if (tables.transmit.contains(in_link)) {
            steps.emplace_back(Function::kTransmit,
                               FnTransmit(topology, *member, packet, in_link));
          }
        }
        for (const auto& [function, step] : steps) {
          if (!step.ok() || step->packet.depth() != 1) continue;
          for (const std::string& field : fields) {
            auto before = header.find(field);
            auto after = step->packet.header().find(field);
            bool same = (before == header.end()) ==
                            (after == step->packet.header().end()) &&
                        (before == header.end() || before->second == after->second);
            if (same) continue;
            Witness w;
            w.src = member->name;
            w.headers = {header, step->packet.header()};
            w.field = field;
            result.holds = false;
            result.detail = absl::StrCat(ToString(function), " at ",
                                         member->name.value(), " changes ", field);
            result.witness = std::move(w);
            result.table_reads = view.table_reads();
            return result;
          }
        }
      }
    }
  }
  result.detail = absl::StrCat("fields ", absl::StrJoin(fields, ","), " unchanged");
  result.table_reads = view.table_reads();
  return result;
}

TagSet Propagate(const Topology& topology, const Link& link) {
  TagSet tags = link.tags;
  if (link.external.has_value()) {
    auto it = topology.session_axioms.find(*link.external);
    if (it != topology.session_axioms.end()) {
      tags.insert(it->second.begin(), it->second.end());
    }
  }
  return tags;
}

absl::StatusOr<PropertyResult> AllLinksSecure(const Topology& topology,
                                              const NetworkId& network,
                                              const std::string& tag) {
  if (auto s = RequireNetwork(topology, network); !s.ok()) return s;
  PropertyResult result = Begin("secure", network);
  auto it = topology.links.find(network);
  int checked = 0;
  if (it != topology.links.end()) {
    for (const auto& [id, link] : it->second) {
      ++checked;
      if (Propagate(topology, link).contains(tag)) continue;
      Witness w;
      w.link = link.ref();
      w.paths.push_back({link.end_a.member, link.end_b.member});
      w.field = tag;
      result.holds = false;
      result.detail = absl::StrCat(
          "link ", link.ref().ToString(), " (", link.end_a.member.value(), "-",
          link.end_b.member.value(), ") is not ", tag,
          link.external ? " and its session has no such axiom" : "");
      result.witness = std::move(w);
      return result;
    }
  }
  result.detail = absl::StrCat(checked, " links carry ", tag);
  return result;
}

absl::StatusOr<PropertyResult> SourceAuthenticity(
    const Topology& topology, const NetworkId& network,
    const std::vector<std::string>& block,
    const std::set<std::string>& authenticators, const std::string& field) {
  if (auto s = RequireNetwork(topology, network); !s.ok()) return s;
  NetworkView view(topology, network);
  PropertyResult result = Begin("authenticity", network);
  const HeaderSchema& schema = view.schema();
  if (schema.IndexOf(field) < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("network ", network.value(), " has no field ", field));
  }
  const HeaderSet blocked = HeaderSet::FieldIn(schema, field, block);
  int checked = 0;
  for (const Member* host : view.members()) {
    if (host->role.kind != Role::Kind::kHost) continue;
    const HeaderSet owned = HeaderSet::FieldIn(
        schema, field, std::vector<std::string>(host->owns.begin(), host->owns.end()));
    for (const auto& [local, link_id] : host->local_links) {
      const Link* link = topology.FindLink({network, link_id});
      if (link == nullptr) continue;
      std::optional<LinkEnd> far = topology.FarEnd(*link, host->name);
      const Member* neighbor = far ? view.member(far->member) : nullptr;
      if (neighbor == nullptr) continue;
      ++checked;
      if (neighbor->role.IsMiddleboxOfAny(authenticators)) continue;
      HeaderSet spoofed =
          AcceptedAt(view, *neighbor, far->local, blocked).Subtract(owned);
      if (spoofed.IsEmpty()) continue;
      Witness w;
      w.src = host->name;
      w.headers.push_back(*spoofed.Witness());
      w.paths.push_back({host->name, neighbor->name});
      w.link = link->ref();
      w.inject_member = host->ref();
      w.inject_link = local;
      result.holds = false;
      result.detail = absl::StrCat(
          neighbor->name.value(), " accepts ", field, "=",
          absl::StrJoin(spoofed.ValuesOf(field), ","), " from ",
          host->name.value(), " on ", link->ref().ToString(),
          " without authentication");
      result.witness = std::move(w);
      result.table_reads = view.table_reads();
      return result;
    }
  }
  result.detail = absl::StrCat(checked, " host links checked");
  result.table_reads = view.table_reads();
  return result;
}

absl::StatusOr<PropertyResult> Reachable(const Topology& topology,
                                         const NetworkId& network,
                                         const MemberName& src,
                                         const MemberName& dst) {
  absl::StatusOr<PathSet> paths = Reachability(topology, network, src);
  if (!paths.ok()) return paths.status();
  PropertyResult result = Begin("reachable", network);
  result.table_reads = paths->table_reads;
  for (const SymbolicPath& path : paths->paths) {
    if (path.end != SymbolicPath::End::kDelivered || path.last() != dst) continue;
    Witness w;
    w.src = src;
    w.headers.push_back(*path.headers.Witness());
    w.paths.push_back(path.members);
    result.detail = "path " + PathString(path.members);
    result.witness = std::move(w);
    return result;
  }
  result.holds = false;
  result.detail = absl::StrCat("no path from ", src.value(), " to ", dst.value());
  return result;
}

std::string PropertyResult::ToString() const {
  std::string out = absl::StrCat(name.empty() ? check : name, " ", check, " ",
                                 network.value(), " ",
                                 holds ? "HOLDS" : "FAILS", ": ", detail);
  if (witness.has_value() && !holds) {
    const Witness& w = *witness;
    std::vector<std::string> parts;
    if (w.src) parts.push_back("src=" + w.src->value());
    for (const FieldMap& h : w.headers) {
      parts.push_back("header=" + FieldMapToString(h));
    }
    for (const auto& p : w.paths) parts.push_back("path=" + PathString(p));
    if (w.link) parts.push_back("link=" + w.link->ToString());
    if (w.inject_member) {
      parts.push_back(absl::StrCat("inject=", w.inject_member->ToString(), ":",
                                   w.inject_link ? w.inject_link->value() : ""));
    }
    if (!w.bridge.empty()) parts.push_back("bridge=" + w.bridge);
    absl::StrAppend(&out, "\n  witness ", absl::StrJoin(parts, " "));
  }
  return out;
}

absl::StatusOr<PropertyResult> RunProperty(const Topology& topology,
                                           const PropertyDecl& decl) {
  auto values = [&](const std::string& key) -> std::vector<std::string> {
    auto it = decl.params.find(key);
    return it == decl.params.end() ? std::vector<std::string>{} : it->second;
  };
  auto required = [&](const std::string& key)
      -> absl::StatusOr<std::vector<std::string>> {
    std::vector<std::string> v = values(key);
    if (v.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("property ", decl.name, ": ", decl.check, " needs ", key, "="));
    }
    return v;
  };
  auto as_set = [](const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  absl::StatusOr<PropertyResult> result;
  if (decl.check == "waypoint") {
    auto dst_sel = required("dst");
    if (!dst_sel.ok()) return dst_sel.status();
    auto kinds = required("kinds");
    if (!kinds.ok()) return kinds.status();
    auto dst = ResolveDstPredicate(topology, decl.network, *dst_sel);
    if (!dst.ok()) return dst.status();
    result = Waypoint(topology, decl.network, *dst, as_set(*kinds));
  } else if (decl.check == "uniqueness") {
    result = PathUniqueness(topology, decl.network);
  } else if (decl.check == "immutability") {
    auto fields = required("fields");
    if (!fields.ok()) return fields.status();
    result = HeaderImmutability(topology, decl.network, *fields);
  } else if (decl.check == "secure") {
    std::vector<std::string> tag = values("tag");
    result = AllLinksSecure(topology, decl.network, tag.empty() ? "secure" : tag[0]);
  } else if (decl.check == "authenticity") {
    auto block = required("block");
    if (!block.ok()) return block.status();
    std::vector<std::string> field = values("field");
    result = SourceAuthenticity(topology, decl.network, *block,
                                as_set(values("kinds")),
                                field.empty() ? "src" : field[0]);
  } else if (decl.check == "reachable") {
    auto src = required("src");
    if (!src.ok()) return src.status();
    auto dst = required("dst");
    if (!dst.ok()) return dst.status();
    result = Reachable(topology, decl.network, MemberName((*src)[0]),
                       MemberName((*dst)[0]));
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("property ", decl.name, ": unknown check ", decl.check));
  }
  if (result.ok()) result->name = decl.name;
  return result;
}

absl::StatusOr<std::vector<PropertyResult>> RunProperties(
    const Topology& topology) {
  std::vector<PropertyResult> out;
  for (const PropertyDecl& decl : topology.properties) {
    absl::StatusOr<PropertyResult> result = RunProperty(topology, decl);
    if (!result.ok()) return result.status();
    out.push_back(*std::move(result));
  }
  return out;
}

absl::StatusOr<bool> ReplayReproduces(const Topology& topology,
                                      const PropertyResult& result) {
  if (!result.witness.has_value()) {
    return absl::InvalidArgumentError("result carries no witness");
  }
  const Witness& w = *result.witness;
  const NetworkId& net = result.network;

  auto run = [&](const FieldMap& header) -> absl::StatusOr<Trace> {
    if (w.inject_member.has_value() && w.inject_link.has_value()) {
      return Inject(topology, *w.inject_member,
                    Packet(w.inject_member->network, header, "witness"),
                    *w.inject_link);
    }
    if (!w.src.has_value()) return absl::InvalidArgumentError("witness has no source");
    return Originate(topology, {net, *w.src}, Packet(net, header, "witness"));
  };
  // The trace follows `path` through `net` and is handed to Receive at its
  // last member.
  auto follows = [&](const Trace& trace, const std::vector<MemberName>& path) {
    if (ProjectPath(trace, net) != path) return false;
    return std::any_of(trace.events.begin(), trace.events.end(),
                       [&](const TraceEvent& e) {
                         return e.network == net && e.member == path.back() &&
                                e.function == Function::kAcquire &&
                                e.action.rfind("receive", 0) == 0;
                       });
  };

  if (result.check == "secure") {
    if (!w.link) return absl::InvalidArgumentError("witness has no link");
    const Link* link = topology.FindLink(*w.link);
    if (link == nullptr) return false;
    return !Propagate(topology, *link).contains(w.field);
  }
  if (w.headers.empty()) return absl::InvalidArgumentError("witness has no header");

  if (result.check == "waypoint" || result.check == "reachable" ||
      result.check == "uniqueness") {
    for (size_t i = 0; i < w.paths.size() && i < w.headers.size(); ++i) {
      absl::StatusOr<Trace> trace = run(w.headers[i]);
      if (!trace.ok()) return trace.status();
      if (!follows(*trace, w.paths[i])) return false;
    }
    return true;
  }
  if (result.check == "authenticity") {
    absl::StatusOr<Trace> trace = run(w.headers[0]);
    if (!trace.ok()) return trace.status();
    const MemberName& neighbor = w.paths.at(0).back();
    return std::any_of(
        trace->events.begin(), trace->events.end(), [&](const TraceEvent& e) {
          if (e.network != net || e.member != neighbor) return false;
          return (e.function == Function::kAcquire &&
                  e.action.rfind("receive", 0) == 0) ||
                 (e.function == Function::kForward &&
                  e.action.rfind("out", 0) == 0);
        });
  }
  if (result.check == "immutability") {
    absl::StatusOr<Trace> trace = run(w.headers[0]);
    if (!trace.ok()) return trace.status();
    const std::string& before = w.headers[0].at(w.field);
    for (const TraceEvent& e : trace->events) {
      const Layer* layer = OriginalLayer(e);
      if (layer == nullptr) continue;
      auto it = layer->header.find(w.field);
      if (it != layer->header.end() && it->second != before) return true;
    }
    return false;
  }
  return absl::InvalidArgumentError("no replay for check " + result.check);
}

}  // namespace compnet
