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


#include "compnet/topology_format.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace compnet {
namespace {

// ---------------------------------------------------------------- lexing

enum class Tok { kWord, kLBrace, kRBrace, kLParen, kRParen, kSemi, kEq, kComma,
                 kArrow, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == ':' || c == '*' || c == '/' || c == '@' || c == '+' || c == '-';
}

std::string Where(int line, int col) { return absl::StrCat(line, ":", col, ": "); }

absl::Status SyntaxError(int line, int col, const std::string& what,
                         const std::string& token) {
  return absl::InvalidArgumentError(absl::StrCat(
      Where(line, col), "SyntaxError: ", what, " near '", token, "'"));
}

absl::StatusOr<std::vector<Token>> Lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (text.substr(i, 2) == "->") {
      out.push_back({Tok::kArrow, "->", l, cl});
      advance(2);
      continue;
    }
    Tok single = Tok::kEnd;
    switch (c) {
      case '{': single = Tok::kLBrace; break;
      case '}': single = Tok::kRBrace; break;
      case '(': single = Tok::kLParen; break;
      case ')': single = Tok::kRParen; break;
      case ';': single = Tok::kSemi; break;
      case '=': single = Tok::kEq; break;
      case ',': single = Tok::kComma; break;
      default: break;
    }
    if (single != Tok::kEnd) {
      out.push_back({single, std::string(1, c), l, cl});
      advance(1);
      continue;
    }
    if (!IsWordChar(c)) return SyntaxError(l, cl, "unexpected character", std::string(1, c));
    size_t start = i;
    while (i < text.size() && IsWordChar(text[i]) && text.substr(i, 2) != "->") {
      advance(1);
    }
    out.push_back({Tok::kWord, std::string(text.substr(start, i - start)), l, cl});
  }
  out.push_back({Tok::kEnd, "<end of input>", line, col});
  return out;
}

// ---------------------------------------------------------------- records

struct Item {
  enum class Kind { kWord, kKeyValue, kArrow, kGroup };
  Kind kind = Kind::kWord;
  std::string text;                 // Word, or key of a key=value.
  std::vector<std::string> values;  // key=a,b,c
  std::vector<Item> group;          // (...) or key=(...)
  bool group_value = false;
  int line = 0;
  int col = 0;
};

struct Record {
  std::vector<Item> items;
  int line = 0;
  int col = 0;
};

struct Section {
  std::string name;
  std::vector<Record> records;
};

class RecordParser {
 public:
  explicit RecordParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  absl::StatusOr<std::vector<Section>> Document() {
    std::vector<Section> sections;
    while (Peek().kind != Tok::kEnd) {
      const Token& name = Peek();
      if (name.kind != Tok::kWord) {
        return SyntaxError(name.line, name.col, "expected a section name", name.text);
      }
      ++pos_;
      if (Peek().kind != Tok::kLBrace) {
        return SyntaxError(Peek().line, Peek().col, "expected '{'", Peek().text);
      }
      ++pos_;
      Section section{name.text, {}};
      while (Peek().kind != Tok::kRBrace) {
        if (Peek().kind == Tok::kEnd) {
          return SyntaxError(Peek().line, Peek().col, "unterminated section",
                             name.text);
        }
        Record record{{}, Peek().line, Peek().col};
        while (Peek().kind != Tok::kSemi) {
          absl::StatusOr<Item> item = ParseItem();
          if (!item.ok()) return item.status();
          record.items.push_back(*std::move(item));
        }
        ++pos_;
        if (!record.items.empty()) section.records.push_back(std::move(record));
      }
      ++pos_;
      sections.push_back(std::move(section));
    }
    return sections;
  }

 private:
  const Token& Peek() const { return toks_[pos_]; }

  absl::StatusOr<Item> ParseItem() {
    const Token& t = Peek();
    Item item;
    item.line = t.line;
    item.col = t.col;
    switch (t.kind) {
      case Tok::kArrow:
        ++pos_;
        item.kind = Item::Kind::kArrow;
        item.text = "->";
        return item;
      case Tok::kLParen: {
        ++pos_;
        item.kind = Item::Kind::kGroup;
        absl::StatusOr<std::vector<Item>> group = ParseGroupBody();
        if (!group.ok()) return group.status();
        item.group = *std::move(group);
        return item;
      }
      case Tok::kWord:
        break;
      default:
        return SyntaxError(t.line, t.col, "unexpected token", t.text);
    }
    ++pos_;
    item.text = t.text;
    if (Peek().kind != Tok::kEq) return item;
    ++pos_;
    item.kind = Item::Kind::kKeyValue;
    if (Peek().kind == Tok::kLParen) {
      ++pos_;
      absl::StatusOr<std::vector<Item>> group = ParseGroupBody();
      if (!group.ok()) return group.status();
      item.group = *std::move(group);
      item.group_value = true;
      return item;
    }
    while (true) {
      if (Peek().kind != Tok::kWord) {
        return SyntaxError(Peek().line, Peek().col, "expected a value", Peek().text);
      }
      item.values.push_back(Peek().text);
      ++pos_;
      if (Peek().kind != Tok::kComma) break;
      ++pos_;
    }
    return item;
  }

  absl::StatusOr<std::vector<Item>> ParseGroupBody() {
    std::vector<Item> items;
    while (Peek().kind != Tok::kRParen) {
      if (Peek().kind == Tok::kEnd || Peek().kind == Tok::kSemi) {
        return SyntaxError(Peek().line, Peek().col, "expected ')'", Peek().text);
      }
      absl::StatusOr<Item> item = ParseItem();
      if (!item.ok()) return item.status();
      items.push_back(*std::move(item));
    }
    ++pos_;
    return items;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------- semantics

absl::Status Unresolved(const Item& at, const std::string& name,
                        const std::string& what) {
  return absl::NotFoundError(absl::StrCat(Where(at.line, at.col),
                                          "UnresolvedReference: ", what, " '",
                                          name, "'"));
}

absl::Status Duplicate(const Item& at, const std::string& name) {
  return absl::AlreadyExistsError(
      absl::StrCat(Where(at.line, at.col), "DuplicateName: '", name, "'"));
}

absl::Status Bad(const Item& at, const std::string& what) {
  return SyntaxError(at.line, at.col, what,
                     at.kind == Item::Kind::kArrow ? "->" : at.text);
}

// Splits "a.b" at the first '.'.
std::optional<std::pair<std::string, std::string>> SplitDotted(std::string_view s) {
  size_t dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == s.size()) {
    return std::nullopt;
  }
  return std::pair{std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
}

// Splits "a:b" at the last ':'.
std::optional<std::pair<std::string, std::string>> SplitColon(std::string_view s) {
  size_t colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) {
    return std::nullopt;
  }
  return std::pair{std::string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
}

class Builder {
 public:
  absl::StatusOr<Topology> Build(std::vector<Section> sections) {
    static const std::vector<std::string> kOrder = {
        "networks", "machines", "members",  "links",         "sessions",
        "bridges",  "tables",   "sessionAxioms", "properties"};
    std::map<std::string, std::vector<Record>> by_name;
    for (Section& section : sections) {
      if (std::find(kOrder.begin(), kOrder.end(), section.name) == kOrder.end()) {
        const Record& first = section.records.empty() ? Record{} : section.records[0];
        return absl::InvalidArgumentError(
            absl::StrCat(Where(first.line, first.col), "SyntaxError: unknown section '",
                         section.name, "'"));
      }
      auto& bucket = by_name[section.name];
      for (Record& r : section.records) bucket.push_back(std::move(r));
    }
    using Handler = absl::Status (Builder::*)(const Record&);
    const std::map<std::string, Handler> handlers = {
        {"networks", &Builder::Network},   {"machines", &Builder::Machines},
        {"members", &Builder::Member},     {"links", &Builder::Link},
        {"sessions", &Builder::Session},   {"bridges", &Builder::Bridge},
        {"tables", &Builder::Table},       {"sessionAxioms", &Builder::Axiom},
        {"properties", &Builder::Property}};
    for (const std::string& name : kOrder) {
      for (const Record& record : by_name[name]) {
        if (absl::Status s = (this->*handlers.at(name))(record); !s.ok()) return s;
      }
    }
    return std::move(t_);
  }

 private:
  static const Item* FindKey(const Record& r, std::string_view key) {
    for (const Item& item : r.items) {
      if (item.kind == Item::Kind::kKeyValue && item.text == key) return &item;
    }
    return nullptr;
  }

  absl::Status ExpectWord(const Item& item, const std::string& what) {
    if (item.kind != Item::Kind::kWord) return Bad(item, absl::StrCat("expected ", what));
    return absl::OkStatus();
  }

  absl::Status RequireNetwork(const Item& at, const std::string& net) {
    if (!t_.networks.contains(NetworkId(net))) return Unresolved(at, net, "network");
    return absl::OkStatus();
  }

  bool MemberExistsAnywhere(const std::string& name) const {
    for (const auto& [net, by_name] : t_.members) {
      if (by_name.contains(MemberName(name))) return true;
    }
    return false;
  }

  // "net.name" naming an existing member.
  absl::StatusOr<compnet::Member*> ResolveMember(const Item& at) {
    auto parts = SplitDotted(at.text);
    if (!parts) return Bad(at, "expected network.member");
    if (absl::Status s = RequireNetwork(at, parts->first); !s.ok()) return s;
    compnet::Member* m = t_.FindMutableMember(
        {NetworkId(parts->first), MemberName(parts->second)});
    if (m == nullptr) return Unresolved(at, at.text, "member");
    return m;
  }

  absl::Status Network(const Record& r) {
    const Item& head = r.items[0];
    if (absl::Status s = ExpectWord(head, "a network name"); !s.ok()) return s;
    NetworkId id(head.text);
    if (t_.networks.contains(id)) return Duplicate(head, head.text);
    compnet::Network network{id, {}};
    for (size_t i = 1; i < r.items.size(); ++i) {
      const Item& spec = r.items[i];
      auto parts = SplitColon(spec.text);
      if (spec.kind != Item::Kind::kWord || !parts) {
        return Bad(spec, "expected field:kind(values)");
      }
      std::optional<FieldKind> kind = ParseFieldKind(parts->second);
      if (!kind) return Bad(spec, "unknown field kind");
      if (network.schema.Find(parts->first) != nullptr) {
        return Duplicate(spec, parts->first);
      }
      FieldSpec field{parts->first, *kind, {}};
      if (i + 1 < r.items.size() && r.items[i + 1].kind == Item::Kind::kGroup) {
        ++i;
        for (const Item& v : r.items[i].group) {
          if (absl::Status s = ExpectWord(v, "a domain value"); !s.ok()) return s;
          if (std::find(field.domain.begin(), field.domain.end(), v.text) !=
              field.domain.end()) {
            return Duplicate(v, v.text);
          }
          field.domain.push_back(v.text);
        }
      }
      network.schema.fields.push_back(std::move(field));
    }
    t_.networks.emplace(id, std::move(network));
    return absl::OkStatus();
  }

  absl::Status Machines(const Record& r) {
    for (const Item& item : r.items) {
      if (absl::Status s = ExpectWord(item, "a machine name"); !s.ok()) return s;
      MachineId id(item.text);
      if (!t_.machines.emplace(id, compnet::Machine{id}).second) {
        return Duplicate(item, item.text);
      }
    }
    return absl::OkStatus();
  }

  absl::Status Member(const Record& r) {
    const Item& head = r.items[0];
    auto parts = SplitDotted(head.text);
    if (head.kind != Item::Kind::kWord || !parts) {
      return Bad(head, "expected network.member");
    }
    if (absl::Status s = RequireNetwork(head, parts->first); !s.ok()) return s;
    compnet::Member member;
    member.network = NetworkId(parts->first);
    member.name = MemberName(parts->second);
    for (size_t i = 1; i < r.items.size(); ++i) {
      const Item& item = r.items[i];
      if (item.kind != Item::Kind::kKeyValue || item.values.empty()) {
        return Bad(item, "expected machine=, role= or owns=");
      }
      if (item.text == "machine") {
        if (!t_.machines.contains(MachineId(item.values[0]))) {
          return Unresolved(item, item.values[0], "machine");
        }
        member.machine = MachineId(item.values[0]);
      } else if (item.text == "role") {
        std::optional<Role> role = Role::Parse(item.values[0]);
        if (!role) return Bad(item, "unknown role");
        member.role = *role;
      } else if (item.text == "owns") {
        member.owns.insert(item.values.begin(), item.values.end());
      } else {
        return Bad(item, "unknown member attribute");
      }
    }
    if (member.machine.empty()) return Bad(head, "member needs machine=");
    auto& by_name = t_.members[member.network];
    if (by_name.contains(member.name)) return Duplicate(head, head.text);
    by_name.emplace(member.name, std::move(member));
    return absl::OkStatus();
  }

  absl::Status Link(const Record& r) {
    if (r.items.size() < 3) return Bad(r.items[0], "expected net.link end end");
    const Item& head = r.items[0];
    auto parts = SplitDotted(head.text);
    if (head.kind != Item::Kind::kWord || !parts) return Bad(head, "expected network.link");
    if (absl::Status s = RequireNetwork(head, parts->first); !s.ok()) return s;
    compnet::Link link;
    link.network = NetworkId(parts->first);
    link.id = LinkId(parts->second);
    if (t_.FindLink(link.ref()) != nullptr) return Duplicate(head, head.text);
    LinkEnd* ends[2] = {&link.end_a, &link.end_b};
    for (int e = 0; e < 2; ++e) {
      const Item& item = r.items[1 + e];
      auto end = SplitColon(item.text);
      if (item.kind != Item::Kind::kWord || !end) return Bad(item, "expected member:local");
      if (!MemberExistsAnywhere(end->first)) return Unresolved(item, end->first, "member");
      *ends[e] = LinkEnd{MemberName(end->first), LocalLinkId(end->second)};
    }
    for (size_t i = 3; i < r.items.size(); ++i) {
      const Item& item = r.items[i];
      if (item.kind != Item::Kind::kKeyValue || item.values.empty()) {
        return Bad(item, "expected impl= or tags=");
      }
      if (item.text == "impl") {
        if (item.values[0] == "primitive") continue;
        auto sess = SplitDotted(item.values[0]);
        if (!sess) return Bad(item, "expected impl=primitive or impl=network.session");
        link.external = SessionRef{NetworkId(sess->first), SessionId(sess->second)};
      } else if (item.text == "tags") {
        link.tags.insert(item.values.begin(), item.values.end());
      } else {
        return Bad(item, "unknown link attribute");
      }
    }
    for (int e = 0; e < 2; ++e) {
      compnet::Member* m = t_.FindMutableMember({link.network, ends[e]->member});
      if (m == nullptr) continue;  // Cross-network end; reported by validation.
      if (!m->local_links.emplace(ends[e]->local, link.id).second) {
        return Duplicate(r.items[1 + e], r.items[1 + e].text);
      }
    }
    t_.links[link.network].emplace(link.id, std::move(link));
    return absl::OkStatus();
  }

  absl::StatusOr<FieldMap> Assignments(const Item& group_item) {
    FieldMap out;
    for (const Item& kv : group_item.group) {
      if (kv.kind != Item::Kind::kKeyValue || kv.values.size() != 1) {
        return Bad(kv, "expected field=value");
      }
      if (!out.emplace(kv.text, kv.values[0]).second) return Duplicate(kv, kv.text);
    }
    return out;
  }

  absl::Status Session(const Record& r) {
    if (r.items.size() < 4 || r.items[2].kind != Item::Kind::kArrow) {
      return Bad(r.items[0], "expected net.session initiator -> responder");
    }
    const Item& head = r.items[0];
    auto parts = SplitDotted(head.text);
    if (head.kind != Item::Kind::kWord || !parts) return Bad(head, "expected network.session");
    if (absl::Status s = RequireNetwork(head, parts->first); !s.ok()) return s;
    compnet::Session session;
    session.network = NetworkId(parts->first);
    session.id = SessionId(parts->second);
    if (t_.FindSession(session.ref()) != nullptr) return Duplicate(head, head.text);
    for (int e : {1, 3}) {
      const Item& item = r.items[e];
      if (absl::Status s = ExpectWord(item, "a member name"); !s.ok()) return s;
      if (!MemberExistsAnywhere(item.text)) return Unresolved(item, item.text, "member");
    }
    session.initiator = MemberName(r.items[1].text);
    session.responder = MemberName(r.items[3].text);
    for (size_t i = 4; i < r.items.size(); ++i) {
      const Item& item = r.items[i];
      if (item.kind != Item::Kind::kKeyValue) return Bad(item, "expected attribute=");
      if (item.text == "header" && item.group_value) {
        absl::StatusOr<FieldMap> header = Assignments(item);
        if (!header.ok()) return header.status();
        session.header_template = *std::move(header);
      } else if (item.text == "attrs" && !item.group_value) {
        session.attributes.insert(item.values.begin(), item.values.end());
      } else if (item.text == "implements" && item.values.size() == 1) {
        auto link = SplitDotted(item.values[0]);
        if (!link) return Bad(item, "expected implements=network.link");
        session.implements = LinkRef{NetworkId(link->first), LinkId(link->second)};
      } else {
        return Bad(item, "unknown session attribute");
      }
    }
    t_.sessions[session.network].emplace(session.id, std::move(session));
    return absl::OkStatus();
  }

  absl::StatusOr<BridgePort> Port(const Item& item) {
    if (item.values.size() != 1) return Bad(item, "expected network.member:port");
    auto colon = SplitColon(item.values[0]);
    if (!colon) return Bad(item, "expected network.member:port");
    auto dotted = SplitDotted(colon->first);
    if (!dotted) return Bad(item, "expected network.member:port");
    if (absl::Status s = RequireNetwork(item, dotted->first); !s.ok()) return s;
    BridgePort port{NetworkId(dotted->first), MemberName(dotted->second),
                    LocalLinkId(colon->second)};
    if (t_.FindMember(port.ref()) == nullptr) {
      return Unresolved(item, colon->first, "member");
    }
    return port;
  }

  absl::Status Bridge(const Record& r) {
    const Item& head = r.items[0];
    if (absl::Status s = ExpectWord(head, "a bridge name"); !s.ok()) return s;
    compnet::Bridge bridge;
    bridge.id = head.text;
    for (const compnet::Bridge& b : t_.bridges) {
      if (b.id == bridge.id) return Duplicate(head, head.text);
    }
    bool have_a = false, have_b = false;
    for (size_t i = 1; i < r.items.size(); ++i) {
      const Item& item = r.items[i];
      if (item.kind != Item::Kind::kKeyValue) return Bad(item, "expected attribute=");
      if (item.text == "machine" && item.values.size() == 1) {
        if (!t_.machines.contains(MachineId(item.values[0]))) {
          return Unresolved(item, item.values[0], "machine");
        }
        bridge.machine = MachineId(item.values[0]);
      } else if (item.text == "a" || item.text == "b") {
        absl::StatusOr<BridgePort> port = Port(item);
        if (!port.ok()) return port.status();
        (item.text == "a" ? bridge.side_a : bridge.side_b) = *std::move(port);
        (item.text == "a" ? have_a : have_b) = true;
      } else if (item.text == "rewrite" && item.group_value) {
        if (item.group.size() != 4) {
          return Bad(item, "expected rewrite=(fromNetwork field from to)");
        }
        for (const Item& w : item.group) {
          if (absl::Status s = ExpectWord(w, "a word"); !s.ok()) return s;
        }
        bridge.rewrites.push_back({NetworkId(item.group[0].text), item.group[1].text,
                                   item.group[2].text, item.group[3].text});
      } else {
        return Bad(item, "unknown bridge attribute");
      }
    }
    if (bridge.machine.empty() || !have_a || !have_b) {
      return Bad(head, "bridge needs machine=, a= and b=");
    }
    t_.bridges.push_back(std::move(bridge));
    return absl::OkStatus();
  }

  absl::StatusOr<compnet::Match> ParseMatch(const std::vector<Item>& items) {
    compnet::Match match;
    for (const Item& item : items) {
      if (item.kind == Item::Kind::kWord && item.text == "*") continue;
      if (item.kind != Item::Kind::kKeyValue || item.values.size() != 1) {
        return Bad(item, "expected field=value");
      }
      const std::string& v = item.values[0];
      if (item.text == "inLink") {
        if (match.in_link.has_value()) return Duplicate(item, item.text);
        if (v != "*") match.in_link = LocalLinkId(v);
        continue;
      }
      if (v == "*") continue;
      FieldPredicate predicate = v.back() == '*'
                                     ? FieldPredicate::Prefix(v.substr(0, v.size() - 1))
                                     : FieldPredicate::Exact(v);
      if (!match.fields.emplace(item.text, predicate).second) {
        return Duplicate(item, item.text);
      }
    }
    return match;
  }

  absl::Status Table(const Record& r) {
    if (r.items.size() < 4) return Bad(r.items[0], "incomplete table entry");
    const Item& fn = r.items[0];
    if (absl::Status s = ExpectWord(fn, "a table function"); !s.ok()) return s;
    absl::StatusOr<compnet::Member*> member = ResolveMember(r.items[1]);
    if (!member.ok()) return member.status();
    MemberTables& tables = (*member)->tables;
    size_t arrow = 0;
    for (size_t i = 2; i < r.items.size(); ++i) {
      if (r.items[i].kind == Item::Kind::kArrow) {
        arrow = i;
        break;
      }
    }
    if (arrow < 3 || arrow + 1 >= r.items.size()) return Bad(fn, "expected key -> action");
    const Item& key = r.items[2];
    std::vector<Item> action(r.items.begin() + arrow + 1, r.items.end());
    auto action_words = [&]() {
      std::vector<std::string> words;
      for (const Item& a : action) words.push_back(a.kind == Item::Kind::kWord ? a.text : "");
      return words;
    }();

    if (fn.text == "transmit" || fn.text == "send" || fn.text == "receive") {
      if (arrow != 3) return Bad(r.items[3], "expected '->'");
      if (absl::Status s = ExpectWord(key, "a key"); !s.ok()) return s;
    }
    if (fn.text == "transmit") {
      LocalLinkId local(key.text);
      if (tables.transmit.contains(local)) return Duplicate(key, key.text);
      if (action_words[0] == "primitive" && action.size() <= 2) {
        std::string port = action.size() == 2 ? action_words[1] : key.text;
        if (port.empty()) return Bad(action[1], "expected a port");
        tables.transmit.emplace(local, PrimitivePort{port});
      } else if (action_words[0] == "session" && action.size() == 2) {
        auto sess = SplitDotted(action_words[1]);
        if (!sess) return Bad(action[1], "expected network.session");
        tables.transmit.emplace(
            local, ExternalSession{{NetworkId(sess->first), SessionId(sess->second)}});
      } else {
        return Bad(action[0], "expected primitive [port] or session network.id");
      }
      return absl::OkStatus();
    }
    if (fn.text == "send") {
      SessionId sid(key.text);
      if (tables.send.contains(sid)) return Duplicate(key, key.text);
      if (action.size() != 1 || action[0].kind != Item::Kind::kGroup) {
        return Bad(action[0], "expected (field=value ...)");
      }
      absl::StatusOr<FieldMap> encoding = Assignments(action[0]);
      if (!encoding.ok()) return encoding.status();
      tables.send.emplace(sid, *std::move(encoding));
      return absl::OkStatus();
    }
    if (fn.text == "receive") {
      SessionId sid(key.text);
      if (tables.receive.contains(sid)) return Duplicate(key, key.text);
      if (action_words[0] == "primitive" && action.size() == 1) {
        tables.receive.emplace(sid, PrimitiveDelivery{});
      } else if (action_words[0] == "link" && action.size() == 2) {
        auto link = SplitDotted(action_words[1]);
        if (!link) return Bad(action[1], "expected network.link");
        tables.receive.emplace(
            sid, ExternalLink{{NetworkId(link->first), LinkId(link->second)}});
      } else {
        return Bad(action[0], "expected primitive or link network.link");
      }
      return absl::OkStatus();
    }
    if (fn.text != "forward" && fn.text != "acquire") {
      return Bad(fn, "unknown table function");
    }
    int priority = 0;
    if (key.kind != Item::Kind::kWord || !absl::SimpleAtoi(key.text, &priority)) {
      return Bad(key, "expected an integer priority");
    }
    absl::StatusOr<compnet::Match> match = ParseMatch(
        std::vector<Item>(r.items.begin() + 3, r.items.begin() + arrow));
    if (!match.ok()) return match.status();
    absl::Status inserted;
    if (fn.text == "forward") {
      ForwardAction act;
      if (action_words[0] == "drop" && action.size() == 1) {
        act = DropAction{};
      } else if (action_words[0] == "out" && action.size() == 2 &&
                 !action_words[1].empty()) {
        act = OutLink{LocalLinkId(action_words[1])};
      } else {
        return Bad(action[0], "expected drop or out <link>");
      }
      inserted = tables.forward.Insert({priority, *std::move(match), act});
    } else {
      AcquireAction act;
      if (action_words[0] == "receive" && action.size() == 1) {
        act = AcquireAction::kReceive;
      } else if (action_words[0] == "forward" && action.size() == 1) {
        act = AcquireAction::kForward;
      } else {
        return Bad(action[0], "expected receive or forward");
      }
      inserted = tables.acquire.Insert({priority, *std::move(match), act});
    }
    if (!inserted.ok()) return Duplicate(key, key.text);
    return absl::OkStatus();
  }

  absl::Status Axiom(const Record& r) {
    const Item& head = r.items[0];
    auto parts = SplitDotted(head.text);
    if (head.kind != Item::Kind::kWord || !parts) return Bad(head, "expected network.session");
    TagSet& tags = t_.session_axioms[SessionRef{NetworkId(parts->first),
                                                SessionId(parts->second)}];
    for (size_t i = 1; i < r.items.size(); ++i) {
      if (absl::Status s = ExpectWord(r.items[i], "a tag"); !s.ok()) return s;
      tags.insert(r.items[i].text);
    }
    return absl::OkStatus();
  }

  absl::Status Property(const Record& r) {
    if (r.items.size() < 3) return Bad(r.items[0], "expected name check network");
    for (int i = 0; i < 3; ++i) {
      if (absl::Status s = ExpectWord(r.items[i], "a word"); !s.ok()) return s;
    }
    PropertyDecl decl{r.items[0].text, r.items[1].text, NetworkId(r.items[2].text), {}};
    for (const PropertyDecl& d : t_.properties) {
      if (d.name == decl.name) return Duplicate(r.items[0], decl.name);
    }
    if (absl::Status s = RequireNetwork(r.items[2], r.items[2].text); !s.ok()) return s;
    for (size_t i = 3; i < r.items.size(); ++i) {
      const Item& item = r.items[i];
      if (item.kind != Item::Kind::kKeyValue || item.group_value) {
        return Bad(item, "expected key=value[,value]");
      }
      if (!decl.params.emplace(item.text, item.values).second) {
        return Duplicate(item, item.text);
      }
    }
    t_.properties.push_back(std::move(decl));
    return absl::OkStatus();
  }

  Topology t_;
};

// ---------------------------------------------------------------- writing

std::string Join(const std::set<std::string>& s) { return absl::StrJoin(s, ","); }

std::string Assign(const FieldMap& fields) {
  return "(" + absl::StrJoin(fields, " ", absl::PairFormatter("=")) + ")";
}

}  // namespace

absl::StatusOr<Topology> ParseTopology(std::string_view text) {
  absl::StatusOr<std::vector<Token>> tokens = Lex(text);
  if (!tokens.ok()) return tokens.status();
  absl::StatusOr<std::vector<Section>> sections =
      RecordParser(*std::move(tokens)).Document();
  if (!sections.ok()) return sections.status();
  return Builder().Build(*std::move(sections));
}

std::string SerializeTopology(const Topology& t) {
  std::string out;
  out += "networks {\n";
  for (const auto& [id, network] : t.networks) {
    absl::StrAppend(&out, "  ", id.value());
    for (const FieldSpec& f : network.schema.fields) {
      absl::StrAppend(&out, " ", f.name, ":", ToString(f.kind), "(",
                      absl::StrJoin(f.domain, " "), ")");
    }
    out += ";\n";
  }
  out += "}\n\nmachines {\n";
  for (const auto& [id, machine] : t.machines) absl::StrAppend(&out, "  ", id.value(), ";\n");
  out += "}\n\nmembers {\n";
  for (const auto& [net, by_name] : t.members) {
    for (const auto& [name, m] : by_name) {
      absl::StrAppend(&out, "  ", m.ref().ToString(), " machine=", m.machine.value(),
                      " role=", m.role.ToString());
      if (!m.owns.empty()) absl::StrAppend(&out, " owns=", Join(m.owns));
      out += ";\n";
    }
  }
  out += "}\n\nlinks {\n";
  for (const auto& [net, by_id] : t.links) {
    for (const auto& [id, l] : by_id) {
      absl::StrAppend(&out, "  ", l.ref().ToString(), " ", l.end_a.member.value(), ":",
                      l.end_a.local.value(), " ", l.end_b.member.value(), ":",
                      l.end_b.local.value(), " impl=",
                      l.external ? l.external->ToString() : "primitive");
      if (!l.tags.empty()) absl::StrAppend(&out, " tags=", Join(l.tags));
      out += ";\n";
    }
  }
  out += "}\n\nsessions {\n";
  for (const auto& [net, by_id] : t.sessions) {
    for (const auto& [id, s] : by_id) {
      absl::StrAppend(&out, "  ", s.ref().ToString(), " ", s.initiator.value(), " -> ",
                      s.responder.value(), " header=", Assign(s.header_template));
      if (!s.attributes.empty()) absl::StrAppend(&out, " attrs=", Join(s.attributes));
      if (s.implements) absl::StrAppend(&out, " implements=", s.implements->ToString());
      out += ";\n";
    }
  }
  out += "}\n\nbridges {\n";
  for (const Bridge& b : t.bridges) {
    absl::StrAppend(&out, "  ", b.id, " machine=", b.machine.value(), " a=",
                    b.side_a.ref().ToString(), ":", b.side_a.port.value(), " b=",
                    b.side_b.ref().ToString(), ":", b.side_b.port.value());
    for (const Rewrite& rw : b.rewrites) {
      absl::StrAppend(&out, " rewrite=(", rw.from_network.value(), " ", rw.field, " ",
                      rw.from, " ", rw.to, ")");
    }
    out += ";\n";
  }
  out += "}\n\ntables {\n";
  for (const auto& [net, by_name] : t.members) {
    for (const auto& [name, m] : by_name) {
      const std::string who = m.ref().ToString();
      for (const auto& [local, action] : m.tables.transmit) {
        absl::StrAppend(&out, "  transmit ", who, " ", local.value(), " -> ",
                        ToString(action), ";\n");
      }
      for (const auto& [sid, enc] : m.tables.send) {
        absl::StrAppend(&out, "  send ", who, " ", sid.value(), " -> ", Assign(enc), ";\n");
      }
      for (const ForwardRule& rule : m.tables.forward.rules()) {
        absl::StrAppend(&out, "  forward ", who, " ", rule.priority, " ",
                        rule.match.ToString(), " -> ", ToString(rule.action), ";\n");
      }
      for (const AcquireRule& rule : m.tables.acquire.rules()) {
        absl::StrAppend(&out, "  acquire ", who, " ", rule.priority, " ",
                        rule.match.ToString(), " -> ", ToString(rule.action), ";\n");
      }
      for (const auto& [sid, action] : m.tables.receive) {
        absl::StrAppend(&out, "  receive ", who, " ", sid.value(), " -> ",
                        ToString(action), ";\n");
      }
    }
  }
  out += "}\n\nsessionAxioms {\n";
  for (const auto& [ref, tags] : t.session_axioms) {
    absl::StrAppend(&out, "  ", ref.ToString());
    for (const std::string& tag : tags) absl::StrAppend(&out, " ", tag);
    out += ";\n";
  }
  out += "}\n\nproperties {\n";
  for (const PropertyDecl& p : t.properties) {
    absl::StrAppend(&out, "  ", p.name, " ", p.check, " ", p.network.value());
    for (const auto& [key, values] : p.params) {
      absl::StrAppend(&out, " ", key, "=", absl::StrJoin(values, ","));
    }
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace compnet
