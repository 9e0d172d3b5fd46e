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


// Match-action table representations for the five per-network functions.

#ifndef COMPNET_TABLES_H_
#define COMPNET_TABLES_H_

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "compnet/id.h"

namespace compnet {

// Header field values keyed by field name.
using FieldMap = std::map<std::string, std::string>;

// Constraint on one header field. Fields without a predicate are wildcards.
struct FieldPredicate {
  enum class Kind { kExact, kPrefix };
  Kind kind = Kind::kExact;
  std::string value;

  static FieldPredicate Exact(std::string v) { return {Kind::kExact, std::move(v)}; }
  static FieldPredicate Prefix(std::string v) { return {Kind::kPrefix, std::move(v)}; }

  bool Matches(const std::string& field_value) const;
  std::string ToString() const;

  friend bool operator==(const FieldPredicate&, const FieldPredicate&) = default;
};

// inLink pattern plus header predicates.
struct Match {
  std::optional<LocalLinkId> in_link;  // nullopt matches any inLink.
  std::map<std::string, FieldPredicate> fields;

  bool Matches(const std::optional<LocalLinkId>& packet_in_link,
               const FieldMap& header) const;
  // "*" for the match-everything pattern.
  std::string ToString() const;

  friend bool operator==(const Match&, const Match&) = default;
};

// ---- Transmit: keyed by local link id.
struct PrimitivePort {
  std::string port;
  friend bool operator==(const PrimitivePort&, const PrimitivePort&) = default;
};
struct ExternalSession {
  SessionRef session;
  friend bool operator==(const ExternalSession&, const ExternalSession&) = default;
};
using TransmitAction = std::variant<PrimitivePort, ExternalSession>;
using TransmitTable = std::map<LocalLinkId, TransmitAction>;

// ---- Send: keyed by session id, value is the encapsulating header.
using SendTable = std::map<SessionId, FieldMap>;

// ---- Forward: prioritized, first match wins.
struct DropAction {
  friend bool operator==(const DropAction&, const DropAction&) = default;
};
struct OutLink {
  LocalLinkId link;
  friend bool operator==(const OutLink&, const OutLink&) = default;
};
using ForwardAction = std::variant<DropAction, OutLink>;

struct ForwardRule {
  int priority = 0;
  Match match;
  ForwardAction action;
  friend bool operator==(const ForwardRule&, const ForwardRule&) = default;
};

// ---- Acquire: prioritized, first match wins.
enum class AcquireAction { kReceive, kForward };

struct AcquireRule {
  int priority = 0;
  Match match;
  AcquireAction action = AcquireAction::kReceive;
  friend bool operator==(const AcquireRule&, const AcquireRule&) = default;
};

// Rules kept sorted by descending priority; priorities are unique.
template <typename Rule>
class PrioritizedTable {
 public:
  // Fails with AlreadyExists on a duplicate priority.
  absl::Status Insert(Rule rule);
  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<Rule>& mutable_rules() { return rules_; }
  bool empty() const { return rules_.empty(); }
  size_t size() const { return rules_.size(); }

  // First rule (highest priority) that matches, or nullptr.
  const Rule* Lookup(const std::optional<LocalLinkId>& in_link,
                     const FieldMap& header) const {
    for (const Rule& rule : rules_) {
      if (rule.match.Matches(in_link, header)) return &rule;
    }
    return nullptr;
  }

  friend bool operator==(const PrioritizedTable&, const PrioritizedTable&) = default;

 private:
  std::vector<Rule> rules_;
};

using ForwardTable = PrioritizedTable<ForwardRule>;
using AcquireTable = PrioritizedTable<AcquireRule>;

// ---- Receive: keyed by the session identifier carried in the header.
struct PrimitiveDelivery {
  friend bool operator==(const PrimitiveDelivery&, const PrimitiveDelivery&) = default;
};
struct ExternalLink {
  LinkRef link;
  friend bool operator==(const ExternalLink&, const ExternalLink&) = default;
};
using ReceiveAction = std::variant<PrimitiveDelivery, ExternalLink>;
using ReceiveTable = std::map<SessionId, ReceiveAction>;

// All five tables of one member.
struct MemberTables {
  TransmitTable transmit;
  SendTable send;
  ForwardTable forward;
  AcquireTable acquire;
  ReceiveTable receive;

  size_t RuleCount() const {
    return transmit.size() + send.size() + forward.size() + acquire.size() +
           receive.size();
  }
  friend bool operator==(const MemberTables&, const MemberTables&) = default;
};

std::string FieldMapToString(const FieldMap& fields);
std::string ToString(const TransmitAction& action);
std::string ToString(const ForwardAction& action);
std::string ToString(AcquireAction action);
std::string ToString(const ReceiveAction& action);

}  // namespace compnet

#endif  // COMPNET_TABLES_H_
