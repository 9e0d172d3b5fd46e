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


#include "compnet/tables.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace compnet {

bool FieldPredicate::Matches(const std::string& field_value) const {
  switch (kind) {
    case Kind::kExact:
      return field_value == value;
    case Kind::kPrefix:
      return field_value.compare(0, value.size(), value) == 0;
  }
  return false;
}

std::string FieldPredicate::ToString() const {
  return kind == Kind::kPrefix ? value + "*" : value;
}

bool Match::Matches(const std::optional<LocalLinkId>& packet_in_link,
                    const FieldMap& header) const {
  if (in_link.has_value() && packet_in_link != in_link) return false;
  for (const auto& [name, predicate] : fields) {
    auto it = header.find(name);
    if (it == header.end() || !predicate.Matches(it->second)) return false;
  }
  return true;
}

std::string Match::ToString() const {
  std::vector<std::string> parts;
  if (in_link.has_value()) parts.push_back("inLink=" + in_link->value());
  for (const auto& [name, predicate] : fields) {
    parts.push_back(absl::StrCat(name, "=", predicate.ToString()));
  }
  if (parts.empty()) return "*";
  return absl::StrJoin(parts, " ");
}

template <typename Rule>
absl::Status PrioritizedTable<Rule>::Insert(Rule rule) {
  auto it = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& r) {
    return r.priority <= rule.priority;
  });
  if (it != rules_.end() && it->priority == rule.priority) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate priority ", rule.priority));
  }
  rules_.insert(it, std::move(rule));
  return absl::OkStatus();
}

template class PrioritizedTable<ForwardRule>;
template class PrioritizedTable<AcquireRule>;

std::string FieldMapToString(const FieldMap& fields) {
  return absl::StrJoin(fields, " ", absl::PairFormatter("="));
}

std::string ToString(const TransmitAction& action) {
  if (const auto* port = std::get_if<PrimitivePort>(&action)) {
    return "primitive " + port->port;
  }
  return "session " + std::get<ExternalSession>(action).session.ToString();
}

std::string ToString(const ForwardAction& action) {
  if (const auto* out = std::get_if<OutLink>(&action)) {
    return "out " + out->link.value();
  }
  return "drop";
}

std::string ToString(AcquireAction action) {
  return action == AcquireAction::kReceive ? "receive" : "forward";
}

std::string ToString(const ReceiveAction& action) {
  if (const auto* link = std::get_if<ExternalLink>(&action)) {
    return "link " + link->link.ToString();
  }
  return "primitive";
}

}  // namespace compnet
