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


#include "compnet/scenarios.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "compnet/topology_format.h"

namespace compnet {

// Defined in the generated scenario_data.cc.
const std::vector<std::pair<std::string, std::string>>& ScenarioTable();

std::vector<std::string> ScenarioIds() {
  std::vector<std::string> ids;
  for (const auto& [id, text] : ScenarioTable()) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

absl::StatusOr<std::string> ScenarioText(std::string_view id) {
  for (const auto& [name, text] : ScenarioTable()) {
    if (name == id) return text;
  }
  return absl::NotFoundError(absl::StrCat("UnknownScenario: '", std::string(id), "'"));
}

absl::StatusOr<Topology> Scenario(std::string_view id) {
  absl::StatusOr<std::string> text = ScenarioText(id);
  if (!text.ok()) return text.status();
  return ParseTopology(*text);
}

}  // namespace compnet
