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


// Built-in scenario topologies, shipped as topology-format text.

#ifndef COMPNET_SCENARIOS_H_
#define COMPNET_SCENARIOS_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/topology.h"

namespace compnet {

// Identifiers of the built-in scenarios, sorted.
std::vector<std::string> ScenarioIds();

// Source text of a scenario; NotFound ("UnknownScenario") for unknown ids.
absl::StatusOr<std::string> ScenarioText(std::string_view id);

// Parsed scenario topology.
absl::StatusOr<Topology> Scenario(std::string_view id);

}  // namespace compnet

#endif  // COMPNET_SCENARIOS_H_
