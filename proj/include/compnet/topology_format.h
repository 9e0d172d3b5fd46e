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


// Text format for topologies: `section { record; ... }` blocks. The grammar is
// documented in docs/topology-format.md.

#ifndef COMPNET_TOPOLOGY_FORMAT_H_
#define COMPNET_TOPOLOGY_FORMAT_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "compnet/topology.h"

namespace compnet {

// Parses a topology document. Errors carry `line:column:` and the offending
// token:
//   InvalidArgument  SyntaxError
//   NotFound         UnresolvedReference
//   AlreadyExists    DuplicateName
// Seam and table consistency are left to ValidateTopology.
absl::StatusOr<Topology> ParseTopology(std::string_view text);

// Canonical text form; ParseTopology(SerializeTopology(t)) == t.
std::string SerializeTopology(const Topology& topology);

}  // namespace compnet

#endif  // COMPNET_TOPOLOGY_FORMAT_H_
