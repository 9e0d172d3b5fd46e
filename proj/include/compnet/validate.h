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


#ifndef COMPNET_VALIDATE_H_
#define COMPNET_VALIDATE_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/topology.h"

namespace compnet {

enum class ViolationCode {
  kUnknownNetwork,
  kUnknownMachine,
  kMachineMembers,     // A machine hosts two members of one network.
  kSchema,
  kLinkEnd,
  kLocalLink,
  kDanglingSession,    // External impl names a session that does not exist.
  kSessionNetwork,     // External impl names a session of the same network.
  kSeamBijection,
  kSessionEndpoint,
  kTable,
  kBridge,
  kAxiom,
  kProperty,
};

std::string ToString(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool Has(ViolationCode code) const;
  std::string ToString() const;
};

// Lists every structural invariant the topology violates. An empty report
// means the topology is well formed, including the link/session seam.
ValidationReport ValidateTopology(const Topology& topology);

// The session implementing `link`, or nullopt for a Primitive link.
// NotFound if the link does not exist.
absl::StatusOr<std::optional<SessionRef>> SessionForLink(
    const Topology& topology, const NetworkId& network, const LinkId& link);

// The link implemented by `session`, or nullopt if it implements none.
// NotFound if the session does not exist.
absl::StatusOr<std::optional<LinkRef>> LinkForSession(
    const Topology& topology, const SessionRef& session);

}  // namespace compnet

#endif  // COMPNET_VALIDATE_H_
