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


// Brute-force reference for reachability: walks every concrete header
// through the concrete pipeline functions, one header at a time.

#ifndef COMPNET_TESTS_TESTING_ORACLE_H_
#define COMPNET_TESTS_TESTING_ORACLE_H_

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/statusor.h"
#include "compnet/topology.h"

namespace compnet::testing {

// "delivered", "dropped" or "exit".
using PathKey = std::tuple<std::vector<std::string>, std::string>;
using PathMap = std::map<PathKey, std::set<FieldMap>>;

// Every concrete header of the schema, nested loops in field order.
std::vector<FieldMap> EnumerateUniverse(const HeaderSchema& schema);

// For every member of `network` (or only `source` when non-empty) and every
// concrete header it originates, the member path and how the walk ended.
// Walks that revisit a member are discarded; links whose far end lies in
// another network count as drops.
absl::StatusOr<PathMap> BruteForceReachability(const Topology& topology,
                                               const NetworkId& network,
                                               const std::string& source = "");

}  // namespace compnet::testing

#endif  // COMPNET_TESTS_TESTING_ORACLE_H_
