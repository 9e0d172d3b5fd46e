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


// Finite header spaces. A header set over a schema is a union of pairwise
// disjoint cubes; a cube holds, per field, a bitmask over the field's domain
// (bit i set means domain value i is allowed).

#ifndef COMPNET_HEADER_SPACE_H_
#define COMPNET_HEADER_SPACE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "compnet/tables.h"
#include "compnet/topology.h"

namespace compnet {

struct Cube {
  std::vector<uint64_t> masks;

  bool empty() const;
  uint64_t Count() const;
  friend bool operator==(const Cube&, const Cube&) = default;
};

class HeaderSet {
 public:
  HeaderSet() = default;

  static HeaderSet Empty(const HeaderSchema& schema);
  static HeaderSet Universe(const HeaderSchema& schema);
  // Headers satisfying the field predicates of `match` (inLink is ignored).
  static HeaderSet FromMatch(const HeaderSchema& schema, const Match& match);
  // The single header `header`; empty if a value lies outside its domain.
  static HeaderSet FromHeader(const HeaderSchema& schema,
                              const FieldMap& header);
  // Headers whose `field` takes one of `values`.
  static HeaderSet FieldIn(const HeaderSchema& schema, std::string_view field,
                           const std::vector<std::string>& values);

  HeaderSet Intersect(const HeaderSet& other) const;
  HeaderSet Subtract(const HeaderSet& other) const;
  HeaderSet Union(const HeaderSet& other) const;
  // Widens every field outside `keep` to its full domain.
  HeaderSet Project(const std::vector<std::string>& keep) const;

  bool IsEmpty() const { return cubes_.empty(); }
  bool Contains(const FieldMap& header) const;
  uint64_t Count() const;
  // Smallest member, ordering headers by the domain positions of their
  // fields in schema order.
  std::optional<FieldMap> Witness() const;
  // Every member, in the same order as Witness.
  std::vector<FieldMap> Enumerate() const;
  // Values `field` takes across the set, in domain order.
  std::vector<std::string> ValuesOf(std::string_view field) const;

  const std::vector<Cube>& cubes() const { return cubes_; }
  const HeaderSchema* schema() const { return schema_; }
  std::string ToString() const;

 private:
  HeaderSet(const HeaderSchema* schema, std::vector<Cube> cubes)
      : schema_(schema), cubes_(std::move(cubes)) {}

  Cube Full() const;
  std::optional<Cube> CubeOf(const Match& match) const;

  const HeaderSchema* schema_ = nullptr;
  std::vector<Cube> cubes_;
};

}  // namespace compnet

#endif  // COMPNET_HEADER_SPACE_H_
