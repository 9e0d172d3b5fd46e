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


#include "compnet/header_space.h"

#include <algorithm>
#include <bit>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace compnet {
namespace {

uint64_t FullMask(const FieldSpec& field) {
  size_t n = field.domain.size();
  return n >= 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
}

uint64_t MaskOf(const FieldSpec& field, const FieldPredicate& predicate) {
  uint64_t mask = 0;
  for (size_t i = 0; i < field.domain.size() && i < 64; ++i) {
    if (predicate.Matches(field.domain[i])) mask |= uint64_t{1} << i;
  }
  return mask;
}

bool Disjoint(const Cube& a, const Cube& b) {
  for (size_t i = 0; i < a.masks.size(); ++i) {
    if ((a.masks[i] & b.masks[i]) == 0) return true;
  }
  return false;
}

// a - b as disjoint cubes.
void SubtractCube(const Cube& a, const Cube& b, std::vector<Cube>& out) {
  if (Disjoint(a, b)) {
    out.push_back(a);
    return;
  }
  Cube prefix = a;
  for (size_t i = 0; i < a.masks.size(); ++i) {
    uint64_t outside = a.masks[i] & ~b.masks[i];
    if (outside != 0) {
      Cube piece = prefix;
      piece.masks[i] = outside;
      out.push_back(std::move(piece));
    }
    prefix.masks[i] = a.masks[i] & b.masks[i];
  }
}

using IndexTuple = std::vector<int>;

void ExpandCube(const Cube& cube, size_t field, IndexTuple& current,
                std::vector<IndexTuple>& out) {
  if (field == cube.masks.size()) {
    out.push_back(current);
    return;
  }
  for (uint64_t m = cube.masks[field]; m != 0; m &= m - 1) {
    current.push_back(std::countr_zero(m));
    ExpandCube(cube, field + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

bool Cube::empty() const {
  return std::any_of(masks.begin(), masks.end(),
                     [](uint64_t m) { return m == 0; });
}

uint64_t Cube::Count() const {
  uint64_t n = 1;
  for (uint64_t m : masks) n *= std::popcount(m);
  return n;
}

Cube HeaderSet::Full() const {
  Cube cube;
  for (const FieldSpec& field : schema_->fields) {
    cube.masks.push_back(FullMask(field));
  }
  return cube;
}

HeaderSet HeaderSet::Empty(const HeaderSchema& schema) {
  return HeaderSet(&schema, {});
}

HeaderSet HeaderSet::Universe(const HeaderSchema& schema) {
  HeaderSet set(&schema, {});
  Cube full = set.Full();
  if (!full.empty()) set.cubes_.push_back(std::move(full));
  return set;
}

std::optional<Cube> HeaderSet::CubeOf(const Match& match) const {
  Cube cube = Full();
  for (const auto& [name, predicate] : match.fields) {
    int index = schema_->IndexOf(name);
    if (index < 0) return std::nullopt;  // Constrains a field no header has.
    cube.masks[index] &= MaskOf(schema_->fields[index], predicate);
  }
  if (cube.empty()) return std::nullopt;
  return cube;
}

HeaderSet HeaderSet::FromMatch(const HeaderSchema& schema, const Match& match) {
  HeaderSet set(&schema, {});
  if (std::optional<Cube> cube = set.CubeOf(match)) {
    set.cubes_.push_back(*std::move(cube));
  }
  return set;
}

HeaderSet HeaderSet::FromHeader(const HeaderSchema& schema,
                                const FieldMap& header) {
  Match match;
  for (const FieldSpec& field : schema.fields) {
    auto it = header.find(field.name);
    if (it == header.end()) return Empty(schema);
    match.fields.emplace(field.name, FieldPredicate::Exact(it->second));
  }
  return FromMatch(schema, match);
}

HeaderSet HeaderSet::FieldIn(const HeaderSchema& schema, std::string_view field,
                             const std::vector<std::string>& values) {
  HeaderSet set(&schema, {});
  int index = schema.IndexOf(field);
  if (index < 0) return set;
  Cube cube = set.Full();
  uint64_t mask = 0;
  for (const std::string& value : values) {
    mask |= MaskOf(schema.fields[index], FieldPredicate::Exact(value));
  }
  cube.masks[index] &= mask;
  if (!cube.empty()) set.cubes_.push_back(std::move(cube));
  return set;
}

HeaderSet HeaderSet::Intersect(const HeaderSet& other) const {
  HeaderSet out(schema_ ? schema_ : other.schema_, {});
  for (const Cube& a : cubes_) {
    for (const Cube& b : other.cubes_) {
      Cube c = a;
      for (size_t i = 0; i < c.masks.size(); ++i) c.masks[i] &= b.masks[i];
      if (!c.empty()) out.cubes_.push_back(std::move(c));
    }
  }
  return out;
}

HeaderSet HeaderSet::Subtract(const HeaderSet& other) const {
  std::vector<Cube> current = cubes_;
  for (const Cube& b : other.cubes_) {
    std::vector<Cube> next;
    for (const Cube& a : current) SubtractCube(a, b, next);
    current = std::move(next);
  }
  return HeaderSet(schema_ ? schema_ : other.schema_, std::move(current));
}

HeaderSet HeaderSet::Union(const HeaderSet& other) const {
  HeaderSet out = other.Subtract(*this);
  out.schema_ = schema_ ? schema_ : other.schema_;
  out.cubes_.insert(out.cubes_.begin(), cubes_.begin(), cubes_.end());
  return out;
}

HeaderSet HeaderSet::Project(const std::vector<std::string>& keep) const {
  if (schema_ == nullptr) return *this;
  Cube full = Full();
  HeaderSet out(schema_, {});
  for (Cube cube : cubes_) {
    for (size_t i = 0; i < cube.masks.size(); ++i) {
      if (std::find(keep.begin(), keep.end(), schema_->fields[i].name) ==
          keep.end()) {
        cube.masks[i] = full.masks[i];
      }
    }
    out = out.Union(HeaderSet(schema_, {cube}));
  }
  return out;
}

bool HeaderSet::Contains(const FieldMap& header) const {
  if (schema_ == nullptr) return false;
  return !Intersect(FromHeader(*schema_, header)).IsEmpty();
}

uint64_t HeaderSet::Count() const {
  uint64_t n = 0;
  for (const Cube& cube : cubes_) n += cube.Count();
  return n;
}

std::optional<FieldMap> HeaderSet::Witness() const {
  std::optional<IndexTuple> best;
  for (const Cube& cube : cubes_) {
    IndexTuple lowest;
    for (uint64_t m : cube.masks) lowest.push_back(std::countr_zero(m));
    if (!best || lowest < *best) best = std::move(lowest);
  }
  if (!best) return std::nullopt;
  FieldMap header;
  for (size_t i = 0; i < best->size(); ++i) {
    header[schema_->fields[i].name] = schema_->fields[i].domain[(*best)[i]];
  }
  return header;
}

std::vector<FieldMap> HeaderSet::Enumerate() const {
  std::vector<IndexTuple> tuples;
  for (const Cube& cube : cubes_) {
    IndexTuple current;
    ExpandCube(cube, 0, current, tuples);
  }
  std::sort(tuples.begin(), tuples.end());
  std::vector<FieldMap> out;
  out.reserve(tuples.size());
  for (const IndexTuple& tuple : tuples) {
    FieldMap header;
    for (size_t i = 0; i < tuple.size(); ++i) {
      header[schema_->fields[i].name] = schema_->fields[i].domain[tuple[i]];
    }
    out.push_back(std::move(header));
  }
  return out;
}

std::vector<std::string> HeaderSet::ValuesOf(std::string_view field) const {
  std::vector<std::string> out;
  if (schema_ == nullptr) return out;
  int index = schema_->IndexOf(field);
  if (index < 0) return out;
  uint64_t mask = 0;
  for (const Cube& cube : cubes_) mask |= cube.masks[index];
  const FieldSpec& spec = schema_->fields[index];
  for (size_t i = 0; i < spec.domain.size() && i < 64; ++i) {
    if (mask & (uint64_t{1} << i)) out.push_back(spec.domain[i]);
  }
  return out;
}

std::string HeaderSet::ToString() const {
  if (cubes_.empty()) return "{}";
  std::vector<std::string> parts;
  for (const Cube& cube : cubes_) {
    std::vector<std::string> fields;
    for (size_t i = 0; i < cube.masks.size(); ++i) {
      const FieldSpec& spec = schema_->fields[i];
      if (cube.masks[i] == FullMask(spec)) continue;
      std::vector<std::string> values;
      for (size_t v = 0; v < spec.domain.size() && v < 64; ++v) {
        if (cube.masks[i] & (uint64_t{1} << v)) values.push_back(spec.domain[v]);
      }
      fields.push_back(spec.name + "=" + absl::StrJoin(values, "|"));
    }
    parts.push_back(fields.empty() ? "*" : absl::StrJoin(fields, " "));
  }
  return "{" + absl::StrJoin(parts, "; ") + "}";
}

}  // namespace compnet
