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

#ifndef COMPNET_ID_H_
#define COMPNET_ID_H_

#include <compare>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace compnet {

// A symbolic token tagged with the kind of thing it names, so that a member
// name cannot be passed where a link id is expected.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(std::string_view value) : value_(value) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct NetworkTag {};
struct MachineTag {};
struct MemberTag {};
struct LinkTag {};
struct LocalLinkTag {};
struct SessionTag {};

using NetworkId = Id<NetworkTag>;
using MachineId = Id<MachineTag>;
using MemberName = Id<MemberTag>;
using LinkId = Id<LinkTag>;
using LocalLinkId = Id<LocalLinkTag>;
using SessionId = Id<SessionTag>;

// The inLink value attached by Send: the packet originates at this member.
inline const LocalLinkId& SelfLink() {
  static const LocalLinkId* const kSelf = new LocalLinkId("Self");
  return *kSelf;
}

// (network, member) pair; member names are only unique within a network.
struct MemberRef {
  NetworkId network;
  MemberName name;

  friend auto operator<=>(const MemberRef&, const MemberRef&) = default;
  friend bool operator==(const MemberRef&, const MemberRef&) = default;
  std::string ToString() const { return network.value() + "." + name.value(); }
};

struct SessionRef {
  NetworkId network;
  SessionId id;

  friend auto operator<=>(const SessionRef&, const SessionRef&) = default;
  friend bool operator==(const SessionRef&, const SessionRef&) = default;
  std::string ToString() const { return network.value() + "." + id.value(); }
};

struct LinkRef {
  NetworkId network;
  LinkId id;

  friend auto operator<=>(const LinkRef&, const LinkRef&) = default;
  friend bool operator==(const LinkRef&, const LinkRef&) = default;
  std::string ToString() const { return network.value() + "." + id.value(); }
};

}  // namespace compnet

#endif  // COMPNET_ID_H_
