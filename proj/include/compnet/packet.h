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


#ifndef COMPNET_PACKET_H_
#define COMPNET_PACKET_H_

#include <optional>
#include <string>
#include <vector>

#include "compnet/id.h"
#include "compnet/tables.h"

namespace compnet {

// One header of a possibly nested packet. When `sealed_by` is set, everything
// beneath this header was encrypted by that session and is opaque to every
// machine that is not an endpoint of it.
struct Layer {
  NetworkId network;
  FieldMap header;
  std::optional<SessionRef> sealed_by;

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Transient processing state; never part of the wire image.
struct PacketMeta {
  std::optional<LocalLinkId> in_link;
  std::optional<SessionId> sess_ident;

  friend bool operator==(const PacketMeta&, const PacketMeta&) = default;
};

// A packet is a stack of headers over an opaque payload. The outermost header
// is layers().back(); Encapsulate pushes and Decapsulate pops exactly one.
class Packet {
 public:
  Packet() = default;
  Packet(NetworkId network, FieldMap header, std::string payload = "")
      : layers_{Layer{std::move(network), std::move(header), std::nullopt}},
        payload_(std::move(payload)) {}

  const NetworkId& network() const { return layers_.back().network; }
  const FieldMap& header() const { return layers_.back().header; }
  FieldMap& mutable_header() { return layers_.back().header; }
  const Layer& outer() const { return layers_.back(); }
  Layer& mutable_outer() { return layers_.back(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::string& payload() const { return payload_; }
  size_t depth() const { return layers_.size(); }
  bool encapsulated() const { return layers_.size() > 1; }

  PacketMeta& meta() { return meta_; }
  const PacketMeta& meta() const { return meta_; }

  // Wraps the current packet under a new outer header.
  void Encapsulate(NetworkId network, FieldMap header,
                   std::optional<SessionRef> sealed_by);
  // Removes the outer header. Returns false if there is no inner packet.
  bool Decapsulate();

  // Equality of the wire image (meta excluded).
  friend bool SameOnWire(const Packet& a, const Packet& b) {
    return a.layers_ == b.layers_ && a.payload_ == b.payload_;
  }
  friend bool operator==(const Packet&, const Packet&) = default;

 private:
  std::vector<Layer> layers_;
  std::string payload_;
  PacketMeta meta_;
};

}  // namespace compnet

#endif  // COMPNET_PACKET_H_
