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


#include "compnet/packet.h"

namespace compnet {

void Packet::Encapsulate(NetworkId network, FieldMap header,
                         std::optional<SessionRef> sealed_by) {
  layers_.push_back(
      Layer{std::move(network), std::move(header), std::move(sealed_by)});
}

bool Packet::Decapsulate() {
  if (layers_.size() < 2) return false;
  layers_.pop_back();
  return true;
}

}  // namespace compnet
