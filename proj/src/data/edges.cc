// Copyright 2026 The CE2P Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ce2p/data/edges.h"

#include <cstdlib>
#include <utility>
#include <vector>

namespace ce2p::data {

EdgeMap GenerateEdgeLabels(const ParsingMap& parsing,
                           const EdgeOptions& options, int ignore_id) {
  if (options.thickness < 1) {
    throw ParameterError("edge thickness must be at least 1");
  }
  const int t = options.thickness;
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -t; dy <= t; ++dy) {
    for (int dx = -t; dx <= t; ++dx) {
      if (dy == 0 && dx == 0) continue;
      const bool inside = options.connectivity == Connectivity::kFour
                              ? std::abs(dy) + std::abs(dx) <= t
                              : true;
      if (inside) offsets.emplace_back(dy, dx);
    }
  }
  EdgeMap edges(parsing.height(), parsing.width(), 0);
  for (int y = 0; y < parsing.height(); ++y) {
    for (int x = 0; x < parsing.width(); ++x) {
      const std::int32_t label = parsing.at(y, x);
      if (label == ignore_id) {
        edges.at(y, x) = static_cast<std::uint8_t>(ignore_id);
        continue;
      }
      for (const auto& [dy, dx] : offsets) {
        const int ny = y + dy;
        const int nx = x + dx;
        if (!parsing.Contains(ny, nx)) continue;
        const std::int32_t other = parsing.at(ny, nx);
        if (other != ignore_id && other != label) {
          edges.at(y, x) = 1;
          break;
        }
      }
    }
  }
  return edges;
}

}  // namespace ce2p::data
