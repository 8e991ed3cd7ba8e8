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

#ifndef CE2P_DATA_EDGES_H_
#define CE2P_DATA_EDGES_H_

#include "ce2p/core/types.h"

namespace ce2p::data {

enum class Connectivity { kFour = 4, kEight = 8 };

struct EdgeOptions {
  int thickness = 1;
  Connectivity connectivity = Connectivity::kFour;
};

// Semantic boundary labels. A non-ignore pixel is an edge when some
// non-ignore pixel within `thickness` steps of it (city-block distance for
// 4-connectivity, chessboard distance for 8) carries a different class.
// Ignore pixels map to ignore_id. Background borders count as edges.
// Throws ParameterError if thickness < 1.
EdgeMap GenerateEdgeLabels(const ParsingMap& parsing,
                           const EdgeOptions& options = {},
                           int ignore_id = kIgnoreId);

}  // namespace ce2p::data

#endif  // CE2P_DATA_EDGES_H_
