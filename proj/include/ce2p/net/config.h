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

#ifndef CE2P_NET_CONFIG_H_
#define CE2P_NET_CONFIG_H_

#include <string>
#include <vector>

#include "json.hpp"

namespace ce2p::net {

// Widths and topology of a CE2P network. The backbone has a stride-4 stem
// followed by four residual stages (conv2..conv5) whose cumulative strides
// are `stage_strides`; a stage that keeps the stride of its predecessor
// doubles the dilation instead.
struct NetConfig {
  int stem_channels = 64;
  std::vector<int> backbone_channels = {256, 512, 1024, 2048};
  std::vector<int> stage_blocks = {3, 4, 23, 3};
  std::vector<int> stage_strides = {4, 8, 16, 16};
  std::vector<int> pool_bins = {1, 2, 3, 6};
  int pool_branch_channels = 512;
  int context_channels = 512;
  int lowlevel_channels = 48;
  int fusion_channels = 256;
  int edge_channels = 256;
  int num_classes = 20;
  int input_size = 473;

  // Module switches for ablations. The default is the full network.
  bool use_context = true;
  bool use_highres = true;
  bool use_edge = true;

  // Throws ParameterError.
  void Validate() const;

  // The desk-scale profile used by tests and the --tiny CLI flag.
  static NetConfig Tiny(int num_classes);

  // "B", "B+G", "B+G+H", "B+G+H+E" and friends.
  std::string VariantName() const;

  nlohmann::json ToJson() const;
  static NetConfig FromJson(const nlohmann::json& j);
};

}  // namespace ce2p::net

#endif  // CE2P_NET_CONFIG_H_
