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

#include "ce2p/net/config.h"

#include "ce2p/core/errors.h"

namespace ce2p::net {

void NetConfig::Validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ParameterError(std::string(what) + " must be positive");
  };
  positive(stem_channels, "stem_channels");
  positive(pool_branch_channels, "pool_branch_channels");
  positive(context_channels, "context_channels");
  positive(lowlevel_channels, "lowlevel_channels");
  positive(fusion_channels, "fusion_channels");
  positive(edge_channels, "edge_channels");
  if (num_classes < 2) throw ParameterError("num_classes must be at least 2");
  positive(input_size, "input_size");
  if (backbone_channels.size() != 4 || stage_blocks.size() != 4 ||
      stage_strides.size() != 4) {
    throw ParameterError("backbone needs exactly four stages");
  }
  for (int v : backbone_channels) positive(v, "backbone channel width");
  for (int v : stage_blocks) positive(v, "stage depth");
  if (stage_strides[0] != 4) {
    throw ParameterError("the first stage must sit at stride 4");
  }
  for (std::size_t i = 1; i < stage_strides.size(); ++i) {
    const int ratio = stage_strides[i] / stage_strides[i - 1];
    if (stage_strides[i] < stage_strides[i - 1] ||
        stage_strides[i] % stage_strides[i - 1] != 0 ||
        (ratio != 1 && ratio != 2)) {
      throw ParameterError(
          "stage strides must be nondecreasing with ratios 1 or 2");
    }
  }
  if (pool_bins.empty()) throw ParameterError("pool_bins is empty");
  for (std::size_t i = 0; i < pool_bins.size(); ++i) {
    positive(pool_bins[i], "pool bin");
    if (i > 0 && pool_bins[i] <= pool_bins[i - 1]) {
      throw ParameterError("pool_bins must be strictly increasing");
    }
  }
}

NetConfig NetConfig::Tiny(int num_classes) {
  NetConfig cfg;
  cfg.stem_channels = 32;
  cfg.backbone_channels = {48, 64, 96, 128};
  cfg.stage_blocks = {1, 1, 1, 1};
  cfg.pool_branch_channels = 16;
  cfg.context_channels = 128;
  cfg.lowlevel_channels = 32;
  cfg.fusion_channels = 64;
  cfg.edge_channels = 16;
  cfg.num_classes = num_classes;
  cfg.input_size = 64;
  return cfg;
}

std::string NetConfig::VariantName() const {
  std::string name = "B";
  if (use_context) name += "+G";
  if (use_highres) name += "+H";
  if (use_edge) name += "+E";
  return name;
}

nlohmann::json NetConfig::ToJson() const {
  return {{"stem_channels", stem_channels},
          {"backbone_channels", backbone_channels},
          {"stage_blocks", stage_blocks},
          {"stage_strides", stage_strides},
          {"pool_bins", pool_bins},
          {"pool_branch_channels", pool_branch_channels},
          {"context_channels", context_channels},
          {"lowlevel_channels", lowlevel_channels},
          {"fusion_channels", fusion_channels},
          {"edge_channels", edge_channels},
          {"num_classes", num_classes},
          {"input_size", input_size},
          {"use_context", use_context},
          {"use_highres", use_highres},
          {"use_edge", use_edge}};
}

NetConfig NetConfig::FromJson(const nlohmann::json& j) {
  NetConfig cfg;
  cfg.stem_channels = j.at("stem_channels");
  cfg.backbone_channels = j.at("backbone_channels").get<std::vector<int>>();
  cfg.stage_blocks = j.at("stage_blocks").get<std::vector<int>>();
  cfg.stage_strides = j.at("stage_strides").get<std::vector<int>>();
  cfg.pool_bins = j.at("pool_bins").get<std::vector<int>>();
  cfg.pool_branch_channels = j.at("pool_branch_channels");
  cfg.context_channels = j.at("context_channels");
  cfg.lowlevel_channels = j.at("lowlevel_channels");
  cfg.fusion_channels = j.at("fusion_channels");
  cfg.edge_channels = j.at("edge_channels");
  cfg.num_classes = j.at("num_classes");
  cfg.input_size = j.at("input_size");
  cfg.use_context = j.value("use_context", true);
  cfg.use_highres = j.value("use_highres", true);
  cfg.use_edge = j.value("use_edge", true);
  cfg.Validate();
  return cfg;
}

}  // namespace ce2p::net
