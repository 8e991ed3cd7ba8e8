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

#ifndef CE2P_TRAIN_CHECKPOINT_H_
#define CE2P_TRAIN_CHECKPOINT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "ce2p/core/types.h"
#include "ce2p/net/ce2p_net.h"
#include "json.hpp"

namespace ce2p::train {

// Everything besides the tensors needed to resume or deploy a model.
struct CheckpointMeta {
  std::int64_t iteration = 0;
  LabelSpace label_space;
  std::array<double, 3> pixel_mean = {0.5, 0.5, 0.5};
  std::array<double, 3> pixel_std = {0.25, 0.25, 0.25};
  nlohmann::json train_config = nlohmann::json::object();
};

// File layout: the 8 bytes "CE2PCKPT", a little-endian u32 version, a u64
// header length, a JSON header (network config, metadata and a tensor index
// of name, shape and byte offset) and then the raw float64 tensor data.
// Momentum buffers and batch-norm running moments are included.
void SaveCheckpoint(const std::filesystem::path& path,
                    const net::Ce2pNet& model, const CheckpointMeta& meta);

struct Checkpoint {
  net::NetConfig config;
  CheckpointMeta meta;
  std::map<std::string, net::Tensor> values;
  std::map<std::string, net::Tensor> momenta;
};

// Throws DataError on a truncated or foreign file.
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Copies values (and momenta) into `model`. Throws StructuralError when a
// parameter is missing or has a different shape.
void RestoreCheckpoint(const Checkpoint& ckpt, net::Ce2pNet& model);

struct LoadedModel {
  std::unique_ptr<net::Ce2pNet> model;
  CheckpointMeta meta;
};
LoadedModel LoadModel(const std::filesystem::path& path);

}  // namespace ce2p::train

#endif  // CE2P_TRAIN_CHECKPOINT_H_
