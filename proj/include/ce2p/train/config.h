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

#ifndef CE2P_TRAIN_CONFIG_H_
#define CE2P_TRAIN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "ce2p/net/config.h"
#include "json.hpp"

namespace ce2p::train {

// Optimisation and data settings. Config files use one `key = value` pair
// per line with `#` comments; keys are the field names below.
struct TrainConfig {
  double base_lr = 0.007;
  double power = 0.9;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // 0 derives max_iter = epochs * ceil(N / batch_size).
  std::int64_t max_iter = 0;
  int epochs = 150;
  int batch_size = 8;
  int input_size = 473;
  std::uint64_t seed = 0;

  bool augment = true;
  double scale_min = 0.5;
  double scale_max = 1.5;
  double flip_probability = 0.5;
  int edge_thickness = 1;

  // Network selection.
  bool tiny = false;
  bool use_context = true;
  bool use_highres = true;
  bool use_edge = true;

  int log_every = 1;
  // 0 writes a checkpoint only at the end.
  int checkpoint_every = 0;

  // Throws ParameterError.
  void Validate() const;

  // Iteration budget for a dataset of `num_samples` images.
  std::int64_t ResolveMaxIter(std::size_t num_samples) const;

  net::NetConfig MakeNetConfig(int num_classes) const;

  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// Applies `key = value` lines on top of `base`. Throws ParameterError on an
// unknown key or unparsable value, naming the line.
TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base = {});
TrainConfig LoadTrainConfig(const std::filesystem::path& path,
                            TrainConfig base = {});

// base_lr * (1 - iter / max_iter)^power. Past max_iter it clamps to 0 and
// warns. Throws ParameterError if iter < 0 or cfg.max_iter < 1.
double PolyLr(const TrainConfig& cfg, std::int64_t iter);

}  // namespace ce2p::train

#endif  // CE2P_TRAIN_CONFIG_H_
