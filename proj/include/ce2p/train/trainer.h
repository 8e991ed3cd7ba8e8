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

#ifndef CE2P_TRAIN_TRAINER_H_
#define CE2P_TRAIN_TRAINER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/data/dataset.h"
#include "ce2p/loss/loss.h"
#include "ce2p/net/ce2p_net.h"
#include "ce2p/train/checkpoint.h"
#include "ce2p/train/config.h"

namespace ce2p::train {

// Per-channel input normalisation, normally from the training manifest.
struct PixelStats {
  std::array<double, 3> mean = {0.5, 0.5, 0.5};
  std::array<double, 3> std = {0.25, 0.25, 0.25};
};

// Stacks equally sized RGB images into a normalised N x 3 x H x W tensor.
// Throws StructuralError on mixed sizes.
net::Tensor PackImages(std::span<const Image* const> images,
                       const PixelStats& stats);

struct Batch {
  std::vector<std::string> ids;
  net::Tensor images;
  std::vector<ParsingMap> parsing;
  std::vector<EdgeMap> edges;
};

struct TrainOptions {
  // JSON lines {iter, lr, l_parsing, l_edge, l_edge_parsing, total}.
  std::ostream* log = nullptr;
  // Written every checkpoint_every iterations and at the end when set.
  std::filesystem::path checkpoint;
  // Stop before this iteration (0 = run to max_iter); for interrupted runs.
  std::int64_t stop_at = 0;
  std::function<void(std::int64_t, const loss::LossBreakdown&)> on_step;
};

class Trainer {
 public:
  // Builds a fresh network from cfg.MakeNetConfig(space.num_classes).
  Trainer(TrainConfig cfg, LabelSpace space, PixelStats stats);
  // Uses `net_config` instead; its class count must match `space`.
  Trainer(TrainConfig cfg, net::NetConfig net_config, LabelSpace space,
          PixelStats stats);

  // Continues from a checkpoint: weights, momenta, batch-norm moments and the
  // iteration counter. Throws StructuralError if the networks differ.
  void Resume(const Checkpoint& ckpt);

  // The batch drawn at iteration `iter`; depends only on (seed, iter).
  Batch MakeBatch(const std::vector<data::Sample>& data, std::int64_t iter) const;

  // One SGD step. Throws NumericError naming the batch on a non-finite loss.
  loss::LossBreakdown Step(const Batch& batch, double lr);

  // Runs from the current iteration to max_iter. Throws DataError on an
  // empty dataset.
  void Train(const std::vector<data::Sample>& data, const TrainOptions& options = {});

  CheckpointMeta Meta() const;
  void Save(const std::filesystem::path& path) const;

  net::Ce2pNet& model() { return *model_; }
  const net::Ce2pNet& model() const { return *model_; }
  const TrainConfig& config() const { return cfg_; }
  std::int64_t iteration() const { return iteration_; }

 private:
  void ApplyUpdate(double lr);

  TrainConfig cfg_;
  LabelSpace space_;
  PixelStats stats_;
  std::unique_ptr<net::Ce2pNet> model_;
  std::int64_t iteration_ = 0;
};

}  // namespace ce2p::train

#endif  // CE2P_TRAIN_TRAINER_H_
