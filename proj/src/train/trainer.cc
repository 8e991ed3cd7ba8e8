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

#include "ce2p/train/trainer.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ce2p/core/errors.h"
#include "ce2p/data/augment.h"

namespace ce2p::train {
namespace {

// Independent stream per (seed, purpose, a, b).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint32_t purpose,
                         std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), purpose,
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b)};
  std::mt19937_64 rng(seq);
  return rng();
}

constexpr std::uint32_t kShuffle = 1;
constexpr std::uint32_t kAugment = 2;

}  // namespace

net::Tensor PackImages(std::span<const Image* const> images,
                       const PixelStats& stats) {
  if (images.empty()) return {};
  const int h = images[0]->height();
  const int w = images[0]->width();
  net::Tensor t(static_cast<int>(images.size()), 3, h, w);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& im = *images[i];
    if (im.channels() != 3 || im.height() != h || im.width() != w) {
      throw StructuralError("batch images must all be 3 x " +
                            std::to_string(h) + " x " + std::to_string(w));
    }
    for (int c = 0; c < 3; ++c) {
      const auto src = im.plane(c);
      auto dst = t.plane(static_cast<int>(i), c);
      const double inv = 1.0 / stats.std[c];
      for (std::size_t k = 0; k < src.size(); ++k) {
        dst[k] = (src[k] - stats.mean[c]) * inv;
      }
    }
  }
  return t;
}

Trainer::Trainer(TrainConfig cfg, LabelSpace space, PixelStats stats)
    : Trainer(cfg, cfg.MakeNetConfig(space.num_classes), space, stats) {}

Trainer::Trainer(TrainConfig cfg, net::NetConfig net_config, LabelSpace space,
                 PixelStats stats)
    : cfg_(std::move(cfg)), space_(std::move(space)), stats_(stats) {
  cfg_.Validate();
  space_.Validate();
  if (net_config.num_classes != space_.num_classes) {
    throw StructuralError("network predicts " +
                          std::to_string(net_config.num_classes) +
                          " classes but the label space has " +
                          std::to_string(space_.num_classes));
  }
  model_ = std::make_unique<net::Ce2pNet>(std::move(net_config), cfg_.seed);
}

void Trainer::Resume(const Checkpoint& ckpt) {
  if (ckpt.config.ToJson() != model_->config().ToJson()) {
    throw StructuralError("checkpoint network " + ckpt.config.VariantName() +
                          " does not match the configured network");
  }
  RestoreCheckpoint(ckpt, *model_);
  iteration_ = ckpt.meta.iteration;
}

Batch Trainer::MakeBatch(const std::vector<data::Sample>& data,
                         std::int64_t iter) const {
  if (data.empty()) throw DataError("cannot draw a batch from no samples");
  const auto n = static_cast<std::int64_t>(data.size());
  const std::int64_t per_epoch = (n + cfg_.batch_size - 1) / cfg_.batch_size;
  const std::int64_t epoch = iter / per_epoch;
  const std::int64_t slot = iter % per_epoch;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(DeriveSeed(cfg_.seed, kShuffle, epoch));
  std::shuffle(order.begin(), order.end(), rng);

  data::AugmentOptions aug;
  aug.input_size = cfg_.input_size;
  aug.scale_min = cfg_.scale_min;
  aug.scale_max = cfg_.scale_max;
  aug.flip_probability = cfg_.flip_probability;
  aug.pad_value = stats_.mean;
  aug.edges.thickness = cfg_.edge_thickness;

  Batch batch;
  std::vector<data::Sample> samples;
  for (int k = 0; k < cfg_.batch_size; ++k) {
    // The last batch of an epoch wraps to the front of the permutation.
    const data::Sample& s = data[order[(slot * cfg_.batch_size + k) % n]];
    samples.push_back(
        cfg_.augment
            ? data::Augment(s, DeriveSeed(cfg_.seed, kAugment, iter, k),
                            space_, aug)
            : data::FitToSize(s, cfg_.input_size, space_, stats_.mean,
                              aug.edges));
  }
  std::vector<const Image*> images;
  for (data::Sample& s : samples) {
    batch.ids.push_back(s.id);
    images.push_back(&s.image);
  }
  batch.images = PackImages(images, stats_);
  for (data::Sample& s : samples) {
    batch.parsing.push_back(std::move(s.parsing));
    batch.edges.push_back(std::move(s.edge));
  }
  return batch;
}

loss::LossBreakdown Trainer::Step(const Batch& batch, double lr) {
  model_->ZeroGrad();
  const net::NetOutput out = model_->Forward(batch.images, net::Mode::kTrain);
  const loss::TotalLoss total =
      loss::ComputeTotalLoss(out, batch.parsing, batch.edges, space_);
  if (!std::isfinite(total.breakdown.total)) {
    std::string ids;
    for (const auto& id : batch.ids) ids += (ids.empty() ? "" : ",") + id;
    throw NumericError("non-finite loss at iteration " +
                       std::to_string(iteration_) + " on batch [" + ids + "]");
  }
  model_->Backward(total.grads);
  ApplyUpdate(lr);
  return total.breakdown;
}

void Trainer::ApplyUpdate(double lr) {
  // Momentum SGD with the learning rate folded into the velocity.
  for (net::Param* p : model_->Params()) {
    if (!p->trainable) continue;
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* v = p->momentum.data();
    const double wd = p->decay ? cfg_.weight_decay : 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      v[i] = cfg_.momentum * v[i] + lr * (g[i] + wd * w[i]);
      w[i] -= v[i];
    }
  }
}

void Trainer::Train(const std::vector<data::Sample>& data,
                    const TrainOptions& options) {
  if (data.empty()) throw DataError("training set is empty");
  cfg_.max_iter = cfg_.ResolveMaxIter(data.size());
  const std::int64_t end =
      options.stop_at > 0 ? std::min(options.stop_at, cfg_.max_iter)
                          : cfg_.max_iter;
  spdlog::info("training {} on {} images: iterations {}..{} of {}",
               model_->config().VariantName(), data.size(), iteration_, end,
               cfg_.max_iter);
  while (iteration_ < end) {
    const double lr = PolyLr(cfg_, iteration_);
    const Batch batch = MakeBatch(data, iteration_);
    const loss::LossBreakdown b = Step(batch, lr);
    if (options.log && iteration_ % cfg_.log_every == 0) {
      const nlohmann::json rec = {{"iter", iteration_},
                                  {"lr", lr},
                                  {"l_parsing", b.l_parsing},
                                  {"l_edge", b.l_edge},
                                  {"l_edge_parsing", b.l_edge_parsing},
                                  {"total", b.total}};
      *options.log << rec.dump() << "\n";
    }
    if (options.on_step) options.on_step(iteration_, b);
    ++iteration_;
    if (!options.checkpoint.empty() && cfg_.checkpoint_every > 0 &&
        iteration_ % cfg_.checkpoint_every == 0) {
      Save(options.checkpoint);
    }
  }
  if (options.log) options.log->flush();
  if (!options.checkpoint.empty()) Save(options.checkpoint);
}

CheckpointMeta Trainer::Meta() const {
  CheckpointMeta meta;
  meta.iteration = iteration_;
  meta.label_space = space_;
  meta.pixel_mean = stats_.mean;
  meta.pixel_std = stats_.std;
  meta.train_config = cfg_.ToJson();
  return meta;
}

void Trainer::Save(const std::filesystem::path& path) const {
  SaveCheckpoint(path, *model_, Meta());
}

}  // namespace ce2p::train
