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

#include "ce2p/net/modules.h"

#include <cmath>
#include <string>

#include "ce2p/core/errors.h"

namespace ce2p::net {
namespace {

constexpr double kHeadGain = 0.70710678118654752;

void AddOrAssign(Tensor& dst, const Tensor& src) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst = src;
  } else {
    dst.Add(src);
  }
}

}  // namespace

Backbone::Backbone(const NetConfig& cfg)
    : stem_a_("backbone.stem_a", 3, cfg.stem_channels, 3, 2),
      stem_b_("backbone.stem_b", cfg.stem_channels, cfg.stem_channels, 3, 2) {
  int in = cfg.stem_channels;
  int dilation = 1;
  for (int s = 0; s < 4; ++s) {
    int stride = 1;
    if (s > 0) {
      if (cfg.stage_strides[s] == cfg.stage_strides[s - 1]) {
        dilation *= 2;
      } else {
        stride = 2;
      }
    }
    std::vector<BasicBlock> blocks;
    for (int b = 0; b < cfg.stage_blocks[s]; ++b) {
      const std::string name = "backbone.conv" + std::to_string(s + 2) +
                               ".block" + std::to_string(b);
      blocks.emplace_back(name, b == 0 ? in : cfg.backbone_channels[s],
                          cfg.backbone_channels[s], b == 0 ? stride : 1,
                          dilation);
    }
    in = cfg.backbone_channels[s];
    stages_.push_back(std::move(blocks));
  }
}

BackboneFeatures Backbone::Forward(const Tensor& images, Mode mode,
                                   bool record) const {
  if (images.c() != 3) {
    throw StructuralError("backbone expects 3-channel images, got " +
                          images.ShapeString());
  }
  if (images.h() < kMinInputSide || images.w() < kMinInputSide) {
    throw StructuralError("input " + images.ShapeString() +
                          " is smaller than the minimum side " +
                          std::to_string(kMinInputSide));
  }
  Tensor x = stem_b_.Forward(stem_a_.Forward(images, mode, record), mode,
                             record);
  std::vector<Tensor> outputs;
  for (const auto& stage : stages_) {
    for (const BasicBlock& block : stage) x = block.Forward(x, mode, record);
    outputs.push_back(x);
  }
  return {std::move(outputs[0]), std::move(outputs[1]), std::move(outputs[2]),
          std::move(outputs[3])};
}

void Backbone::Backward(const BackboneFeatures& grads) {
  const Tensor* incoming[4] = {&grads.conv2, &grads.conv3, &grads.conv4,
                               &grads.conv5};
  Tensor g;
  for (int s = 3; s >= 0; --s) {
    AddOrAssign(g, *incoming[s]);
    if (g.empty()) continue;
    for (auto it = stages_[s].rbegin(); it != stages_[s].rend(); ++it) {
      g = it->Backward(g);
    }
  }
  if (!g.empty()) stem_a_.Backward(stem_b_.Backward(g));
}

void Backbone::Collect(std::vector<Param*>& params) {
  stem_a_.Collect(params);
  stem_b_.Collect(params);
  for (auto& stage : stages_) {
    for (auto& block : stage) block.Collect(params);
  }
}

void Backbone::Init(std::mt19937_64& rng) {
  stem_a_.Init(rng);
  stem_b_.Init(rng);
  for (auto& stage : stages_) {
    for (auto& block : stage) block.Init(rng);
  }
}

ContextEmbedding::ContextEmbedding(const NetConfig& cfg, int in_channels)
    : in_channels_(in_channels), bins_(cfg.pool_bins) {
  for (int b : bins_) {
    branches_.emplace_back("context.pool" + std::to_string(b), in_channels,
                           cfg.pool_branch_channels, 1);
  }
  fuse_ = ConvBnRelu(
      "context.fuse",
      in_channels + static_cast<int>(bins_.size()) * cfg.pool_branch_channels,
      cfg.context_channels, 1);
}

Tensor ContextEmbedding::Forward(const Tensor& conv5, Mode mode,
                                 bool record) const {
  if (conv5.h() < 1 || conv5.w() < 1) {
    throw StructuralError("context embedding needs a nonempty feature map");
  }
  if (record) {
    cached_h_ = conv5.h();
    cached_w_ = conv5.w();
  }
  std::vector<Tensor> pyramid;
  pyramid.reserve(bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    Tensor pooled = AdaptiveAvgPool(conv5, bins_[i]);
    pyramid.push_back(Resize(branches_[i].Forward(pooled, mode, record),
                             conv5.h(), conv5.w()));
  }
  std::vector<const Tensor*> parts = {&conv5};
  for (const Tensor& t : pyramid) parts.push_back(&t);
  return fuse_.Forward(Concat(parts), mode, record);
}

Tensor ContextEmbedding::Backward(const Tensor& grad) {
  Tensor dcat = fuse_.Backward(grad);
  Tensor dx = SliceChannels(dcat, 0, in_channels_);
  int offset = in_channels_;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    const int width = branches_[i].conv().out_channels();
    Tensor d = ResizeBackward(SliceChannels(dcat, offset, width), bins_[i],
                              bins_[i]);
    offset += width;
    dx.Add(AdaptiveAvgPoolBackward(branches_[i].Backward(d), cached_h_,
                                   cached_w_));
  }
  return dx;
}

void ContextEmbedding::Collect(std::vector<Param*>& params) {
  for (auto& b : branches_) b.Collect(params);
  fuse_.Collect(params);
}

void ContextEmbedding::Init(std::mt19937_64& rng) {
  for (auto& b : branches_) b.Init(rng);
  fuse_.Init(rng);
}

HighResEmbedding::HighResEmbedding(const NetConfig& cfg, int context_channels,
                                   int conv2_channels)
    : context_channels_(context_channels),
      reduce_("highres.reduce", conv2_channels, cfg.lowlevel_channels, 1),
      fuse_a_("highres.fuse_a", context_channels + cfg.lowlevel_channels,
              cfg.fusion_channels, 1),
      fuse_b_("highres.fuse_b", cfg.fusion_channels, cfg.fusion_channels, 1),
      head_("highres.head", cfg.fusion_channels, cfg.num_classes, 1, 1, 1,
            true) {}

HighResOutput HighResEmbedding::Forward(const Tensor& context,
                                        const Tensor& conv2, Mode mode,
                                        bool record) const {
  // conv2 is ceil(S / 4) and context ceil(S / 16) for some side S.
  auto compatible = [](int coarse, int fine) {
    return fine > 4 * (coarse - 1) && fine <= 4 * coarse;
  };
  if (context.n() != conv2.n() || !compatible(context.h(), conv2.h()) ||
      !compatible(context.w(), conv2.w())) {
    throw StructuralError("context " + context.ShapeString() +
                          " does not upsample onto conv2 " +
                          conv2.ShapeString());
  }
  if (record) {
    cached_context_h_ = context.h();
    cached_context_w_ = context.w();
  }
  const Tensor up = Resize(context, conv2.h(), conv2.w());
  const Tensor low = reduce_.Forward(conv2, mode, record);
  Tensor fused = fuse_b_.Forward(
      fuse_a_.Forward(Concat({&up, &low}), mode, record), mode, record);
  Tensor logits = head_.Forward(fused, record);
  return {std::move(fused), std::move(logits)};
}

std::pair<Tensor, Tensor> HighResEmbedding::Backward(const Tensor& d_fused,
                                                     const Tensor& d_logits) {
  Tensor g = head_.Backward(d_logits);
  if (!d_fused.empty()) g.Add(d_fused);
  Tensor dcat = fuse_a_.Backward(fuse_b_.Backward(g));
  Tensor d_context =
      ResizeBackward(SliceChannels(dcat, 0, context_channels_),
                     cached_context_h_, cached_context_w_);
  Tensor d_conv2 = reduce_.Backward(
      SliceChannels(dcat, context_channels_, dcat.c() - context_channels_));
  return {std::move(d_context), std::move(d_conv2)};
}

void HighResEmbedding::Collect(std::vector<Param*>& params) {
  reduce_.Collect(params);
  fuse_a_.Collect(params);
  fuse_b_.Collect(params);
  head_.Collect(params);
}

void HighResEmbedding::Init(std::mt19937_64& rng) {
  reduce_.Init(rng);
  fuse_a_.Init(rng);
  fuse_b_.Init(rng);
  head_.Init(rng, kHeadGain);
}

EdgePerceiving::EdgePerceiving(const NetConfig& cfg, int conv2_channels,
                               int conv3_channels, int conv4_channels,
                               int fused_channels)
    : fused_channels_(fused_channels), edge_channels_(cfg.edge_channels) {
  const int in[3] = {conv2_channels, conv3_channels, conv4_channels};
  for (int i = 0; i < 3; ++i) {
    const std::string name = "edge.conv" + std::to_string(i + 2);
    features_.emplace_back(name + ".feature", in[i], edge_channels_, 1);
    scores_.emplace_back(name + ".score", edge_channels_, 2, 1, 1, 1, true);
  }
  edge_fuse_ = Conv2d("edge.fuse", 6, 2, 1, 1, 1, true);
  parsing_head_ = Conv2d("edge.parsing_head",
                         fused_channels + 3 * edge_channels_, cfg.num_classes,
                         1, 1, 1, true);
}

EdgeOutput EdgePerceiving::Forward(const Tensor& conv2, const Tensor& conv3,
                                   const Tensor& conv4, const Tensor& fused,
                                   Mode mode, bool record) const {
  if (fused.h() != conv2.h() || fused.w() != conv2.w() ||
      fused.n() != conv2.n() || fused.c() != fused_channels_) {
    throw StructuralError("edge module: fused " + fused.ShapeString() +
                          " does not match conv2 " + conv2.ShapeString());
  }
  const Tensor* inputs[3] = {&conv2, &conv3, &conv4};
  std::vector<Tensor> feats(3);
  std::vector<Tensor> scores(3);
  if (record) cached_sizes_.clear();
  for (int i = 0; i < 3; ++i) {
    const Tensor f = features_[i].Forward(*inputs[i], mode, record);
    if (record) cached_sizes_.emplace_back(f.h(), f.w());
    scores[i] = Resize(scores_[i].Forward(f, record), conv2.h(), conv2.w());
    feats[i] = Resize(f, conv2.h(), conv2.w());
  }
  EdgeOutput out;
  out.edge_logits =
      edge_fuse_.Forward(Concat({&scores[0], &scores[1], &scores[2]}), record);
  out.parsing_logits = parsing_head_.Forward(
      Concat({&fused, &feats[0], &feats[1], &feats[2]}), record);
  return out;
}

EdgeGrads EdgePerceiving::Backward(const Tensor& d_edge,
                                   const Tensor& d_parsing) {
  const Tensor dscores = edge_fuse_.Backward(d_edge);
  const Tensor dcat = parsing_head_.Backward(d_parsing);
  EdgeGrads grads;
  grads.fused = SliceChannels(dcat, 0, fused_channels_);
  Tensor* outs[3] = {&grads.conv2, &grads.conv3, &grads.conv4};
  for (int i = 0; i < 3; ++i) {
    const auto [h, w] = cached_sizes_[i];
    Tensor df = ResizeBackward(
        SliceChannels(dcat, fused_channels_ + i * edge_channels_,
                      edge_channels_),
        h, w);
    df.Add(scores_[i].Backward(
        ResizeBackward(SliceChannels(dscores, 2 * i, 2), h, w)));
    *outs[i] = features_[i].Backward(df);
  }
  return grads;
}

void EdgePerceiving::Collect(std::vector<Param*>& params) {
  for (auto* p : BranchParams()) params.push_back(p);
  parsing_head_.Collect(params);
}

std::vector<Param*> EdgePerceiving::BranchParams() {
  std::vector<Param*> params;
  for (int i = 0; i < 3; ++i) {
    features_[i].Collect(params);
    scores_[i].Collect(params);
  }
  edge_fuse_.Collect(params);
  return params;
}

void EdgePerceiving::Init(std::mt19937_64& rng) {
  for (int i = 0; i < 3; ++i) {
    features_[i].Init(rng);
    scores_[i].Init(rng, kHeadGain);
  }
  edge_fuse_.Init(rng, kHeadGain);
  parsing_head_.Init(rng, kHeadGain);
}

}  // namespace ce2p::net
