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

#include "ce2p/net/ce2p_net.h"

#include <random>

#include "ce2p/core/errors.h"

namespace ce2p::net {

Ce2pNet::Ce2pNet(NetConfig cfg, std::uint64_t seed) : config_(std::move(cfg)) {
  config_.Validate();
  const auto& widths = config_.backbone_channels;
  backbone_ = Backbone(config_);
  if (config_.use_context) context_ = ContextEmbedding(config_, widths[3]);
  if (config_.use_highres) {
    high_res_ = HighResEmbedding(config_, BaseChannels(), widths[0]);
  } else {
    coarse_head_ = Conv2d("coarse_head", BaseChannels(), config_.num_classes,
                          1, 1, 1, true);
  }
  if (config_.use_edge) {
    const int fused =
        config_.use_highres ? config_.fusion_channels : BaseChannels();
    edge_ = EdgePerceiving(config_, widths[0], widths[1], widths[2], fused);
  }

  std::mt19937_64 rng(seed);
  backbone_.Init(rng);
  if (config_.use_context) context_.Init(rng);
  if (config_.use_highres) {
    high_res_.Init(rng);
  } else {
    coarse_head_.Init(rng, 0.70710678118654752);
  }
  if (config_.use_edge) edge_.Init(rng);
}

int Ce2pNet::BaseChannels() const {
  return config_.use_context ? config_.context_channels
                             : config_.backbone_channels[3];
}

NetOutput Ce2pNet::Forward(const Tensor& images, Mode mode) {
  return Run(images, mode, true);
}

NetOutput Ce2pNet::Predict(const Tensor& images) const {
  return Run(images, Mode::kEval, false);
}

NetOutput Ce2pNet::Run(const Tensor& images, Mode mode, bool record) const {
  const BackboneFeatures f = backbone_.Forward(images, mode, record);
  const Tensor base = config_.use_context
                          ? context_.Forward(f.conv5, mode, record)
                          : f.conv5;
  if (record) {
    cached_base_h_ = base.h();
    cached_base_w_ = base.w();
  }
  NetOutput out;
  Tensor fused;
  if (config_.use_highres) {
    HighResOutput hr = high_res_.Forward(base, f.conv2, mode, record);
    fused = std::move(hr.fused);
    out.parsing_a = std::move(hr.logits);
  } else {
    out.parsing_a = coarse_head_.Forward(base, record);
    if (config_.use_edge) fused = Resize(base, f.conv2.h(), f.conv2.w());
  }
  if (config_.use_edge) {
    EdgeOutput e =
        edge_.Forward(f.conv2, f.conv3, f.conv4, fused, mode, record);
    out.edge = std::move(e.edge_logits);
    out.parsing_b = std::move(e.parsing_logits);
  }
  return out;
}

void Ce2pNet::Backward(const OutputGrads& grads) {
  BackboneFeatures g;
  Tensor d_fused;
  if (config_.use_edge && (!grads.edge.empty() || !grads.parsing_b.empty())) {
    Tensor d_edge = grads.edge;
    Tensor d_parsing = grads.parsing_b;
    // A missing head gradient is a zero gradient of the head's shape.
    if (d_edge.empty()) {
      d_edge = Tensor(d_parsing.n(), 2, d_parsing.h(), d_parsing.w());
    }
    if (d_parsing.empty()) {
      d_parsing = Tensor(d_edge.n(), config_.num_classes, d_edge.h(),
                         d_edge.w());
    }
    EdgeGrads eg = edge_.Backward(d_edge, d_parsing);
    g.conv2 = std::move(eg.conv2);
    g.conv3 = std::move(eg.conv3);
    g.conv4 = std::move(eg.conv4);
    d_fused = std::move(eg.fused);
  }

  Tensor d_base;
  if (config_.use_highres) {
    Tensor d_logits = grads.parsing_a;
    if (d_logits.empty() && !d_fused.empty()) {
      d_logits = Tensor(d_fused.n(), config_.num_classes, d_fused.h(),
                        d_fused.w());
    }
    if (!d_logits.empty()) {
      auto [d_context, d_conv2] = high_res_.Backward(d_fused, d_logits);
      d_base = std::move(d_context);
      if (g.conv2.empty()) {
        g.conv2 = std::move(d_conv2);
      } else {
        g.conv2.Add(d_conv2);
      }
    }
  } else {
    if (!grads.parsing_a.empty()) d_base = coarse_head_.Backward(grads.parsing_a);
    if (!d_fused.empty()) {
      Tensor d = ResizeBackward(d_fused, cached_base_h_, cached_base_w_);
      if (d_base.empty()) {
        d_base = std::move(d);
      } else {
        d_base.Add(d);
      }
    }
  }
  if (!d_base.empty()) {
    g.conv5 = config_.use_context ? context_.Backward(d_base) : d_base;
  }
  backbone_.Backward(g);
}

void Ce2pNet::ZeroGrad() {
  for (Param* p : Params()) {
    if (p->trainable) p->grad.Fill(0.0);
  }
}

std::vector<Param*> Ce2pNet::Params() {
  std::vector<Param*> params;
  backbone_.Collect(params);
  if (config_.use_context) context_.Collect(params);
  if (config_.use_highres) {
    high_res_.Collect(params);
  } else {
    coarse_head_.Collect(params);
  }
  if (config_.use_edge) edge_.Collect(params);
  return params;
}

std::vector<const Param*> Ce2pNet::Params() const {
  auto mutable_params = const_cast<Ce2pNet*>(this)->Params();
  return {mutable_params.begin(), mutable_params.end()};
}

Tensor UpsampleToInput(const Tensor& logits, int height, int width) {
  return Resize(logits, height, width);
}

ConfidenceVolume ToConfidenceVolume(const Tensor& batch, int index) {
  if (index < 0 || index >= batch.n()) {
    throw StructuralError("batch index out of range");
  }
  const double* begin = batch.sample(index);
  return ConfidenceVolume(batch.c(), batch.h(), batch.w(),
                          std::vector<double>(begin,
                                              begin + batch.sample_size()));
}

}  // namespace ce2p::net
