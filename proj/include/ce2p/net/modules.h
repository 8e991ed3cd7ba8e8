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

#ifndef CE2P_NET_MODULES_H_
#define CE2P_NET_MODULES_H_

#include <random>
#include <utility>
#include <vector>

#include "ce2p/net/config.h"
#include "ce2p/net/layers.h"
#include "ce2p/net/tensor.h"

namespace ce2p::net {

struct BackboneFeatures {
  Tensor conv2;  // stride 4
  Tensor conv3;  // stride 8
  Tensor conv4;  // stride 16
  Tensor conv5;  // stride 16, dilated
};

// Residual feature extractor with the stride topology of NetConfig.
class Backbone {
 public:
  static constexpr int kMinInputSide = 32;

  Backbone() = default;
  explicit Backbone(const NetConfig& cfg);

  // Throws StructuralError for inputs that are not 3-channel or are smaller
  // than kMinInputSide.
  BackboneFeatures Forward(const Tensor& images, Mode mode,
                           bool record) const;
  // Empty tensors stand for "no gradient reaches this output".
  void Backward(const BackboneFeatures& grads);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

 private:
  ConvBnRelu stem_a_;
  ConvBnRelu stem_b_;
  std::vector<std::vector<BasicBlock>> stages_;
};

// Pyramid pooling: every bin size is pooled, projected and upsampled back,
// concatenated with the input and fused by a 1x1 projection.
class ContextEmbedding {
 public:
  ContextEmbedding() = default;
  ContextEmbedding(const NetConfig& cfg, int in_channels);

  Tensor Forward(const Tensor& conv5, Mode mode, bool record) const;
  Tensor Backward(const Tensor& grad);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

 private:
  int in_channels_ = 0;
  std::vector<int> bins_;
  std::vector<ConvBnRelu> branches_;
  ConvBnRelu fuse_;
  mutable int cached_h_ = 0;
  mutable int cached_w_ = 0;
};

struct HighResOutput {
  Tensor fused;
  Tensor logits;
};

// Upsamples the context to the conv2 grid, joins it with a reduced conv2 and
// fuses both with two 1x1 projections; a classifier reads the result.
class HighResEmbedding {
 public:
  HighResEmbedding() = default;
  HighResEmbedding(const NetConfig& cfg, int context_channels,
                   int conv2_channels);

  // Throws StructuralError unless conv2 is the stride-4 grid of the image
  // whose stride-16 grid is `context`.
  HighResOutput Forward(const Tensor& context, const Tensor& conv2, Mode mode,
                        bool record) const;
  // Returns (d context, d conv2).
  std::pair<Tensor, Tensor> Backward(const Tensor& d_fused,
                                     const Tensor& d_logits);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

 private:
  int context_channels_ = 0;
  ConvBnRelu reduce_;
  ConvBnRelu fuse_a_;
  ConvBnRelu fuse_b_;
  Conv2d head_;
  mutable int cached_context_h_ = 0;
  mutable int cached_context_w_ = 0;
};

struct EdgeOutput {
  Tensor edge_logits;     // 2 channels on the conv2 grid
  Tensor parsing_logits;  // num_classes channels on the conv2 grid
};

struct EdgeGrads {
  Tensor conv2;
  Tensor conv3;
  Tensor conv4;
  Tensor fused;
};

// Three edge branches on conv2/conv3/conv4. Their 2-channel scores are fused
// into the edge prediction; their pre-score features join `fused` to predict
// the final parsing.
class EdgePerceiving {
 public:
  EdgePerceiving() = default;
  EdgePerceiving(const NetConfig& cfg, int conv2_channels, int conv3_channels,
                 int conv4_channels, int fused_channels);

  EdgeOutput Forward(const Tensor& conv2, const Tensor& conv3,
                     const Tensor& conv4, const Tensor& fused, Mode mode,
                     bool record) const;
  EdgeGrads Backward(const Tensor& d_edge, const Tensor& d_parsing);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

  // Everything except the parsing classifier.
  std::vector<Param*> BranchParams();
  Conv2d& parsing_head() { return parsing_head_; }
  int fused_channels() const { return fused_channels_; }

 private:
  int fused_channels_ = 0;
  int edge_channels_ = 0;
  std::vector<ConvBnRelu> features_;
  std::vector<Conv2d> scores_;
  Conv2d edge_fuse_;
  Conv2d parsing_head_;
  mutable std::vector<std::pair<int, int>> cached_sizes_;
};

}  // namespace ce2p::net

#endif  // CE2P_NET_MODULES_H_
