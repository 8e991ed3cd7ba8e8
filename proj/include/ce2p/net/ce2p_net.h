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

#ifndef CE2P_NET_CE2P_NET_H_
#define CE2P_NET_CE2P_NET_H_

#include <cstdint>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/net/config.h"
#include "ce2p/net/modules.h"
#include "ce2p/net/tensor.h"

namespace ce2p::net {

// Raw logits of one forward pass. With the full network all three live on
// the stride-4 grid. Ablated networks leave `parsing_b` and `edge` empty and,
// without the high-resolution module, `parsing_a` sits on the stride-16 grid.
struct NetOutput {
  Tensor parsing_a;  // high-resolution module head
  Tensor parsing_b;  // edge-perceiving head, the final parsing
  Tensor edge;       // 2-channel edge scores
};

// Gradients of a scalar loss with respect to NetOutput; empty = zero.
using OutputGrads = NetOutput;

class Ce2pNet {
 public:
  explicit Ce2pNet(NetConfig cfg, std::uint64_t seed = 0);

  // Records intermediate state for Backward. kTrain uses batch statistics.
  NetOutput Forward(const Tensor& images, Mode mode);
  // Frozen inference; never writes to the model and may run concurrently.
  NetOutput Predict(const Tensor& images) const;
  // Accumulates parameter gradients of the last Forward.
  void Backward(const OutputGrads& grads);

  void ZeroGrad();
  std::vector<Param*> Params();
  std::vector<const Param*> Params() const;

  // The logits the network reports as its parsing.
  const Tensor& PredictionLogits(const NetOutput& out) const {
    return config_.use_edge ? out.parsing_b : out.parsing_a;
  }

  const NetConfig& config() const { return config_; }
  Backbone& backbone() { return backbone_; }
  ContextEmbedding& context() { return context_; }
  HighResEmbedding& high_res() { return high_res_; }
  EdgePerceiving& edge() { return edge_; }

 private:
  NetOutput Run(const Tensor& images, Mode mode, bool record) const;
  int BaseChannels() const;

  NetConfig config_;
  Backbone backbone_;
  ContextEmbedding context_;
  HighResEmbedding high_res_;
  EdgePerceiving edge_;
  Conv2d coarse_head_;  // used only without the high-resolution module

  mutable int cached_base_h_ = 0;
  mutable int cached_base_w_ = 0;
};

// Bilinear upsampling of logits back to the input resolution.
Tensor UpsampleToInput(const Tensor& logits, int height, int width);

// Sample `index` of a batch as a (raw, unnormalized) volume.
ConfidenceVolume ToConfidenceVolume(const Tensor& batch, int index);

}  // namespace ce2p::net

#endif  // CE2P_NET_CE2P_NET_H_
