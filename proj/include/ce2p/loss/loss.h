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

#ifndef CE2P_LOSS_LOSS_H_
#define CE2P_LOSS_LOSS_H_

#include <cstdint>
#include <span>

#include "ce2p/core/types.h"
#include "ce2p/net/ce2p_net.h"
#include "ce2p/net/tensor.h"

namespace ce2p::loss {

// Joint objective: parsing CE on the high-resolution head, weighted edge CE
// and parsing CE on the edge-perceiving head, summed without coefficients.
struct LossBreakdown {
  double l_parsing = 0.0;
  double l_edge = 0.0;
  double l_edge_parsing = 0.0;
  double total = 0.0;

  static LossBreakdown FromParts(double l_parsing, double l_edge,
                                 double l_edge_parsing) {
    return {l_parsing, l_edge, l_edge_parsing,
            l_parsing + l_edge + l_edge_parsing};
  }
};

struct LossValue {
  double value = 0.0;
  // No non-ignore pixel contributed; value is 0.
  bool degenerate = false;
};

// A loss together with its gradient with respect to the logits it was given
// (at the logits' own resolution).
struct LossWithGrad {
  LossValue loss;
  net::Tensor grad;
};

struct EdgeWeights {
  double positive = 0.0;
  double negative = 0.0;
};

// Inverse-frequency weights: w_pos = N_neg / N, w_neg = N_pos / N. When one
// class is absent its weight is 0 and the other's is 1.
EdgeWeights EdgeClassWeights(std::int64_t num_positive,
                             std::int64_t num_negative);

// Mean cross-entropy over non-ignore pixels. Logits are bilinearly upsampled
// to the target size first. Throws StructuralError on class-count mismatch.
LossValue ParsingCrossEntropy(const ConfidenceVolume& logits,
                              const ParsingMap& target,
                              const LabelSpace& space);

// Class-weighted cross-entropy of 2-channel edge logits, normalized by the
// number of non-ignore pixels.
LossValue EdgeWeightedCrossEntropy(const ConfidenceVolume& edge_logits,
                                   const EdgeMap& target);

// Batched forms used by training. All targets share one size.
LossWithGrad ParsingCrossEntropy(const net::Tensor& logits,
                                 std::span<const ParsingMap> targets,
                                 const LabelSpace& space);
LossWithGrad EdgeWeightedCrossEntropy(const net::Tensor& edge_logits,
                                      std::span<const EdgeMap> targets);

struct TotalLoss {
  LossBreakdown breakdown;
  net::OutputGrads grads;
};

// Loss terms for whatever heads `out` carries (ablated networks have no edge
// head, so their edge terms are 0).
TotalLoss ComputeTotalLoss(const net::NetOutput& out,
                           std::span<const ParsingMap> parsing_targets,
                           std::span<const EdgeMap> edge_targets,
                           const LabelSpace& space);

}  // namespace ce2p::loss

#endif  // CE2P_LOSS_LOSS_H_
