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

#ifndef CE2P_TRAIN_INFER_H_
#define CE2P_TRAIN_INFER_H_

#include <span>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/data/image.h"
#include "ce2p/net/ce2p_net.h"
#include "ce2p/train/trainer.h"

namespace ce2p::train {

// Per-pixel class probabilities at the image resolution: softmax of the
// upsampled prediction logits. With `flip`, averages with the mirrored
// prediction of the mirrored image (left/right channels swapped back).
ConfidenceVolume Infer(const net::Ce2pNet& model, const Image& image,
                       bool flip, const LabelSpace& space,
                       const PixelStats& stats);

// Same for several equally sized images in one forward pass.
std::vector<ConfidenceVolume> InferBatch(const net::Ce2pNet& model,
                                         std::span<const Image* const> images,
                                         bool flip, const LabelSpace& space,
                                         const PixelStats& stats);

}  // namespace ce2p::train

#endif  // CE2P_TRAIN_INFER_H_
