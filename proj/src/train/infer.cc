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

#include "ce2p/train/infer.h"

#include "ce2p/core/label_ops.h"

namespace ce2p::train {

std::vector<ConfidenceVolume> InferBatch(const net::Ce2pNet& model,
                                         std::span<const Image* const> images,
                                         bool flip, const LabelSpace& space,
                                         const PixelStats& stats) {
  if (images.empty()) return {};
  const int n = static_cast<int>(images.size());
  std::vector<Image> mirrored;
  std::vector<const Image*> inputs(images.begin(), images.end());
  if (flip) {
    mirrored.reserve(n);
    for (const Image* im : images) mirrored.push_back(FlipHorizontal(*im));
    for (const Image& im : mirrored) inputs.push_back(&im);
  }
  const net::NetOutput out = model.Predict(PackImages(inputs, stats));
  const net::Tensor logits =
      net::UpsampleToInput(model.PredictionLogits(out), images[0]->height(),
                           images[0]->width());

  std::vector<ConfidenceVolume> result;
  result.reserve(n);
  for (int i = 0; i < n; ++i) {
    ConfidenceVolume p = SoftmaxNormalize(net::ToConfidenceVolume(logits, i));
    if (flip) {
      const ConfidenceVolume q = HflipVolume(
          SoftmaxNormalize(net::ToConfidenceVolume(logits, n + i)), space);
      auto ps = p.scores();
      const auto qs = q.scores();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        ps[k] = 0.5 * (ps[k] + qs[k]);
      }
    }
    result.push_back(std::move(p));
  }
  return result;
}

ConfidenceVolume Infer(const net::Ce2pNet& model, const Image& image,
                       bool flip, const LabelSpace& space,
                       const PixelStats& stats) {
  const Image* one[] = {&image};
  return std::move(InferBatch(model, one, flip, space, stats).front());
}

}  // namespace ce2p::train
