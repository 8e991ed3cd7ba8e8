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

#include "ce2p/core/label_ops.h"

#include <cmath>
#include <limits>

namespace ce2p {

ParsingMap ArgmaxLabels(const ConfidenceVolume& volume) {
  ParsingMap labels(volume.height(), volume.width(), 0);
  if (volume.num_classes() == 0) return labels;
  const std::size_t plane = volume.plane_size();
  const auto scores = volume.scores();
  for (std::size_t i = 0; i < plane; ++i) {
    int best = 0;
    double best_score = scores[i];
    for (int c = 1; c < volume.num_classes(); ++c) {
      // Strict comparison keeps the lowest index on ties.
      if (scores[c * plane + i] > best_score) {
        best_score = scores[c * plane + i];
        best = c;
      }
    }
    labels[i] = best;
  }
  return labels;
}

ConfidenceVolume HflipVolume(const ConfidenceVolume& volume,
                             const LabelSpace& space) {
  std::vector<int> source(volume.num_classes());
  for (int c = 0; c < volume.num_classes(); ++c) source[c] = c;
  for (const auto& [left, right] : space.lr_pairs) {
    if (left < 0 || right < 0 || left >= volume.num_classes() ||
        right >= volume.num_classes()) {
      throw StructuralError("lr pair id out of range for a " +
                            std::to_string(volume.num_classes()) +
                            "-channel volume");
    }
    source[left] = right;
    source[right] = left;
  }
  ConfidenceVolume out(volume.num_classes(), volume.height(), volume.width());
  const int w = volume.width();
  for (int c = 0; c < volume.num_classes(); ++c) {
    for (int y = 0; y < volume.height(); ++y) {
      for (int x = 0; x < w; ++x) {
        out.at(c, y, x) = volume.at(source[c], y, w - 1 - x);
      }
    }
  }
  out.set_normalized(volume.normalized());
  return out;
}

ParsingMap HflipLabels(const ParsingMap& map, const LabelSpace& space) {
  const std::vector<int> mirror = space.MirrorTable();
  ParsingMap out(map.height(), map.width());
  const int w = map.width();
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t v = map.at(y, w - 1 - x);
      out.at(y, x) = space.IsClass(v) ? mirror[v] : v;
    }
  }
  return out;
}

ConfidenceVolume SoftmaxNormalize(const ConfidenceVolume& logits) {
  ConfidenceVolume out(logits.num_classes(), logits.height(), logits.width());
  const std::size_t plane = logits.plane_size();
  const int classes = logits.num_classes();
  const auto in = logits.scores();
  auto dst = out.scores();
  for (std::size_t i = 0; i < plane; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < classes; ++c) peak = std::max(peak, in[c * plane + i]);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      const double e = std::exp(in[c * plane + i] - peak);
      dst[c * plane + i] = e;
      sum += e;
    }
    for (int c = 0; c < classes; ++c) dst[c * plane + i] /= sum;
  }
  out.set_normalized(true);
  return out;
}

}  // namespace ce2p
