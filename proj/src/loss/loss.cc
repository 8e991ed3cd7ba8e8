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

#include "ce2p/loss/loss.h"

#include <cmath>
#include <limits>
#include <vector>

#include "ce2p/core/errors.h"

namespace ce2p::loss {
namespace {

// Weighted softmax cross-entropy over the upsampled logits. `label(i, p)`
// returns the target class of pixel p in sample i or -1 to skip it, and
// `weight(cls)` its class weight.
template <typename LabelFn, typename WeightFn>
LossWithGrad WeightedCrossEntropy(const net::Tensor& logits, int height,
                                  int width, std::int64_t normalizer,
                                  LabelFn label, WeightFn weight) {
  const net::Tensor up = net::Resize(logits, height, width);
  net::Tensor grad_up(up.n(), up.c(), up.h(), up.w());
  const int classes = up.c();
  const std::size_t plane = up.plane_size();
  LossWithGrad result;
  if (normalizer == 0) {
    result.loss = {0.0, true};
    result.grad = net::Tensor(logits.n(), logits.c(), logits.h(), logits.w());
    return result;
  }
  const double inv_norm = 1.0 / static_cast<double>(normalizer);
  std::vector<double> prob(classes);
  double total = 0.0;
  for (int i = 0; i < up.n(); ++i) {
    const double* s = up.sample(i);
    double* g = grad_up.sample(i);
    for (std::size_t p = 0; p < plane; ++p) {
      const int y = label(i, p);
      if (y < 0) continue;
      const double w = weight(y);
      if (w == 0.0) continue;
      double peak = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < classes; ++c) peak = std::max(peak, s[c * plane + p]);
      double sum = 0.0;
      for (int c = 0; c < classes; ++c) {
        prob[c] = std::exp(s[c * plane + p] - peak);
        sum += prob[c];
      }
      const double log_sum = std::log(sum);
      total += w * (log_sum - (s[y * plane + p] - peak));
      for (int c = 0; c < classes; ++c) {
        g[c * plane + p] = w * inv_norm * (prob[c] / sum - (c == y ? 1.0 : 0.0));
      }
    }
  }
  result.loss = {total * inv_norm, false};
  result.grad = net::ResizeBackward(grad_up, logits.h(), logits.w());
  return result;
}

net::Tensor AsBatch(const ConfidenceVolume& v) {
  net::Tensor t(1, v.num_classes(), v.height(), v.width());
  std::copy(v.scores().begin(), v.scores().end(), t.data());
  return t;
}

}  // namespace

EdgeWeights EdgeClassWeights(std::int64_t num_positive,
                             std::int64_t num_negative) {
  if (num_positive == 0 && num_negative == 0) return {0.0, 0.0};
  if (num_positive == 0) return {0.0, 1.0};
  if (num_negative == 0) return {1.0, 0.0};
  const double total = static_cast<double>(num_positive + num_negative);
  return {num_negative / total, num_positive / total};
}

LossWithGrad ParsingCrossEntropy(const net::Tensor& logits,
                                 std::span<const ParsingMap> targets,
                                 const LabelSpace& space) {
  if (logits.c() != space.num_classes ||
      static_cast<int>(targets.size()) != logits.n()) {
    throw StructuralError("parsing loss: logits " + logits.ShapeString() +
                          " vs " + std::to_string(targets.size()) +
                          " targets of " + std::to_string(space.num_classes) +
                          " classes");
  }
  const int h = targets.empty() ? 0 : targets[0].height();
  const int w = targets.empty() ? 0 : targets[0].width();
  std::int64_t valid = 0;
  for (const ParsingMap& t : targets) {
    if (!t.SameShape(h, w)) {
      throw StructuralError("parsing targets in one batch differ in size");
    }
    for (std::int32_t v : t.values()) {
      if (v == space.ignore_id) continue;
      if (!space.IsClass(v)) {
        throw StructuralError("target label " + std::to_string(v) +
                              " outside the label space");
      }
      ++valid;
    }
  }
  return WeightedCrossEntropy(
      logits, h, w, valid,
      [&](int i, std::size_t p) {
        const std::int32_t v = targets[i][p];
        return v == space.ignore_id ? -1 : static_cast<int>(v);
      },
      [](int) { return 1.0; });
}

LossWithGrad EdgeWeightedCrossEntropy(const net::Tensor& edge_logits,
                                      std::span<const EdgeMap> targets) {
  if (edge_logits.c() != 2 ||
      static_cast<int>(targets.size()) != edge_logits.n()) {
    throw StructuralError("edge loss: logits " + edge_logits.ShapeString() +
                          " vs " + std::to_string(targets.size()) +
                          " targets");
  }
  const int h = targets.empty() ? 0 : targets[0].height();
  const int w = targets.empty() ? 0 : targets[0].width();
  std::int64_t positive = 0;
  std::int64_t negative = 0;
  for (const EdgeMap& t : targets) {
    if (!t.SameShape(h, w)) {
      throw StructuralError("edge targets in one batch differ in size");
    }
    for (std::uint8_t v : t.values()) {
      if (v == 1) ++positive;
      if (v == 0) ++negative;
    }
  }
  const EdgeWeights weights = EdgeClassWeights(positive, negative);
  return WeightedCrossEntropy(
      edge_logits, h, w, positive + negative,
      [&](int i, std::size_t p) {
        const std::uint8_t v = targets[i][p];
        return v <= 1 ? static_cast<int>(v) : -1;
      },
      [&](int cls) { return cls == 1 ? weights.positive : weights.negative; });
}

LossValue ParsingCrossEntropy(const ConfidenceVolume& logits,
                              const ParsingMap& target,
                              const LabelSpace& space) {
  return ParsingCrossEntropy(AsBatch(logits), std::span(&target, 1), space)
      .loss;
}

LossValue EdgeWeightedCrossEntropy(const ConfidenceVolume& edge_logits,
                                   const EdgeMap& target) {
  return EdgeWeightedCrossEntropy(AsBatch(edge_logits), std::span(&target, 1))
      .loss;
}

TotalLoss ComputeTotalLoss(const net::NetOutput& out,
                           std::span<const ParsingMap> parsing_targets,
                           std::span<const EdgeMap> edge_targets,
                           const LabelSpace& space) {
  TotalLoss result;
  LossWithGrad a = ParsingCrossEntropy(out.parsing_a, parsing_targets, space);
  result.breakdown.l_parsing = a.loss.value;
  result.grads.parsing_a = std::move(a.grad);
  if (!out.parsing_b.empty()) {
    LossWithGrad b =
        ParsingCrossEntropy(out.parsing_b, parsing_targets, space);
    result.breakdown.l_edge_parsing = b.loss.value;
    result.grads.parsing_b = std::move(b.grad);
  }
  if (!out.edge.empty()) {
    LossWithGrad e = EdgeWeightedCrossEntropy(out.edge, edge_targets);
    result.breakdown.l_edge = e.loss.value;
    result.grads.edge = std::move(e.grad);
  }
  result.breakdown = LossBreakdown::FromParts(result.breakdown.l_parsing,
                                              result.breakdown.l_edge,
                                              result.breakdown.l_edge_parsing);
  return result;
}

}  // namespace ce2p::loss
