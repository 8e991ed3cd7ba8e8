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

#include "ce2p/data/image.h"

namespace ce2p {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> AlignedTaps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale =
      out > 1 ? static_cast<double>(in - 1) / (out - 1) : 0.0;
  for (int i = 0; i < out; ++i) {
    const double pos = i * scale;
    int lo = static_cast<int>(std::floor(pos));
    lo = std::clamp(lo, 0, in - 1);
    const int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, pos - lo};
  }
  return taps;
}

}  // namespace

void ResizePlaneBilinear(std::span<const double> src, int in_height,
                         int in_width, std::span<double> dst, int out_height,
                         int out_width) {
  const auto ys = AlignedTaps(in_height, out_height);
  const auto xs = AlignedTaps(in_width, out_width);
  for (int y = 0; y < out_height; ++y) {
    const Tap& ty = ys[y];
    const double* r0 = src.data() + static_cast<std::size_t>(ty.lo) * in_width;
    const double* r1 = src.data() + static_cast<std::size_t>(ty.hi) * in_width;
    double* out = dst.data() + static_cast<std::size_t>(y) * out_width;
    for (int x = 0; x < out_width; ++x) {
      const Tap& tx = xs[x];
      const double top = r0[tx.lo] + (r0[tx.hi] - r0[tx.lo]) * tx.frac;
      const double bottom = r1[tx.lo] + (r1[tx.hi] - r1[tx.lo]) * tx.frac;
      out[x] = top + (bottom - top) * ty.frac;
    }
  }
}

void ResizePlaneBilinearAdjoint(std::span<const double> dst_grad,
                                int out_height, int out_width,
                                std::span<double> src_grad, int in_height,
                                int in_width) {
  const auto ys = AlignedTaps(in_height, out_height);
  const auto xs = AlignedTaps(in_width, out_width);
  for (int y = 0; y < out_height; ++y) {
    const Tap& ty = ys[y];
    double* r0 = src_grad.data() + static_cast<std::size_t>(ty.lo) * in_width;
    double* r1 = src_grad.data() + static_cast<std::size_t>(ty.hi) * in_width;
    const double* g = dst_grad.data() + static_cast<std::size_t>(y) * out_width;
    for (int x = 0; x < out_width; ++x) {
      const Tap& tx = xs[x];
      const double top = g[x] * (1.0 - ty.frac);
      const double bottom = g[x] * ty.frac;
      r0[tx.lo] += top * (1.0 - tx.frac);
      r0[tx.hi] += top * tx.frac;
      r1[tx.lo] += bottom * (1.0 - tx.frac);
      r1[tx.hi] += bottom * tx.frac;
    }
  }
}

Image ResizeBilinear(const Image& image, int height, int width) {
  Image out(image.channels(), height, width);
  for (int c = 0; c < image.channels(); ++c) {
    ResizePlaneBilinear(image.plane(c), image.height(), image.width(),
                        out.plane(c), height, width);
  }
  return out;
}

ConfidenceVolume ResizeBilinear(const ConfidenceVolume& volume, int height,
                                int width) {
  ConfidenceVolume out(volume.num_classes(), height, width);
  for (int c = 0; c < volume.num_classes(); ++c) {
    ResizePlaneBilinear(volume.plane(c), volume.height(), volume.width(),
                        out.plane(c), height, width);
  }
  // Convex combinations of probability vectors stay probability vectors.
  out.set_normalized(volume.normalized());
  return out;
}

Image FlipHorizontal(const Image& image) {
  Image out(image.channels(), image.height(), image.width());
  const int w = image.width();
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = image.at(c, y, w - 1 - x);
    }
  }
  return out;
}

}  // namespace ce2p
