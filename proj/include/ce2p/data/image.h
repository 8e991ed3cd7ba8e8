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

#ifndef CE2P_DATA_IMAGE_H_
#define CE2P_DATA_IMAGE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ce2p/core/types.h"

namespace ce2p {

// Channel-major C x H x W real image (RGB in [0, 1] for dataset images).
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, double fill = 0.0)
      : channels_(channels), height_(height), width_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {}

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  std::span<double> plane(int c) {
    return std::span<double>(data_).subspan(c * plane_size(), plane_size());
  }
  std::span<const double> plane(int c) const {
    return std::span<const double>(data_).subspan(c * plane_size(),
                                                  plane_size());
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Corner-aligned bilinear resize of one plane: output sample i sits at input
// coordinate i * (in - 1) / (out - 1). A 1-pixel output samples index 0.
void ResizePlaneBilinear(std::span<const double> src, int in_height,
                         int in_width, std::span<double> dst, int out_height,
                         int out_width);

// Adjoint of ResizePlaneBilinear; accumulates into `src_grad`.
void ResizePlaneBilinearAdjoint(std::span<const double> dst_grad,
                                int out_height, int out_width,
                                std::span<double> src_grad, int in_height,
                                int in_width);

Image ResizeBilinear(const Image& image, int height, int width);
ConfidenceVolume ResizeBilinear(const ConfidenceVolume& volume, int height,
                                int width);

// Nearest-neighbour resize sampling pixel centres; never invents values.
template <typename T>
Grid<T> ResizeNearest(const Grid<T>& src, int height, int width) {
  Grid<T> out(height, width);
  if (src.empty()) return out;
  std::vector<int> xs(width);
  for (int x = 0; x < width; ++x) {
    xs[x] = std::min(src.width() - 1,
                     static_cast<int>(std::floor((x + 0.5) * src.width() /
                                                 width)));
  }
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(
        src.height() - 1,
        static_cast<int>(std::floor((y + 0.5) * src.height() / height)));
    for (int x = 0; x < width; ++x) out.at(y, x) = src.at(sy, xs[x]);
  }
  return out;
}

template <typename T>
Grid<T> FlipHorizontal(const Grid<T>& src) {
  Grid<T> out(src.height(), src.width());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      out.at(y, x) = src.at(y, src.width() - 1 - x);
    }
  }
  return out;
}

Image FlipHorizontal(const Image& image);

}  // namespace ce2p

#endif  // CE2P_DATA_IMAGE_H_
