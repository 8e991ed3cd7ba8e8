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

#include "ce2p/data/augment.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ce2p/core/label_ops.h"

namespace ce2p::data {
namespace {

struct Geometry {
  int scaled_height = 0;
  int scaled_width = 0;
  int crop_y = 0;
  int crop_x = 0;
  int side = 0;
  bool flip = false;
};

// Copies the side x side window at (crop_y, crop_x) of `src`, reading
// `fill` outside it.
template <typename T>
Grid<T> Window(const Grid<T>& src, int crop_y, int crop_x, int side, T fill) {
  Grid<T> out(side, side, fill);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (src.Contains(y + crop_y, x + crop_x)) {
        out.at(y, x) = src.at(y + crop_y, x + crop_x);
      }
    }
  }
  return out;
}

Sample Apply(const Sample& in, const Geometry& g, const LabelSpace& space,
             const std::array<double, 3>& pad_value,
             const EdgeOptions& edges) {
  const bool rescale = g.scaled_height != in.image.height() ||
                       g.scaled_width != in.image.width();
  Sample out;
  out.id = in.id;

  const Image scaled = rescale ? ResizeBilinear(in.image, g.scaled_height,
                                                g.scaled_width)
                               : in.image;
  out.image = Image(3, g.side, g.side);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < g.side; ++y) {
      for (int x = 0; x < g.side; ++x) {
        const int sy = y + g.crop_y;
        const int sx = x + g.crop_x;
        const bool inside = sy >= 0 && sy < scaled.height() && sx >= 0 &&
                            sx < scaled.width();
        out.image.at(c, y, x) = inside ? scaled.at(c, sy, sx) : pad_value[c];
      }
    }
  }

  const ParsingMap parsing =
      rescale ? ResizeNearest(in.parsing, g.scaled_height, g.scaled_width)
              : in.parsing;
  out.parsing = Window(parsing, g.crop_y, g.crop_x, g.side,
                       static_cast<std::int32_t>(space.ignore_id));

  if (in.instances) {
    InstanceMaskSet masks;
    for (const InstanceMask& m : *in.instances) {
      const Grid<std::uint8_t> mask =
          rescale ? ResizeNearest(m.mask, g.scaled_height, g.scaled_width)
                  : m.mask;
      Grid<std::uint8_t> w = Window(mask, g.crop_y, g.crop_x, g.side,
                                    static_cast<std::uint8_t>(0));
      if (g.flip) w = FlipHorizontal(w);
      // Persons cropped away entirely are dropped.
      if (TightBox(w)) masks.push_back(InstanceMask::FromMask(w, m.score));
    }
    out.instances = std::move(masks);
  }

  if (g.flip) {
    out.image = FlipHorizontal(out.image);
    out.parsing = HflipLabels(out.parsing, space);
  }
  out.edge = GenerateEdgeLabels(out.parsing, edges, space.ignore_id);
  return out;
}

}  // namespace

Sample Augment(const Sample& sample, std::uint64_t seed,
               const LabelSpace& space, const AugmentOptions& options) {
  if (options.input_size < 1) {
    throw ParameterError("input_size must be positive");
  }
  if (!(options.scale_min > 0.0 && options.scale_min <= options.scale_max)) {
    throw ParameterError("scale range must satisfy 0 < min <= max");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale_dist(options.scale_min,
                                                    options.scale_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double scale = scale_dist(rng);
  Geometry g;
  g.side = options.input_size;
  g.scaled_height = std::max(
      1, static_cast<int>(std::lround(sample.image.height() * scale)));
  g.scaled_width = std::max(
      1, static_cast<int>(std::lround(sample.image.width() * scale)));
  // Padding goes to the bottom/right, so the crop origin ranges over the
  // padded extent.
  const int span_y = std::max(g.scaled_height, g.side) - g.side;
  const int span_x = std::max(g.scaled_width, g.side) - g.side;
  g.crop_y = std::uniform_int_distribution<int>(0, span_y)(rng);
  g.crop_x = std::uniform_int_distribution<int>(0, span_x)(rng);
  g.flip = unit(rng) < options.flip_probability;
  return Apply(sample, g, space, options.pad_value, options.edges);
}

Sample FitToSize(const Sample& sample, int side, const LabelSpace& space,
                 const std::array<double, 3>& pad_value,
                 const EdgeOptions& edges) {
  if (side < 1) throw ParameterError("side must be positive");
  Geometry g;
  g.side = side;
  g.scaled_height = sample.image.height();
  g.scaled_width = sample.image.width();
  g.crop_y = std::max(0, (g.scaled_height - side) / 2);
  g.crop_x = std::max(0, (g.scaled_width - side) / 2);
  return Apply(sample, g, space, pad_value, edges);
}

}  // namespace ce2p::data
