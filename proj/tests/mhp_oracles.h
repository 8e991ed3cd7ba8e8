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
// Slow, direct re-statements of the multi-person pipeline rules, used as
// oracles on tiny fixtures.

#ifndef CE2P_TESTS_MHP_ORACLES_H_
#define CE2P_TESTS_MHP_ORACLES_H_

#include <algorithm>
#include <climits>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/mhp/mhp.h"

namespace ce2p::testing {

// Value of `v` (class c) at real crop coordinates by bilinear interpolation.
inline double SampleBilinear(const ConfidenceVolume& v, int c, double y,
                             double x) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, v.height() - 1);
  const int x1 = std::min(x0 + 1, v.width() - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  return (1 - fy) * ((1 - fx) * v.at(c, y0, x0) + fx * v.at(c, y0, x1)) +
         fy * ((1 - fx) * v.at(c, y1, x0) + fx * v.at(c, y1, x1));
}

// Crop coordinate that a canvas offset `t` within an `extent`-long region
// maps to (corner-aligned).
inline double CropCoord(int t, int extent, int crop_size) {
  return extent > 1 ? static_cast<double>(t) * (crop_size - 1) / (extent - 1)
                    : 0.0;
}

inline ConfidenceVolume OracleLocalFuse(std::span<const mhp::PlacedVolume> crops,
                                        int h, int w, const LabelSpace& space) {
  ConfidenceVolume out(space.num_classes, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < space.num_classes; ++c) {
        double acc = c == space.background_id ? 1.0 : 0.0;
        for (const auto& crop : crops) {
          const BoundingBox& r = crop.placement.region;
          if (x < r.x0 || x > r.x1 || y < r.y0 || y > r.y1) continue;
          const int s = crop.volume.height();
          const double v =
              SampleBilinear(crop.volume, c, CropCoord(y - r.y0, r.height(), s),
                             CropCoord(x - r.x0, r.width(), s));
          acc = c == space.background_id ? std::min(acc, v) : acc + v;
        }
        out.at(c, y, x) = acc;
      }
    }
  return out;
}

inline ConfidenceVolume OracleRunBranches(const Image& image,
                                          const mhp::DetectionSet& dets,
                                          const mhp::BranchParsers& parsers,
                                          const LabelSpace& space,
                                          const mhp::BranchOptions& options) {
  std::vector<mhp::PlacedVolume> l1, l2;
  for (const InstanceMask& m : dets.masks) {
    const auto crop =
        mhp::CropPerson(image, m.bbox, options.input_size, options.margin);
    if (!crop) continue;
    l1.push_back({parsers.local_predicted(crop->image), crop->placement});
    l2.push_back({parsers.local_truth(crop->image), crop->placement});
  }
  const int h = image.height(), w = image.width();
  const ConfidenceVolume g = parsers.global(image);
  const ConfidenceVolume a = OracleLocalFuse(l1, h, w, space);
  const ConfidenceVolume b = OracleLocalFuse(l2, h, w, space);
  ConfidenceVolume out(space.num_classes, h, w);
  for (int c = 0; c < space.num_classes; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(c, y, x) = g.at(c, y, x) + a.at(c, y, x) + b.at(c, y, x);
  return out;
}

inline InstanceParsing OracleAssign(const ParsingMap& parsing,
                                    const mhp::DetectionSet& dets,
                                    const LabelSpace& space) {
  std::vector<const InstanceMask*> kept;
  for (const InstanceMask& m : dets.masks) {
    bool any = false;
    for (auto v : m.mask.values()) any = any || v;
    if (any) kept.push_back(&m);
  }
  InstanceParsing ip{parsing, Grid<std::int32_t>(parsing.height(),
                                                 parsing.width(), 0)};
  for (int y = 0; y < parsing.height(); ++y)
    for (int x = 0; x < parsing.width(); ++x) {
      const int c = parsing.at(y, x);
      if (c == space.background_id || c == space.ignore_id) continue;
      int best = 0;
      double best_score = -1.0;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        if (kept[k]->mask.at(y, x) && kept[k]->score > best_score) {
          best = static_cast<int>(k) + 1;
          best_score = kept[k]->score;
        }
      }
      ip.instance_map.at(y, x) = best;
    }
  return ip;
}

// Same-class path distances from assigned pixels, by relaxation to a fixed
// point, then each newly reached pixel takes the id of its scan-first
// neighbour one step closer.
inline InstanceParsing OracleRefine(const InstanceParsing& ip,
                                    const ParsingMap& parsing,
                                    const LabelSpace& space) {
  const int h = parsing.height(), w = parsing.width();
  Grid<int> dist(h, w, INT_MAX);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (ip.instance_map.at(y, x) > 0) dist.at(y, x) = 0;
  const auto open = [&](int y, int x) {
    const int c = parsing.at(y, x);
    return ip.instance_map.at(y, x) == 0 && c != space.background_id &&
           c != space.ignore_id;
  };
  const int dy[4] = {-1, 0, 0, 1};
  const int dx[4] = {0, -1, 1, 0};
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!open(y, x)) continue;
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          if (parsing.at(ny, nx) != parsing.at(y, x)) continue;
          if (dist.at(ny, nx) == INT_MAX) continue;
          if (dist.at(ny, nx) + 1 < dist.at(y, x)) {
            dist.at(y, x) = dist.at(ny, nx) + 1;
            changed = true;
          }
        }
      }
  }
  InstanceParsing out = ip;
  int max_d = 0;
  for (int v : dist.values())
    if (v != INT_MAX) max_d = std::max(max_d, v);
  for (int d = 1; d <= max_d; ++d)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (dist.at(y, x) != d) continue;
        int best = INT_MAX;
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          if (parsing.at(ny, nx) != parsing.at(y, x)) continue;
          if (dist.at(ny, nx) != d - 1) continue;
          best = std::min(best, ny * w + nx);
        }
        out.instance_map.at(y, x) = out.instance_map[best];
      }
  return out;
}

// Random blocky multi-person fixture of at most `max_persons` people.
struct MhpFixture {
  ParsingMap parsing;
  mhp::DetectionSet dets;
};

template <typename Rng>
MhpFixture RandomMhpFixture(int h, int w, int num_classes, int max_persons,
                            Rng& rng, bool with_ignore = true) {
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::uniform_int_distribution<int> coin(0, 9);
  MhpFixture f;
  f.parsing = ParsingMap(h, w);
  for (auto& v : f.parsing.values()) {
    v = coin(rng) < 3 ? 0 : cls(rng);
    if (with_ignore && coin(rng) == 0) v = kIgnoreId;
  }
  // Smooth a little so that same-class regions are larger than one pixel.
  for (int y = 0; y < h; ++y)
    for (int x = 1; x < w; ++x)
      if (coin(rng) < 4) f.parsing.at(y, x) = f.parsing.at(y, x - 1);
  std::uniform_int_distribution<int> persons(1, max_persons);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  const int k = persons(rng);
  InstanceMaskSet masks;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> py(0, h - 1), px(0, w - 1);
    int y0 = py(rng), y1 = py(rng), x0 = px(rng), x1 = px(rng);
    if (y0 > y1) std::swap(y0, y1);
    if (x0 > x1) std::swap(x0, x1);
    Grid<std::uint8_t> m(h, w, 0);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) m.at(y, x) = coin(rng) < 8;
    // Coarse scores make ties likely.
    masks.push_back(InstanceMask::FromMask(
        std::move(m), std::round(score(rng) * 4.0) / 4.0));
  }
  f.dets = mhp::DetectionSet::Predicted(std::move(masks));
  return f;
}

}  // namespace ce2p::testing

#endif  // CE2P_TESTS_MHP_ORACLES_H_
