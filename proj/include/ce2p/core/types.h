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

#ifndef CE2P_CORE_TYPES_H_
#define CE2P_CORE_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ce2p/core/errors.h"

namespace ce2p {

// Row-major H x W raster.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(Checked(height)), width_(Checked(width)),
        data_(static_cast<std::size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int y, int x) { return data_[Index(y, x)]; }
  const T& at(int y, int x) const { return data_[Index(y, x)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool Contains(int y, int x) const {
    return y >= 0 && y < height_ && x >= 0 && x < width_;
  }
  bool SameShape(int height, int width) const {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool SameShape(const Grid<U>& other) const {
    return SameShape(other.height(), other.width());
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t Index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  static int Checked(int extent) {
    if (extent < 0) throw StructuralError("grid dimensions must be nonnegative");
    return extent;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

inline constexpr int kIgnoreId = 255;

// Class inventory of a parsing dataset.
struct LabelSpace {
  int num_classes = 0;
  int background_id = 0;
  int ignore_id = kIgnoreId;
  std::vector<std::pair<int, int>> lr_pairs;
  std::vector<std::string> names;

  // Throws StructuralError when an invariant is broken.
  void Validate() const;

  bool IsClass(int id) const { return id >= 0 && id < num_classes; }

  // mirror[c] is the id class c turns into under a horizontal flip.
  std::vector<int> MirrorTable() const;

  // The 20-class LIP inventory.
  static LabelSpace Lip();
  // The 8-class inventory drawn by the synthetic generator.
  static LabelSpace Synthetic();
};

// Per-pixel class ids in [0, num_classes) or ignore_id.
using ParsingMap = Grid<std::int32_t>;

// Per-pixel binary boundary labels, ignore_id where the parsing is ignored.
using EdgeMap = Grid<std::uint8_t>;

// Throws StructuralError if some non-ignore value is not a class id.
void ValidateParsing(const ParsingMap& map, const LabelSpace& space);

// C x H x W per-class scores stored channel-major.
class ConfidenceVolume {
 public:
  ConfidenceVolume() = default;
  ConfidenceVolume(int num_classes, int height, int width, double fill = 0.0);
  // Throws StructuralError if scores.size() != num_classes * height * width.
  ConfidenceVolume(int num_classes, int height, int width,
                   std::vector<double> scores, bool normalized = false);

  int num_classes() const { return num_classes_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double& at(int c, int y, int x) { return scores_[Index(c, y, x)]; }
  double at(int c, int y, int x) const { return scores_[Index(c, y, x)]; }

  std::span<double> plane(int c) {
    return std::span<double>(scores_).subspan(c * plane_size(), plane_size());
  }
  std::span<const double> plane(int c) const {
    return std::span<const double>(scores_).subspan(c * plane_size(),
                                                    plane_size());
  }
  std::span<double> scores() { return scores_; }
  std::span<const double> scores() const { return scores_; }

  bool normalized() const { return normalized_; }
  void set_normalized(bool normalized) { normalized_ = normalized; }

  bool AllFinite() const;
  // True when every pixel is a probability vector within `tolerance`.
  bool IsProbability(double tolerance = 1e-5) const;

 private:
  std::size_t Index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int num_classes_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> scores_;
  bool normalized_ = false;
};

// Inclusive pixel box.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool empty() const { return x1 < x0 || y1 < y0; }
  bool operator==(const BoundingBox&) const = default;
};

// Tight box of the nonzero pixels, nullopt for an empty mask.
std::optional<BoundingBox> TightBox(const Grid<std::uint8_t>& mask);

struct InstanceMask {
  Grid<std::uint8_t> mask;
  double score = 1.0;
  BoundingBox bbox;

  // Computes the tight bbox from `mask`.
  static InstanceMask FromMask(Grid<std::uint8_t> mask, double score);
};

using InstanceMaskSet = std::vector<InstanceMask>;

// Per-image mask set from a person-id raster (0 = none). Ids are visited in
// increasing order; every mask gets score 1.
InstanceMaskSet MasksFromInstanceIds(const Grid<std::int32_t>& ids);

// (class id, person id) per pixel.
struct InstanceParsing {
  ParsingMap class_map;
  Grid<std::int32_t> instance_map;  // 0 = no person
};

}  // namespace ce2p

#endif  // CE2P_CORE_TYPES_H_
