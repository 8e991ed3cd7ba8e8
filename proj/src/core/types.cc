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

#include "ce2p/core/types.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace ce2p {

void LabelSpace::Validate() const {
  if (num_classes <= 0) {
    throw StructuralError("label space needs at least one class");
  }
  if (background_id < 0 || background_id >= num_classes) {
    throw StructuralError("background id outside the class range");
  }
  if (ignore_id >= 0 && ignore_id < num_classes) {
    throw StructuralError("ignore id collides with a class id");
  }
  if (!names.empty() && static_cast<int>(names.size()) != num_classes) {
    throw StructuralError("names must list every class");
  }
  std::set<int> seen;
  for (const auto& [left, right] : lr_pairs) {
    for (int id : {left, right}) {
      if (!IsClass(id) || id == background_id) {
        throw StructuralError("lr pair id " + std::to_string(id) +
                              " is not a foreground class");
      }
      if (!seen.insert(id).second) {
        throw StructuralError("class " + std::to_string(id) +
                              " appears in two lr pairs");
      }
    }
  }
}

std::vector<int> LabelSpace::MirrorTable() const {
  std::vector<int> table(num_classes);
  std::iota(table.begin(), table.end(), 0);
  for (const auto& [left, right] : lr_pairs) {
    if (!IsClass(left) || !IsClass(right)) {
      throw StructuralError("lr pair id out of range");
    }
    table[left] = right;
    table[right] = left;
  }
  return table;
}

LabelSpace LabelSpace::Lip() {
  LabelSpace space;
  space.num_classes = 20;
  space.names = {"background", "hat",       "hair",      "glove",
                 "sunglasses", "upper-clothes", "dress", "coat",
                 "socks",      "pants",     "jumpsuits", "scarf",
                 "skirt",      "face",      "left-arm",  "right-arm",
                 "left-leg",   "right-leg", "left-shoe", "right-shoe"};
  space.lr_pairs = {{14, 15}, {16, 17}, {18, 19}};
  return space;
}

LabelSpace LabelSpace::Synthetic() {
  LabelSpace space;
  space.num_classes = 8;
  space.names = {"background", "hair",     "face",     "upper-clothes",
                 "left-arm",   "right-arm", "left-leg", "right-leg"};
  space.lr_pairs = {{4, 5}, {6, 7}};
  return space;
}

void ValidateParsing(const ParsingMap& map, const LabelSpace& space) {
  for (std::int32_t v : map.values()) {
    if (v != space.ignore_id && !space.IsClass(v)) {
      throw StructuralError("label " + std::to_string(v) +
                            " is not a class of the label space");
    }
  }
}

ConfidenceVolume::ConfidenceVolume(int num_classes, int height, int width,
                                   double fill)
    : num_classes_(num_classes), height_(height), width_(width) {
  if (num_classes < 0 || height < 0 || width < 0) {
    throw StructuralError("volume dimensions must be nonnegative");
  }
  scores_.assign(static_cast<std::size_t>(num_classes) * height * width, fill);
}

ConfidenceVolume::ConfidenceVolume(int num_classes, int height, int width,
                                   std::vector<double> scores, bool normalized)
    : num_classes_(num_classes), height_(height), width_(width),
      scores_(std::move(scores)), normalized_(normalized) {
  if (num_classes < 0 || height < 0 || width < 0 ||
      scores_.size() !=
          static_cast<std::size_t>(num_classes) * height * width) {
    throw StructuralError("volume holds " + std::to_string(scores_.size()) +
                          " scores, declared shape " +
                          std::to_string(num_classes) + "x" +
                          std::to_string(height) + "x" +
                          std::to_string(width));
  }
}

bool ConfidenceVolume::AllFinite() const {
  return std::all_of(scores_.begin(), scores_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool ConfidenceVolume::IsProbability(double tolerance) const {
  const std::size_t plane = plane_size();
  for (std::size_t i = 0; i < plane; ++i) {
    double sum = 0.0;
    for (int c = 0; c < num_classes_; ++c) {
      const double v = scores_[c * plane + i];
      if (!(v >= 0.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) return false;
  }
  return true;
}

std::optional<BoundingBox> TightBox(const Grid<std::uint8_t>& mask) {
  BoundingBox box{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(y, x) == 0) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  if (box.empty()) return std::nullopt;
  return box;
}

InstanceMask InstanceMask::FromMask(Grid<std::uint8_t> mask, double score) {
  InstanceMask out;
  out.bbox = TightBox(mask).value_or(BoundingBox{});
  out.mask = std::move(mask);
  out.score = score;
  return out;
}

InstanceMaskSet MasksFromInstanceIds(const Grid<std::int32_t>& ids) {
  std::map<std::int32_t, Grid<std::uint8_t>> by_id;
  for (int y = 0; y < ids.height(); ++y) {
    for (int x = 0; x < ids.width(); ++x) {
      const std::int32_t id = ids.at(y, x);
      if (id <= 0) continue;
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        it = by_id.emplace(id, Grid<std::uint8_t>(ids.height(), ids.width()))
                 .first;
      }
      it->second.at(y, x) = 1;
    }
  }
  InstanceMaskSet set;
  for (auto& [id, mask] : by_id) {
    set.push_back(InstanceMask::FromMask(std::move(mask), 1.0));
  }
  return set;
}

}  // namespace ce2p
