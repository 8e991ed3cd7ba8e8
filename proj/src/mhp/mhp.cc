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

#include "ce2p/mhp/mhp.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "ce2p/core/errors.h"
#include "ce2p/core/label_ops.h"
#include "ce2p/data/dataset.h"
#include "ce2p/train/infer.h"

namespace ce2p::mhp {
namespace fs = std::filesystem;
namespace {

// Indices of detections with a nonempty mask.
std::vector<std::size_t> NonEmpty(const InstanceMaskSet& masks) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (TightBox(masks[i].mask)) keep.push_back(i);
  }
  return keep;
}

void CheckVolume(const ConfidenceVolume& v, int height, int width,
                 const LabelSpace& space, const char* what) {
  if (v.num_classes() != space.num_classes || v.height() != height ||
      v.width() != width) {
    throw StructuralError(std::string(what) + " volume is " +
                          std::to_string(v.num_classes()) + "x" +
                          std::to_string(v.height()) + "x" +
                          std::to_string(v.width()) + ", expected " +
                          std::to_string(space.num_classes) + "x" +
                          std::to_string(height) + "x" + std::to_string(width));
  }
}

}  // namespace

DetectionSet DetectionSet::GroundTruth(InstanceMaskSet masks) {
  for (InstanceMask& m : masks) m.score = 1.0;
  return {std::move(masks), Provenance::kGroundTruth};
}

DetectionSet DetectionSet::Predicted(InstanceMaskSet masks) {
  for (const InstanceMask& m : masks) {
    if (!(m.score >= 0.0 && m.score <= 1.0)) {
      throw ParameterError("detection score " + std::to_string(m.score) +
                           " is outside [0, 1]");
    }
  }
  return {std::move(masks), Provenance::kPredicted};
}

std::pair<double, double> Placement::ToCanvas(double u, double v) const {
  const auto axis = [this](double t, int lo, int extent) {
    return crop_size > 1 ? lo + t * (extent - 1) / (crop_size - 1)
                         : static_cast<double>(lo);
  };
  return {axis(u, region.x0, region.width()),
          axis(v, region.y0, region.height())};
}

std::optional<PersonCrop> CropPerson(const Image& image,
                                     const BoundingBox& bbox, int input_size,
                                     double margin) {
  if (input_size < 1) throw ParameterError("input_size must be positive");
  if (margin < 0.0) throw ParameterError("crop margin must be nonnegative");
  if (bbox.empty()) {
    spdlog::warn("skipping a detection with an empty box");
    return std::nullopt;
  }
  const double mx = margin * bbox.width() / 2.0;
  const double my = margin * bbox.height() / 2.0;
  BoundingBox r;
  r.x0 = std::max(0, static_cast<int>(std::floor(bbox.x0 - mx)));
  r.y0 = std::max(0, static_cast<int>(std::floor(bbox.y0 - my)));
  r.x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(bbox.x1 + mx)));
  r.y1 =
      std::min(image.height() - 1, static_cast<int>(std::ceil(bbox.y1 + my)));
  if (r.empty()) {
    spdlog::warn("skipping a detection box outside the image");
    return std::nullopt;
  }
  Image region(image.channels(), r.height(), r.width());
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < r.height(); ++y) {
      for (int x = 0; x < r.width(); ++x) {
        region.at(c, y, x) = image.at(c, r.y0 + y, r.x0 + x);
      }
    }
  }
  return PersonCrop{ResizeBilinear(region, input_size, input_size),
                    Placement{r, input_size}};
}

ConfidenceVolume LocalFuse(std::span<const PlacedVolume> crops, int height,
                           int width, const LabelSpace& space) {
  const int nc = space.num_classes;
  const int bg = space.background_id;
  ConfidenceVolume canvas(nc, height, width, 0.0);
  std::fill(canvas.plane(bg).begin(), canvas.plane(bg).end(), 1.0);
  for (const PlacedVolume& crop : crops) {
    const BoundingBox& r = crop.placement.region;
    if (r.empty() || r.x0 < 0 || r.y0 < 0 || r.x1 >= width ||
        r.y1 >= height) {
      throw StructuralError("placement lies outside the " +
                            std::to_string(height) + "x" +
                            std::to_string(width) + " canvas");
    }
    if (crop.volume.num_classes() != nc) {
      throw StructuralError("crop volume has " +
                            std::to_string(crop.volume.num_classes()) +
                            " classes, expected " + std::to_string(nc));
    }
    if (!crop.volume.normalized()) {
      throw StructuralError("local fusion needs normalized crop volumes");
    }
    const ConfidenceVolume back =
        ResizeBilinear(crop.volume, r.height(), r.width());
    for (int c = 0; c < nc; ++c) {
      for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
          double& dst = canvas.at(c, r.y0 + y, r.x0 + x);
          const double v = back.at(c, y, x);
          dst = c == bg ? std::min(dst, v) : dst + v;
        }
      }
    }
  }
  return canvas;
}

Parser ModelParser(const net::Ce2pNet& model, const LabelSpace& space,
                   const train::PixelStats& stats, bool flip) {
  return [&model, space, stats, flip](const Image& image) {
    return train::Infer(model, image, flip, space, stats);
  };
}

ConfidenceVolume RunBranches(const Image& image, const DetectionSet& dets,
                             const BranchParsers& parsers,
                             const LabelSpace& space,
                             const BranchOptions& options) {
  const int h = image.height();
  const int w = image.width();
  ConfidenceVolume sum = parsers.global(image);
  CheckVolume(sum, h, w, space, "global branch");

  std::vector<PlacedVolume> predicted;
  std::vector<PlacedVolume> truth;
  for (const InstanceMask& det : dets.masks) {
    const auto crop =
        CropPerson(image, det.bbox, options.input_size, options.margin);
    if (!crop) continue;
    predicted.push_back({parsers.local_predicted(crop->image), crop->placement});
    truth.push_back({parsers.local_truth(crop->image), crop->placement});
  }
  const ConfidenceVolume l1 = LocalFuse(predicted, h, w, space);
  const ConfidenceVolume l2 = LocalFuse(truth, h, w, space);
  auto s = sum.scores();
  const auto a = l1.scores();
  const auto b = l2.scores();
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = s[k] + a[k] + b[k];
  sum.set_normalized(false);
  return sum;
}

InstanceParsing AssignInstances(const ParsingMap& parsing,
                                const DetectionSet& dets,
                                const LabelSpace& space) {
  const std::vector<std::size_t> keep = NonEmpty(dets.masks);
  for (std::size_t i : keep) {
    if (!dets.masks[i].mask.SameShape(parsing)) {
      throw StructuralError("detection mask size differs from the parsing");
    }
  }
  InstanceParsing ip{parsing, Grid<std::int32_t>(parsing.height(),
                                                 parsing.width(), 0)};
  for (std::size_t p = 0; p < parsing.size(); ++p) {
    const std::int32_t c = parsing[p];
    if (c == space.background_id || c == space.ignore_id) continue;
    int best = -1;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const InstanceMask& m = dets.masks[keep[k]];
      if (!m.mask[p]) continue;
      if (best < 0 || m.score > dets.masks[keep[best]].score) {
        best = static_cast<int>(k);
      }
    }
    ip.instance_map[p] = best + 1;
  }
  return ip;
}

InstanceParsing RefineLabels(const InstanceParsing& ip,
                             const ParsingMap& parsing,
                             const LabelSpace& space) {
  if (!ip.instance_map.SameShape(parsing) || !ip.class_map.SameShape(parsing)) {
    throw StructuralError("instance parsing and parsing differ in size");
  }
  InstanceParsing out = ip;
  Grid<std::int32_t>& inst = out.instance_map;
  const int h = parsing.height();
  const int w = parsing.width();
  const auto claimable = [&](int idx) {
    const std::int32_t c = parsing[idx];
    return inst[idx] == 0 && c != space.background_id && c != space.ignore_id;
  };

  std::vector<int> frontier;
  for (int idx = 0; idx < h * w; ++idx) {
    if (inst[idx] > 0) frontier.push_back(idx);
  }
  std::vector<int> next;
  while (!frontier.empty()) {
    next.clear();
    for (int idx : frontier) {
      const int y = idx / w;
      const int x = idx % w;
      const int neighbours[4][2] = {{y - 1, x}, {y, x - 1}, {y, x + 1},
                                    {y + 1, x}};
      for (const auto& [ny, nx] : neighbours) {
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int n = ny * w + nx;
        if (claimable(n) && parsing[n] == parsing[idx]) {
          inst[n] = inst[idx];
          next.push_back(n);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier.swap(next);
  }
  return out;
}

MhpResult Summarize(const InstanceParsing& ip,
                    std::span<const double> scores_by_id,
                    const LabelSpace& space) {
  std::map<std::int32_t, std::set<int>> parts;
  for (std::size_t p = 0; p < ip.instance_map.size(); ++p) {
    const std::int32_t id = ip.instance_map[p];
    if (id <= 0) continue;
    const std::int32_t c = ip.class_map[p];
    auto& s = parts[id];
    if (c != space.background_id && c != space.ignore_id) s.insert(c);
  }
  std::map<std::int32_t, std::int32_t> renumber;
  MhpResult result;
  for (const auto& [id, classes] : parts) {
    const int dense = static_cast<int>(renumber.size()) + 1;
    renumber[id] = dense;
    const double score = id - 1 < static_cast<int>(scores_by_id.size())
                             ? scores_by_id[id - 1]
                             : 1.0;
    result.persons.push_back(
        {dense, score, std::vector<int>(classes.begin(), classes.end())});
  }
  result.parsing = ip;
  for (std::int32_t& v : result.parsing.instance_map.values()) {
    if (v > 0) v = renumber.at(v);
  }
  return result;
}

MhpResult ParseInstancesFromParsing(const ParsingMap& parsing,
                                    const DetectionSet& dets,
                                    const LabelSpace& space, bool refine) {
  InstanceParsing ip = AssignInstances(parsing, dets, space);
  if (refine) ip = RefineLabels(ip, parsing, space);
  std::vector<double> scores;
  for (std::size_t i : NonEmpty(dets.masks)) {
    scores.push_back(dets.masks[i].score);
  }
  return Summarize(ip, scores, space);
}

MhpResult ParseInstances(const Image& image, const DetectionSet& dets,
                         const BranchParsers& parsers, const LabelSpace& space,
                         const PipelineOptions& options) {
  const ConfidenceVolume fused =
      RunBranches(image, dets, parsers, space, options.branches);
  return ParseInstancesFromParsing(ArgmaxLabels(fused), dets, space,
                                   options.refine);
}

void WriteResult(const fs::path& dir, const std::string& id,
                 const MhpResult& result) {
  fs::create_directories(dir);
  data::WriteLabelPng(dir / (id + "_class.png"), result.parsing.class_map);
  data::WriteLabelPng(dir / (id + "_instance.png"),
                      result.parsing.instance_map);
  nlohmann::json instances = nlohmann::json::array();
  for (const PersonRecord& p : result.persons) {
    instances.push_back({{"id", p.id}, {"score", p.score}, {"parts", p.parts}});
  }
  std::ofstream out(dir / (id + ".json"));
  if (!out) throw DataError("cannot write " + (dir / (id + ".json")).string());
  out << nlohmann::json{{"instances", instances}}.dump(2) << "\n";
}

MhpResult ReadResult(const fs::path& dir, const std::string& id) {
  MhpResult result;
  result.parsing.class_map = data::ReadLabelPng(dir / (id + "_class.png"));
  result.parsing.instance_map =
      data::ReadLabelPng(dir / (id + "_instance.png"));
  if (!result.parsing.class_map.SameShape(result.parsing.instance_map)) {
    throw DataError("class and instance maps of " + id + " differ in size");
  }
  const fs::path meta = dir / (id + ".json");
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    try {
      const nlohmann::json j = nlohmann::json::parse(in);
      for (const auto& e : j.at("instances")) {
        result.persons.push_back({e.at("id").get<int>(),
                                  e.value("score", 1.0),
                                  e.value("parts", std::vector<int>{})});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed " + meta.string() + ": " + e.what());
    }
  } else {
    std::set<std::int32_t> ids(result.parsing.instance_map.values().begin(),
                               result.parsing.instance_map.values().end());
    for (std::int32_t i : ids) {
      if (i > 0) result.persons.push_back({i, 1.0, {}});
    }
  }
  return result;
}

}  // namespace ce2p::mhp
