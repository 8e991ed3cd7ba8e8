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

#include "ce2p/data/dataset.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <thread>

#include "ce2p/core/errors.h"

namespace ce2p::data {
namespace fs = std::filesystem;
namespace {

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void WritePng(const fs::path& path, const cv::Mat& mat) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat)) {
    throw DataError("cannot write " + path.string());
  }
}

}  // namespace

nlohmann::json LabelSpaceToJson(const LabelSpace& space) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [l, r] : space.lr_pairs) pairs.push_back({l, r});
  return {{"label_names", space.names},
          {"num_classes", space.num_classes},
          {"background_id", space.background_id},
          {"ignore_id", space.ignore_id},
          {"lr_pairs", pairs}};
}

LabelSpace LabelSpaceFromJson(const nlohmann::json& j) {
  LabelSpace space;
  space.names = j.value("label_names", std::vector<std::string>{});
  space.num_classes =
      j.value("num_classes", static_cast<int>(space.names.size()));
  space.background_id = j.value("background_id", 0);
  space.ignore_id = j.value("ignore_id", kIgnoreId);
  for (const auto& p : j.value("lr_pairs", nlohmann::json::array())) {
    space.lr_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  }
  space.Validate();
  return space;
}

nlohmann::json Manifest::ToJson() const {
  nlohmann::json j = LabelSpaceToJson(label_space);
  j["split"] = split;
  j["ids"] = ids;
  j["has_instances"] = has_instances;
  j["pixel_mean"] = pixel_mean;
  j["pixel_std"] = pixel_std;
  return j;
}

Manifest Manifest::FromJson(const nlohmann::json& j) {
  Manifest m;
  m.split = j.value("split", "train");
  m.ids = j.value("ids", std::vector<std::string>{});
  m.label_space = LabelSpaceFromJson(j);
  m.has_instances = j.value("has_instances", false);
  if (j.contains("pixel_mean")) m.pixel_mean = j.at("pixel_mean");
  if (j.contains("pixel_std")) m.pixel_std = j.at("pixel_std");
  return m;
}

Manifest ReadManifest(const fs::path& path) {
  try {
    return Manifest::FromJson(ReadJson(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  } catch (const StructuralError& e) {
    throw DataError("bad label space in " + path.string() + ": " + e.what());
  }
}

void WriteManifest(const fs::path& path, const Manifest& manifest) {
  WriteJson(path, manifest.ToJson());
}

Grid<std::int32_t> ReadLabelPng(const fs::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("unreadable PNG " + path.string());
  if (mat.type() != CV_8UC1) {
    throw DataError("expected an 8-bit single-channel PNG: " + path.string());
  }
  Grid<std::int32_t> grid(mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) grid.at(y, x) = row[x];
  }
  return grid;
}

void WriteLabelPng(const fs::path& path, const Grid<std::int32_t>& labels) {
  cv::Mat mat(labels.height(), labels.width(), CV_8UC1);
  for (int y = 0; y < labels.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < labels.width(); ++x) {
      const std::int32_t v = labels.at(y, x);
      if (v < 0 || v > 255) {
        throw DataError("label " + std::to_string(v) +
                        " does not fit an 8-bit PNG: " + path.string());
      }
      row[x] = static_cast<std::uint8_t>(v);
    }
  }
  WritePng(path, mat);
}

void WriteLabelPng(const fs::path& path, const Grid<std::uint8_t>& labels) {
  cv::Mat mat(labels.height(), labels.width(), CV_8UC1);
  for (int y = 0; y < labels.height(); ++y) {
    std::copy_n(&labels.at(y, 0), labels.width(), mat.ptr<std::uint8_t>(y));
  }
  WritePng(path, mat);
}

Image ReadImage(const fs::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) throw DataError("unreadable image " + path.string());
  Image image(3, mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) {
      // OpenCV stores BGR.
      for (int c = 0; c < 3; ++c) image.at(c, y, x) = row[x][2 - c] / 255.0;
    }
  }
  return image;
}

void WriteImagePng(const fs::path& path, const Image& image) {
  if (image.channels() != 3) throw StructuralError("expected an RGB image");
  cv::Mat mat(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at(c, y, x), 0.0, 1.0);
        row[x][2 - c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  WritePng(path, mat);
}

std::optional<fs::path> FindImage(const fs::path& root, const std::string& id) {
  for (const char* ext : {".png", ".jpg", ".jpeg"}) {
    fs::path p = root / "images" / (id + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

DatasetReader::DatasetReader(DatasetSpec spec) : spec_(std::move(spec)) {
  if (!fs::is_directory(spec_.root)) {
    throw DataError("dataset root " + spec_.root.string() +
                    " is not a directory");
  }
  const fs::path manifest_path = spec_.root / "manifest.json";
  std::vector<std::string> candidates;
  if (fs::exists(manifest_path)) {
    manifest_ = ReadManifest(manifest_path);
    space_ = manifest_->label_space;
    spec_.has_instances = spec_.has_instances || manifest_->has_instances;
    candidates = manifest_->ids;
  } else {
    space_ = spec_.label_space;
    const fs::path images = spec_.root / "images";
    if (fs::is_directory(images)) {
      for (const auto& entry : fs::directory_iterator(images)) {
        const auto ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
          candidates.push_back(entry.path().stem().string());
        }
      }
      std::sort(candidates.begin(), candidates.end());
    }
  }
  space_.Validate();
  for (const std::string& id : candidates) {
    if (!fs::exists(spec_.root / "categories" / (id + ".png"))) {
      spdlog::warn("skipping {}: no annotation under categories/", id);
      continue;
    }
    if (!FindImage(spec_.root, id)) {
      spdlog::warn("skipping {}: no image under images/", id);
      continue;
    }
    ids_.push_back(id);
  }
}

Sample DatasetReader::Load(std::size_t index) const {
  const std::string& id = ids_.at(index);
  Sample s;
  s.id = id;
  s.image = ReadImage(*FindImage(spec_.root, id));
  const fs::path label_path = spec_.root / "categories" / (id + ".png");
  s.parsing = ReadLabelPng(label_path);
  if (!s.parsing.SameShape(s.image.height(), s.image.width())) {
    throw DataError("size of " + label_path.string() +
                    " differs from its image");
  }
  for (std::int32_t v : s.parsing.values()) {
    if (v != space_.ignore_id && !space_.IsClass(v)) {
      throw DataError(label_path.string() + " holds label " +
                      std::to_string(v) + " but the label space declares " +
                      std::to_string(space_.num_classes) + " classes");
    }
  }
  s.edge = GenerateEdgeLabels(s.parsing, spec_.edges, space_.ignore_id);
  const fs::path inst_path = spec_.root / "instances" / (id + ".png");
  if (spec_.has_instances && fs::exists(inst_path)) {
    const Grid<std::int32_t> ids = ReadLabelPng(inst_path);
    if (!ids.SameShape(s.parsing)) {
      throw DataError("size of " + inst_path.string() +
                      " differs from its annotation");
    }
    s.instances = MasksFromInstanceIds(ids);
  }
  return s;
}

std::vector<Sample> LoadDataset(const DatasetSpec& spec, int workers) {
  const DatasetReader reader(spec);
  std::vector<Sample> samples(reader.size());
  workers = std::max(1, std::min<int>(workers, std::max<std::size_t>(
                                                   1, reader.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < reader.size(); ++i) samples[i] = reader.Load(i);
    return samples;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < reader.size(); i += workers) {
          samples[i] = reader.Load(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return samples;
}

nlohmann::json EncodeRle(const Grid<std::uint8_t>& mask) {
  std::vector<std::int64_t> counts;
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask.at(y, x) ? 1 : 0;
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return {{"size", {mask.height(), mask.width()}}, {"counts", counts}};
}

Grid<std::uint8_t> DecodeRle(const nlohmann::json& rle) {
  const int h = rle.at("size").at(0);
  const int w = rle.at("size").at(1);
  Grid<std::uint8_t> mask(h, w);
  std::int64_t pos = 0;
  std::uint8_t value = 0;
  const std::int64_t total = static_cast<std::int64_t>(h) * w;
  for (const auto& c : rle.at("counts")) {
    const std::int64_t n = c.get<std::int64_t>();
    if (n < 0 || pos + n > total) throw DataError("RLE runs exceed mask size");
    for (std::int64_t i = 0; i < n; ++i, ++pos) {
      mask.at(static_cast<int>(pos % h), static_cast<int>(pos / h)) = value;
    }
    value ^= 1;
  }
  if (pos != total) throw DataError("RLE runs do not cover the mask");
  return mask;
}

InstanceMaskSet ReadDetections(const fs::path& path) {
  const nlohmann::json j = ReadJson(path);
  const nlohmann::json& entries = j.is_array() ? j : j.at("detections");
  InstanceMaskSet set;
  try {
    for (const auto& e : entries) {
      const double score = e.value("score", 1.0);
      if (!(score >= 0.0 && score <= 1.0)) {
        throw DataError("detection score outside [0, 1] in " + path.string());
      }
      set.push_back(InstanceMask::FromMask(DecodeRle(e.at("mask")), score));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed detections " + path.string() + ": " +
                    e.what());
  }
  return set;
}

void WriteDetections(const fs::path& path, const InstanceMaskSet& detections) {
  nlohmann::json arr = nlohmann::json::array();
  for (const InstanceMask& d : detections) {
    arr.push_back({{"bbox", {d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1}},
                   {"score", d.score},
                   {"mask", EncodeRle(d.mask)}});
  }
  WriteJson(path, arr);
}

}  // namespace ce2p::data
