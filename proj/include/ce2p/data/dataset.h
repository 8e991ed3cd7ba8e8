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

#ifndef CE2P_DATA_DATASET_H_
#define CE2P_DATA_DATASET_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/data/edges.h"
#include "ce2p/data/image.h"
#include "json.hpp"

namespace ce2p::data {

// One annotated image. `edge` is derived from `parsing`.
struct Sample {
  std::string id;
  Image image;  // 3 x H x W, RGB in [0, 1]
  ParsingMap parsing;
  EdgeMap edge;
  std::optional<InstanceMaskSet> instances;
};

// {"num_classes", "background_id", "ignore_id", "lr_pairs", "label_names"}.
nlohmann::json LabelSpaceToJson(const LabelSpace& space);
// Throws StructuralError on an invalid space.
LabelSpace LabelSpaceFromJson(const nlohmann::json& j);

// Contents of manifest.json at a dataset root.
struct Manifest {
  std::string split = "train";
  std::vector<std::string> ids;
  LabelSpace label_space;
  bool has_instances = false;
  std::array<double, 3> pixel_mean = {0.5, 0.5, 0.5};
  std::array<double, 3> pixel_std = {0.25, 0.25, 0.25};

  nlohmann::json ToJson() const;
  static Manifest FromJson(const nlohmann::json& j);
};

Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path, const Manifest& manifest);

struct DatasetSpec {
  std::filesystem::path root;
  std::string split = "train";
  // Used when the root has no manifest.json.
  LabelSpace label_space = LabelSpace::Lip();
  bool has_instances = false;
  EdgeOptions edges;
};

// Lazily reads a dataset laid out as
//   images/<id>.(jpg|png)   RGB image
//   categories/<id>.png     8-bit class ids, 255 = ignore
//   instances/<id>.png      optional 8-bit person ids, 0 = none
//   manifest.json           ids, split, label names, lr pairs
// Ids come from the manifest when present, otherwise from images/.
// Images without a category PNG are skipped with a warning.
class DatasetReader {
 public:
  explicit DatasetReader(DatasetSpec spec);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const LabelSpace& label_space() const { return space_; }
  const std::optional<Manifest>& manifest() const { return manifest_; }
  const DatasetSpec& spec() const { return spec_; }

  // Throws DataError naming the file on malformed PNGs or labels outside the
  // label space.
  Sample Load(std::size_t index) const;

 private:
  DatasetSpec spec_;
  LabelSpace space_;
  std::optional<Manifest> manifest_;
  std::vector<std::string> ids_;
};

// Loads every sample; `workers` threads read disjoint index ranges.
std::vector<Sample> LoadDataset(const DatasetSpec& spec, int workers = 1);

// 8-bit single-channel PNG <-> integer raster.
Grid<std::int32_t> ReadLabelPng(const std::filesystem::path& path);
void WriteLabelPng(const std::filesystem::path& path,
                   const Grid<std::int32_t>& labels);
void WriteLabelPng(const std::filesystem::path& path,
                   const Grid<std::uint8_t>& labels);

// RGB image in [0, 1].
Image ReadImage(const std::filesystem::path& path);
void WriteImagePng(const std::filesystem::path& path, const Image& image);

// Path of images/<id>.png or .jpg, whichever exists.
std::optional<std::filesystem::path> FindImage(
    const std::filesystem::path& root, const std::string& id);

// Uncompressed run-length encoding in column-major order; runs alternate
// starting with zeros (the COCO convention).
nlohmann::json EncodeRle(const Grid<std::uint8_t>& mask);
Grid<std::uint8_t> DecodeRle(const nlohmann::json& rle);

// detections/<id>.json: an array of {"bbox": [x0, y0, x1, y1] (inclusive),
// "score": s, "mask": rle}.
InstanceMaskSet ReadDetections(const std::filesystem::path& path);
void WriteDetections(const std::filesystem::path& path,
                     const InstanceMaskSet& detections);

}  // namespace ce2p::data

#endif  // CE2P_DATA_DATASET_H_
