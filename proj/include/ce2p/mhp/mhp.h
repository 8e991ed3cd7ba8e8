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

#ifndef CE2P_MHP_MHP_H_
#define CE2P_MHP_MHP_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/data/image.h"
#include "ce2p/net/ce2p_net.h"
#include "ce2p/train/trainer.h"

namespace ce2p::mhp {

enum class Provenance { kPredicted, kGroundTruth };

struct DetectionSet {
  InstanceMaskSet masks;
  Provenance provenance = Provenance::kPredicted;

  // Ground-truth masks with every score forced to 1.
  static DetectionSet GroundTruth(InstanceMaskSet masks);
  // Throws ParameterError on a score outside [0, 1].
  static DetectionSet Predicted(InstanceMaskSet masks);
};

// Where a person crop came from: `region` is the inclusive canvas box that
// was resampled (corner-aligned) onto a crop_size x crop_size grid.
struct Placement {
  BoundingBox region;
  int crop_size = 0;

  // Canvas coordinates (x, y) of crop pixel (u, v).
  std::pair<double, double> ToCanvas(double u, double v) const;
};

struct PersonCrop {
  Image image;
  Placement placement;
};

inline constexpr double kCropMargin = 0.2;

// Grows `bbox` by margin * side / 2 on every side, clips it to the image and
// resamples it to input_size x input_size. Returns nullopt (with a warning)
// for an empty box or one that misses the image.
std::optional<PersonCrop> CropPerson(const Image& image,
                                     const BoundingBox& bbox, int input_size,
                                     double margin = kCropMargin);

struct PlacedVolume {
  ConfidenceVolume volume;  // normalized, crop resolution
  Placement placement;
};

// Pastes crop confidences back onto a height x width canvas. The canvas
// starts at background 1 and foreground 0; inside each placement the resized
// crop adds to the foreground channels and takes the minimum on the
// background channel. Throws StructuralError for a placement outside the
// canvas, an unnormalized volume or a class-count mismatch.
ConfidenceVolume LocalFuse(std::span<const PlacedVolume> crops, int height,
                           int width, const LabelSpace& space);

// Normalized per-pixel class confidences for an image.
using Parser = std::function<ConfidenceVolume(const Image&)>;

// Parser backed by a trained network (see train::Infer).
Parser ModelParser(const net::Ce2pNet& model, const LabelSpace& space,
                   const train::PixelStats& stats, bool flip);

struct BranchParsers {
  Parser global;           // whole images
  Parser local_predicted;  // crops around predicted persons
  Parser local_truth;      // crops around ground-truth persons
};

struct BranchOptions {
  int input_size = 473;
  double margin = kCropMargin;
};

// Sum of the global volume and the two locally fused canvases. Both local
// branches crop the same detections.
ConfidenceVolume RunBranches(const Image& image, const DetectionSet& dets,
                             const BranchParsers& parsers,
                             const LabelSpace& space,
                             const BranchOptions& options = {});

// Labels each non-background pixel with the detection covering it (highest
// score first, lower index on ties). Instance ids are 1-based positions in
// the detection list after empty masks are dropped. Throws StructuralError
// when a mask and the parsing differ in size.
InstanceParsing AssignInstances(const ParsingMap& parsing,
                                const DetectionSet& dets,
                                const LabelSpace& space);

// Grows instance ids into unassigned pixels of the same class by a
// layer-synchronous breadth-first search over 4-neighbours. Within a layer,
// pixels expand in scan order, so the earliest one claims a contested pixel.
// Background and ignore pixels are never claimed and assigned pixels never
// change.
InstanceParsing RefineLabels(const InstanceParsing& ip,
                             const ParsingMap& parsing,
                             const LabelSpace& space);

struct PersonRecord {
  int id = 0;
  double score = 0.0;
  std::vector<int> parts;  // classes present, ascending
};

struct MhpResult {
  InstanceParsing parsing;
  std::vector<PersonRecord> persons;
};

// Renumbers instance ids to 1..K in order of first appearance by id and
// attaches each person's detection score.
MhpResult Summarize(const InstanceParsing& ip,
                    std::span<const double> scores_by_id,
                    const LabelSpace& space);

struct PipelineOptions {
  BranchOptions branches;
  bool refine = true;
};

// Branch fusion, argmax, instance assignment and (optionally) refinement.
MhpResult ParseInstances(const Image& image, const DetectionSet& dets,
                         const BranchParsers& parsers, const LabelSpace& space,
                         const PipelineOptions& options = {});

// Same from an instance-agnostic parsing that is already known.
MhpResult ParseInstancesFromParsing(const ParsingMap& parsing,
                                    const DetectionSet& dets,
                                    const LabelSpace& space, bool refine);

// results/<id>_class.png, results/<id>_instance.png and results/<id>.json.
void WriteResult(const std::filesystem::path& dir, const std::string& id,
                 const MhpResult& result);
MhpResult ReadResult(const std::filesystem::path& dir, const std::string& id);

}  // namespace ce2p::mhp

#endif  // CE2P_MHP_MHP_H_
