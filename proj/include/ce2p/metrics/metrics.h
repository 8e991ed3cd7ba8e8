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

#ifndef CE2P_METRICS_METRICS_H_
#define CE2P_METRICS_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ce2p/core/types.h"

namespace ce2p::metrics {

// Rows are ground truth, columns predictions. Ignore pixels are skipped.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  // Throws StructuralError naming `image_id` on a size mismatch and when a
  // label is neither a class nor ignore_id.
  void Add(const ParsingMap& gt, const ParsingMap& pred,
           const LabelSpace& space, const std::string& image_id = "");
  void Merge(const ConfusionMatrix& other);

  int num_classes() const { return num_classes_; }
  std::int64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
  std::int64_t total() const;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

struct GlobalScores {
  double pixel_acc = 0.0;
  double mean_acc = 0.0;
  double miou = 0.0;
  // nullopt for classes absent from both ground truth and prediction.
  std::vector<std::optional<double>> per_class_iou;
};

GlobalScores ComputeGlobalScores(const ConfusionMatrix& cm);

// Accumulates over matched lists; ids name images in errors.
GlobalScores ComputeGlobalScores(std::span<const ParsingMap> preds,
                                 std::span<const ParsingMap> gts,
                                 const LabelSpace& space,
                                 std::span<const std::string> ids = {});

// (50 + 5 i) / 100 for i = 0..9, and (10 i) / 100 for i = 1..9.
std::vector<double> RegionThresholds();
std::vector<double> PersonThresholds();

// Area under the precision-recall curve of a score-ranked TP/FP list, with
// precision replaced by its monotone upper envelope.
double AveragePrecision(const std::vector<bool>& ranked_tp,
                        std::int64_t num_gt);

// One semantic part region (for AP^r) in one image.
struct RegionInstance {
  std::string image_id;
  int category = 0;
  Grid<std::uint8_t> mask;
  double score = 1.0;
};

double MaskIou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b);

struct ApResult {
  double mean = 0.0;
  std::vector<double> per_threshold;
  // Set when no prediction or no ground truth was available.
  bool degenerate = false;
};

// Per category and threshold: predictions in decreasing score order each
// take the unmatched ground truth of the same image and category with the
// highest IoU >= t. Categories without ground truth are skipped. The result
// averages over categories, then thresholds.
ApResult MeanApR(std::span<const RegionInstance> preds,
                 std::span<const RegionInstance> gts,
                 std::span<const double> thresholds);

// A person: its class map restricted to the person (background elsewhere).
struct PersonInstance {
  std::string image_id;
  Grid<std::int32_t> parts;
  double score = 1.0;
};

// Greedy person matching within each image: predictions in decreasing score
// order take the unmatched ground truth with the highest person-mask IoU
// (> 0). match[i] is the ground-truth index for prediction i or -1.
std::vector<int> MatchPersons(std::span<const PersonInstance> preds,
                              std::span<const PersonInstance> gts,
                              const LabelSpace& space);

// Part IoUs of a matched pair over the classes present in either.
std::vector<double> PartIous(const PersonInstance& pred,
                             const PersonInstance& gt, const LabelSpace& space);

struct PersonApResult {
  double ap_50 = 0.0;
  double mean = 0.0;
  std::vector<double> per_threshold;
  bool degenerate = false;
};

// A matched prediction is a true positive at t when its mean part IoU >= t.
PersonApResult ApP(std::span<const PersonInstance> preds,
                   std::span<const PersonInstance> gts,
                   const LabelSpace& space,
                   std::span<const double> thresholds);

struct PcpResult {
  double at_threshold = 0.0;
  double mean = 0.0;
  std::vector<double> per_threshold;
};

// Fraction of a ground-truth person's part classes whose IoU with the
// matched prediction reaches t, averaged over ground-truth persons. Unmatched
// persons count 0, or are left out when `count_unmatched` is false; persons
// without parts are skipped with a warning.
PcpResult Pcp(std::span<const PersonInstance> preds,
              std::span<const PersonInstance> gts, const LabelSpace& space,
              double threshold, std::span<const double> thresholds,
              bool count_unmatched = true);

// Part regions and persons of one instance-level parsing. Person scores come
// from `scores_by_id` (index id - 1), defaulting to 1.
std::vector<RegionInstance> RegionsOf(const InstanceParsing& ip,
                                      const std::string& image_id,
                                      const LabelSpace& space,
                                      std::span<const double> scores_by_id = {});
std::vector<PersonInstance> PersonsOf(const InstanceParsing& ip,
                                      const std::string& image_id,
                                      const LabelSpace& space,
                                      std::span<const double> scores_by_id = {});

}  // namespace ce2p::metrics

#endif  // CE2P_METRICS_METRICS_H_
