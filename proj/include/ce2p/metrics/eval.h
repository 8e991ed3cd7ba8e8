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

#ifndef CE2P_METRICS_EVAL_H_
#define CE2P_METRICS_EVAL_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/metrics/metrics.h"
#include "json.hpp"

namespace ce2p::metrics {

struct EvalOptions {
  std::vector<double> region_thresholds = RegionThresholds();
  std::vector<double> person_thresholds = PersonThresholds();
  double pcp_threshold = 0.5;
  // Unmatched ground-truth persons score 0 in PCP instead of being dropped.
  bool pcp_count_unmatched = true;
};

struct InstanceScores {
  ApResult ap_r;
  PersonApResult ap_p;
  PcpResult pcp;
};

struct EvalReport {
  LabelSpace space;
  std::size_t num_images = 0;
  GlobalScores global;
  // Present when both sides carry person ids.
  std::optional<InstanceScores> instance;
  EvalOptions options;

  nlohmann::json ToJson() const;
};

// Scores predictions against a dataset root. `pred_dir` holds
// <id>_class.png (and optionally <id>_instance.png with <id>.json), either
// directly or under results/. Throws DataError when a ground-truth image has
// no prediction and StructuralError on size mismatches.
EvalReport Evaluate(const std::filesystem::path& pred_dir,
                    const std::filesystem::path& gt_root,
                    const EvalOptions& options = {});

// Instance scores from in-memory results.
InstanceScores ScoreInstances(std::span<const RegionInstance> pred_regions,
                              std::span<const RegionInstance> gt_regions,
                              std::span<const PersonInstance> pred_persons,
                              std::span<const PersonInstance> gt_persons,
                              const LabelSpace& space,
                              const EvalOptions& options = {});

void WriteEvalJson(const std::filesystem::path& path, const EvalReport& report);

}  // namespace ce2p::metrics

#endif  // CE2P_METRICS_EVAL_H_
