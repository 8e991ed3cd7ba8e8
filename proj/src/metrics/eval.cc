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

#include "ce2p/metrics/eval.h"

#include <cstdio>
#include <fstream>

#include "ce2p/core/errors.h"
#include "ce2p/data/dataset.h"
#include "ce2p/mhp/mhp.h"

namespace ce2p::metrics {
namespace fs = std::filesystem;
namespace {

std::string Key(double t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  return buf;
}

nlohmann::json Table(const std::vector<double>& thresholds,
                     const std::vector<double>& values) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < thresholds.size() && i < values.size(); ++i) {
    j[Key(thresholds[i])] = values[i];
  }
  return j;
}

}  // namespace

InstanceScores ScoreInstances(std::span<const RegionInstance> pred_regions,
                              std::span<const RegionInstance> gt_regions,
                              std::span<const PersonInstance> pred_persons,
                              std::span<const PersonInstance> gt_persons,
                              const LabelSpace& space,
                              const EvalOptions& options) {
  InstanceScores s;
  s.ap_r = MeanApR(pred_regions, gt_regions, options.region_thresholds);
  s.ap_p = ApP(pred_persons, gt_persons, space, options.person_thresholds);
  s.pcp = Pcp(pred_persons, gt_persons, space, options.pcp_threshold,
              options.person_thresholds, options.pcp_count_unmatched);
  return s;
}

EvalReport Evaluate(const fs::path& pred_dir, const fs::path& gt_root,
                    const EvalOptions& options) {
  data::DatasetSpec spec;
  spec.root = gt_root;
  const data::DatasetReader reader(spec);
  const fs::path dir =
      fs::is_directory(pred_dir / "results") ? pred_dir / "results" : pred_dir;

  EvalReport report;
  report.space = reader.label_space();
  report.options = options;
  ConfusionMatrix cm(report.space.num_classes);
  std::vector<RegionInstance> pred_regions, gt_regions;
  std::vector<PersonInstance> pred_persons, gt_persons;
  bool instances = true;

  for (const std::string& id : reader.ids()) {
    const fs::path class_png = dir / (id + "_class.png");
    if (!fs::exists(class_png)) {
      throw DataError("no prediction " + class_png.string() + " for " + id);
    }
    const ParsingMap gt = data::ReadLabelPng(gt_root / "categories" /
                                             (id + ".png"));
    const fs::path gt_inst = gt_root / "instances" / (id + ".png");
    const fs::path pred_inst = dir / (id + "_instance.png");
    if (!fs::exists(gt_inst) || !fs::exists(pred_inst)) {
      instances = false;
      cm.Add(gt, data::ReadLabelPng(class_png), report.space, id);
      ++report.num_images;
      continue;
    }
    const mhp::MhpResult pred = mhp::ReadResult(dir, id);
    cm.Add(gt, pred.parsing.class_map, report.space, id);
    ++report.num_images;
    if (!instances) continue;

    const InstanceParsing truth{gt, data::ReadLabelPng(gt_inst)};
    if (!truth.instance_map.SameShape(gt)) {
      throw StructuralError("instance map of " + id + " differs in size");
    }
    std::vector<double> scores;
    for (const mhp::PersonRecord& p : pred.persons) {
      if (p.id >= 1) {
        if (static_cast<int>(scores.size()) < p.id) scores.resize(p.id, 1.0);
        scores[p.id - 1] = p.score;
      }
    }
    // Ignore pixels of the ground truth do not count against predictions.
    InstanceParsing masked = pred.parsing;
    for (std::size_t p = 0; p < gt.size(); ++p) {
      if (gt[p] == report.space.ignore_id) masked.instance_map[p] = 0;
    }
    for (auto& r : RegionsOf(masked, id, report.space, scores)) {
      pred_regions.push_back(std::move(r));
    }
    for (auto& r : RegionsOf(truth, id, report.space)) {
      gt_regions.push_back(std::move(r));
    }
    for (auto& p : PersonsOf(masked, id, report.space, scores)) {
      pred_persons.push_back(std::move(p));
    }
    for (auto& p : PersonsOf(truth, id, report.space)) {
      gt_persons.push_back(std::move(p));
    }
  }
  report.global = ComputeGlobalScores(cm);
  if (instances && report.num_images > 0) {
    report.instance = ScoreInstances(pred_regions, gt_regions, pred_persons,
                                     gt_persons, report.space, options);
  }
  return report;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < global.per_class_iou.size(); ++c) {
    const std::string name =
        c < space.names.size() ? space.names[c] : std::to_string(c);
    per_class[name] = global.per_class_iou[c]
                          ? nlohmann::json(*global.per_class_iou[c])
                          : nlohmann::json(nullptr);
  }
  nlohmann::json j = {{"num_images", num_images},
                      {"pixel_acc", global.pixel_acc},
                      {"mean_acc", global.mean_acc},
                      {"miou", global.miou},
                      {"per_class_iou", per_class}};
  if (instance) {
    j["instance"] = {
        {"mean_ap_r", instance->ap_r.mean},
        {"ap_r", Table(options.region_thresholds, instance->ap_r.per_threshold)},
        {"ap_r_degenerate", instance->ap_r.degenerate},
        {"ap_p_50", instance->ap_p.ap_50},
        {"mean_ap_p", instance->ap_p.mean},
        {"ap_p", Table(options.person_thresholds, instance->ap_p.per_threshold)},
        {"ap_p_degenerate", instance->ap_p.degenerate},
        {"pcp_threshold", options.pcp_threshold},
        {"pcp_count_unmatched", options.pcp_count_unmatched},
        {"pcp", instance->pcp.at_threshold},
        {"mean_pcp", instance->pcp.mean},
        {"pcp_table",
         Table(options.person_thresholds, instance->pcp.per_threshold)}};
  } else {
    j["instance"] = nullptr;
  }
  return j;
}

void WriteEvalJson(const fs::path& path, const EvalReport& report) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << report.ToJson().dump(2) << "\n";
}

}  // namespace ce2p::metrics
