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

#include "ce2p/metrics/metrics.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "ce2p/core/errors.h"

namespace ce2p::metrics {
namespace {

// Indices sorted by decreasing score; equal scores keep input order.
template <typename T>
std::vector<std::size_t> ByScore(std::span<const T> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return items[a].score > items[b].score;
  });
  return order;
}

double ScoreFor(std::span<const double> scores, std::int32_t id) {
  return id >= 1 && id <= static_cast<std::int32_t>(scores.size())
             ? scores[id - 1]
             : 1.0;
}

bool IsPart(std::int32_t c, const LabelSpace& space) {
  return c != space.background_id && c != space.ignore_id;
}

double ClassIou(const Grid<std::int32_t>& a, const Grid<std::int32_t>& b,
                std::int32_t c) {
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    const bool x = a[p] == c;
    const bool y = b[p] == c;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw StructuralError("need at least one class");
}

void ConfusionMatrix::Add(const ParsingMap& gt, const ParsingMap& pred,
                          const LabelSpace& space,
                          const std::string& image_id) {
  const std::string name = image_id.empty() ? "image" : "image " + image_id;
  if (!gt.SameShape(pred)) {
    throw StructuralError(name + ": prediction is " +
                          std::to_string(pred.height()) + "x" +
                          std::to_string(pred.width()) +
                          " but ground truth is " +
                          std::to_string(gt.height()) + "x" +
                          std::to_string(gt.width()));
  }
  for (std::size_t p = 0; p < gt.size(); ++p) {
    const std::int32_t g = gt[p];
    if (g == space.ignore_id) continue;
    const std::int32_t q = pred[p];
    if (g < 0 || g >= num_classes_ || q < 0 || q >= num_classes_) {
      throw StructuralError(name + ": label outside the label space");
    }
    ++counts_[static_cast<std::size_t>(g) * num_classes_ + q];
  }
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw StructuralError("cannot merge confusion matrices of different size");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

GlobalScores ComputeGlobalScores(const ConfusionMatrix& cm) {
  const int n = cm.num_classes();
  GlobalScores s;
  s.per_class_iou.assign(n, std::nullopt);
  std::int64_t trace = 0;
  double acc_sum = 0.0;
  int acc_count = 0;
  double iou_sum = 0.0;
  int iou_count = 0;
  for (int c = 0; c < n; ++c) {
    std::int64_t row = 0;
    std::int64_t col = 0;
    for (int k = 0; k < n; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    const std::int64_t tp = cm.at(c, c);
    trace += tp;
    if (row > 0) {
      acc_sum += static_cast<double>(tp) / row;
      ++acc_count;
    }
    const std::int64_t uni = row + col - tp;
    if (uni > 0) {
      const double iou = static_cast<double>(tp) / uni;
      s.per_class_iou[c] = iou;
      iou_sum += iou;
      ++iou_count;
    }
  }
  const std::int64_t total = cm.total();
  s.pixel_acc = total > 0 ? static_cast<double>(trace) / total : 0.0;
  s.mean_acc = acc_count > 0 ? acc_sum / acc_count : 0.0;
  s.miou = iou_count > 0 ? iou_sum / iou_count : 0.0;
  return s;
}

GlobalScores ComputeGlobalScores(std::span<const ParsingMap> preds,
                                 std::span<const ParsingMap> gts,
                                 const LabelSpace& space,
                                 std::span<const std::string> ids) {
  if (preds.size() != gts.size()) {
    throw StructuralError("got " + std::to_string(preds.size()) +
                          " predictions for " + std::to_string(gts.size()) +
                          " ground-truth maps");
  }
  ConfusionMatrix cm(space.num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cm.Add(gts[i], preds[i], space,
           i < ids.size() ? ids[i] : std::to_string(i));
  }
  return ComputeGlobalScores(cm);
}

std::vector<double> RegionThresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

std::vector<double> PersonThresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 9; ++i) t.push_back((10 * i) / 100.0);
  return t;
}

double AveragePrecision(const std::vector<bool>& ranked_tp,
                        std::int64_t num_gt) {
  if (num_gt <= 0 || ranked_tp.empty()) return 0.0;
  const std::size_t n = ranked_tp.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked_tp[i];
    precision[i] = static_cast<double>(tp) / (i + 1);
    recall[i] = static_cast<double>(tp) / num_gt;
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

double MaskIou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b) {
  if (!a.SameShape(b)) throw StructuralError("masks differ in size");
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    inter += a[p] && b[p];
    uni += a[p] || b[p];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

ApResult MeanApR(std::span<const RegionInstance> preds,
                 std::span<const RegionInstance> gts,
                 std::span<const double> thresholds) {
  ApResult result;
  std::set<int> categories;
  for (const auto& g : gts) categories.insert(g.category);
  if (preds.empty() || categories.empty()) result.degenerate = true;

  // IoU of every same-image, same-category pair.
  std::map<std::pair<std::size_t, std::size_t>, double> iou;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (preds[i].category == gts[j].category &&
          preds[i].image_id == gts[j].image_id) {
        iou[{i, j}] = MaskIou(preds[i].mask, gts[j].mask);
      }
    }
  }
  const std::vector<std::size_t> order = ByScore(preds);

  for (double t : thresholds) {
    double sum = 0.0;
    for (int c : categories) {
      std::vector<bool> matched(gts.size(), false);
      std::vector<bool> ranked;
      std::int64_t num_gt = 0;
      for (const auto& g : gts) num_gt += g.category == c;
      for (std::size_t i : order) {
        if (preds[i].category != c) continue;
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t j = 0; j < gts.size(); ++j) {
          const auto it = iou.find({i, j});
          if (it == iou.end() || matched[j] || it->second < t) continue;
          if (it->second > best_iou) {
            best_iou = it->second;
            best = static_cast<int>(j);
          }
        }
        if (best >= 0) matched[best] = true;
        ranked.push_back(best >= 0);
      }
      sum += AveragePrecision(ranked, num_gt);
    }
    result.per_threshold.push_back(
        categories.empty() ? 0.0 : sum / static_cast<double>(categories.size()));
  }
  if (!result.per_threshold.empty()) {
    result.mean = std::accumulate(result.per_threshold.begin(),
                                  result.per_threshold.end(), 0.0) /
                  static_cast<double>(result.per_threshold.size());
  }
  return result;
}

std::vector<int> MatchPersons(std::span<const PersonInstance> preds,
                              std::span<const PersonInstance> gts,
                              const LabelSpace& space) {
  const auto person_mask = [&](const PersonInstance& p) {
    Grid<std::uint8_t> m(p.parts.height(), p.parts.width());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = IsPart(p.parts[k], space);
    return m;
  };
  std::vector<Grid<std::uint8_t>> gt_masks;
  for (const auto& g : gts) gt_masks.push_back(person_mask(g));

  std::vector<int> match(preds.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t i : ByScore(preds)) {
    const Grid<std::uint8_t> pm = person_mask(preds[i]);
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (taken[j] || gts[j].image_id != preds[i].image_id) continue;
      const double v = MaskIou(pm, gt_masks[j]);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      taken[best] = true;
      match[i] = best;
    }
  }
  return match;
}

std::vector<double> PartIous(const PersonInstance& pred,
                             const PersonInstance& gt,
                             const LabelSpace& space) {
  if (!pred.parts.SameShape(gt.parts)) {
    throw StructuralError("person maps of image " + gt.image_id +
                          " differ in size");
  }
  std::set<std::int32_t> classes;
  for (std::int32_t c : pred.parts.values()) {
    if (IsPart(c, space)) classes.insert(c);
  }
  for (std::int32_t c : gt.parts.values()) {
    if (IsPart(c, space)) classes.insert(c);
  }
  std::vector<double> ious;
  for (std::int32_t c : classes) ious.push_back(ClassIou(pred.parts, gt.parts, c));
  return ious;
}

PersonApResult ApP(std::span<const PersonInstance> preds,
                   std::span<const PersonInstance> gts,
                   const LabelSpace& space,
                   std::span<const double> thresholds) {
  PersonApResult result;
  result.degenerate = preds.empty() || gts.empty();
  const std::vector<int> match = MatchPersons(preds, gts, space);
  std::vector<double> mean_part_iou(preds.size(), 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (match[i] < 0) continue;
    const auto ious = PartIous(preds[i], gts[match[i]], space);
    if (!ious.empty()) {
      mean_part_iou[i] =
          std::accumulate(ious.begin(), ious.end(), 0.0) / ious.size();
    }
  }
  const std::vector<std::size_t> order = ByScore(preds);
  const auto ap_at = [&](double t) {
    std::vector<bool> ranked;
    for (std::size_t i : order) {
      ranked.push_back(match[i] >= 0 && mean_part_iou[i] >= t);
    }
    return AveragePrecision(ranked, static_cast<std::int64_t>(gts.size()));
  };
  result.ap_50 = ap_at(0.5);
  for (double t : thresholds) result.per_threshold.push_back(ap_at(t));
  if (!thresholds.empty()) {
    result.mean = std::accumulate(result.per_threshold.begin(),
                                  result.per_threshold.end(), 0.0) /
                  static_cast<double>(thresholds.size());
  }
  return result;
}

PcpResult Pcp(std::span<const PersonInstance> preds,
              std::span<const PersonInstance> gts, const LabelSpace& space,
              double threshold, std::span<const double> thresholds,
              bool count_unmatched) {
  const std::vector<int> match = MatchPersons(preds, gts, space);
  std::vector<int> pred_of(gts.size(), -1);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0) pred_of[match[i]] = static_cast<int>(i);
  }
  // Per counted gt person: IoU of each of its part classes (empty when
  // unmatched, which scores 0).
  std::vector<std::vector<double>> part_ious;
  std::vector<std::size_t> num_parts;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    std::set<std::int32_t> classes;
    for (std::int32_t c : gts[j].parts.values()) {
      if (IsPart(c, space)) classes.insert(c);
    }
    if (classes.empty()) {
      spdlog::warn("ground-truth person in image {} has no parts; skipped",
                   gts[j].image_id);
      continue;
    }
    if (pred_of[j] < 0 && !count_unmatched) continue;
    std::vector<double> ious;
    if (pred_of[j] >= 0) {
      for (std::int32_t c : classes) {
        ious.push_back(ClassIou(preds[pred_of[j]].parts, gts[j].parts, c));
      }
    }
    part_ious.push_back(std::move(ious));
    num_parts.push_back(classes.size());
  }
  const auto pcp_at = [&](double t) {
    if (part_ious.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < part_ious.size(); ++k) {
      const auto hits = std::count_if(part_ious[k].begin(), part_ious[k].end(),
                                      [t](double v) { return v >= t; });
      sum += static_cast<double>(hits) / num_parts[k];
    }
    return sum / static_cast<double>(part_ious.size());
  };
  PcpResult result;
  result.at_threshold = pcp_at(threshold);
  for (double t : thresholds) result.per_threshold.push_back(pcp_at(t));
  if (!thresholds.empty()) {
    result.mean = std::accumulate(result.per_threshold.begin(),
                                  result.per_threshold.end(), 0.0) /
                  static_cast<double>(thresholds.size());
  }
  return result;
}

std::vector<RegionInstance> RegionsOf(const InstanceParsing& ip,
                                      const std::string& image_id,
                                      const LabelSpace& space,
                                      std::span<const double> scores_by_id) {
  std::map<std::pair<std::int32_t, std::int32_t>, Grid<std::uint8_t>> regions;
  const int h = ip.class_map.height();
  const int w = ip.class_map.width();
  for (std::size_t p = 0; p < ip.class_map.size(); ++p) {
    const std::int32_t id = ip.instance_map[p];
    const std::int32_t c = ip.class_map[p];
    if (id <= 0 || !IsPart(c, space)) continue;
    auto [it, inserted] = regions.try_emplace({id, c}, h, w);
    it->second[p] = 1;
  }
  std::vector<RegionInstance> out;
  for (auto& [key, mask] : regions) {
    out.push_back({image_id, key.second, std::move(mask),
                   ScoreFor(scores_by_id, key.first)});
  }
  return out;
}

std::vector<PersonInstance> PersonsOf(const InstanceParsing& ip,
                                      const std::string& image_id,
                                      const LabelSpace& space,
                                      std::span<const double> scores_by_id) {
  std::map<std::int32_t, Grid<std::int32_t>> persons;
  const int h = ip.class_map.height();
  const int w = ip.class_map.width();
  for (std::size_t p = 0; p < ip.class_map.size(); ++p) {
    const std::int32_t id = ip.instance_map[p];
    const std::int32_t c = ip.class_map[p];
    if (id <= 0 || !IsPart(c, space)) continue;
    auto [it, inserted] = persons.try_emplace(id, h, w, space.background_id);
    it->second[p] = c;
  }
  std::vector<PersonInstance> out;
  for (auto& [id, parts] : persons) {
    out.push_back({image_id, std::move(parts), ScoreFor(scores_by_id, id)});
  }
  return out;
}

}  // namespace ce2p::metrics
