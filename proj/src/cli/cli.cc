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

#include "ce2p/cli/cli.h"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ce2p/core/errors.h"
#include "ce2p/core/label_ops.h"
#include "ce2p/data/dataset.h"
#include "ce2p/data/edges.h"
#include "ce2p/data/synth.h"
#include "ce2p/metrics/eval.h"
#include "ce2p/mhp/mhp.h"
#include "ce2p/train/checkpoint.h"
#include "ce2p/train/config.h"
#include "ce2p/train/infer.h"
#include "ce2p/train/trainer.h"

namespace ce2p::cli {
namespace fs = std::filesystem;
namespace {

struct Flags {
  std::string data;
  std::string out;
  std::string config;
  std::string checkpoint;
  std::string local_checkpoint;
  std::string truth_checkpoint;
  std::string detections;
  std::string pred;
  std::string gt;
  std::string thresholds;
  bool flip = false;
  bool tiny = false;
  bool no_refine = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  // synth-data
  int n = 20;
  int canvas = 64;
  int max_persons = 1;
  std::string split = "train";
  // gen-edges
  int thickness = 1;
  int connectivity = 4;
  // train
  std::int64_t iters = 0;
  int epochs = 0;
};

// Runs fn(i) for i in [0, n) on `workers` threads with disjoint strides.
template <typename Fn>
void ParallelFor(int n, int workers, Fn fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void Require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw ParameterError(std::string("missing required flag ") + flag);
  }
}

std::vector<double> ParseThresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size() || !(t > 0.0 && t <= 1.0)) throw 0;
      out.push_back(t);
    } catch (...) {
      throw ParameterError("bad threshold '" + item +
                           "'; expected numbers in (0, 1]");
    }
  }
  if (out.empty()) throw ParameterError("--thresholds lists no values");
  return out;
}

train::PixelStats StatsOf(const data::DatasetReader& reader) {
  train::PixelStats stats;
  if (reader.manifest()) {
    stats.mean = reader.manifest()->pixel_mean;
    stats.std = reader.manifest()->pixel_std;
  }
  return stats;
}

int SynthData(const Flags& f, std::ostream& out) {
  Require(f.out, "--out");
  data::SynthOptions o;
  o.n = f.n;
  o.canvas = f.canvas;
  o.max_persons = f.max_persons;
  o.seed = f.seed;
  o.split = f.split;
  o.workers = f.workers;
  const data::Manifest m = data::WriteSynthDataset(f.out, o);
  out << "wrote " << m.ids.size() << " images to " << f.out << "\n";
  return kExitOk;
}

int GenEdges(const Flags& f, std::ostream& out) {
  Require(f.data, "--data");
  if (f.connectivity != 4 && f.connectivity != 8) {
    throw ParameterError("--connectivity must be 4 or 8");
  }
  data::EdgeOptions opts;
  opts.thickness = f.thickness;
  opts.connectivity = f.connectivity == 4 ? data::Connectivity::kFour
                                          : data::Connectivity::kEight;
  const fs::path root = f.data;
  const fs::path dst = f.out.empty() ? root / "edges" : fs::path(f.out);
  const fs::path categories = root / "categories";
  if (!fs::is_directory(categories)) {
    throw DataError("no categories/ directory under " + root.string());
  }
  int ignore_id = kIgnoreId;
  if (fs::exists(root / "manifest.json")) {
    ignore_id = data::ReadManifest(root / "manifest.json").label_space.ignore_id;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(categories)) {
    if (e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(dst);
  ParallelFor(static_cast<int>(files.size()), f.workers, [&](int i) {
    const ParsingMap p = data::ReadLabelPng(files[i]);
    data::WriteLabelPng(dst / files[i].filename(),
                        data::GenerateEdgeLabels(p, opts, ignore_id));
  });
  out << "wrote " << files.size() << " edge maps to " << dst.string() << "\n";
  return kExitOk;
}

int Train(const Flags& f, std::ostream& out) {
  Require(f.data, "--data");
  Require(f.out, "--out");
  train::TrainConfig cfg;
  if (f.tiny) {
    cfg.tiny = true;
    cfg.input_size = net::NetConfig::Tiny(1).input_size;
  }
  if (!f.config.empty()) cfg = train::LoadTrainConfig(f.config, cfg);
  if (f.seed_set) cfg.seed = f.seed;
  if (f.iters > 0) cfg.max_iter = f.iters;
  if (f.epochs > 0) {
    cfg.epochs = f.epochs;
    cfg.max_iter = 0;
  }
  cfg.Validate();

  data::DatasetSpec spec;
  spec.root = f.data;
  spec.edges.thickness = cfg.edge_thickness;
  const data::DatasetReader reader(spec);
  const std::vector<data::Sample> samples =
      data::LoadDataset(spec, f.workers);
  if (samples.empty()) throw DataError("no training images in " + f.data);

  train::Trainer trainer(cfg, reader.label_space(), StatsOf(reader));
  if (!f.checkpoint.empty()) {
    trainer.Resume(train::ReadCheckpoint(f.checkpoint));
  }
  const fs::path dir = f.out;
  fs::create_directories(dir);
  // A resumed run appends to the existing log.
  std::ofstream log(dir / "train_log.jsonl",
                    f.checkpoint.empty() ? std::ios::trunc : std::ios::app);
  train::TrainOptions opts;
  opts.log = &log;
  opts.checkpoint = dir / "model.ckpt";
  trainer.Train(samples, opts);
  out << "trained " << trainer.model().config().VariantName() << " for "
      << trainer.iteration() << " iterations; checkpoint "
      << opts.checkpoint.string() << "\n";
  return kExitOk;
}

int Parse(const Flags& f, std::ostream& out) {
  Require(f.data, "--data");
  Require(f.checkpoint, "--checkpoint");
  Require(f.out, "--out");
  const train::LoadedModel m = train::LoadModel(f.checkpoint);
  data::DatasetSpec spec;
  spec.root = f.data;
  spec.label_space = m.meta.label_space;
  const data::DatasetReader reader(spec);
  const train::PixelStats stats{m.meta.pixel_mean, m.meta.pixel_std};
  const fs::path dir = fs::path(f.out) / "results";
  fs::create_directories(dir);
  ParallelFor(static_cast<int>(reader.size()), f.workers, [&](int i) {
    const data::Sample s = reader.Load(i);
    const ConfidenceVolume v =
        train::Infer(*m.model, s.image, f.flip, m.meta.label_space, stats);
    data::WriteLabelPng(dir / (s.id + "_class.png"), ArgmaxLabels(v));
  });
  out << "parsed " << reader.size() << " images into " << dir.string() << "\n";
  return kExitOk;
}

int MhpParse(const Flags& f, std::ostream& out) {
  Require(f.data, "--data");
  Require(f.checkpoint, "--checkpoint");
  Require(f.out, "--out");
  Require(f.detections, "--detections");
  const train::LoadedModel global = train::LoadModel(f.checkpoint);
  const train::LoadedModel local1 = train::LoadModel(
      f.local_checkpoint.empty() ? f.checkpoint : f.local_checkpoint);
  const train::LoadedModel local2 = train::LoadModel(
      f.truth_checkpoint.empty() ? f.checkpoint : f.truth_checkpoint);
  const LabelSpace& space = global.meta.label_space;
  const auto stats = [](const train::LoadedModel& m) {
    return train::PixelStats{m.meta.pixel_mean, m.meta.pixel_std};
  };
  mhp::BranchParsers parsers{
      mhp::ModelParser(*global.model, space, stats(global), f.flip),
      mhp::ModelParser(*local1.model, space, stats(local1), f.flip),
      mhp::ModelParser(*local2.model, space, stats(local2), f.flip)};
  mhp::PipelineOptions opts;
  opts.branches.input_size = local1.model->config().input_size;
  opts.refine = !f.no_refine;

  const bool use_truth = f.detections == "gt";
  data::DatasetSpec spec;
  spec.root = f.data;
  spec.label_space = space;
  spec.has_instances = use_truth;
  const data::DatasetReader reader(spec);
  const fs::path dir = fs::path(f.out) / "results";
  fs::create_directories(dir);
  ParallelFor(static_cast<int>(reader.size()), f.workers, [&](int i) {
    const data::Sample s = reader.Load(i);
    mhp::DetectionSet dets;
    if (use_truth) {
      if (!s.instances) {
        throw DataError("--detections gt needs instances/" + s.id + ".png");
      }
      dets = mhp::DetectionSet::GroundTruth(*s.instances);
    } else {
      const fs::path p = fs::path(f.detections) / (s.id + ".json");
      if (fs::exists(p)) {
        dets = mhp::DetectionSet::Predicted(data::ReadDetections(p));
      } else {
        spdlog::warn("no detections for {}; using the global branch only",
                     s.id);
      }
    }
    mhp::WriteResult(dir, s.id,
                     mhp::ParseInstances(s.image, dets, parsers, space, opts));
  });
  out << "parsed " << reader.size() << " images into " << dir.string() << "\n";
  return kExitOk;
}

int Eval(const Flags& f, std::ostream& out) {
  const std::string pred = !f.pred.empty() ? f.pred : f.out;
  const std::string gt = !f.gt.empty() ? f.gt : f.data;
  Require(pred, "--pred");
  Require(gt, "--gt");
  metrics::EvalOptions opts;
  if (!f.thresholds.empty()) {
    opts.region_thresholds = ParseThresholds(f.thresholds);
  }
  const metrics::EvalReport report = metrics::Evaluate(pred, gt, opts);
  const fs::path dst = !f.out.empty() && !f.pred.empty()
                           ? fs::path(f.out)
                           : fs::path(pred) / "eval.json";
  metrics::WriteEvalJson(dst, report);
  out << "pixel_acc " << report.global.pixel_acc << "  mean_acc "
      << report.global.mean_acc << "  miou " << report.global.miou << "\n";
  if (report.instance) {
    out << "mean_ap_r " << report.instance->ap_r.mean << "  ap_p_50 "
        << report.instance->ap_p.ap_50 << "  pcp "
        << report.instance->pcp.at_threshold << "\n";
  }
  out << "wrote " << dst.string() << "\n";
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"CE2P human parsing toolkit", "ce2p"};
  app.require_subcommand(1, 1);
  Flags f;

  const auto add_common = [&f](CLI::App* c) {
    c->add_option("--seed", f.seed, "random seed")
        ->each([&f](const std::string&) { f.seed_set = true; });
    c->add_option("--workers", f.workers, "parallel data workers")
        ->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth-data", "write a synthetic dataset");
  synth->add_option("--out", f.out, "dataset root to create")->required();
  synth->add_option("--n", f.n, "number of images")->check(CLI::NonNegativeNumber);
  synth->add_option("--canvas", f.canvas, "image side in pixels");
  synth->add_option("--max-persons", f.max_persons, "persons per image");
  synth->add_option("--split", f.split, "split name in the manifest");
  add_common(synth);

  auto* edges = app.add_subcommand("gen-edges", "write edge labels");
  edges->add_option("--data", f.data, "dataset root")->required();
  edges->add_option("--out", f.out, "output directory (default <data>/edges)");
  edges->add_option("--thickness", f.thickness, "edge thickness in pixels");
  edges->add_option("--connectivity", f.connectivity, "4 or 8");
  add_common(edges);

  auto* train = app.add_subcommand("train", "train a parsing network");
  train->add_option("--data", f.data, "training dataset root")->required();
  train->add_option("--out", f.out, "run directory")->required();
  train->add_option("--config", f.config, "key = value config file");
  train->add_option("--checkpoint", f.checkpoint, "checkpoint to resume from");
  train->add_flag("--tiny", f.tiny, "use the tiny network profile");
  train->add_option("--iters", f.iters, "override max_iter");
  train->add_option("--epochs", f.epochs, "override epochs");
  add_common(train);

  auto* parse = app.add_subcommand("parse", "single-person parsing");
  parse->add_option("--data", f.data, "dataset root")->required();
  parse->add_option("--checkpoint", f.checkpoint, "trained model")->required();
  parse->add_option("--out", f.out, "output directory")->required();
  parse->add_flag("--flip", f.flip, "fuse with the mirrored image");
  add_common(parse);

  auto* mhp_parse =
      app.add_subcommand("mhp-parse", "multi-person instance parsing");
  mhp_parse->add_option("--data", f.data, "dataset root")->required();
  mhp_parse->add_option("--checkpoint", f.checkpoint, "global-branch model")
      ->required();
  mhp_parse->add_option("--local-checkpoint", f.local_checkpoint,
                        "model for crops of predicted persons");
  mhp_parse->add_option("--gt-local-checkpoint", f.truth_checkpoint,
                        "model trained on ground-truth person crops");
  mhp_parse->add_option("--detections", f.detections,
                        "directory of <id>.json detections, or 'gt'")
      ->required();
  mhp_parse->add_option("--out", f.out, "output directory")->required();
  mhp_parse->add_flag("--flip", f.flip, "fuse with mirrored images");
  mhp_parse->add_flag("--no-refine", f.no_refine, "skip label refinement");
  add_common(mhp_parse);

  auto* eval = app.add_subcommand("eval", "score predictions");
  eval->add_option("--pred", f.pred, "prediction directory");
  eval->add_option("--gt", f.gt, "ground-truth dataset root");
  eval->add_option("--data", f.data, "alias of --gt");
  eval->add_option("--out", f.out, "eval.json path (default <pred>/eval.json)");
  eval->add_option("--thresholds", f.thresholds,
                   "comma-separated AP^r IoU thresholds");
  add_common(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUserError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "synth-data") return SynthData(f, out);
    if (command == "gen-edges") return GenEdges(f, out);
    if (command == "train") return Train(f, out);
    if (command == "parse") return Parse(f, out);
    if (command == "mhp-parse") return MhpParse(f, out);
    return Eval(f, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error in '" << command << "': " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace ce2p::cli
