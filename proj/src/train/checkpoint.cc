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

#include "ce2p/train/checkpoint.h"

#include <cstring>
#include <fstream>

#include "ce2p/core/errors.h"
#include "ce2p/data/dataset.h"

namespace ce2p::train {
namespace fs = std::filesystem;
namespace {

constexpr char kMagic[8] = {'C', 'E', '2', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void WritePod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in, const fs::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated checkpoint " + path.string());
  return v;
}

nlohmann::json Shape(const net::Tensor& t) {
  return {t.n(), t.c(), t.h(), t.w()};
}

}  // namespace

void SaveCheckpoint(const fs::path& path, const net::Ce2pNet& model,
                    const CheckpointMeta& meta) {
  nlohmann::json index = nlohmann::json::array();
  std::vector<const net::Tensor*> blobs;
  std::uint64_t offset = 0;
  auto add = [&](const std::string& name, const std::string& kind,
                 const net::Tensor& t) {
    index.push_back({{"name", name},
                     {"kind", kind},
                     {"shape", Shape(t)},
                     {"offset", offset}});
    blobs.push_back(&t);
    offset += t.size() * sizeof(double);
  };
  for (const net::Param* p : model.Params()) {
    add(p->name, "value", p->value);
    if (p->trainable && !p->momentum.empty()) {
      add(p->name, "momentum", p->momentum);
    }
  }
  nlohmann::json header = {
      {"net", model.config().ToJson()},
      {"iteration", meta.iteration},
      {"label_space", data::LabelSpaceToJson(meta.label_space)},
      {"pixel_mean", meta.pixel_mean},
      {"pixel_std", meta.pixel_std},
      {"train_config", meta.train_config},
      {"tensors", index}};
  const std::string text = header.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    WritePod<std::uint32_t>(out, kVersion);
    WritePod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const net::Tensor* t : blobs) {
      out.write(reinterpret_cast<const char*>(t->data()),
                static_cast<std::streamsize>(t->size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint ReadCheckpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a checkpoint");
  }
  const auto version = ReadPod<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " +
                    std::to_string(version) + " in " + path.string());
  }
  const auto header_len = ReadPod<std::uint64_t>(in, path);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("truncated checkpoint " + path.string());

  Checkpoint ckpt;
  try {
    const nlohmann::json header = nlohmann::json::parse(text);
    ckpt.config = net::NetConfig::FromJson(header.at("net"));
    ckpt.meta.iteration = header.at("iteration");
    ckpt.meta.label_space = data::LabelSpaceFromJson(header.at("label_space"));
    ckpt.meta.pixel_mean = header.at("pixel_mean");
    ckpt.meta.pixel_std = header.at("pixel_std");
    ckpt.meta.train_config = header.value("train_config",
                                          nlohmann::json::object());
    const auto data_start = in.tellg();
    for (const auto& e : header.at("tensors")) {
      const auto& s = e.at("shape");
      net::Tensor t(s.at(0), s.at(1), s.at(2), s.at(3));
      in.seekg(data_start +
               static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
      in.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
      if (!in) throw DataError("truncated checkpoint " + path.string());
      auto& dst = e.at("kind") == "momentum" ? ckpt.momenta : ckpt.values;
      dst[e.at("name").get<std::string>()] = std::move(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint header in " + path.string() + ": " +
                    e.what());
  }
  return ckpt;
}

void RestoreCheckpoint(const Checkpoint& ckpt, net::Ce2pNet& model) {
  for (net::Param* p : model.Params()) {
    const auto it = ckpt.values.find(p->name);
    if (it == ckpt.values.end()) {
      throw StructuralError("checkpoint lacks parameter " + p->name);
    }
    if (!it->second.SameShape(p->value)) {
      throw StructuralError("parameter " + p->name + " has shape " +
                            it->second.ShapeString() + " in the checkpoint but " +
                            p->value.ShapeString() + " in the model");
    }
    p->value = it->second;
    const auto m = ckpt.momenta.find(p->name);
    if (m != ckpt.momenta.end() && m->second.SameShape(p->value)) {
      p->momentum = m->second;
    }
  }
}

LoadedModel LoadModel(const fs::path& path) {
  const Checkpoint ckpt = ReadCheckpoint(path);
  LoadedModel out;
  out.model = std::make_unique<net::Ce2pNet>(ckpt.config);
  RestoreCheckpoint(ckpt, *out.model);
  out.meta = ckpt.meta;
  return out;
}

}  // namespace ce2p::train
