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

#include "ce2p/train/config.h"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ce2p/core/errors.h"

namespace ce2p::train {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& v) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw std::invalid_argument(v);
  return out;
}

bool ParseBool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(v);
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const auto* setters = new std::map<std::string, Setter>{
#define CE2P_REAL(f) \
  {#f, [](TrainConfig& c, const std::string& v) { c.f = ParseNumber<double>(v); }}
#define CE2P_INT(f, T) \
  {#f, [](TrainConfig& c, const std::string& v) { c.f = ParseNumber<T>(v); }}
#define CE2P_BOOL(f) \
  {#f, [](TrainConfig& c, const std::string& v) { c.f = ParseBool(v); }}
      CE2P_REAL(base_lr),
      CE2P_REAL(power),
      CE2P_REAL(momentum),
      CE2P_REAL(weight_decay),
      CE2P_INT(max_iter, std::int64_t),
      CE2P_INT(epochs, int),
      CE2P_INT(batch_size, int),
      CE2P_INT(input_size, int),
      CE2P_INT(seed, std::uint64_t),
      CE2P_BOOL(augment),
      CE2P_REAL(scale_min),
      CE2P_REAL(scale_max),
      CE2P_REAL(flip_probability),
      CE2P_INT(edge_thickness, int),
      CE2P_BOOL(tiny),
      CE2P_BOOL(use_context),
      CE2P_BOOL(use_highres),
      CE2P_BOOL(use_edge),
      CE2P_INT(log_every, int),
      CE2P_INT(checkpoint_every, int),
#undef CE2P_REAL
#undef CE2P_INT
#undef CE2P_BOOL
  };
  return *setters;
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(base_lr > 0.0)) throw ParameterError("base_lr must be positive");
  if (!(power > 0.0)) throw ParameterError("power must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ParameterError("momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ParameterError("weight_decay must be nonnegative");
  }
  if (max_iter < 0) throw ParameterError("max_iter must be nonnegative");
  if (max_iter == 0 && epochs < 1) {
    throw ParameterError("need max_iter >= 1 or epochs >= 1");
  }
  // Batch norm over the 1x1 pooling bin needs two samples.
  if (batch_size < 2) throw ParameterError("batch_size must be at least 2");
  if (input_size < 32) throw ParameterError("input_size must be at least 32");
  if (!(scale_min > 0.0 && scale_min <= scale_max)) {
    throw ParameterError("scale range must satisfy 0 < scale_min <= scale_max");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ParameterError("flip_probability must lie in [0, 1]");
  }
  if (edge_thickness < 1) {
    throw ParameterError("edge_thickness must be at least 1");
  }
  if (log_every < 1) throw ParameterError("log_every must be at least 1");
  if (checkpoint_every < 0) {
    throw ParameterError("checkpoint_every must be nonnegative");
  }
}

std::int64_t TrainConfig::ResolveMaxIter(std::size_t num_samples) const {
  if (max_iter > 0) return max_iter;
  const auto per_epoch = static_cast<std::int64_t>(
      (num_samples + batch_size - 1) / batch_size);
  return std::max<std::int64_t>(1, epochs * per_epoch);
}

net::NetConfig TrainConfig::MakeNetConfig(int num_classes) const {
  net::NetConfig cfg = tiny ? net::NetConfig::Tiny(num_classes)
                            : net::NetConfig();
  cfg.num_classes = num_classes;
  cfg.input_size = input_size;
  cfg.use_context = use_context;
  cfg.use_highres = use_highres;
  cfg.use_edge = use_edge;
  cfg.Validate();
  return cfg;
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"base_lr", base_lr},
          {"power", power},
          {"momentum", momentum},
          {"weight_decay", weight_decay},
          {"max_iter", max_iter},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"input_size", input_size},
          {"seed", seed},
          {"augment", augment},
          {"scale_min", scale_min},
          {"scale_max", scale_max},
          {"flip_probability", flip_probability},
          {"edge_thickness", edge_thickness},
          {"tiny", tiny},
          {"use_context", use_context},
          {"use_highres", use_highres},
          {"use_edge", use_edge},
          {"log_every", log_every},
          {"checkpoint_every", checkpoint_every}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto it = Setters().find(key);
    if (it == Setters().end()) continue;
    it->second(c, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return c;
}

TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto it = Setters().find(key);
    if (it == Setters().end()) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": unknown key '" + key + "'");
    }
    try {
      it->second(base, value);
    } catch (const std::invalid_argument&) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": bad value '" + value + "' for " + key);
    }
  }
  base.Validate();
  return base;
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path,
                            TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseTrainConfig(buf.str(), std::move(base));
}

double PolyLr(const TrainConfig& cfg, std::int64_t iter) {
  if (cfg.max_iter < 1) throw ParameterError("poly_lr needs max_iter >= 1");
  if (iter < 0) throw ParameterError("iteration must be nonnegative");
  if (iter > cfg.max_iter) {
    spdlog::warn("iteration {} is past max_iter {}; learning rate is 0", iter,
                 cfg.max_iter);
    return 0.0;
  }
  const double frac = static_cast<double>(iter) / cfg.max_iter;
  return cfg.base_lr * std::pow(1.0 - frac, cfg.power);
}

}  // namespace ce2p::train
