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

#ifndef CE2P_DATA_SYNTH_H_
#define CE2P_DATA_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ce2p/core/types.h"
#include "ce2p/data/dataset.h"

namespace ce2p::data {

// Procedural "blob person" images in the LabelSpace::Synthetic() inventory.
// A person is a set of ellipses: hair and (when facing the camera) face, an
// upper-clothes torso, two thin arms and two legs. Left and right limbs share
// one colour, so telling them apart requires the facing cue from the head.
struct SynthOptions {
  int n = 20;
  int canvas = 64;
  int max_persons = 1;
  std::uint64_t seed = 0;
  std::string split = "train";
  int workers = 1;

  // Throws ParameterError when the canvas cannot hold max_persons.
  void Validate() const;
};

struct SynthImage {
  std::string id;
  Image image;
  ParsingMap parsing;
  Grid<std::int32_t> instance_ids;  // 0 = no person
};

std::string SynthId(int index);

// Deterministic in (options.seed, index) alone.
SynthImage GenerateSynthImage(int index, const SynthOptions& options);

// In-memory samples with edges and instance masks.
std::vector<Sample> GenerateSynthSamples(const SynthOptions& options,
                                         const EdgeOptions& edges = {});

// Writes images/, categories/, instances/ and manifest.json under `root`.
Manifest WriteSynthDataset(const std::filesystem::path& root,
                           const SynthOptions& options);

}  // namespace ce2p::data

#endif  // CE2P_DATA_SYNTH_H_
