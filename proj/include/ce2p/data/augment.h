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

#ifndef CE2P_DATA_AUGMENT_H_
#define CE2P_DATA_AUGMENT_H_

#include <array>
#include <cstdint>

#include "ce2p/core/types.h"
#include "ce2p/data/dataset.h"
#include "ce2p/data/edges.h"

namespace ce2p::data {

struct AugmentOptions {
  int input_size = 473;
  double scale_min = 0.5;
  double scale_max = 1.5;
  double flip_probability = 0.5;
  // Fill for padded image pixels, normally the dataset mean.
  std::array<double, 3> pad_value = {0.5, 0.5, 0.5};
  EdgeOptions edges;
};

// Random scale, pad to at least input_size, random crop to input_size x
// input_size and random horizontal flip (swapping left/right ids). Images are
// resized bilinearly, labels and instance masks by nearest neighbour. Edge
// labels are recomputed from the final parsing. Deterministic in `seed`.
Sample Augment(const Sample& sample, std::uint64_t seed,
               const LabelSpace& space, const AugmentOptions& options = {});

// Pads (bottom/right) and center-crops to side x side without rescaling.
// Used to batch evaluation images of differing sizes.
Sample FitToSize(const Sample& sample, int side, const LabelSpace& space,
                 const std::array<double, 3>& pad_value,
                 const EdgeOptions& edges = {});

}  // namespace ce2p::data

#endif  // CE2P_DATA_AUGMENT_H_
