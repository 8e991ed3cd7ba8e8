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

#ifndef CE2P_CORE_LABEL_OPS_H_
#define CE2P_CORE_LABEL_OPS_H_

#include "ce2p/core/types.h"

namespace ce2p {

// Per-pixel class of maximum score. Ties go to the lowest class index.
ParsingMap ArgmaxLabels(const ConfidenceVolume& volume);

// Mirrors the width axis and swaps the channels of every lr pair, so that the
// result is the volume one would predict for the mirrored image. Works on
// logits and probabilities alike; the normalized flag is carried over.
ConfidenceVolume HflipVolume(const ConfidenceVolume& volume,
                             const LabelSpace& space);

// Label-level counterpart of HflipVolume. Ignore pixels stay ignore.
ParsingMap HflipLabels(const ParsingMap& map, const LabelSpace& space);

// Per-pixel softmax over channels. The result is flagged normalized.
ConfidenceVolume SoftmaxNormalize(const ConfidenceVolume& logits);

}  // namespace ce2p

#endif  // CE2P_CORE_LABEL_OPS_H_
