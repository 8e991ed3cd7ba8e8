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

#ifndef CE2P_CLI_CLI_H_
#define CE2P_CLI_CLI_H_

#include <ostream>

namespace ce2p::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Runs one of synth-data, gen-edges, train, parse, mhp-parse or eval.
// Returns 0 on success, 1 on a user error (bad flags, missing or malformed
// inputs) and 2 on an internal failure.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace ce2p::cli

#endif  // CE2P_CLI_CLI_H_
