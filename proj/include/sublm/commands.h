// Copyright 2026 The sublm Authors.
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

#ifndef SUBLM_COMMANDS_H_
#define SUBLM_COMMANDS_H_

#include <string>
#include <vector>

#include "sublm/corpus.h"

namespace sublm {
namespace cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Full command-line entry point.  Exit codes: 0 success, 1 usage, 2 data
// error, 3 numerical failure.
int Run(int argc, const char* const* argv);

// OOV handling over case-transformed text: a token following <up> is judged
// by its restored (re-capitalized) form, so transformed and plain runs give
// identical OOV verdicts.  <up> itself is never out-of-vocabulary.
corpus::Sentence CaseAwareReplaceOov(const corpus::Sentence& transformed,
                                     const corpus::Vocabulary& v);
corpus::Sentence CaseAwareRemoveOov(const corpus::Sentence& transformed,
                                    const corpus::Vocabulary& v);

}  // namespace cli
}  // namespace sublm

#endif  // SUBLM_COMMANDS_H_
