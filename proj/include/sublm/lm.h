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

#ifndef SUBLM_LM_H_
#define SUBLM_LM_H_

#include <span>
#include <string>

namespace sublm {

// Conditional next-token language model over a fixed finite vocabulary.
// Sequence scores include the </s> prediction, with <s> as padding context;
// <s> itself is never scored.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // log2 q(s) for one sentence (tokens without sentence markers).
  virtual double SequenceLogProb(std::span<const std::string> tokens) const = 0;

  // True when the model can score this token.
  virtual bool InVocab(const std::string& token) const = 0;
};

}  // namespace sublm

#endif  // SUBLM_LM_H_
