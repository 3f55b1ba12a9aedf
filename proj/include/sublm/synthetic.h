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

#ifndef SUBLM_SYNTHETIC_H_
#define SUBLM_SYNTHETIC_H_

#include <cstdint>
#include <random>
#include <vector>

#include "sublm/corpus.h"

namespace sublm {
namespace synthetic {

// Deterministic generator of inflected-language-like text: Zipf-distributed
// stems crossed with case/person ending paradigms, sentence-initial
// capitalization, digits and punctuation tokens, and a tunable share of
// repeated sentences.
struct SyntheticOptions {
  uint64_t seed = 7;
  int64_t target_tokens = 100000;
  int stem_count = 3000;
  double duplicate_fraction = 0.05;
  bool capitalize = true;
};

std::vector<corpus::Sentence> GenerateInflectedCorpus(
    const SyntheticOptions& options);

// A small set of natural Polish sentences (public-domain verse plus plain
// prose), pre-tokenized with punctuation split off.
std::vector<corpus::Sentence> NaturalTextSentences();

// Random sentences over a mixed Unicode alphabet (Latin with diacritics,
// Greek, Cyrillic, digits, punctuation, a few CJK points); never contains
// whitespace, U+2581 or reserved tags.  Used by property tests.
corpus::Sentence RandomUnicodeSentence(std::mt19937_64& rng, int max_tokens,
                                       int max_token_chars);
std::vector<corpus::Sentence> RandomUnicodeSentences(int count, uint64_t seed);

}  // namespace synthetic
}  // namespace sublm

#endif  // SUBLM_SYNTHETIC_H_
