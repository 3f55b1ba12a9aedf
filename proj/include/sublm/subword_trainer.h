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

#ifndef SUBLM_SUBWORD_TRAINER_H_
#define SUBLM_SUBWORD_TRAINER_H_

#include <string>
#include <vector>

#include "sublm/subword.h"

namespace sublm {
namespace subword {

struct UnigramTrainerOptions {
  int vocab_size = 8000;  // includes the 4 control tokens
  int max_piece_chars = 8;
  int seed_size_factor = 25;  // seed budget = factor * vocab_size
  double shrink_factor = 0.75;
  int em_iters_per_round = 2;
};

struct TrainLogRow {
  int round;
  int iter;  // 1..em_iters are EM pairs; the last row closes the round
  double log_likelihood;
  int piece_count;
};

struct TrainUnigramResult {
  SubwordModel model;
  std::vector<TrainLogRow> log;
};

// Word-frequency view of a corpus.  Ordinary words carry the U+2581 marker;
// reserved tags are split out (control tokens are dropped, scored symbols
// such as <up> are kept with their frequencies).
struct TrainerCorpus {
  WeightedText words;
  std::vector<std::pair<std::string, int64_t>> symbols;
};

TrainerCorpus CollectTrainerCorpus(
    const std::vector<corpus::Sentence>& sentences);

// EM training of the piece inventory: seed, alternate e/m steps, prune by
// shrink_factor per round down to exactly vocab_size - 4 pieces.
TrainUnigramResult TrainUnigram(const std::vector<corpus::Sentence>& sentences,
                                const UnigramTrainerOptions& options);

std::string FormatTrainLog(const std::vector<TrainLogRow>& log);

}  // namespace subword
}  // namespace sublm

#endif  // SUBLM_SUBWORD_TRAINER_H_
