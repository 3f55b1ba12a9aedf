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

#ifndef SUBLM_EVAL_H_
#define SUBLM_EVAL_H_

#include <optional>
#include <string>
#include <vector>

#include "sublm/corpus.h"
#include "sublm/lm.h"
#include "sublm/subword.h"

namespace sublm {
namespace eval {

// What the per-sentence token denominator counts.  The default counts word
// tokens plus the end-of-sentence prediction, matching the numerator's
// prediction count, so that ppl == 2^H when every prediction is counted
// once.  Corpus statistics always report raw token counts separately.
enum class TokenCountPolicy {
  kCountEosPrediction,
  kTokensOnly,
};

struct EvalReport {
  int64_t sentence_count = 0;
  double cross_entropy_bits = 0.0;  // per sentence
  int64_t word_tokens = 0;          // raw counts, no sentence markers
  int64_t subword_tokens = 0;
  double mean_words = 0.0;  // per-sentence denominators under the policy
  double mean_subwords = 0.0;
  double ratio = 0.0;  // subword_tokens / word_tokens
  double ppl_subword = 0.0;
  double ppl_word_direct = 0.0;  // 2^(H / E|s|_W), scoring q_W = q_V . F
  double ppl_word_eq1 = 0.0;     // ppl_subword^(E|F(s)|_V / E|s|_W)
  std::optional<double> oov_rate;
  std::optional<double> overlap_fraction;
};

// -(1/N) sum lg q(s), in bits per sentence.
double CrossEntropy(const LanguageModel& lm,
                    const std::vector<std::vector<std::string>>& sentences);

// 2^(H / mean tokens per sentence) under the policy.
double PerplexityPerToken(const LanguageModel& lm,
                          const std::vector<std::vector<std::string>>& sentences,
                          TokenCountPolicy policy);

// Word-level perplexity conversion: ppl_subword^(mean_subwords/mean_words).
double Eq1Convert(double ppl_subword, double mean_subwords, double mean_words);

// Scores word sentences through the tokenizer with a subword LM and fills
// both word-perplexity paths.  Sentences must already be OOV-replaced
// against the word vocabulary.  Pieces the LM has never seen are scored as
// <unk>.
EvalReport WordLevelPerplexity(const LanguageModel& subword_lm,
                               const subword::SubwordModel& tokenizer,
                               const std::vector<corpus::Sentence>& sentences,
                               TokenCountPolicy policy);

// Fraction of word tokens outside the vocabulary.
double OovRate(const std::vector<corpus::Sentence>& sentences,
               const corpus::Vocabulary& v);

// Fraction of test sentences present verbatim in the training set.
double OverlapFraction(const std::vector<corpus::Sentence>& train,
                       const std::vector<corpus::Sentence>& test);

// Maps tokens outside the model vocabulary to <unk>; raises DataError when
// <unk> is itself unscorable.
std::vector<std::string> NormalizeForLm(const std::vector<std::string>& tokens,
                                        const LanguageModel& lm);

std::string FormatReport(const EvalReport& report,
                         const std::string& dataset);
std::string FormatReportTsvHeader();
std::string FormatReportTsvRow(const EvalReport& report,
                               const std::string& dataset);

}  // namespace eval
}  // namespace sublm

#endif  // SUBLM_EVAL_H_
