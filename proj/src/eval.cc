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

#include "sublm/eval.h"

#include <cmath>
#include <unordered_set>

#include "sublm/util.h"

namespace sublm {
namespace eval {
namespace {

const std::string kUnkString = corpus::kUnk;

}  // namespace

double CrossEntropy(const LanguageModel& lm,
                    const std::vector<std::vector<std::string>>& sentences) {
  if (sentences.empty()) throw DataError("empty evaluation set");
  double total = 0.0;
  for (const auto& s : sentences) {
    total += lm.SequenceLogProb(s);
  }
  return -total / static_cast<double>(sentences.size());
}

double PerplexityPerToken(
    const LanguageModel& lm,
    const std::vector<std::vector<std::string>>& sentences,
    TokenCountPolicy policy) {
  const double h = CrossEntropy(lm, sentences);
  int64_t tokens = 0;
  for (const auto& s : sentences) tokens += static_cast<int64_t>(s.size());
  if (policy == TokenCountPolicy::kCountEosPrediction) {
    tokens += static_cast<int64_t>(sentences.size());
  }
  if (tokens == 0) throw DataError("zero token denominator");
  const double mean = static_cast<double>(tokens) /
                      static_cast<double>(sentences.size());
  return std::exp2(h / mean);
}

double Eq1Convert(double ppl_subword, double mean_subwords,
                  double mean_words) {
  if (mean_words <= 0.0) throw DataError("zero token denominator");
  return std::pow(ppl_subword, mean_subwords / mean_words);
}

std::vector<std::string> NormalizeForLm(const std::vector<std::string>& tokens,
                                        const LanguageModel& lm) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (lm.InVocab(t)) {
      out.push_back(t);
    } else {
      if (!lm.InVocab(kUnkString)) {
        throw DataError("token '" + t +
                        "' is outside the model vocabulary and the model "
                        "has no <unk>");
      }
      out.push_back(kUnkString);
    }
  }
  return out;
}

EvalReport WordLevelPerplexity(const LanguageModel& subword_lm,
                               const subword::SubwordModel& tokenizer,
                               const std::vector<corpus::Sentence>& sentences,
                               TokenCountPolicy policy) {
  if (sentences.empty()) throw DataError("empty evaluation set");
  EvalReport report;
  report.sentence_count = static_cast<int64_t>(sentences.size());

  auto encoded = subword::EncodeCorpus(tokenizer, sentences);
  double log_prob_sum = 0.0;
  for (size_t i = 0; i < sentences.size(); ++i) {
    report.word_tokens += static_cast<int64_t>(sentences[i].tokens.size());
    report.subword_tokens += static_cast<int64_t>(encoded[i].size());
    log_prob_sum +=
        subword_lm.SequenceLogProb(NormalizeForLm(encoded[i], subword_lm));
  }
  const double n = static_cast<double>(report.sentence_count);
  report.cross_entropy_bits = -log_prob_sum / n;

  const double eos = policy == TokenCountPolicy::kCountEosPrediction ? 1.0
                                                                     : 0.0;
  report.mean_words = static_cast<double>(report.word_tokens) / n + eos;
  report.mean_subwords =
      static_cast<double>(report.subword_tokens) / n + eos;
  if (report.mean_words <= 0.0 || report.mean_subwords <= 0.0) {
    throw DataError("zero token denominator");
  }
  report.ratio = report.word_tokens == 0
                     ? 0.0
                     : static_cast<double>(report.subword_tokens) /
                           static_cast<double>(report.word_tokens);

  report.ppl_subword =
      std::exp2(report.cross_entropy_bits / report.mean_subwords);
  report.ppl_word_direct =
      std::exp2(report.cross_entropy_bits / report.mean_words);
  report.ppl_word_eq1 =
      Eq1Convert(report.ppl_subword, report.mean_subwords, report.mean_words);
  return report;
}

double OovRate(const std::vector<corpus::Sentence>& sentences,
               const corpus::Vocabulary& v) {
  return corpus::ComputeCorpusStats(sentences, v).oov_rate;
}

double OverlapFraction(const std::vector<corpus::Sentence>& train,
                       const std::vector<corpus::Sentence>& test) {
  if (test.empty()) throw DataError("empty test set");
  std::unordered_set<std::string> seen;
  seen.reserve(train.size() * 2);
  for (const auto& s : train) seen.insert(corpus::FormatSentence(s));
  int64_t hits = 0;
  for (const auto& s : test) {
    if (seen.count(corpus::FormatSentence(s))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

std::string FormatReport(const EvalReport& report, const std::string& dataset) {
  std::string out;
  out += "dataset\t" + dataset + "\n";
  out += "sentences\t" + std::to_string(report.sentence_count) + "\n";
  out += "word_tokens\t" + std::to_string(report.word_tokens) + "\n";
  out += "subword_tokens\t" + std::to_string(report.subword_tokens) + "\n";
  out += "ratio\t" + FormatFixed(report.ratio, 6) + "\n";
  out += "xent_bits\t" + FormatDouble(report.cross_entropy_bits) + "\n";
  out += "ppl_subword\t" + FormatDouble(report.ppl_subword) + "\n";
  out += "ppl_word\t" + FormatDouble(report.ppl_word_direct) + "\n";
  out += "ppl_word_eq1\t" + FormatDouble(report.ppl_word_eq1) + "\n";
  if (report.oov_rate) {
    out += "oov_rate\t" + FormatFixed(*report.oov_rate, 6) + "\n";
  }
  if (report.overlap_fraction) {
    out += "overlap\t" + FormatFixed(*report.overlap_fraction, 6) + "\n";
  }
  out += "note\tword-level scores treat q_W as an unnormalized bound; "
         "the normalization constant is not computed\n";
  return out;
}

std::string FormatReportTsvHeader() {
  return "dataset\tsentences\tword_tokens\tsubword_tokens\tratio\txent_bits"
         "\tppl_subword\tppl_word\n";
}

std::string FormatReportTsvRow(const EvalReport& report,
                               const std::string& dataset) {
  return dataset + "\t" + std::to_string(report.sentence_count) + "\t" +
         std::to_string(report.word_tokens) + "\t" +
         std::to_string(report.subword_tokens) + "\t" +
         FormatFixed(report.ratio, 6) + "\t" +
         FormatDouble(report.cross_entropy_bits) + "\t" +
         FormatDouble(report.ppl_subword) + "\t" +
         FormatDouble(report.ppl_word_direct) + "\n";
}

}  // namespace eval
}  // namespace sublm
