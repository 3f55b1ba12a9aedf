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
#include <random>

#include "gtest/gtest.h"
#include "sublm/ngram.h"
#include "sublm/subword_trainer.h"
#include "sublm/synthetic.h"
#include "sublm/util.h"
#include "testsupport.h"

namespace sublm {
namespace eval {
namespace {

using sublm::testing::FixedProbLm;
using sublm::testing::RelativeGap;

using TokenLines = std::vector<std::vector<std::string>>;

TEST(CrossEntropyTest, UniformOverFourTypes) {
  FixedProbLm lm(std::log2(0.25));
  TokenLines sentences{{"a", "b", "c"}};
  // 3 tokens + terminator, 2 bits each.
  EXPECT_NEAR(8.0, CrossEntropy(lm, sentences), 1e-12);
}

TEST(CrossEntropyTest, DeterministicModelIsZero) {
  FixedProbLm lm(0.0);
  TokenLines sentences{{"a"}, {"b", "c"}};
  EXPECT_NEAR(0.0, CrossEntropy(lm, sentences), 1e-12);
}

TEST(CrossEntropyTest, EmptySetFails) {
  FixedProbLm lm(0.0);
  EXPECT_THROW(CrossEntropy(lm, {}), DataError);
}

TEST(CrossEntropyTest, MatchesPerSentenceDecomposition) {
  std::mt19937_64 rng(7);
  TokenLines corpus;
  std::uniform_int_distribution<int> len(1, 5), word(0, 6);
  for (int i = 0; i < 5; ++i) {
    std::vector<std::string> s;
    for (int k = len(rng); k > 0; --k) s.push_back("w" + std::to_string(word(rng)));
    corpus.push_back(s);
  }
  auto model = ngram::TrainKneserNey(corpus, 2, 0.75);
  double expected = 0.0;
  for (const auto& s : corpus) expected -= model.SequenceLogProb(s);
  expected /= corpus.size();
  EXPECT_NEAR(expected, CrossEntropy(model, corpus), 1e-12);
}

TEST(PerplexityPerTokenTest, UniformGivesFour) {
  FixedProbLm lm(std::log2(0.25));
  TokenLines sentences{{"a", "b", "c"}};
  // Numerator 8 bits over denominator 4 predictions.
  EXPECT_NEAR(4.0, PerplexityPerToken(
                       lm, sentences, TokenCountPolicy::kCountEosPrediction),
              1e-12);
}

TEST(PerplexityPerTokenTest, ZeroEntropyGivesOne) {
  FixedProbLm lm(0.0);
  TokenLines sentences{{"a", "b"}};
  EXPECT_NEAR(1.0, PerplexityPerToken(
                       lm, sentences, TokenCountPolicy::kCountEosPrediction),
              1e-12);
}

TEST(PerplexityPerTokenTest, MatchesBruteRecomputation) {
  TokenLines corpus{{"a", "b"}, {"b"}, {"a", "a", "b"}};
  auto model = ngram::TrainKneserNey(corpus, 2, 0.75);
  double h = 0.0;
  double tokens = 0.0;
  for (const auto& s : corpus) {
    h -= model.SequenceLogProb(s);
    tokens += s.size() + 1;
  }
  h /= corpus.size();
  double mean = tokens / corpus.size();
  EXPECT_NEAR(std::exp2(h / mean),
              PerplexityPerToken(model, corpus,
                                 TokenCountPolicy::kCountEosPrediction),
              1e-12);
}

TEST(Eq1Test, DirectSubstitution) {
  // ppl_V = 4 with a subword/word ratio of 1.5 gives ppl_W = 8.
  EXPECT_NEAR(8.0, Eq1Convert(4.0, 3.0, 2.0), 1e-12);
  EXPECT_NEAR(4.0, Eq1Convert(4.0, 5.0, 5.0), 1e-12);
}

// Tokenizer whose pieces are exactly the marker-joined words: F is the
// identity on token counts, so the exponent in the conversion is 1.
subword::SubwordModel WholeWordTokenizer(
    const std::vector<std::string>& words) {
  std::vector<std::pair<std::string, double>> probs;
  for (const auto& w : words) {
    probs.emplace_back("\xE2\x96\x81" + w, 1.0 / words.size());
  }
  return subword::SubwordModel(subword::PieceSet::FromProbs(probs));
}

TEST(WordLevelPerplexityTest, IdentityMappingKeepsPerplexity) {
  auto tokenizer = WholeWordTokenizer({"a", "b", "c"});
  std::vector<corpus::Sentence> sentences{corpus::ParseSentence("a b"),
                                          corpus::ParseSentence("c a a")};
  TokenLines encoded;
  for (const auto& s : sentences) {
    encoded.push_back(subword::EncodeCorpus(tokenizer, {s})[0]);
  }
  auto lm = ngram::TrainKneserNey(encoded, 2, 0.75);
  auto report = WordLevelPerplexity(lm, tokenizer, sentences,
                                    TokenCountPolicy::kCountEosPrediction);
  EXPECT_EQ(report.word_tokens, report.subword_tokens);
  EXPECT_NEAR(report.ppl_subword, report.ppl_word_direct, 1e-12);
  EXPECT_NEAR(report.ppl_subword, report.ppl_word_eq1, 1e-12);
}

TEST(WordLevelPerplexityTest, DualPathsAgreeOnRandomTriples) {
  std::mt19937_64 rng(1001);
  int trials = 0;
  while (trials < 25) {
    auto sentences = synthetic::GenerateInflectedCorpus(
        {.seed = rng(), .target_tokens = 600 + static_cast<int64_t>(rng() % 400),
         .stem_count = 20 + static_cast<int>(rng() % 30)});
    subword::UnigramTrainerOptions options;
    options.vocab_size = 90 + static_cast<int>(rng() % 60);
    subword::TrainUnigramResult trained;
    try {
      trained = subword::TrainUnigram(sentences, options);
    } catch (const UsageError&) {
      continue;  // vocab below character coverage for this draw
    }
    auto encoded = subword::EncodeCorpus(trained.model, sentences);
    auto lm = ngram::TrainKneserNey(encoded, 1 + static_cast<int>(rng() % 3),
                                    0.75);
    auto report =
        WordLevelPerplexity(lm, trained.model, sentences,
                            rng() % 2 == 0
                                ? TokenCountPolicy::kCountEosPrediction
                                : TokenCountPolicy::kTokensOnly);
    EXPECT_LE(RelativeGap(report.ppl_word_direct, report.ppl_word_eq1), 1e-9);
    EXPECT_GE(report.ppl_word_direct, 1.0);
    ++trials;
  }
}

TEST(WordLevelPerplexityTest, LogBaseConsistency) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 15, .target_tokens = 500, .stem_count = 25});
  subword::UnigramTrainerOptions options;
  options.vocab_size = 110;
  auto trained = subword::TrainUnigram(sentences, options);
  auto encoded = subword::EncodeCorpus(trained.model, sentences);
  auto lm = ngram::TrainKneserNey(encoded, 2, 0.75);
  auto report = WordLevelPerplexity(lm, trained.model, sentences,
                                    TokenCountPolicy::kCountEosPrediction);
  // Natural-log route: H_nat = H * ln 2; ppl = exp(H_nat / mean).
  double nat = std::exp(report.cross_entropy_bits * std::log(2.0) /
                        report.mean_subwords);
  EXPECT_LE(RelativeGap(nat, report.ppl_subword), 1e-12);
}

TEST(WordLevelPerplexityTest, InvariantUnderReorderAndDuplication) {
  auto tokenizer = WholeWordTokenizer({"a", "b", "c", "d"});
  std::vector<corpus::Sentence> sentences{corpus::ParseSentence("a b"),
                                          corpus::ParseSentence("c d a"),
                                          corpus::ParseSentence("b")};
  TokenLines encoded;
  for (const auto& s : sentences) {
    encoded.push_back(subword::EncodeCorpus(tokenizer, {s})[0]);
  }
  auto lm = ngram::TrainKneserNey(encoded, 2, 0.75);
  auto base = WordLevelPerplexity(lm, tokenizer, sentences,
                                  TokenCountPolicy::kCountEosPrediction);

  std::vector<corpus::Sentence> reordered{sentences[2], sentences[0],
                                          sentences[1]};
  auto shuffled = WordLevelPerplexity(lm, tokenizer, reordered,
                                      TokenCountPolicy::kCountEosPrediction);
  EXPECT_NEAR(base.cross_entropy_bits, shuffled.cross_entropy_bits, 1e-12);
  EXPECT_NEAR(base.ppl_word_direct, shuffled.ppl_word_direct, 1e-12);

  std::vector<corpus::Sentence> doubled = sentences;
  doubled.insert(doubled.end(), sentences.begin(), sentences.end());
  auto dup = WordLevelPerplexity(lm, tokenizer, doubled,
                                 TokenCountPolicy::kCountEosPrediction);
  EXPECT_NEAR(base.cross_entropy_bits, dup.cross_entropy_bits, 1e-12);
  EXPECT_NEAR(base.ppl_word_direct, dup.ppl_word_direct, 1e-12);
}

TEST(OovRateTest, HandCases) {
  auto vocab = corpus::BuildVocab({{"a", 5}}, 1);
  std::vector<corpus::Sentence> sentences{corpus::ParseSentence("a zzz")};
  EXPECT_DOUBLE_EQ(0.5, OovRate(sentences, vocab));
  EXPECT_DOUBLE_EQ(1.0, OovRate(sentences, corpus::Vocabulary()));
}

TEST(OovRateTest, StableUnderReplacement) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 19, .target_tokens = 2000, .stem_count = 80});
  auto vocab = corpus::BuildVocab(corpus::CountTokens(sentences), 3);
  auto replaced = corpus::ReplaceOov(sentences, vocab);
  EXPECT_DOUBLE_EQ(OovRate(sentences, vocab), OovRate(replaced, vocab));
}

TEST(OverlapTest, DisjointAndSubset) {
  auto train = corpus::ParseCorpus({"a b", "c d"});
  auto disjoint = corpus::ParseCorpus({"x y"});
  EXPECT_DOUBLE_EQ(0.0, OverlapFraction(train, disjoint));
  auto subset = corpus::ParseCorpus({"c d", "a b", "a b"});
  EXPECT_DOUBLE_EQ(1.0, OverlapFraction(train, subset));
  EXPECT_THROW(OverlapFraction(train, {}), DataError);
}

TEST(ReportTest, TsvColumns) {
  EXPECT_EQ(
      "dataset\tsentences\tword_tokens\tsubword_tokens\tratio\txent_bits"
      "\tppl_subword\tppl_word\n",
      FormatReportTsvHeader());
  EvalReport report;
  report.sentence_count = 2;
  report.word_tokens = 10;
  report.subword_tokens = 15;
  report.ratio = 1.5;
  report.cross_entropy_bits = 16.0;
  report.ppl_subword = 4.0;
  report.ppl_word_direct = 8.0;
  auto row = FormatReportTsvRow(report, "dev");
  EXPECT_EQ("dev\t2\t10\t15\t1.500000\t16\t4\t8\n", row);
}

TEST(ReportTest, StructuredTextCarriesUnnormalizedNote) {
  EvalReport report;
  report.sentence_count = 1;
  auto text = FormatReport(report, "x");
  EXPECT_NE(text.find("unnormalized"), std::string::npos);
  EXPECT_NE(text.find("ppl_word\t"), std::string::npos);
}

TEST(NormalizeForLmTest, MapsUnknownToUnk) {
  TokenLines corpus{{"a", "<unk>", "b"}};
  auto lm = ngram::TrainKneserNey(corpus, 1, 0.75);
  auto out = NormalizeForLm({"a", "zzz"}, lm);
  EXPECT_EQ((std::vector<std::string>{"a", "<unk>"}), out);

  TokenLines no_unk{{"a", "b"}};
  auto lm2 = ngram::TrainKneserNey(no_unk, 1, 0.75);
  EXPECT_THROW(NormalizeForLm({"zzz"}, lm2), DataError);
}

}  // namespace
}  // namespace eval
}  // namespace sublm
