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

#include "sublm/ngram.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "gtest/gtest.h"
#include "sublm/util.h"
#include "testsupport.h"

namespace sublm {
namespace ngram {
namespace {

using sublm::testing::BruteForceKn;

using Corpus = std::vector<std::vector<std::string>>;

Corpus RandomCorpus(std::mt19937_64& rng, int sentences, int vocab,
                    int max_len) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  Corpus out;
  for (int i = 0; i < sentences; ++i) {
    std::vector<std::string> s;
    int n = len(rng);
    for (int k = 0; k < n; ++k) s.push_back("w" + std::to_string(word(rng)));
    out.push_back(std::move(s));
  }
  return out;
}

double SumOverVocab(const KneserNeyModel& model,
                    const std::vector<std::string>& context) {
  double total = 0.0;
  for (const auto& token : model.vocab()) {
    total += std::exp2(model.LogProb(context, token));
  }
  return total;
}

TEST(TrainKnTest, UnigramDistributionSumsToOne) {
  auto model = TrainKneserNey({{"a", "b"}}, 1, 0.75);
  // Predicted vocabulary is {a, b, </s>}; by symmetry each gets 1/3.
  ASSERT_EQ(3u, model.vocab().size());
  EXPECT_NEAR(1.0, SumOverVocab(model, {}), 1e-12);
  EXPECT_NEAR(1.0 / 3.0, std::exp2(model.LogProb({}, "a")), 1e-12);
}

TEST(TrainKnTest, HandComputedBigram) {
  // "a a a": context (a) has counts {a: 2, </s>: 1}; with D = 0.75 the
  // interpolated values work out to exactly 0.75 and 0.25.
  auto model = TrainKneserNey({{"a", "a", "a"}}, 2, 0.75);
  std::vector<std::string> ctx{"a"};
  double p_a = std::exp2(model.LogProb(ctx, "a"));
  double p_eos = std::exp2(model.LogProb(ctx, "</s>"));
  EXPECT_NEAR(0.75, p_a, 1e-12);
  EXPECT_NEAR(0.25, p_eos, 1e-12);
  EXPECT_GT(p_a, p_eos);
}

TEST(TrainKnTest, NormalizationOverRandomContexts) {
  std::mt19937_64 rng(4242);
  for (int order : {1, 2, 3}) {
    auto corpus = RandomCorpus(rng, 30, 12, 6);
    auto model = TrainKneserNey(corpus, order, 0.75);
    std::uniform_int_distribution<int> word(0, 13);
    for (int trial = 0; trial < 120; ++trial) {
      std::vector<std::string> context;
      std::uniform_int_distribution<int> clen(0, order);
      int n = clen(rng);
      for (int k = 0; k < n; ++k) {
        context.push_back("w" + std::to_string(word(rng)));  // may be unseen
      }
      EXPECT_NEAR(1.0, SumOverVocab(model, context), 1e-8)
          << "order " << order;
    }
  }
}

TEST(TrainKnTest, MatchesBruteForceFormula) {
  Corpus corpus{{"a", "b", "a"},
                {"b", "a"},
                {"a", "a", "c"},
                {"c"},
                {"b", "a", "b", "c"}};
  for (int order : {1, 2, 3}) {
    auto model = TrainKneserNey(corpus, order, 0.75);
    BruteForceKn brute(corpus, order, 0.75);
    std::vector<std::vector<std::string>> contexts{
        {}, {"a"}, {"b"}, {"c"}, {"<s>"}, {"a", "b"}, {"b", "a"},
        {"c", "c"}, {"<s>", "a"}, {"zzz"}, {"a", "zzz"}};
    for (const auto& context : contexts) {
      for (const auto& token : model.vocab()) {
        double got = std::exp2(model.LogProb(context, token));
        double want = brute.Prob(context, token);
        EXPECT_NEAR(want, got, 1e-10)
            << "order " << order << " P(" << token << " | "
            << JoinTokens(context) << ")";
      }
    }
  }
}

TEST(TrainKnTest, DiscountValidation) {
  EXPECT_THROW(TrainKneserNey({{"a"}}, 2, 0.0), UsageError);
  EXPECT_THROW(TrainKneserNey({{"a"}}, 2, 1.0), UsageError);
  EXPECT_THROW(TrainKneserNey({{"a"}}, 0, 0.75), UsageError);
  EXPECT_THROW(TrainKneserNey({}, 2, 0.75), DataError);
}

TEST(LogProbTest, UniformUnigramOverFourTypes) {
  // Counts of a, b, c and </s> are all 1, so each of the 4 types gets 1/4
  // regardless of the discount.
  auto model = TrainKneserNey({{"a", "b", "c"}}, 1, 0.75);
  ASSERT_EQ(4u, model.vocab().size());
  for (const auto& token : model.vocab()) {
    EXPECT_NEAR(-2.0, model.LogProb({}, token), 1e-12) << token;
  }
}

TEST(LogProbTest, UnseenContextBacksOffCompletely) {
  auto model = TrainKneserNey({{"a", "b"}}, 2, 0.75);
  // </s> never occurs as a context; the walk passes through with weight 1.
  std::vector<std::string> eos_ctx{"</s>"};
  EXPECT_NEAR(model.LogProb({}, "a"), model.LogProb(eos_ctx, "a"), 1e-12);
}

TEST(LogProbTest, LongContextIsTruncated) {
  auto model = TrainKneserNey({{"a", "b", "a", "c"}}, 2, 0.75);
  std::vector<std::string> longctx{"c", "b", "x", "a"};
  std::vector<std::string> shortctx{"a"};
  EXPECT_DOUBLE_EQ(model.LogProb(shortctx, "b"),
                   model.LogProb(longctx, "b"));
}

TEST(LogProbTest, UnknownTokenFails) {
  auto model = TrainKneserNey({{"a", "b"}}, 2, 0.75);
  EXPECT_THROW(model.LogProb({}, "zzz"), DataError);
  EXPECT_THROW(model.LogProb({}, "<s>"), DataError);
}

TEST(SequenceLogProbTest, EmptySentencePredictsEos) {
  auto model = TrainKneserNey({{"a", "b"}, {}}, 2, 0.75);
  std::vector<std::string> bos_ctx{"<s>"};
  double expected = model.LogProb(bos_ctx, "</s>");
  EXPECT_NEAR(expected, model.SequenceLogProb({}), 1e-12);
}

TEST(SequenceLogProbTest, UniformCase) {
  auto model = TrainKneserNey({{"a", "b", "c"}}, 1, 0.75);
  std::vector<std::string> s{"a", "b"};
  EXPECT_NEAR(-6.0, model.SequenceLogProb(s), 1e-12);
}

TEST(SequenceLogProbTest, DecomposesIntoPositions) {
  std::mt19937_64 rng(7);
  auto corpus = RandomCorpus(rng, 20, 8, 5);
  auto model = TrainKneserNey(corpus, 3, 0.75);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& s = corpus[trial % corpus.size()];
    double direct = model.SequenceLogProb(s);
    double summed = 0.0;
    std::vector<std::string> context{"<s>", "<s>"};
    for (const auto& token : s) {
      summed += model.LogProb(context, token);
      context.push_back(token);
    }
    summed += model.LogProb(context, "</s>");
    EXPECT_NEAR(direct, summed, 1e-9);
  }
}

TEST(NgramCountsTest, AddingOccurrenceNeverLowersProbability) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    auto corpus = RandomCorpus(rng, 12, 6, 5);
    const int order = 2 + (trial % 2);
    NgramCounts counts(order);
    for (const auto& s : corpus) counts.AddSentence(s);

    // A window that may or may not be already observed.
    std::uniform_int_distribution<int> word(0, 6);
    std::vector<std::string> window;
    for (int k = 0; k < order; ++k) {
      window.push_back("w" + std::to_string(word(rng)));
    }
    std::vector<std::string> context(window.begin(), window.end() - 1);
    const std::string& token = window.back();

    auto before_model = BuildKneserNey(counts, 0.75);
    double before = 0.0;
    bool scorable = before_model.InVocab(token);
    if (scorable) before = std::exp2(before_model.LogProb(context, token));

    counts.AddWindow(window);
    auto after_model = BuildKneserNey(counts, 0.75);
    double after = std::exp2(after_model.LogProb(context, token));
    if (scorable) {
      EXPECT_GE(after, before - 1e-12)
          << JoinTokens(context) << " -> " << token;
    } else {
      EXPECT_GT(after, 0.0);
    }
  }
}

TEST(SaveLoadTest, ScoresSurviveRoundTrip) {
  std::mt19937_64 rng(31);
  auto corpus = RandomCorpus(rng, 25, 10, 6);
  auto model = TrainKneserNey(corpus, 3, 0.75);
  const std::string path = ::testing::TempDir() + "/kn.model";
  model.Save(path);
  auto loaded = KneserNeyModel::Load(path);
  EXPECT_EQ(model.order(), loaded.order());
  EXPECT_EQ(model.vocab(), loaded.vocab());
  for (const auto& s : corpus) {
    EXPECT_NEAR(model.SequenceLogProb(s), loaded.SequenceLogProb(s), 1e-12);
  }
  // Deterministic, sorted text: saving the loaded model reproduces the file.
  const std::string path2 = ::testing::TempDir() + "/kn2.model";
  loaded.Save(path2);
  EXPECT_EQ(ReadFileBytes(path), ReadFileBytes(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST(SaveLoadTest, RejectsMalformedFile) {
  const std::string path = ::testing::TempDir() + "/broken_kn.model";
  WriteLines(path, {"kn\t1", "order\tX"});
  EXPECT_THROW(KneserNeyModel::Load(path), DataError);
  WriteLines(path, {"not a model"});
  EXPECT_THROW(KneserNeyModel::Load(path), DataError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace ngram
}  // namespace sublm
