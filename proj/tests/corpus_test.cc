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

#include "sublm/corpus.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "sublm/synthetic.h"
#include "sublm/unicode.h"
#include "sublm/util.h"

namespace sublm {
namespace corpus {
namespace {

std::vector<Sentence> MakeCorpus(const std::vector<std::string>& lines) {
  return ParseCorpus(lines);
}

TEST(CountTokensTest, HandCount) {
  auto freq = CountTokens(MakeCorpus({"a b a", "b c"}));
  EXPECT_EQ(3u, freq.size());
  EXPECT_EQ(2, freq["a"]);
  EXPECT_EQ(2, freq["b"]);
  EXPECT_EQ(1, freq["c"]);
}

TEST(CountTokensTest, EmptyCorpus) {
  EXPECT_TRUE(CountTokens({}).empty());
}

TEST(CountTokensTest, TotalMatchesTokenCount) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 11, .target_tokens = 2000, .stem_count = 100});
  auto freq = CountTokens(sentences);
  int64_t total = 0;
  for (const auto& [token, count] : freq) total += count;
  int64_t expected = 0;
  for (const auto& s : sentences) expected += s.tokens.size();
  EXPECT_EQ(expected, total);
}

TEST(ReadLinesTest, MalformedUtf8NamesLine) {
  const std::string path = ::testing::TempDir() + "/bad_utf8.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "dobra linia\n" << "zla \xC3 linia\n";
  }
  try {
    ReadLines(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  std::remove(path.c_str());
}

TEST(BuildVocabTest, Threshold) {
  FrequencyTable freq{{"a", 5}, {"b", 2}, {"c", 1}};
  auto vocab = BuildVocab(freq, 3);
  EXPECT_EQ(1u, vocab.size());
  EXPECT_TRUE(vocab.Contains("a"));
  EXPECT_FALSE(vocab.Contains("b"));
}

TEST(BuildVocabTest, EmptyTable) {
  EXPECT_EQ(0u, BuildVocab({}, 3).size());
}

TEST(BuildVocabTest, ControlTokensNeverEntries) {
  FrequencyTable freq{{"a", 5}, {"<unk>", 9}, {"<s>", 9}, {"</s>", 9}};
  auto vocab = BuildVocab(freq, 1);
  EXPECT_EQ(1u, vocab.size());
  EXPECT_FALSE(vocab.Contains("<unk>"));
  EXPECT_EQ("<unk>", vocab.Normalize("<s>"));
}

TEST(BuildVocabTest, BadMinCount) {
  EXPECT_THROW(BuildVocab({}, 0), UsageError);
}

TEST(VocabularyTest, SaveLoadRoundTrip) {
  const std::string path = ::testing::TempDir() + "/vocab.tsv";
  auto vocab = BuildVocab({{"kot", 7}, {"pies", 7}, {"dom", 3}}, 3);
  vocab.Save(path);
  auto lines = ReadLines(path);
  ASSERT_EQ(6u, lines.size());
  EXPECT_EQ("<unk>\t-1", lines[0]);
  EXPECT_EQ("<s>\t-1", lines[1]);
  EXPECT_EQ("</s>\t-1", lines[2]);
  // Descending count, then lexicographic.
  EXPECT_EQ("kot\t7", lines[3]);
  EXPECT_EQ("pies\t7", lines[4]);
  EXPECT_EQ("dom\t3", lines[5]);
  auto loaded = Vocabulary::Load(path);
  EXPECT_EQ(vocab.entries(), loaded.entries());
  std::remove(path.c_str());
}

TEST(DeduplicateTest, KeepsFirstOccurrence) {
  auto out = Deduplicate(MakeCorpus({"a b", "a b", "c"}));
  ASSERT_EQ(2u, out.size());
  EXPECT_EQ("a b", FormatSentence(out[0]));
  EXPECT_EQ("c", FormatSentence(out[1]));
}

TEST(DeduplicateTest, AllDistinctIsIdentity) {
  auto in = MakeCorpus({"a", "b", "c d"});
  EXPECT_EQ(in, Deduplicate(in));
}

TEST(DeduplicateTest, Idempotent) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 3,
       .target_tokens = 1500,
       .stem_count = 40,
       .duplicate_fraction = 0.4});
  auto once = Deduplicate(sentences);
  EXPECT_LT(once.size(), sentences.size());
  EXPECT_EQ(once, Deduplicate(once));
}

TEST(CaseTransformTest, PaperExample) {
  auto out = ApplyCaseTransform(ParseSentence("Bezbarwne zielone"));
  EXPECT_EQ("<up> bezbarwne zielone", FormatSentence(out));
}

TEST(CaseTransformTest, NoCapitals) {
  EXPECT_EQ("abc", FormatSentence(ApplyCaseTransform(ParseSentence("abc"))));
}

TEST(CaseTransformTest, MultiCapitalExcluded) {
  // Only words whose initial letter is their only capital are transformed.
  EXPECT_EQ("ABC", FormatSentence(ApplyCaseTransform(ParseSentence("ABC"))));
  EXPECT_EQ("McDonald",
            FormatSentence(ApplyCaseTransform(ParseSentence("McDonald"))));
}

TEST(CaseTransformTest, DigitsAndPunctuationInsideToken) {
  EXPECT_EQ("<up> b2b",
            FormatSentence(ApplyCaseTransform(ParseSentence("B2b"))));
  EXPECT_EQ("<up> ąć-ę",
            FormatSentence(ApplyCaseTransform(ParseSentence("Ąć-ę"))));
}

TEST(CaseTransformTest, SingleLetter) {
  EXPECT_EQ("<up> w", FormatSentence(ApplyCaseTransform(ParseSentence("W"))));
}

TEST(CaseTransformTest, RejectsExistingUpToken) {
  EXPECT_THROW(ApplyCaseTransform(ParseSentence("<up> x")), DataError);
}

TEST(CaseTransformTest, InvertPaperExample) {
  auto out = InvertCaseTransform(ParseSentence("<up> bezbarwne"));
  EXPECT_EQ("Bezbarwne", FormatSentence(out));
}

TEST(CaseTransformTest, InvertIdentityWithoutMarkers) {
  EXPECT_EQ("abc", FormatSentence(InvertCaseTransform(ParseSentence("abc"))));
}

TEST(CaseTransformTest, TrailingUpIsMalformed) {
  EXPECT_THROW(InvertCaseTransform(ParseSentence("abc <up>")), DataError);
}

TEST(CaseTransformTest, RoundTripOnRandomUnicode) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    auto s = synthetic::RandomUnicodeSentence(rng, 8, 6);
    EXPECT_EQ(s, InvertCaseTransform(ApplyCaseTransform(s)))
        << FormatSentence(s);
  }
}

TEST(ReplaceOovTest, HandExample) {
  auto vocab = BuildVocab({{"a", 3}, {"b", 3}}, 1);
  EXPECT_EQ("a b <unk>",
            FormatSentence(ReplaceOov(ParseSentence("a b zzz"), vocab)));
}

TEST(ReplaceOovTest, AllKnownUnchanged) {
  auto vocab = BuildVocab({{"a", 3}, {"b", 3}}, 1);
  EXPECT_EQ("b a", FormatSentence(ReplaceOov(ParseSentence("b a"), vocab)));
}

TEST(ReplaceOovTest, IdempotentAndClosed) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 5, .target_tokens = 3000, .stem_count = 120});
  auto vocab = BuildVocab(CountTokens(sentences), 3);
  auto once = ReplaceOov(sentences, vocab);
  EXPECT_EQ(once, ReplaceOov(once, vocab));
  // Output alphabet is entries plus <unk>.
  for (const auto& s : once) {
    for (const auto& t : s.tokens) {
      EXPECT_TRUE(t == kUnk || vocab.Contains(t)) << t;
    }
  }
  // Substituting <unk> keeps the OOV rate observable.
  EXPECT_DOUBLE_EQ(ComputeCorpusStats(sentences, vocab).oov_rate,
                   ComputeCorpusStats(once, vocab).oov_rate);
}

TEST(RemoveOovTest, DropsTokens) {
  auto vocab = BuildVocab({{"a", 3}}, 1);
  EXPECT_EQ("a", FormatSentence(RemoveOov(ParseSentence("a b zzz"), vocab)));
}

TEST(SplitTrainValidTest, MinimalPrefix) {
  std::vector<Sentence> sentences(10, ParseSentence("s1 s2 s3 s4 s5"));
  auto split = SplitTrainValid(sentences, 12);
  EXPECT_EQ(3u, split.valid.size());
  EXPECT_EQ(7u, split.train.size());
}

TEST(SplitTrainValidTest, ZeroTarget) {
  std::vector<Sentence> sentences(3, ParseSentence("a b"));
  auto split = SplitTrainValid(sentences, 0);
  EXPECT_TRUE(split.valid.empty());
  EXPECT_EQ(3u, split.train.size());
}

TEST(SplitTrainValidTest, TargetBeyondCorpus) {
  std::vector<Sentence> sentences(2, ParseSentence("a b"));
  EXPECT_THROW(SplitTrainValid(sentences, 100), DataError);
}

TEST(SplitTrainValidTest, SeededShuffleIsDeterministic) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 9, .target_tokens = 800, .stem_count = 50});
  auto a = sentences;
  auto b = sentences;
  ShuffleSentences(&a, 42);
  ShuffleSentences(&b, 42);
  EXPECT_EQ(a, b);
  auto c = sentences;
  ShuffleSentences(&c, 43);
  EXPECT_NE(a, c);
  EXPECT_EQ(SplitTrainValid(a, 100).valid, SplitTrainValid(b, 100).valid);
}

TEST(CorpusStatsTest, HandCount) {
  auto vocab = BuildVocab({{"a", 3}, {"b", 3}}, 1);
  auto stats = ComputeCorpusStats(MakeCorpus({"a b", "a zzz"}), vocab);
  EXPECT_EQ(2, stats.sentence_count);
  EXPECT_EQ(4, stats.token_count);
  EXPECT_DOUBLE_EQ(0.25, stats.oov_rate);
}

TEST(CorpusStatsTest, EmptyCorpus) {
  auto stats = ComputeCorpusStats({}, Vocabulary());
  EXPECT_EQ(0, stats.sentence_count);
  EXPECT_EQ(0, stats.token_count);
  EXPECT_DOUBLE_EQ(0.0, stats.oov_rate);
}

TEST(CorpusStatsTest, TokenCountIsSumOfLengths) {
  auto sentences = synthetic::GenerateInflectedCorpus(
      {.seed = 21, .target_tokens = 1000, .stem_count = 60});
  auto stats = ComputeCorpusStats(sentences, Vocabulary());
  int64_t expected = 0;
  for (const auto& s : sentences) expected += s.tokens.size();
  EXPECT_EQ(expected, stats.token_count);
  EXPECT_GE(stats.oov_rate, 0.0);
  EXPECT_LE(stats.oov_rate, 1.0);
}

TEST(StatsReportTest, Format) {
  CorpusStats stats{2600000, 50200000, 0.0091};
  EXPECT_EQ("sentences\t2600000\ntokens\t50200000\noov_rate\t0.009100\n",
            FormatStatsReport(stats));
}

}  // namespace
}  // namespace corpus
}  // namespace sublm
