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

#ifndef SUBLM_CORPUS_H_
#define SUBLM_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace sublm {
namespace corpus {

inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUp = "<up>";

// One pre-tokenized sentence: word tokens, no embedded whitespace.
struct Sentence {
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

Sentence ParseSentence(std::string_view line);
std::string FormatSentence(const Sentence& s);
std::vector<Sentence> ParseCorpus(const std::vector<std::string>& lines);

using FrequencyTable = std::unordered_map<std::string, int64_t>;

// Word inventory thresholded at min_count.  Control tokens (<unk>, <s>,
// </s>) live outside the entry map; lookup is total: anything absent from
// the entries resolves to <unk>.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(FrequencyTable entries, int64_t min_count);

  bool Contains(const std::string& token) const {
    return entries_.count(token) > 0;
  }
  // Resolves to the token itself or to <unk>.
  const std::string& Normalize(const std::string& token) const;

  size_t size() const { return entries_.size(); }
  int64_t min_count() const { return min_count_; }
  const FrequencyTable& entries() const { return entries_; }

  // Lines of `token<TAB>count`, sorted by descending count then token;
  // control tokens first with count -1.
  void Save(const std::string& path) const;
  static Vocabulary Load(const std::string& path);

 private:
  FrequencyTable entries_;
  int64_t min_count_ = 1;
};

struct CorpusStats {
  int64_t sentence_count = 0;
  int64_t token_count = 0;  // word tokens; sentence markers excluded
  double oov_rate = 0.0;    // 0 for an empty corpus
};

FrequencyTable CountTokens(const std::vector<Sentence>& sentences);

// Keeps entries with count >= min_count.  Control tokens are never entries.
Vocabulary BuildVocab(const FrequencyTable& freq, int64_t min_count);

// Exact-match dedup preserving first-occurrence order.  Idempotent.
std::vector<Sentence> Deduplicate(const std::vector<Sentence>& sentences);

// Replaces each token whose initial letter is its only capital letter by the
// pair (<up>, lowercased token).  Raises DataError if <up> is already
// present, since the transform would stop being invertible.
Sentence ApplyCaseTransform(const Sentence& s);

// Exact inverse of ApplyCaseTransform.  A trailing <up> raises DataError.
Sentence InvertCaseTransform(const Sentence& s);

bool TokenWantsCaseTransform(const std::string& token);
std::string LowercaseFirst(const std::string& token);
std::string UppercaseFirst(const std::string& token);

// Maps tokens outside the vocabulary to <unk>; length preserving.
Sentence ReplaceOov(const Sentence& s, const Vocabulary& v);
std::vector<Sentence> ReplaceOov(const std::vector<Sentence>& sentences,
                                 const Vocabulary& v);

// Drops tokens outside the vocabulary (the removal convention; sentences may
// become empty).
Sentence RemoveOov(const Sentence& s, const Vocabulary& v);

struct TrainValidSplit {
  std::vector<Sentence> train;
  std::vector<Sentence> valid;
};

// The validation set is the minimal prefix of the (already shuffled) stream
// holding at least valid_target tokens at the stream's own granularity.
// valid_target above the corpus total raises DataError.
TrainValidSplit SplitTrainValid(const std::vector<Sentence>& shuffled,
                                int64_t valid_target);

// Deterministic shuffle with a seeded 64-bit generator.
void ShuffleSentences(std::vector<Sentence>* sentences, uint64_t seed);

CorpusStats ComputeCorpusStats(const std::vector<Sentence>& sentences,
                               const Vocabulary& v);

// Stats report: fields sentences, tokens, oov_rate (6 decimals).
std::string FormatStatsReport(const CorpusStats& stats);

}  // namespace corpus
}  // namespace sublm

#endif  // SUBLM_CORPUS_H_
