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

#include <algorithm>
#include <limits>
#include <random>
#include <unordered_set>

#include "sublm/unicode.h"
#include "sublm/util.h"

namespace sublm {
namespace corpus {

namespace {
const std::string kUnkString = kUnk;
}

Sentence ParseSentence(std::string_view line) {
  return Sentence{SplitTokens(line)};
}

std::string FormatSentence(const Sentence& s) { return JoinTokens(s.tokens); }

std::vector<Sentence> ParseCorpus(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(ParseSentence(line));
  return out;
}

Vocabulary::Vocabulary(FrequencyTable entries, int64_t min_count)
    : entries_(std::move(entries)), min_count_(min_count) {
  entries_.erase(kUnk);
  entries_.erase(kBos);
  entries_.erase(kEos);
}

const std::string& Vocabulary::Normalize(const std::string& token) const {
  return Contains(token) ? token : kUnkString;
}

void Vocabulary::Save(const std::string& path) const {
  std::vector<std::pair<std::string, int64_t>> rows(entries_.begin(),
                                                    entries_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> lines;
  lines.reserve(rows.size() + 3);
  for (const char* control : {kUnk, kBos, kEos}) {
    lines.push_back(std::string(control) + "\t-1");
  }
  for (const auto& [token, count] : rows) {
    lines.push_back(token + "\t" + std::to_string(count));
  }
  WriteLines(path, lines);
}

Vocabulary Vocabulary::Load(const std::string& path) {
  FrequencyTable entries;
  int64_t min_count = std::numeric_limits<int64_t>::max();
  for (const auto& line : ReadLines(path)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ": malformed vocabulary line: '" + line + "'");
    }
    std::string token = line.substr(0, tab);
    int64_t count = ParseInt(line.substr(tab + 1));
    if (count < 0) continue;  // control tokens
    entries[token] = count;
    min_count = std::min(min_count, count);
  }
  if (entries.empty()) min_count = 1;
  return Vocabulary(std::move(entries), min_count);
}

FrequencyTable CountTokens(const std::vector<Sentence>& sentences) {
  FrequencyTable freq;
  for (const auto& s : sentences) {
    for (const auto& token : s.tokens) ++freq[token];
  }
  return freq;
}

Vocabulary BuildVocab(const FrequencyTable& freq, int64_t min_count) {
  if (min_count < 1) throw UsageError("min_count must be >= 1");
  FrequencyTable entries;
  for (const auto& [token, count] : freq) {
    if (count >= min_count) entries[token] = count;
  }
  return Vocabulary(std::move(entries), min_count);
}

std::vector<Sentence> Deduplicate(const std::vector<Sentence>& sentences) {
  std::vector<Sentence> out;
  std::unordered_set<std::string> seen;
  seen.reserve(sentences.size() * 2);
  for (const auto& s : sentences) {
    if (seen.insert(FormatSentence(s)).second) out.push_back(s);
  }
  return out;
}

bool TokenWantsCaseTransform(const std::string& token) {
  std::vector<char32_t> cps;
  if (!DecodeUtf8(token, &cps) || cps.empty()) return false;
  if (!IsUppercase(cps[0])) return false;
  for (size_t i = 1; i < cps.size(); ++i) {
    if (IsCased(cps[i]) && !IsLowercase(cps[i])) return false;
  }
  return true;
}

std::string LowercaseFirst(const std::string& token) {
  std::vector<char32_t> cps;
  DecodeUtf8(token, &cps);
  if (!cps.empty()) cps[0] = ToLower(cps[0]);
  return EncodeUtf8(cps);
}

std::string UppercaseFirst(const std::string& token) {
  std::vector<char32_t> cps;
  DecodeUtf8(token, &cps);
  if (!cps.empty()) cps[0] = ToUpper(cps[0]);
  return EncodeUtf8(cps);
}

Sentence ApplyCaseTransform(const Sentence& s) {
  Sentence out;
  out.tokens.reserve(s.tokens.size());
  for (const auto& token : s.tokens) {
    if (token == kUp) {
      throw DataError("input already contains <up>; transform would not "
                      "be invertible");
    }
    if (TokenWantsCaseTransform(token)) {
      out.tokens.emplace_back(kUp);
      out.tokens.push_back(LowercaseFirst(token));
    } else {
      out.tokens.push_back(token);
    }
  }
  return out;
}

Sentence InvertCaseTransform(const Sentence& s) {
  Sentence out;
  out.tokens.reserve(s.tokens.size());
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    if (s.tokens[i] == kUp) {
      if (i + 1 >= s.tokens.size()) {
        throw DataError("trailing <up> token");
      }
      out.tokens.push_back(UppercaseFirst(s.tokens[++i]));
    } else {
      out.tokens.push_back(s.tokens[i]);
    }
  }
  return out;
}

Sentence ReplaceOov(const Sentence& s, const Vocabulary& v) {
  Sentence out;
  out.tokens.reserve(s.tokens.size());
  for (const auto& token : s.tokens) out.tokens.push_back(v.Normalize(token));
  return out;
}

std::vector<Sentence> ReplaceOov(const std::vector<Sentence>& sentences,
                                 const Vocabulary& v) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(ReplaceOov(s, v));
  return out;
}

Sentence RemoveOov(const Sentence& s, const Vocabulary& v) {
  Sentence out;
  for (const auto& token : s.tokens) {
    if (v.Contains(token)) out.tokens.push_back(token);
  }
  return out;
}

TrainValidSplit SplitTrainValid(const std::vector<Sentence>& shuffled,
                                int64_t valid_target) {
  if (valid_target < 0) throw UsageError("valid_target must be >= 0");
  TrainValidSplit split;
  int64_t collected = 0;
  size_t i = 0;
  while (i < shuffled.size() && collected < valid_target) {
    collected += static_cast<int64_t>(shuffled[i].tokens.size());
    split.valid.push_back(shuffled[i]);
    ++i;
  }
  if (collected < valid_target) {
    throw DataError("valid_target " + std::to_string(valid_target) +
                    " exceeds corpus token count " + std::to_string(collected));
  }
  split.train.assign(shuffled.begin() + i, shuffled.end());
  return split;
}

void ShuffleSentences(std::vector<Sentence>* sentences, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(sentences->begin(), sentences->end(), rng);
}

CorpusStats ComputeCorpusStats(const std::vector<Sentence>& sentences,
                               const Vocabulary& v) {
  CorpusStats stats;
  stats.sentence_count = static_cast<int64_t>(sentences.size());
  int64_t oov = 0;
  for (const auto& s : sentences) {
    stats.token_count += static_cast<int64_t>(s.tokens.size());
    for (const auto& token : s.tokens) {
      if (!v.Contains(token)) ++oov;
    }
  }
  stats.oov_rate = stats.token_count == 0
                       ? 0.0
                       : static_cast<double>(oov) /
                             static_cast<double>(stats.token_count);
  return stats;
}

std::string FormatStatsReport(const CorpusStats& stats) {
  std::string out;
  out += "sentences\t" + std::to_string(stats.sentence_count) + "\n";
  out += "tokens\t" + std::to_string(stats.token_count) + "\n";
  out += "oov_rate\t" + FormatFixed(stats.oov_rate, 6) + "\n";
  return out;
}

}  // namespace corpus
}  // namespace sublm
