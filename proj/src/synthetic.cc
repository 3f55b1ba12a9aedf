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

#include "sublm/synthetic.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sublm/subword.h"
#include "sublm/unicode.h"
#include "sublm/util.h"

namespace sublm {
namespace synthetic {
namespace {

const char* const kOnsets[] = {"b",  "c",  "ch", "cz", "d",  "dr", "g",
                               "gr", "j",  "k",  "kr", "l",  "ł",  "m",
                               "n",  "p",  "pr", "r",  "s",  "st", "sz",
                               "ś",  "t",  "tr", "w",  "z",  "ż",  "ź"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "y", "ą", "ę", "ó"};
const char* const kCodas[] = {"",  "",  "",  "c", "k", "l", "m",
                              "n", "r", "s", "t", "w", "ń", "ść"};

// Ending paradigms loosely shaped like Polish declension/conjugation.
const std::vector<std::vector<std::string>> kParadigms = {
    // noun-like
    {"", "a", "u", "owi", "em", "ie", "y", "ów", "om", "ami", "ach"},
    // adjective-like
    {"y", "a", "e", "ego", "ej", "emu", "ym", "ą", "ych", "ymi"},
    // verb-like
    {"ć", "m", "sz", "", "my", "cie", "ją", "ł", "ła", "ło", "li", "ły"},
};

const char* const kNaturalText[] = {
    "Litwo ! Ojczyzno moja ! ty jesteś jak zdrowie ;",
    "Ile cię trzeba cenić , ten tylko się dowie , kto cię stracił .",
    "Dziś piękność twą w całej ozdobie widzę i opisuję , bo tęsknię po tobie .",
    "Panno święta , co jasnej bronisz Częstochowy i w Ostrej świecisz Bramie !",
    "Tymczasem przenoś moją duszę utęsknioną do tych pagórków leśnych , do tych łąk zielonych .",
    "Śród takich pól przed laty , nad brzegiem ruczaju , na pagórku niewielkim , we brzozowym gaju , stał dwór szlachecki , z drzewa , lecz podmurowany .",
    "Ala ma kota , a kot ma Alę .",
    "Zielona żaba siedzi nad rzeką i patrzy w niebo .",
    "Wczoraj padał deszcz , więc zostaliśmy w domu i czytaliśmy książki .",
    "Dzieci biegały po podwórku , a pies szczekał przy furtce .",
    "Nauczycielka napisała zadanie na tablicy i poprosiła o ciszę .",
    "W niedzielę pojedziemy pociągiem do babci na wieś .",
    "Stare miasto nocą wygląda zupełnie inaczej niż za dnia .",
    "Kupiłem świeży chleb , masło oraz dwa litry mleka .",
    "Jesienią liście spadają z drzew i szeleszczą pod butami .",
    "Może jutro będzie cieplej i pójdziemy nad jezioro .",
};

std::string MakeStem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> syllables(1, 3);
  std::uniform_int_distribution<size_t> onset(0, std::size(kOnsets) - 1);
  std::uniform_int_distribution<size_t> vowel(0, std::size(kVowels) - 1);
  std::uniform_int_distribution<size_t> coda(0, std::size(kCodas) - 1);
  std::string stem;
  int count = syllables(rng);
  for (int i = 0; i < count; ++i) {
    stem += kOnsets[onset(rng)];
    stem += kVowels[vowel(rng)];
  }
  stem += kCodas[coda(rng)];
  return stem;
}

}  // namespace

std::vector<corpus::Sentence> GenerateInflectedCorpus(
    const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);

  std::vector<std::string> stems;
  std::vector<int> stem_paradigm;
  stems.reserve(options.stem_count);
  std::uniform_int_distribution<size_t> paradigm_pick(0,
                                                      kParadigms.size() - 1);
  for (int i = 0; i < options.stem_count; ++i) {
    stems.push_back(MakeStem(rng));
    stem_paradigm.push_back(static_cast<int>(paradigm_pick(rng)));
  }

  // Zipf weights over stems.
  std::vector<double> cumulative(stems.size());
  double acc = 0.0;
  for (size_t i = 0; i < stems.size(); ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 2), 1.07);
    cumulative[i] = acc;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick_stem = [&]() {
    double r = unit(rng) * acc;
    return static_cast<size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), r) -
        cumulative.begin());
  };

  std::uniform_int_distribution<int> sentence_len(4, 14);
  std::uniform_int_distribution<int> digit(0, 2024);
  std::vector<corpus::Sentence> out;
  std::vector<corpus::Sentence> pool;  // duplicate source
  int64_t tokens = 0;
  while (tokens < options.target_tokens) {
    if (!pool.empty() && unit(rng) < options.duplicate_fraction) {
      const corpus::Sentence& dup =
          pool[static_cast<size_t>(unit(rng) * pool.size())];
      tokens += static_cast<int64_t>(dup.tokens.size());
      out.push_back(dup);
      continue;
    }
    corpus::Sentence s;
    int len = sentence_len(rng);
    for (int i = 0; i < len; ++i) {
      double kind = unit(rng);
      if (kind < 0.03) {
        s.tokens.push_back(std::to_string(digit(rng)));
        continue;
      }
      if (kind < 0.06 && i > 0 && i + 1 < len) {
        s.tokens.push_back(",");
        continue;
      }
      size_t stem_id = pick_stem();
      const auto& paradigm = kParadigms[stem_paradigm[stem_id]];
      std::uniform_int_distribution<size_t> ending(0, paradigm.size() - 1);
      std::string word = stems[stem_id] + paradigm[ending(rng)];
      if (options.capitalize) {
        if (i == 0 && unit(rng) < 0.9) {
          word = corpus::UppercaseFirst(word);
        } else if (unit(rng) < 0.01) {
          word = corpus::UppercaseFirst(word);  // mid-sentence proper noun
        }
      }
      s.tokens.push_back(word);
    }
    double punct = unit(rng);
    s.tokens.push_back(punct < 0.8 ? "." : (punct < 0.9 ? "?" : "!"));
    tokens += static_cast<int64_t>(s.tokens.size());
    pool.push_back(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<corpus::Sentence> NaturalTextSentences() {
  std::vector<corpus::Sentence> out;
  for (const char* line : kNaturalText) {
    out.push_back(corpus::ParseSentence(line));
  }
  return out;
}

corpus::Sentence RandomUnicodeSentence(std::mt19937_64& rng, int max_tokens,
                                       int max_token_chars) {
  static const std::vector<std::pair<char32_t, char32_t>> kRanges = {
      {U'a', U'z'},    {U'A', U'Z'},    {U'0', U'9'},    {0x00E0, 0x00FE},
      {0x0104, 0x0119}, {0x0141, 0x017C}, {0x0391, 0x03C9}, {0x0410, 0x044F},
      {0x4E00, 0x4E2F}, {U'!', U'/'},
  };
  std::uniform_int_distribution<int> token_count(0, max_tokens);
  std::uniform_int_distribution<int> token_len(1, max_token_chars);
  std::uniform_int_distribution<size_t> range_pick(0, kRanges.size() - 1);

  corpus::Sentence s;
  int tokens = token_count(rng);
  for (int i = 0; i < tokens; ++i) {
    std::string token;
    do {
      token.clear();
      int len = token_len(rng);
      for (int k = 0; k < len; ++k) {
        auto [lo, hi] = kRanges[range_pick(rng)];
        std::uniform_int_distribution<uint32_t> cp(lo, hi);
        char32_t c = static_cast<char32_t>(cp(rng));
        if (c == subword::kWordMarkerCp) c = U'x';
        AppendUtf8(c, &token);
      }
    } while (subword::IsReservedTag(token));
    s.tokens.push_back(std::move(token));
  }
  return s;
}

std::vector<corpus::Sentence> RandomUnicodeSentences(int count,
                                                     uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<corpus::Sentence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(RandomUnicodeSentence(rng, 12, 10));
  }
  return out;
}

}  // namespace synthetic
}  // namespace sublm
