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
//
// Independent oracles used by the tests.  Everything here recomputes results
// from first principles (exhaustive enumeration, direct formula evaluation)
// and stays off the implementation paths it checks.

#ifndef SUBLM_TESTS_TESTSUPPORT_H_
#define SUBLM_TESTS_TESTSUPPORT_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sublm/lm.h"
#include "sublm/subword.h"
#include "sublm/unicode.h"

namespace sublm {
namespace testing {

// Every segmentation of `text` over the piece inventory, found by plain
// recursion.  `total_prob` is the linear-space sum over all segmentations;
// the best path follows the production tie order (max probability, then
// fewest tokens, then lexicographically longest piece lengths from the
// left) so exact-tie cases can assert path identity.
struct BruteSegmentations {
  double total_prob = 0.0;
  bool feasible = false;
  double best_log2p = 0.0;
  std::vector<int> best_ids;
  std::vector<int> best_lengths;
  int64_t path_count = 0;
};

inline BruteSegmentations EnumerateSegmentations(
    const subword::PieceSet& pieces, const std::string& text) {
  BruteSegmentations out;
  std::vector<char32_t> chars;
  std::vector<int> offsets;
  if (!DecodeUtf8WithOffsets(text, &chars, &offsets)) return out;
  const int n = static_cast<int>(chars.size());
  if (n == 0) {
    out.feasible = true;
    out.total_prob = 1.0;
    return out;
  }

  std::vector<int> ids, lengths;
  std::vector<double> logps;
  auto better = [&](const std::vector<int>& cand_lengths,
                    double cand_log2p) {
    if (!out.feasible) return true;
    if (cand_log2p != out.best_log2p) return cand_log2p > out.best_log2p;
    if (cand_lengths.size() != out.best_lengths.size()) {
      return cand_lengths.size() < out.best_lengths.size();
    }
    return cand_lengths > out.best_lengths;  // longer piece first wins
  };
  auto recurse = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      double log2p = 0.0;
      for (double lp : logps) log2p += lp;
      out.total_prob += std::exp2(log2p);
      ++out.path_count;
      if (better(lengths, log2p)) {
        out.feasible = true;
        out.best_log2p = log2p;
        out.best_ids = ids;
        out.best_lengths = lengths;
      }
      return;
    }
    for (int len = 1; pos + len <= n; ++len) {
      std::string_view sub(text.data() + offsets[pos],
                           offsets[pos + len] - offsets[pos]);
      int id = pieces.Find(sub);
      if (id < 0) continue;
      if (pieces.piece(id).kind == subword::PieceKind::kSymbol) continue;
      ids.push_back(id);
      lengths.push_back(len);
      logps.push_back(pieces.piece(id).log2p);
      self(self, pos + len);
      ids.pop_back();
      lengths.pop_back();
      logps.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

// Direct evaluation of interpolated Kneser-Ney from raw padded windows,
// with continuation counts recomputed per query from the type sets.  Keyed
// by token strings throughout; shares nothing with the production tables.
class BruteForceKn {
 public:
  BruteForceKn(const std::vector<std::vector<std::string>>& sentences,
               int order, double discount)
      : order_(order), discount_(discount) {
    for (const auto& s : sentences) {
      std::vector<std::string> padded;
      for (int i = 0; i < order - 1; ++i) padded.push_back("<s>");
      padded.insert(padded.end(), s.begin(), s.end());
      padded.push_back("</s>");
      for (size_t pos = order - 1; pos < padded.size(); ++pos) {
        std::vector<std::string> window(padded.begin() + pos - (order - 1),
                                        padded.begin() + pos + 1);
        ++level_counts_[order][window];
      }
    }
    for (int k = order - 1; k >= 1; --k) {
      for (const auto& [gram, count] : level_counts_[k + 1]) {
        std::vector<std::string> suffix(gram.begin() + 1, gram.end());
        ++level_counts_[k][suffix];
      }
    }
    for (const auto& [gram, count] : level_counts_[1]) {
      vocab_.push_back(gram[0]);
    }
  }

  const std::vector<std::string>& vocab() const { return vocab_; }

  double Prob(const std::vector<std::string>& context,
              const std::string& token) const {
    std::vector<std::string> ctx = context;
    if (static_cast<int>(ctx.size()) > order_ - 1) {
      ctx.assign(context.end() - (order_ - 1), context.end());
    }
    return ProbLevel(static_cast<int>(ctx.size()) + 1, ctx, token);
  }

 private:
  double ProbLevel(int level, const std::vector<std::string>& context,
                   const std::string& token) const {
    if (level == 0) return 1.0 / static_cast<double>(vocab_.size());
    std::vector<std::string> shorter(
        context.begin() + (context.empty() ? 0 : 1), context.end());
    auto table_it = level_counts_.find(level);
    if (table_it == level_counts_.end()) {
      return ProbLevel(level - 1, shorter, token);
    }
    double a = 0.0, total = 0.0, types = 0.0;
    for (const auto& [gram, count] : table_it->second) {
      if (static_cast<int>(gram.size()) != level) continue;
      bool match = true;
      for (size_t i = 0; i < context.size(); ++i) {
        if (gram[i] != context[i]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      total += static_cast<double>(count);
      types += 1.0;
      if (gram.back() == token) a = static_cast<double>(count);
    }
    if (total == 0.0) return ProbLevel(level - 1, shorter, token);
    double lower = level == 1 ? 1.0 / static_cast<double>(vocab_.size())
                              : ProbLevel(level - 1, shorter, token);
    return std::max(a - discount_, 0.0) / total +
           discount_ * types / total * lower;
  }

  int order_;
  double discount_;
  std::map<int, std::map<std::vector<std::string>, int64_t>> level_counts_;
  std::vector<std::string> vocab_;
};

// Language model assigning one fixed log-probability to every prediction;
// handy for exact cross-entropy arithmetic.
class FixedProbLm : public LanguageModel {
 public:
  explicit FixedProbLm(double log2p_per_prediction)
      : log2p_(log2p_per_prediction) {}

  double SequenceLogProb(std::span<const std::string> tokens) const override {
    return log2p_ * static_cast<double>(tokens.size() + 1);
  }
  bool InVocab(const std::string&) const override { return true; }

 private:
  double log2p_;
};

inline double RelativeGap(double a, double b) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
  return std::fabs(a - b) / scale;
}

}  // namespace testing
}  // namespace sublm

#endif  // SUBLM_TESTS_TESTSUPPORT_H_
