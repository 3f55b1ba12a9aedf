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

#ifndef SUBLM_NGRAM_H_
#define SUBLM_NGRAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sublm/lm.h"

namespace sublm {
namespace ngram {

// Raw full-order n-gram windows with <s> padding and a final </s> target.
// Lower-order statistics are derived from these at build time, so adding a
// single (context, token) occurrence is a first-class operation.
class NgramCounts {
 public:
  explicit NgramCounts(int order);

  void AddSentence(std::span<const std::string> tokens);
  // One full-order window: order-1 context tokens followed by the target.
  void AddWindow(std::span<const std::string> window);

  int order() const { return order_; }
  int64_t total_windows() const { return total_windows_; }

  const std::vector<std::string>& id_to_token() const { return id_to_token_; }
  const std::unordered_map<std::u32string, int64_t>& windows() const {
    return windows_;
  }
  int TokenId(const std::string& token) const;  // -1 when never seen

 private:
  int Intern(const std::string& token);

  int order_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  std::unordered_map<std::u32string, int64_t> windows_;
  int64_t total_windows_ = 0;
};

// Interpolated Kneser-Ney with a fixed absolute discount: raw counts at the
// highest order, continuation counts below, uniform base over the predicted
// vocabulary.  Every seen context's distribution sums to 1.
class KneserNeyModel : public LanguageModel {
 public:
  KneserNeyModel() = default;

  int order() const { return order_; }
  double discount() const { return discount_; }
  // Predicted vocabulary: every token with at least one occurrence as a
  // prediction target, </s> included, <s> excluded.
  const std::vector<std::string>& vocab() const { return vocab_; }
  bool InVocab(const std::string& token) const override;

  // log2 P(token | context).  Longer contexts use only the last order-1
  // tokens.  Unknown target tokens raise DataError.
  double LogProb(std::span<const std::string> context,
                 const std::string& token) const;

  double SequenceLogProb(std::span<const std::string> tokens) const override;

  // Sorted text rows `order<TAB>context<TAB>token<TAB>logprob<TAB>backoff`.
  void Save(const std::string& path) const;
  static KneserNeyModel Load(const std::string& path);

 private:
  friend KneserNeyModel BuildKneserNey(const NgramCounts&, double);

  struct ContextEntry {
    std::vector<std::pair<int, double>> probs;  // token id -> P, sorted by id
    double backoff = 1.0;
  };

  double ProbIds(std::span<const int> context, int token) const;
  int MapContextToken(const std::string& token) const;

  int order_ = 0;
  double discount_ = 0.75;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> vocab_;
  std::vector<bool> predictable_;  // by token id
  // contexts_[k-1]: level-k context tables keyed by id strings of length k-1.
  std::vector<std::unordered_map<std::u32string, ContextEntry>> contexts_;
};

KneserNeyModel BuildKneserNey(const NgramCounts& counts, double discount);

KneserNeyModel TrainKneserNey(
    const std::vector<std::vector<std::string>>& sentences, int order,
    double discount);

}  // namespace ngram
}  // namespace sublm

#endif  // SUBLM_NGRAM_H_
