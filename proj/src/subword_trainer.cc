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

#include "sublm/subword_trainer.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "sublm/unicode.h"
#include "sublm/util.h"

namespace sublm {
namespace subword {
namespace {

bool IsControlTag(const std::string& token) {
  return token == corpus::kUnk || token == corpus::kBos ||
         token == corpus::kEos || token == "<pad>";
}

// Appends symbol pieces to a seeded inventory and renormalizes.  Initial
// symbol mass is proportional to corpus frequency; the first m-step makes
// everything exact.
PieceSet AddSymbols(PieceSet inventory,
                    const std::vector<std::pair<std::string, int64_t>>& symbols,
                    int64_t word_token_total) {
  if (symbols.empty()) return inventory;
  std::vector<Piece> pieces = inventory.pieces();
  double extra_mass = 0.0;
  for (const auto& [text, count] : symbols) {
    Piece p;
    p.text = text;
    p.kind = PieceKind::kSymbol;
    p.chars = static_cast<int>(Utf8Length(text));
    double prob = static_cast<double>(count) /
                  static_cast<double>(std::max<int64_t>(word_token_total, 1));
    p.log2p = std::log2(std::max(prob, 1e-12));
    extra_mass += std::exp2(p.log2p);
    pieces.push_back(std::move(p));
  }
  double renorm = std::log2(1.0 + extra_mass);
  for (auto& p : pieces) p.log2p -= renorm;
  return PieceSet(std::move(pieces));
}

}  // namespace

TrainerCorpus CollectTrainerCorpus(
    const std::vector<corpus::Sentence>& sentences) {
  TrainerCorpus out;
  std::unordered_map<std::string, int64_t> word_freq;
  std::map<std::string, int64_t> symbol_freq;
  for (const auto& s : sentences) {
    for (const auto& word : s.tokens) {
      if (IsControlTag(word)) continue;
      if (IsReservedTag(word)) {
        ++symbol_freq[word];
        continue;
      }
      if (word.find(kWordMarker) != std::string::npos) {
        throw DataError("corpus word contains the reserved marker U+2581");
      }
      ++word_freq[std::string(kWordMarker) + word];
    }
  }
  out.words.assign(word_freq.begin(), word_freq.end());
  // Deterministic order regardless of hash-map iteration.
  std::sort(out.words.begin(), out.words.end());
  out.symbols.assign(symbol_freq.begin(), symbol_freq.end());
  return out;
}

TrainUnigramResult TrainUnigram(const std::vector<corpus::Sentence>& sentences,
                                const UnigramTrainerOptions& options) {
  if (options.vocab_size < SubwordModel::kNumControl + 1) {
    throw UsageError("vocab_size must exceed the 4 control tokens");
  }
  TrainerCorpus corpus = CollectTrainerCorpus(sentences);
  if (corpus.words.empty()) throw DataError("empty corpus");

  int64_t word_tokens = 0;
  for (const auto& [text, count] : corpus.words) word_tokens += count;
  for (const auto& [text, count] : corpus.symbols) word_tokens += count;

  const int piece_target = options.vocab_size - SubwordModel::kNumControl;
  const int seed_size = options.seed_size_factor * options.vocab_size;
  PieceSet inventory = AddSymbols(
      SeedPieces(corpus.words, options.max_piece_chars, seed_size),
      corpus.symbols, word_tokens);

  int protected_count = 0;
  for (const auto& p : inventory.pieces()) {
    if (p.kind != PieceKind::kNormal) ++protected_count;
  }
  if (piece_target < protected_count) {
    throw UsageError(
        "vocab_size " + std::to_string(options.vocab_size) +
        " is below character coverage (" + std::to_string(protected_count) +
        " single-character/symbol pieces + 4 control tokens)");
  }
  if (piece_target > inventory.size()) {
    throw DataError("vocab_size " + std::to_string(options.vocab_size) +
                    " exceeds the seed inventory (" +
                    std::to_string(inventory.size() + SubwordModel::kNumControl) +
                    " available)");
  }

  auto run_estep = [&](const PieceSet& inv) {
    EStepResult r = EStep(inv, corpus.words);
    for (const auto& [text, count] : corpus.symbols) {
      int id = inv.Find(text);
      r.expected_counts[id] += static_cast<double>(count);
      r.log_likelihood += static_cast<double>(count) * inv.piece(id).log2p;
    }
    return r;
  };

  TrainUnigramResult result;
  int round = 0;
  while (true) {
    ++round;
    for (int iter = 1; iter <= options.em_iters_per_round; ++iter) {
      EStepResult e = run_estep(inventory);
      result.log.push_back({round, iter, e.log_likelihood, inventory.size()});
      inventory = MStep(inventory, e.expected_counts);
    }
    EStepResult closing = run_estep(inventory);
    result.log.push_back({round, options.em_iters_per_round + 1,
                          closing.log_likelihood, inventory.size()});
    if (inventory.size() <= piece_target) break;
    inventory = Prune(inventory, closing.expected_counts, piece_target,
                      options.shrink_factor);
  }

  // Canonical order: most probable first, text as tiebreak.
  std::vector<Piece> pieces = inventory.pieces();
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.log2p != b.log2p) return a.log2p > b.log2p;
    return a.text < b.text;
  });
  result.model = SubwordModel(PieceSet(std::move(pieces)));
  return result;
}

std::string FormatTrainLog(const std::vector<TrainLogRow>& log) {
  std::string out = "round\titer\tlog_likelihood\tpieces\n";
  for (const auto& row : log) {
    out += std::to_string(row.round) + "\t" + std::to_string(row.iter) + "\t" +
           FormatDouble(row.log_likelihood) + "\t" +
           std::to_string(row.piece_count) + "\n";
  }
  return out;
}

}  // namespace subword
}  // namespace sublm
