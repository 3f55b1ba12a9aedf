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

#ifndef SUBLM_SUBWORD_H_
#define SUBLM_SUBWORD_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sublm/corpus.h"

namespace sublm {
namespace subword {

// Word-initial marker (U+2581), prefixed to every word of a sentence before
// segmentation.  Pieces may contain it only as their first character, which
// is what makes decoding context-free.
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";
inline constexpr char32_t kWordMarkerCp = 0x2581;

// Reserved tag strings.  Words equal to one of these are always encoded as
// a single piece and never segmented; this keeps decoding reversible even
// when tags occur verbatim in a corpus.
bool IsReservedTag(std::string_view token);

enum class PieceKind { kNormal, kChar, kSymbol };

struct Piece {
  std::string text;
  double log2p = 0.0;
  PieceKind kind = PieceKind::kNormal;
  int chars = 0;  // code points in text
};

// A scored piece inventory over which strings are segmented.  Control tokens
// are not part of the inventory; they belong to SubwordModel.
class PieceSet {
 public:
  PieceSet() = default;
  explicit PieceSet(std::vector<Piece> pieces);

  // Convenience constructor for tests and small models: probabilities given
  // directly (linear space).
  static PieceSet FromProbs(
      const std::vector<std::pair<std::string, double>>& probs);

  int size() const { return static_cast<int>(pieces_.size()); }
  const Piece& piece(int id) const { return pieces_[id]; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  int Find(std::string_view text) const;
  int max_piece_chars() const { return max_piece_chars_; }

  void SetLogProbs(const std::vector<double>& log2p);

  // Sum over pieces of 2^log2p; 1 within 1e-9 for any trained inventory.
  double TotalProbability() const;

 private:
  struct TransparentHash {
    using is_transparent = void;
    size_t operator()(std::string_view sv) const {
      return std::hash<std::string_view>{}(sv);
    }
  };

  std::vector<Piece> pieces_;
  std::unordered_map<std::string, int, TransparentHash, std::equal_to<>>
      index_;
  int max_piece_chars_ = 0;
};

using WeightedText = std::vector<std::pair<std::string, int64_t>>;

// Segmentation lattice for one string: nodes are code-point boundaries,
// edges every inventory piece matching the covered substring.
struct Lattice {
  struct Edge {
    int start;
    int end;
    int piece_id;
  };

  int num_positions = 0;  // code points + 1
  std::vector<char32_t> chars;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> edges_from;  // by start position
  std::vector<std::vector<int>> edges_to;    // by end position

  // Builds the lattice; raises DataError naming the first character with no
  // covering piece (coverage violation).
  static Lattice Build(const PieceSet& pieces, std::string_view text,
                       int exclude_piece = -1);
};

// Forward sum: log2 of the total probability of all segmentations.
double LatticeLogProb(const PieceSet& pieces, std::string_view text);

struct EStepResult {
  std::vector<double> expected_counts;  // per piece id
  double log_likelihood = 0.0;          // base 2, weighted over the corpus
};

// Forward-backward expected piece counts and corpus log-likelihood.
EStepResult EStep(const PieceSet& pieces, const WeightedText& corpus);

// Maximum-likelihood renormalization: log2(count / total).  Zero counts are
// floored at 1e-12 of the total so the inventory keeps its size; an all-zero
// count vector raises NumericalError.
PieceSet MStep(const PieceSet& pieces, const std::vector<double>& counts);

struct Segmentation {
  std::vector<int> piece_ids;
  double log2p = 0.0;
};

// Viterbi best segmentation.  Ties break deterministically: fewer tokens,
// then leftmost-longest piece.
Segmentation ViterbiSegment(const PieceSet& pieces, std::string_view text,
                            int exclude_piece = -1);

// Candidate inventory: all single characters plus substrings of length
// <= max_piece_len ranked by count * length.  The count >= 2 filter applies
// only when candidates exceed the seed budget.
PieceSet SeedPieces(const WeightedText& corpus, int max_piece_len,
                    int seed_size);

// Drops the lowest-value unprotected pieces until max(target_size,
// floor(size * shrink)) remain, then renormalizes.  Single-character and
// symbol pieces are never pruned.  Value is the estimated likelihood loss
// count * (log2p - log2p of the best alternative segmentation).
PieceSet Prune(const PieceSet& pieces, const std::vector<double>& counts,
               int target_size, double shrink);

struct Encoding {
  std::vector<int> piece_ids;
  int64_t source_word_count = 0;
};

struct DecodeResult {
  corpus::Sentence sentence;
  bool started_midword = false;
};

// Trained subword tokenizer: 4 control tokens (<unk>, <s>, </s>, <pad>)
// followed by the scored piece inventory.  Implements the sentence <->
// subword mapping, which is injective: Decode(EncodeBest(s)) == s.
class SubwordModel {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kPadId = 3;
  static constexpr int kNumControl = 4;

  SubwordModel() = default;
  explicit SubwordModel(PieceSet inventory);

  // Total entries including the 4 control tokens.
  int size() const { return kNumControl + inventory_.size(); }
  const PieceSet& inventory() const { return inventory_; }

  const std::string& TokenString(int id) const;
  // -1 when the string is neither a control token nor a piece.
  int TokenId(const std::string& text) const;

  Encoding EncodeBest(const corpus::Sentence& s) const;
  std::vector<std::string> EncodeBestStrings(const corpus::Sentence& s) const;

  DecodeResult Decode(std::span<const int> ids) const;
  DecodeResult DecodeStrings(std::span<const std::string> pieces) const;

  void Save(const std::string& path) const;
  static SubwordModel Load(const std::string& path);

 private:
  PieceSet inventory_;
  std::vector<std::string> control_;
};

// Encodes a whole corpus to piece strings, memoizing per distinct word.
std::vector<std::vector<std::string>> EncodeCorpus(
    const SubwordModel& model, const std::vector<corpus::Sentence>& sentences);

// Total subword tokens / total word tokens; raises DataError on an empty
// corpus.
double TokensPerWordRatio(const SubwordModel& model,
                          const std::vector<corpus::Sentence>& sentences);

}  // namespace subword
}  // namespace sublm

#endif  // SUBLM_SUBWORD_H_
