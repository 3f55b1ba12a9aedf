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

#include "sublm/subword.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sublm/unicode.h"
#include "sublm/util.h"

namespace sublm {
namespace subword {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log2(2^x + 2^y) without overflow.
double LogAdd2(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  double vmax = std::max(x, y);
  double vmin = std::min(x, y);
  if (vmax > vmin + 60.0) return vmax;
  return vmax + std::log1p(std::exp2(vmin - vmax)) / M_LN2;
}

int CountChars(std::string_view text) {
  return static_cast<int>(Utf8Length(text));
}

PieceKind ClassifyPiece(const std::string& text, int chars) {
  if (IsReservedTag(text)) return PieceKind::kSymbol;
  if (chars == 1) return PieceKind::kChar;
  return PieceKind::kNormal;
}

}  // namespace

bool IsReservedTag(std::string_view token) {
  return token == corpus::kUnk || token == corpus::kBos ||
         token == corpus::kEos || token == "<pad>" || token == corpus::kUp;
}

PieceSet::PieceSet(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  index_.reserve(pieces_.size() * 2);
  for (int id = 0; id < size(); ++id) {
    Piece& p = pieces_[id];
    if (p.text.empty()) throw DataError("empty piece in inventory");
    if (p.chars == 0) p.chars = CountChars(p.text);
    if (!index_.emplace(p.text, id).second) {
      throw DataError("duplicate piece: '" + p.text + "'");
    }
    if (p.kind != PieceKind::kSymbol) {
      max_piece_chars_ = std::max(max_piece_chars_, p.chars);
    }
  }
}

PieceSet PieceSet::FromProbs(
    const std::vector<std::pair<std::string, double>>& probs) {
  std::vector<Piece> pieces;
  pieces.reserve(probs.size());
  for (const auto& [text, prob] : probs) {
    Piece p;
    p.text = text;
    p.log2p = std::log2(prob);
    p.chars = CountChars(text);
    p.kind = ClassifyPiece(text, p.chars);
    pieces.push_back(std::move(p));
  }
  return PieceSet(std::move(pieces));
}

int PieceSet::Find(std::string_view text) const {
  auto it = index_.find(text);
  return it == index_.end() ? -1 : it->second;
}

void PieceSet::SetLogProbs(const std::vector<double>& log2p) {
  if (log2p.size() != pieces_.size()) {
    throw NumericalError("log-prob vector size mismatch");
  }
  for (size_t i = 0; i < pieces_.size(); ++i) pieces_[i].log2p = log2p[i];
}

double PieceSet::TotalProbability() const {
  double total = 0.0;
  for (const auto& p : pieces_) total += std::exp2(p.log2p);
  return total;
}

Lattice Lattice::Build(const PieceSet& pieces, std::string_view text,
                       int exclude_piece) {
  Lattice lattice;
  std::vector<int> offsets;
  if (!DecodeUtf8WithOffsets(text, &lattice.chars, &offsets)) {
    throw DataError("malformed UTF-8 in lattice input");
  }
  const int n = static_cast<int>(lattice.chars.size());
  lattice.num_positions = n + 1;
  lattice.edges_from.resize(n + 1);
  lattice.edges_to.resize(n + 1);

  const int max_len = pieces.max_piece_chars();
  for (int start = 0; start < n; ++start) {
    for (int len = 1; len <= max_len && start + len <= n; ++len) {
      std::string_view sub = text.substr(
          offsets[start], offsets[start + len] - offsets[start]);
      int id = pieces.Find(sub);
      if (id < 0 || id == exclude_piece) continue;
      // Symbol pieces match whole words only, never inside a lattice.
      if (pieces.piece(id).kind == PieceKind::kSymbol) continue;
      int edge_id = static_cast<int>(lattice.edges.size());
      lattice.edges.push_back({start, start + len, id});
      lattice.edges_from[start].push_back(edge_id);
      lattice.edges_to[start + len].push_back(edge_id);
    }
  }
  // A reachable position with no outgoing edge is a dead end; with none of
  // those, every path can be extended to the end of the string.
  std::vector<bool> reachable(n + 1, false);
  reachable[0] = true;
  for (int pos = 0; pos < n; ++pos) {
    if (!reachable[pos]) continue;
    if (lattice.edges_from[pos].empty()) {
      std::string ch;
      AppendUtf8(lattice.chars[pos], &ch);
      throw DataError("no piece covers character '" + ch +
                      "' (coverage violation)");
    }
    for (int e : lattice.edges_from[pos]) {
      reachable[lattice.edges[e].end] = true;
    }
  }
  return lattice;
}

double LatticeLogProb(const PieceSet& pieces, std::string_view text) {
  if (text.empty()) return 0.0;
  Lattice lattice = Lattice::Build(pieces, text);
  const int n = lattice.num_positions - 1;
  std::vector<double> alpha(n + 1, kNegInf);
  alpha[0] = 0.0;
  for (int pos = 1; pos <= n; ++pos) {
    for (int e : lattice.edges_to[pos]) {
      const auto& edge = lattice.edges[e];
      alpha[pos] = LogAdd2(alpha[pos],
                           alpha[edge.start] + pieces.piece(edge.piece_id).log2p);
    }
  }
  return alpha[n];
}

EStepResult EStep(const PieceSet& pieces, const WeightedText& corpus) {
  EStepResult result;
  result.expected_counts.assign(pieces.size(), 0.0);
  for (const auto& [text, weight] : corpus) {
    if (text.empty() || weight == 0) continue;
    Lattice lattice = Lattice::Build(pieces, text);
    const int n = lattice.num_positions - 1;
    std::vector<double> alpha(n + 1, kNegInf), beta(n + 1, kNegInf);
    alpha[0] = 0.0;
    for (int pos = 1; pos <= n; ++pos) {
      for (int e : lattice.edges_to[pos]) {
        const auto& edge = lattice.edges[e];
        alpha[pos] = LogAdd2(
            alpha[pos], alpha[edge.start] + pieces.piece(edge.piece_id).log2p);
      }
    }
    beta[n] = 0.0;
    for (int pos = n - 1; pos >= 0; --pos) {
      for (int e : lattice.edges_from[pos]) {
        const auto& edge = lattice.edges[e];
        beta[pos] = LogAdd2(
            beta[pos], beta[edge.end] + pieces.piece(edge.piece_id).log2p);
      }
    }
    const double total = alpha[n];
    if (total == kNegInf) {
      throw DataError("unreachable lattice position (coverage violation)");
    }
    const double w = static_cast<double>(weight);
    for (const auto& edge : lattice.edges) {
      double marginal = std::exp2(alpha[edge.start] +
                                  pieces.piece(edge.piece_id).log2p +
                                  beta[edge.end] - total);
      result.expected_counts[edge.piece_id] += w * marginal;
    }
    result.log_likelihood += w * total;
  }
  return result;
}

PieceSet MStep(const PieceSet& pieces, const std::vector<double>& counts) {
  if (counts.size() != static_cast<size_t>(pieces.size())) {
    throw NumericalError("count vector size mismatch");
  }
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0 || !std::isfinite(c)) {
      throw NumericalError("negative or non-finite expected count");
    }
    total += c;
  }
  if (total <= 0.0) throw NumericalError("all expected counts are zero");

  // Zero counts keep a vanishing floor so the inventory size is stable
  // through EM; prune is the only operation that changes it.
  const double floor = total * 1e-12;
  double adjusted_total = 0.0;
  std::vector<double> adjusted(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    adjusted[i] = std::max(counts[i], floor);
    adjusted_total += adjusted[i];
  }
  std::vector<double> log2p(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    log2p[i] = std::log2(adjusted[i]) - std::log2(adjusted_total);
  }
  PieceSet next = pieces;
  next.SetLogProbs(log2p);
  return next;
}

Segmentation ViterbiSegment(const PieceSet& pieces, std::string_view text,
                            int exclude_piece) {
  Segmentation seg;
  if (text.empty()) return seg;
  Lattice lattice = Lattice::Build(pieces, text, exclude_piece);
  const int n = lattice.num_positions - 1;

  struct State {
    double log2p = kNegInf;
    int token_count = 0;
    int best_edge = -1;
  };
  std::vector<State> best(n + 1);
  best[n] = {0.0, 0, -1};

  // Suffix DP; at equal probability prefer fewer tokens, then the longer
  // first piece, which realizes the leftmost-longest convention.
  for (int pos = n - 1; pos >= 0; --pos) {
    for (int e : lattice.edges_from[pos]) {
      const auto& edge = lattice.edges[e];
      const State& next = best[edge.end];
      if (next.log2p == kNegInf) continue;
      double cand_lp = pieces.piece(edge.piece_id).log2p + next.log2p;
      int cand_count = 1 + next.token_count;
      int cand_len = edge.end - edge.start;
      State& cur = best[pos];
      bool better = false;
      if (cand_lp > cur.log2p) {
        better = true;
      } else if (cand_lp == cur.log2p && cur.best_edge >= 0) {
        int cur_len = lattice.edges[cur.best_edge].end -
                      lattice.edges[cur.best_edge].start;
        if (cand_count < cur.token_count ||
            (cand_count == cur.token_count && cand_len > cur_len)) {
          better = true;
        }
      }
      if (better) {
        cur.log2p = cand_lp;
        cur.token_count = cand_count;
        cur.best_edge = e;
      }
    }
  }
  if (best[0].log2p == kNegInf) {
    throw DataError("unreachable lattice position (coverage violation)");
  }
  int pos = 0;
  while (pos < n) {
    const auto& edge = lattice.edges[best[pos].best_edge];
    seg.piece_ids.push_back(edge.piece_id);
    pos = edge.end;
  }
  seg.log2p = best[0].log2p;
  return seg;
}

PieceSet SeedPieces(const WeightedText& corpus, int max_piece_len,
                    int seed_size) {
  if (max_piece_len < 1) throw UsageError("max_piece_len must be >= 1");
  if (seed_size < 0) throw UsageError("seed_size must be >= 0");
  bool any = false;
  std::unordered_map<std::string, int64_t> substr_counts;
  for (const auto& [text, weight] : corpus) {
    if (text.empty() || weight == 0) continue;
    any = true;
    std::vector<char32_t> chars;
    std::vector<int> offsets;
    if (!DecodeUtf8WithOffsets(text, &chars, &offsets)) {
      throw DataError("malformed UTF-8 in seed corpus");
    }
    const int n = static_cast<int>(chars.size());
    for (int start = 0; start < n; ++start) {
      for (int len = 1; len <= max_piece_len && start + len <= n; ++len) {
        substr_counts[std::string(
            text.substr(offsets[start], offsets[start + len] - offsets[start]))]
            += weight;
      }
    }
  }
  if (!any) throw DataError("empty corpus");

  std::vector<std::pair<std::string, int64_t>> chars_list;
  std::vector<std::pair<std::string, int64_t>> multi;
  for (auto& [text, count] : substr_counts) {
    if (CountChars(text) == 1) {
      chars_list.emplace_back(text, count);
    } else {
      multi.emplace_back(text, count);
    }
  }

  // When the candidate pool exceeds the budget, drop hapax substrings first,
  // then keep the top seed_size by count * length.
  if (static_cast<int>(multi.size()) > seed_size) {
    std::erase_if(multi, [](const auto& kv) { return kv.second < 2; });
  }
  auto score = [](const std::pair<std::string, int64_t>& kv) {
    return static_cast<double>(kv.second) *
           static_cast<double>(Utf8Length(kv.first));
  };
  std::sort(multi.begin(), multi.end(), [&](const auto& a, const auto& b) {
    double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    return a.first < b.first;
  });
  if (static_cast<int>(multi.size()) > seed_size) multi.resize(seed_size);

  std::sort(chars_list.begin(), chars_list.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });

  std::vector<Piece> pieces;
  pieces.reserve(chars_list.size() + multi.size());
  int64_t total = 0;
  for (const auto& [text, count] : chars_list) total += count;
  for (const auto& [text, count] : multi) total += count;
  auto add = [&](const std::string& text, int64_t count) {
    Piece p;
    p.text = text;
    p.chars = CountChars(text);
    p.kind = ClassifyPiece(text, p.chars);
    p.log2p = std::log2(static_cast<double>(count)) -
              std::log2(static_cast<double>(total));
    pieces.push_back(std::move(p));
  };
  for (const auto& [text, count] : chars_list) add(text, count);
  for (const auto& [text, count] : multi) add(text, count);
  return PieceSet(std::move(pieces));
}

PieceSet Prune(const PieceSet& pieces, const std::vector<double>& counts,
               int target_size, double shrink) {
  if (counts.size() != static_cast<size_t>(pieces.size())) {
    throw NumericalError("count vector size mismatch");
  }
  if (shrink <= 0.0 || shrink > 1.0) {
    throw UsageError("shrink must be in (0, 1]");
  }
  int protected_count = 0;
  for (const auto& p : pieces.pieces()) {
    if (p.kind != PieceKind::kNormal) ++protected_count;
  }
  if (target_size < protected_count) {
    throw UsageError("target size " + std::to_string(target_size) +
                     " below character/symbol piece count " +
                     std::to_string(protected_count));
  }
  const int size = pieces.size();
  const int new_size =
      std::max(target_size, static_cast<int>(std::floor(size * shrink)));
  if (new_size >= size) return pieces;

  // Estimated likelihood loss of dropping a piece: its expected count times
  // the gap between its own score and its best alternative segmentation.
  struct Scored {
    int id;
    double loss;
  };
  std::vector<Scored> removable;
  for (int id = 0; id < size; ++id) {
    const Piece& p = pieces.piece(id);
    if (p.kind != PieceKind::kNormal) continue;
    Segmentation alt = ViterbiSegment(pieces, p.text, /*exclude_piece=*/id);
    removable.push_back({id, counts[id] * (p.log2p - alt.log2p)});
  }
  std::sort(removable.begin(), removable.end(),
            [&](const Scored& a, const Scored& b) {
              if (a.loss != b.loss) return a.loss < b.loss;
              return pieces.piece(a.id).text < pieces.piece(b.id).text;
            });

  const int to_remove = size - new_size;
  std::vector<bool> removed(size, false);
  for (int i = 0; i < to_remove; ++i) removed[removable[i].id] = true;

  std::vector<Piece> kept;
  kept.reserve(new_size);
  double kept_mass = 0.0;
  for (int id = 0; id < size; ++id) {
    if (removed[id]) continue;
    kept.push_back(pieces.piece(id));
    kept_mass += std::exp2(pieces.piece(id).log2p);
  }
  const double renorm = std::log2(kept_mass);
  for (auto& p : kept) p.log2p -= renorm;
  return PieceSet(std::move(kept));
}

SubwordModel::SubwordModel(PieceSet inventory)
    : inventory_(std::move(inventory)),
      control_{corpus::kUnk, corpus::kBos, corpus::kEos, "<pad>"} {}

const std::string& SubwordModel::TokenString(int id) const {
  if (id < 0 || id >= size()) throw DataError("piece id out of range");
  if (id < kNumControl) return control_[id];
  return inventory_.piece(id - kNumControl).text;
}

int SubwordModel::TokenId(const std::string& text) const {
  for (int i = 0; i < kNumControl; ++i) {
    if (control_[i] == text) return i;
  }
  int id = inventory_.Find(text);
  return id < 0 ? -1 : id + kNumControl;
}

Encoding SubwordModel::EncodeBest(const corpus::Sentence& s) const {
  Encoding encoding;
  encoding.source_word_count = static_cast<int64_t>(s.tokens.size());
  for (const auto& word : s.tokens) {
    if (IsReservedTag(word)) {
      int id = TokenId(word);
      if (id < 0) {
        throw DataError("reserved tag '" + word +
                        "' is not a piece of this model");
      }
      encoding.piece_ids.push_back(id);
      continue;
    }
    if (word.find(kWordMarker) != std::string::npos) {
      throw DataError("input word contains the reserved marker U+2581");
    }
    std::string marked = std::string(kWordMarker) + word;
    Segmentation seg = ViterbiSegment(inventory_, marked);
    for (int id : seg.piece_ids) {
      encoding.piece_ids.push_back(id + kNumControl);
    }
  }
  return encoding;
}

std::vector<std::string> SubwordModel::EncodeBestStrings(
    const corpus::Sentence& s) const {
  Encoding encoding = EncodeBest(s);
  std::vector<std::string> out;
  out.reserve(encoding.piece_ids.size());
  for (int id : encoding.piece_ids) out.push_back(TokenString(id));
  return out;
}

DecodeResult SubwordModel::Decode(std::span<const int> ids) const {
  DecodeResult result;
  std::string current;
  bool in_word = false;
  auto flush = [&] {
    if (in_word) {
      result.sentence.tokens.push_back(current);
      current.clear();
      in_word = false;
    }
  };
  bool first_piece = true;
  for (int id : ids) {
    if (id < 0 || id >= size()) {
      throw DataError("invalid piece id " + std::to_string(id));
    }
    if (id < kNumControl) {
      flush();
      result.sentence.tokens.push_back(control_[id]);
      first_piece = false;
      continue;
    }
    const Piece& p = inventory_.piece(id - kNumControl);
    if (p.kind == PieceKind::kSymbol) {
      flush();
      result.sentence.tokens.push_back(p.text);
      first_piece = false;
      continue;
    }
    std::string_view text = p.text;
    if (text.substr(0, kWordMarker.size()) == kWordMarker) {
      flush();
      in_word = true;
      current.assign(text.substr(kWordMarker.size()));
    } else {
      if (!in_word) {
        // A continuation piece with no word in progress: decode best-effort.
        if (first_piece) result.started_midword = true;
        in_word = true;
      }
      current.append(text);
    }
    first_piece = false;
  }
  flush();
  return result;
}

DecodeResult SubwordModel::DecodeStrings(
    std::span<const std::string> pieces) const {
  std::vector<int> ids;
  ids.reserve(pieces.size());
  for (const auto& text : pieces) {
    int id = TokenId(text);
    if (id < 0) throw DataError("unknown piece '" + text + "'");
    ids.push_back(id);
  }
  return Decode(ids);
}

void SubwordModel::Save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.reserve(size() + 1);
  lines.push_back("unigram\t1");
  for (const auto& control : control_) lines.push_back(control);
  for (const auto& p : inventory_.pieces()) {
    lines.push_back(p.text + "\t" + FormatDouble(p.log2p));
  }
  WriteLines(path, lines);
}

SubwordModel SubwordModel::Load(const std::string& path) {
  std::vector<std::string> lines = ReadLines(path);
  if (lines.empty() || lines[0] != "unigram\t1") {
    throw DataError(path + ": not a unigram model file");
  }
  const std::vector<std::string> expected_control{corpus::kUnk, corpus::kBos,
                                                  corpus::kEos, "<pad>"};
  if (lines.size() < 1 + expected_control.size()) {
    throw DataError(path + ": truncated model file");
  }
  for (size_t i = 0; i < expected_control.size(); ++i) {
    if (lines[1 + i] != expected_control[i]) {
      throw DataError(path + ": bad control token line: '" + lines[1 + i] +
                      "'");
    }
  }
  std::vector<Piece> pieces;
  for (size_t i = 1 + expected_control.size(); i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    size_t tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ": malformed piece line: '" + lines[i] + "'");
    }
    Piece p;
    p.text = lines[i].substr(0, tab);
    p.log2p = ParseDouble(lines[i].substr(tab + 1));
    p.chars = CountChars(p.text);
    p.kind = ClassifyPiece(p.text, p.chars);
    pieces.push_back(std::move(p));
  }
  PieceSet inventory(std::move(pieces));
  double total = inventory.TotalProbability();
  if (std::abs(total - 1.0) > 1e-6) {
    throw DataError(path + ": piece probabilities sum to " +
                    FormatDouble(total) + ", expected 1");
  }
  return SubwordModel(std::move(inventory));
}

std::vector<std::vector<std::string>> EncodeCorpus(
    const SubwordModel& model,
    const std::vector<corpus::Sentence>& sentences) {
  std::unordered_map<std::string, std::vector<std::string>> memo;
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::string> encoded;
    for (const auto& word : s.tokens) {
      auto it = memo.find(word);
      if (it == memo.end()) {
        corpus::Sentence one;
        one.tokens.push_back(word);
        it = memo.emplace(word, model.EncodeBestStrings(one)).first;
      }
      encoded.insert(encoded.end(), it->second.begin(), it->second.end());
    }
    out.push_back(std::move(encoded));
  }
  return out;
}

double TokensPerWordRatio(const SubwordModel& model,
                          const std::vector<corpus::Sentence>& sentences) {
  int64_t words = 0;
  int64_t subwords = 0;
  auto encoded = EncodeCorpus(model, sentences);
  for (size_t i = 0; i < sentences.size(); ++i) {
    words += static_cast<int64_t>(sentences[i].tokens.size());
    subwords += static_cast<int64_t>(encoded[i].size());
  }
  if (words == 0) throw DataError("empty corpus");
  return static_cast<double>(subwords) / static_cast<double>(words);
}

}  // namespace subword
}  // namespace sublm
