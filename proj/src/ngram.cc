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

#include <algorithm>
#include <cmath>

#include "sublm/corpus.h"
#include "sublm/util.h"

namespace sublm {
namespace ngram {
namespace {

constexpr int kBosInternId = 0;
constexpr int kEosInternId = 1;

}  // namespace

NgramCounts::NgramCounts(int order) : order_(order) {
  if (order < 1) throw UsageError("order must be >= 1");
  Intern(corpus::kBos);
  Intern(corpus::kEos);
}

int NgramCounts::Intern(const std::string& token) {
  auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  int id = static_cast<int>(id_to_token_.size());
  id_to_token_.push_back(token);
  token_to_id_.emplace(token, id);
  return id;
}

int NgramCounts::TokenId(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

void NgramCounts::AddSentence(std::span<const std::string> tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + order_);
  for (int i = 0; i < order_ - 1; ++i) ids.push_back(kBosInternId);
  for (const auto& t : tokens) ids.push_back(Intern(t));
  ids.push_back(kEosInternId);

  std::u32string key(order_, U'\0');
  for (size_t pos = order_ - 1; pos < ids.size(); ++pos) {
    for (int k = 0; k < order_; ++k) {
      key[k] = static_cast<char32_t>(ids[pos - order_ + 1 + k]);
    }
    ++windows_[key];
    ++total_windows_;
  }
}

void NgramCounts::AddWindow(std::span<const std::string> window) {
  if (static_cast<int>(window.size()) != order_) {
    throw UsageError("window must hold exactly order tokens");
  }
  std::u32string key;
  key.reserve(order_);
  for (const auto& t : window) {
    key.push_back(static_cast<char32_t>(Intern(t)));
  }
  ++windows_[key];
  ++total_windows_;
}

KneserNeyModel BuildKneserNey(const NgramCounts& counts, double discount) {
  if (discount <= 0.0 || discount >= 1.0) {
    throw UsageError("discount must be in (0, 1)");
  }
  if (counts.total_windows() == 0) throw DataError("empty training stream");

  KneserNeyModel model;
  model.order_ = counts.order();
  model.discount_ = discount;
  model.id_to_token_ = counts.id_to_token();
  for (size_t id = 0; id < model.id_to_token_.size(); ++id) {
    model.token_to_id_.emplace(model.id_to_token_[id], static_cast<int>(id));
  }

  const int n = counts.order();
  // grams[k-1]: level-k token-string counts.  The top level holds raw window
  // counts; each level below holds continuation counts (distinct one-token
  // left extensions at the level above).
  std::vector<std::unordered_map<std::u32string, int64_t>> grams(n);
  grams[n - 1] = counts.windows();
  for (int k = n - 1; k >= 1; --k) {
    auto& lower = grams[k - 1];
    for (const auto& [key, unused] : grams[k]) {
      ++lower[key.substr(1)];
    }
  }

  // The predicted vocabulary is exactly the level-1 gram set.
  model.predictable_.assign(model.id_to_token_.size(), false);
  for (const auto& [key, unused] : grams[0]) {
    model.predictable_[static_cast<int>(key[0])] = true;
  }
  for (size_t id = 0; id < model.id_to_token_.size(); ++id) {
    if (model.predictable_[id]) model.vocab_.push_back(model.id_to_token_[id]);
  }
  std::sort(model.vocab_.begin(), model.vocab_.end());
  const double uniform = 1.0 / static_cast<double>(model.vocab_.size());

  model.contexts_.resize(n);
  const double d = discount;
  for (int k = 1; k <= n; ++k) {
    // Group level-k grams by context.
    auto& table = model.contexts_[k - 1];
    for (const auto& [key, count] : grams[k - 1]) {
      std::u32string ctx = key.substr(0, k - 1);
      int token = static_cast<int>(key[k - 1]);
      table[ctx].probs.emplace_back(token, static_cast<double>(count));
    }
    for (auto& [ctx, entry] : table) {
      double total = 0.0;
      for (const auto& [token, count] : entry.probs) total += count;
      const double types = static_cast<double>(entry.probs.size());
      entry.backoff = d * types / total;
      std::vector<int> lower_ctx;
      lower_ctx.reserve(k > 1 ? k - 2 : 0);
      for (size_t i = 1; i + 1 <= ctx.size(); ++i) {
        lower_ctx.push_back(static_cast<int>(ctx[i]));
      }
      for (auto& [token, value] : entry.probs) {
        const double discounted = std::max(value - d, 0.0) / total;
        const double lower = k == 1 ? uniform
                                    : model.ProbIds(lower_ctx, token);
        value = discounted + entry.backoff * lower;
      }
      std::sort(entry.probs.begin(), entry.probs.end());
    }
  }
  return model;
}

bool KneserNeyModel::InVocab(const std::string& token) const {
  auto it = token_to_id_.find(token);
  if (it == token_to_id_.end()) return false;
  return predictable_[it->second];
}

int KneserNeyModel::MapContextToken(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

double KneserNeyModel::ProbIds(std::span<const int> context, int token) const {
  double lambda = 1.0;
  int start_level =
      std::min<int>(order_, static_cast<int>(context.size()) + 1);
  for (int k = start_level; k >= 1; --k) {
    std::span<const int> suffix = context.subspan(context.size() - (k - 1));
    bool valid = true;
    std::u32string key;
    key.reserve(k - 1);
    for (int id : suffix) {
      if (id < 0) {
        valid = false;
        break;
      }
      key.push_back(static_cast<char32_t>(id));
    }
    if (!valid) continue;
    const auto& table = contexts_[k - 1];
    auto it = table.find(key);
    if (it == table.end()) continue;  // unseen context: pure pass-through
    const auto& probs = it->second.probs;
    auto pit = std::lower_bound(
        probs.begin(), probs.end(), std::make_pair(token, 0.0),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pit != probs.end() && pit->first == token) {
      return lambda * pit->second;
    }
    lambda *= it->second.backoff;
  }
  // Unreachable for predictable tokens: the level-1 table covers them all.
  throw NumericalError("token missing from unigram table");
}

double KneserNeyModel::LogProb(std::span<const std::string> context,
                               const std::string& token) const {
  auto it = token_to_id_.find(token);
  if (it == token_to_id_.end() || !predictable_[it->second]) {
    throw DataError("unknown token '" + token + "'");
  }
  std::vector<int> ctx;
  size_t keep = std::min<size_t>(context.size(), order_ - 1);
  ctx.reserve(keep);
  for (size_t i = context.size() - keep; i < context.size(); ++i) {
    ctx.push_back(MapContextToken(context[i]));
  }
  return std::log2(ProbIds(ctx, it->second));
}

double KneserNeyModel::SequenceLogProb(
    std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + order_);
  for (int i = 0; i < order_ - 1; ++i) ids.push_back(kBosInternId);
  for (const auto& t : tokens) {
    auto it = token_to_id_.find(t);
    if (it == token_to_id_.end() || !predictable_[it->second]) {
      throw DataError("unknown token '" + t + "'");
    }
    ids.push_back(it->second);
  }
  ids.push_back(kEosInternId);

  double total = 0.0;
  for (size_t pos = order_ - 1; pos < ids.size(); ++pos) {
    std::span<const int> ctx(ids.data() + pos - (order_ - 1),
                             static_cast<size_t>(order_ - 1));
    total += std::log2(ProbIds(ctx, ids[pos]));
  }
  return total;
}

void KneserNeyModel::Save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.push_back("kn\t1");
  lines.push_back("order\t" + std::to_string(order_));
  lines.push_back("discount\t" + FormatDouble(discount_));

  for (int k = 1; k <= order_; ++k) {
    struct Row {
      std::string context;
      std::string token;
      double prob;
      double backoff;
    };
    std::vector<Row> rows;
    for (const auto& [ctx, entry] : contexts_[k - 1]) {
      std::string ctx_text;
      for (size_t i = 0; i < ctx.size(); ++i) {
        if (i > 0) ctx_text += ' ';
        ctx_text += id_to_token_[static_cast<int>(ctx[i])];
      }
      for (const auto& [token, prob] : entry.probs) {
        rows.push_back(
            {ctx_text, id_to_token_[token], prob, entry.backoff});
      }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.context != b.context) return a.context < b.context;
      return a.token < b.token;
    });
    for (const auto& row : rows) {
      lines.push_back(std::to_string(k) + "\t" + row.context + "\t" +
                      row.token + "\t" + FormatDouble(std::log2(row.prob)) +
                      "\t" + FormatDouble(std::log2(row.backoff)));
    }
  }
  WriteLines(path, lines);
}

KneserNeyModel KneserNeyModel::Load(const std::string& path) {
  std::vector<std::string> lines = ReadLines(path);
  if (lines.size() < 3 || lines[0] != "kn\t1") {
    throw DataError(path + ": not a kn model file");
  }
  auto field = [&](const std::string& line, const std::string& name) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != name) {
      throw DataError(path + ": expected '" + name + "' header line");
    }
    return line.substr(tab + 1);
  };
  KneserNeyModel model;
  model.order_ = static_cast<int>(ParseInt(field(lines[1], "order")));
  model.discount_ = ParseDouble(field(lines[2], "discount"));
  model.contexts_.resize(model.order_);

  auto intern = [&](const std::string& token) {
    auto it = model.token_to_id_.find(token);
    if (it != model.token_to_id_.end()) return it->second;
    int id = static_cast<int>(model.id_to_token_.size());
    model.id_to_token_.push_back(token);
    model.token_to_id_.emplace(token, id);
    return id;
  };
  intern(corpus::kBos);
  intern(corpus::kEos);

  for (size_t i = 3; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      size_t tab = lines[i].find('\t', start);
      if (tab == std::string::npos) {
        throw DataError(path + ": malformed row: '" + lines[i] + "'");
      }
      cols.push_back(lines[i].substr(start, tab - start));
      start = tab + 1;
    }
    cols.push_back(lines[i].substr(start));
    int level = static_cast<int>(ParseInt(cols[0]));
    if (level < 1 || level > model.order_) {
      throw DataError(path + ": level out of range");
    }
    std::u32string ctx;
    for (const auto& t : SplitTokens(cols[1])) {
      ctx.push_back(static_cast<char32_t>(intern(t)));
    }
    if (static_cast<int>(ctx.size()) != level - 1) {
      throw DataError(path + ": context length does not match level");
    }
    int token = intern(cols[2]);
    auto& entry = model.contexts_[level - 1][ctx];
    entry.probs.emplace_back(token, std::exp2(ParseDouble(cols[3])));
    entry.backoff = std::exp2(ParseDouble(cols[4]));
  }

  model.predictable_.assign(model.id_to_token_.size(), false);
  for (const auto& [ctx, entry] : model.contexts_[0]) {
    (void)ctx;
    for (const auto& [token, prob] : entry.probs) {
      model.predictable_[token] = true;
    }
  }
  for (size_t id = 0; id < model.id_to_token_.size(); ++id) {
    if (model.predictable_[id]) model.vocab_.push_back(model.id_to_token_[id]);
  }
  std::sort(model.vocab_.begin(), model.vocab_.end());
  for (auto& table : model.contexts_) {
    for (auto& [ctx, entry] : table) {
      (void)ctx;
      std::sort(entry.probs.begin(), entry.probs.end());
    }
  }
  return model;
}

KneserNeyModel TrainKneserNey(
    const std::vector<std::vector<std::string>>& sentences, int order,
    double discount) {
  if (sentences.empty()) throw DataError("empty training stream");
  NgramCounts counts(order);
  for (const auto& s : sentences) counts.AddSentence(s);
  return BuildKneserNey(counts, discount);
}

}  // namespace ngram
}  // namespace sublm
