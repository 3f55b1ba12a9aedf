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

#include "sublm/commands.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "sublm/eval.h"
#include "sublm/lstm.h"
#include "sublm/ngram.h"
#include "sublm/subword.h"
#include "sublm/subword_trainer.h"
#include "sublm/synthetic.h"
#include "sublm/util.h"

namespace fs = std::filesystem;

namespace sublm {
namespace cli {
namespace {

// Run manifest: tool version, command, configuration, seed and input content
// hashes.  Reruns with an identical manifest must produce byte-identical
// primary outputs, so nothing time- or host-dependent belongs here.
class Manifest {
 public:
  Manifest(const std::string& command) {
    Set("tool_version", kToolVersion);
    Set("command", command);
  }

  void Set(const std::string& key, const std::string& value) {
    fields_[key] = value;
  }
  void Set(const std::string& key, int64_t value) {
    Set(key, std::to_string(value));
  }
  void Set(const std::string& key, double value) {
    Set(key, FormatDouble(value));
  }
  void SetInput(const std::string& name, const std::string& path) {
    Set("input_hash." + name, HashHex(ReadFileBytes(path)));
  }

  void Write(const std::string& path) const {
    std::vector<std::string> lines;
    lines.reserve(fields_.size());
    for (const auto& [key, value] : fields_) {
      lines.push_back(key + "\t" + value);
    }
    WriteLines(path, lines);
  }

 private:
  std::map<std::string, std::string> fields_;
};

std::vector<std::string> JoinedLines(
    const std::vector<std::vector<std::string>>& token_lines) {
  std::vector<std::string> lines;
  lines.reserve(token_lines.size());
  for (const auto& tokens : token_lines) {
    lines.push_back(JoinTokens(tokens));
  }
  return lines;
}

// LSTM checkpoint adapted to the sentence-scoring interface over the
// tokenizer's piece vocabulary.
class LstmSubwordLm : public LanguageModel {
 public:
  LstmSubwordLm(neural::LstmModel model, const subword::SubwordModel* pieces)
      : model_(std::move(model)), pieces_(pieces) {
    if (model_.config.vocab_size != pieces_->size()) {
      throw DataError("checkpoint vocab (" +
                      std::to_string(model_.config.vocab_size) +
                      ") does not match tokenizer size (" +
                      std::to_string(pieces_->size()) + ")");
    }
  }

  bool InVocab(const std::string& token) const override {
    return pieces_->TokenId(token) >= 0;
  }

  double SequenceLogProb(std::span<const std::string> tokens) const override {
    neural::IdBatch inputs(1), targets(1);
    inputs[0].push_back(subword::SubwordModel::kBosId);
    for (const auto& t : tokens) {
      int id = pieces_->TokenId(t);
      if (id < 0) throw DataError("unknown token '" + t + "'");
      inputs[0].push_back(id);
      targets[0].push_back(id);
    }
    targets[0].push_back(subword::SubwordModel::kEosId);
    neural::ForwardResult fwd = neural::Forward(
        model_, inputs, neural::ZeroState(model_.config, 1));
    double total = 0.0;
    for (size_t t = 0; t < targets[0].size(); ++t) {
      total += fwd.log_probs[t](targets[0][t], 0);
    }
    return total / M_LN2;
  }

  const neural::LstmModel& model() const { return model_; }

 private:
  neural::LstmModel model_;
  const subword::SubwordModel* pieces_;
};

std::vector<int> StreamFromEncodedLines(const std::vector<std::string>& lines,
                                        const subword::SubwordModel& pieces) {
  std::vector<int> stream;
  for (const auto& line : lines) {
    for (const auto& token : SplitTokens(line)) {
      int id = pieces.TokenId(token);
      if (id < 0) throw DataError("unknown piece '" + token + "'");
      stream.push_back(id);
    }
    stream.push_back(subword::SubwordModel::kEosId);
  }
  return stream;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOptions {
  std::string input;
  std::string work_dir;
  int64_t min_count = 3;
  bool case_transform = false;
  std::string oov_mode = "replace";
};

void CmdPreprocess(const PreprocessOptions& opt) {
  if (opt.oov_mode != "replace" && opt.oov_mode != "remove") {
    throw UsageError("oov-mode must be 'replace' or 'remove'");
  }
  auto lines = ReadLines(opt.input);
  if (lines.empty()) throw DataError(opt.input + ": empty input corpus");
  auto sentences = corpus::ParseCorpus(lines);

  auto freq = corpus::CountTokens(sentences);
  auto vocab = corpus::BuildVocab(freq, opt.min_count);
  fs::create_directories(opt.work_dir);
  vocab.Save(opt.work_dir + "/vocab.tsv");

  auto dedup = corpus::Deduplicate(sentences);
  std::vector<std::string> out_lines;
  out_lines.reserve(dedup.size());
  for (const auto& s : dedup) {
    corpus::Sentence t;
    if (opt.case_transform) {
      t = corpus::ApplyCaseTransform(s);
      t = opt.oov_mode == "replace" ? CaseAwareReplaceOov(t, vocab)
                                    : CaseAwareRemoveOov(t, vocab);
    } else {
      t = opt.oov_mode == "replace" ? corpus::ReplaceOov(s, vocab)
                                    : corpus::RemoveOov(s, vocab);
    }
    out_lines.push_back(corpus::FormatSentence(t));
  }
  WriteLines(opt.work_dir + "/corpus.txt", out_lines);

  Manifest manifest("preprocess");
  manifest.SetInput("corpus", opt.input);
  manifest.Set("min_count", opt.min_count);
  manifest.Set("case_transform", opt.case_transform ? "1" : "0");
  manifest.Set("oov_mode", opt.oov_mode);
  manifest.Write(opt.work_dir + "/preprocess.manifest");

  auto stats = corpus::ComputeCorpusStats(sentences, vocab);
  std::fprintf(stderr,
               "preprocess: %lld sentences in, %zu after dedup, vocab %zu "
               "(min_count %lld), oov_rate %.6f\n",
               static_cast<long long>(stats.sentence_count), dedup.size(),
               vocab.size(), static_cast<long long>(opt.min_count),
               stats.oov_rate);
}

// ---------------------------------------------------------------------------
// train-tokenizer

struct TrainTokenizerOptions {
  std::string input;
  std::string model_out;
  int vocab_size = 4000;
  int max_piece_len = 8;
  int seed_factor = 25;
  double shrink = 0.75;
  int em_iters = 2;
};

void CmdTrainTokenizer(const TrainTokenizerOptions& opt) {
  auto sentences = corpus::ParseCorpus(ReadLines(opt.input));
  subword::UnigramTrainerOptions train_opt;
  train_opt.vocab_size = opt.vocab_size;
  train_opt.max_piece_chars = opt.max_piece_len;
  train_opt.seed_size_factor = opt.seed_factor;
  train_opt.shrink_factor = opt.shrink;
  train_opt.em_iters_per_round = opt.em_iters;
  auto result = subword::TrainUnigram(sentences, train_opt);
  result.model.Save(opt.model_out);
  std::ofstream log(opt.model_out + ".log.tsv");
  log << subword::FormatTrainLog(result.log);

  Manifest manifest("train-tokenizer");
  manifest.SetInput("corpus", opt.input);
  manifest.Set("vocab_size", static_cast<int64_t>(opt.vocab_size));
  manifest.Set("max_piece_len", static_cast<int64_t>(opt.max_piece_len));
  manifest.Set("seed_factor", static_cast<int64_t>(opt.seed_factor));
  manifest.Set("shrink", opt.shrink);
  manifest.Set("em_iters", static_cast<int64_t>(opt.em_iters));
  manifest.Write(opt.model_out + ".manifest");

  std::fprintf(stderr, "train-tokenizer: %d entries, final log-likelihood %s\n",
               result.model.size(),
               FormatDouble(result.log.back().log_likelihood).c_str());
}

// ---------------------------------------------------------------------------
// encode / decode

struct EncodeOptions {
  std::string model;
  std::string input;
  std::string output;
  std::string valid_output;
  int64_t valid_target = 0;
  uint64_t seed = 1;
};

void CmdEncode(const EncodeOptions& opt) {
  auto model = subword::SubwordModel::Load(opt.model);
  auto sentences = corpus::ParseCorpus(ReadLines(opt.input));
  auto encoded = JoinedLines(subword::EncodeCorpus(model, sentences));

  Manifest manifest("encode");
  manifest.SetInput("model", opt.model);
  manifest.SetInput("corpus", opt.input);
  manifest.Set("valid_target", opt.valid_target);
  manifest.Set("seed", static_cast<int64_t>(opt.seed));

  if (opt.valid_target > 0) {
    if (opt.valid_output.empty()) {
      throw UsageError("--valid-output is required with --valid-target");
    }
    auto pieces = corpus::ParseCorpus(encoded);
    corpus::ShuffleSentences(&pieces, opt.seed);
    auto split = corpus::SplitTrainValid(pieces, opt.valid_target);
    std::vector<std::string> train_lines, valid_lines;
    for (const auto& s : split.train) {
      train_lines.push_back(corpus::FormatSentence(s));
    }
    for (const auto& s : split.valid) {
      valid_lines.push_back(corpus::FormatSentence(s));
    }
    WriteLines(opt.output, train_lines);
    WriteLines(opt.valid_output, valid_lines);
  } else {
    WriteLines(opt.output, encoded);
  }
  manifest.Write(opt.output + ".manifest");
}

struct DecodeOptions {
  std::string model;
  std::string input;
  std::string output;
};

void CmdDecode(const DecodeOptions& opt) {
  auto model = subword::SubwordModel::Load(opt.model);
  auto lines = ReadLines(opt.input);
  std::vector<std::string> out_lines;
  out_lines.reserve(lines.size());
  int64_t midword = 0;
  for (const auto& line : lines) {
    auto tokens = SplitTokens(line);
    auto decoded = model.DecodeStrings(tokens);
    if (decoded.started_midword) ++midword;
    out_lines.push_back(corpus::FormatSentence(decoded.sentence));
  }
  WriteLines(opt.output, out_lines);
  if (midword > 0) {
    std::fprintf(stderr,
                 "decode: %lld line(s) started mid-word; decoded best-effort\n",
                 static_cast<long long>(midword));
  }
  Manifest manifest("decode");
  manifest.SetInput("model", opt.model);
  manifest.SetInput("corpus", opt.input);
  manifest.Write(opt.output + ".manifest");
}

// ---------------------------------------------------------------------------
// train-lm

struct TrainLmOptions {
  std::string kind;  // ngram | lstm
  std::string train_file;
  std::string valid_file;
  std::string tokenizer;
  std::string model_out;
  // ngram
  int order = 3;
  double discount = 0.75;
  // lstm
  int layers = 2;
  int embedding_dim = 32;
  int hidden_dim = 64;
  int bptt_len = 35;
  int epochs = 1;
  int batch_size = 8;
  double lr_max = 1.0;
  double cut_frac = 0.1;
  double ratio = 32.0;
  double dropout_embed = 0.0;
  double dropout_hidden = 0.0;
  double dropout_output = 0.0;
  bool no_tie_weights = false;
  double clip_norm = 0.25;
  uint64_t seed = 1;
};

void CmdTrainLm(const TrainLmOptions& opt) {
  Manifest manifest("train-lm");
  manifest.Set("kind", opt.kind);
  manifest.SetInput("train", opt.train_file);
  if (opt.kind == "ngram") {
    auto lines = ReadLines(opt.train_file);
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(lines.size());
    for (const auto& line : lines) sentences.push_back(SplitTokens(line));
    auto model = ngram::TrainKneserNey(sentences, opt.order, opt.discount);
    model.Save(opt.model_out);
    manifest.Set("order", static_cast<int64_t>(opt.order));
    manifest.Set("discount", opt.discount);
    manifest.Write(opt.model_out + ".manifest");
    std::fprintf(stderr, "train-lm: kn order %d over %zu-token vocab\n",
                 opt.order, model.vocab().size());
  } else if (opt.kind == "lstm") {
    if (opt.valid_file.empty() || opt.tokenizer.empty()) {
      throw UsageError("lstm training requires --valid and --tokenizer");
    }
    auto pieces = subword::SubwordModel::Load(opt.tokenizer);
    auto train_stream =
        StreamFromEncodedLines(ReadLines(opt.train_file), pieces);
    auto valid_stream =
        StreamFromEncodedLines(ReadLines(opt.valid_file), pieces);

    neural::LstmConfig config;
    config.layers = opt.layers;
    config.embedding_dim = opt.embedding_dim;
    config.hidden_dim = opt.hidden_dim;
    config.vocab_size = pieces.size();
    config.bptt_len = opt.bptt_len;
    config.dropout_embed = opt.dropout_embed;
    config.dropout_hidden = opt.dropout_hidden;
    config.dropout_output = opt.dropout_output;
    config.tie_weights = !opt.no_tie_weights;
    config.seed = opt.seed;
    config.clip_norm = opt.clip_norm;

    neural::LstmTrainOptions train_opt;
    train_opt.epochs = opt.epochs;
    train_opt.batch_size = opt.batch_size;
    train_opt.schedule.lr_max = opt.lr_max;
    train_opt.schedule.cut_frac = opt.cut_frac;
    train_opt.schedule.ratio = opt.ratio;
    train_opt.schedule.total_steps = 0;  // derived from the stream
    train_opt.seed = opt.seed;

    auto result = neural::TrainLstm(config, train_stream, valid_stream,
                                    train_opt);
    result.model.Save(opt.model_out);
    std::ofstream log(opt.model_out + ".log.tsv");
    log << neural::FormatEpochLog(result.log);

    manifest.SetInput("valid", opt.valid_file);
    manifest.SetInput("tokenizer", opt.tokenizer);
    manifest.Set("layers", static_cast<int64_t>(opt.layers));
    manifest.Set("embedding_dim", static_cast<int64_t>(opt.embedding_dim));
    manifest.Set("hidden_dim", static_cast<int64_t>(opt.hidden_dim));
    manifest.Set("bptt_len", static_cast<int64_t>(opt.bptt_len));
    manifest.Set("epochs", static_cast<int64_t>(opt.epochs));
    manifest.Set("batch_size", static_cast<int64_t>(opt.batch_size));
    manifest.Set("lr_max", opt.lr_max);
    manifest.Set("seed", static_cast<int64_t>(opt.seed));
    manifest.Write(opt.model_out + ".manifest");
    std::fprintf(stderr, "train-lm: lstm best validation ppl %s\n",
                 FormatDouble(result.best_val_ppl).c_str());
  } else {
    throw UsageError("unknown lm kind '" + opt.kind + "'");
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string lm_kind;
  std::string lm;
  std::string tokenizer;
  std::string test_file;
  std::string vocab;
  std::string train_overlap;
  std::string report_out;
  std::string dataset = "test";
  std::string token_policy = "eos";
  std::string oov_mode = "replace";
  bool case_transform = false;
};

eval::TokenCountPolicy ParsePolicy(const std::string& name) {
  if (name == "eos") return eval::TokenCountPolicy::kCountEosPrediction;
  if (name == "tokens") return eval::TokenCountPolicy::kTokensOnly;
  throw UsageError("token-policy must be 'eos' or 'tokens'");
}

void CmdEval(const EvalOptions& opt) {
  auto pieces = subword::SubwordModel::Load(opt.tokenizer);
  auto raw_sentences = corpus::ParseCorpus(ReadLines(opt.test_file));

  std::optional<double> oov_rate;
  std::vector<corpus::Sentence> sentences;
  sentences.reserve(raw_sentences.size());
  for (const auto& s : raw_sentences) {
    sentences.push_back(opt.case_transform ? corpus::ApplyCaseTransform(s)
                                           : s);
  }
  if (!opt.vocab.empty()) {
    auto vocab = corpus::Vocabulary::Load(opt.vocab);
    oov_rate = eval::OovRate(raw_sentences, vocab);
    for (auto& s : sentences) {
      if (opt.case_transform) {
        s = opt.oov_mode == "remove" ? CaseAwareRemoveOov(s, vocab)
                                     : CaseAwareReplaceOov(s, vocab);
      } else {
        s = opt.oov_mode == "remove" ? corpus::RemoveOov(s, vocab)
                                     : corpus::ReplaceOov(s, vocab);
      }
    }
  }

  std::unique_ptr<LanguageModel> lm;
  if (opt.lm_kind == "ngram") {
    lm = std::make_unique<ngram::KneserNeyModel>(
        ngram::KneserNeyModel::Load(opt.lm));
  } else if (opt.lm_kind == "lstm") {
    lm = std::make_unique<LstmSubwordLm>(neural::LstmModel::Load(opt.lm),
                                         &pieces);
  } else {
    throw UsageError("unknown lm kind '" + opt.lm_kind + "'");
  }

  auto report = eval::WordLevelPerplexity(*lm, pieces, sentences,
                                          ParsePolicy(opt.token_policy));
  report.oov_rate = oov_rate;
  if (!opt.train_overlap.empty()) {
    auto train = corpus::ParseCorpus(ReadLines(opt.train_overlap));
    report.overlap_fraction = eval::OverlapFraction(train, raw_sentences);
  }

  // The two word-perplexity paths are algebraically identical; disagreement
  // is a numerical failure.
  double gap = std::abs(report.ppl_word_direct - report.ppl_word_eq1);
  if (gap > 1e-9 * std::max(report.ppl_word_direct, 1.0)) {
    throw NumericalError("word-perplexity paths disagree: " +
                         FormatDouble(report.ppl_word_direct) + " vs " +
                         FormatDouble(report.ppl_word_eq1));
  }

  std::string text = eval::FormatReport(report, opt.dataset);
  std::fputs(text.c_str(), stdout);
  if (!opt.report_out.empty()) {
    std::ofstream txt(opt.report_out + ".txt");
    txt << text;
    std::ofstream tsv(opt.report_out + ".tsv");
    tsv << eval::FormatReportTsvHeader()
        << eval::FormatReportTsvRow(report, opt.dataset);

    Manifest manifest("eval");
    manifest.SetInput("lm", opt.lm);
    manifest.SetInput("tokenizer", opt.tokenizer);
    manifest.SetInput("test", opt.test_file);
    manifest.Set("lm_kind", opt.lm_kind);
    manifest.Set("token_policy", opt.token_policy);
    manifest.Set("oov_mode", opt.oov_mode);
    manifest.Write(opt.report_out + ".manifest");
  }
}

// ---------------------------------------------------------------------------
// stats

struct StatsOptions {
  std::string input;
  std::string vocab;
  std::string overlap_against;
  std::string output;
};

void CmdStats(const StatsOptions& opt) {
  auto sentences = corpus::ParseCorpus(ReadLines(opt.input));
  corpus::Vocabulary vocab;
  if (!opt.vocab.empty()) vocab = corpus::Vocabulary::Load(opt.vocab);
  auto stats = corpus::ComputeCorpusStats(sentences, vocab);
  std::string text = corpus::FormatStatsReport(stats);
  if (!opt.overlap_against.empty()) {
    auto train = corpus::ParseCorpus(ReadLines(opt.overlap_against));
    text += "overlap\t" +
            FormatFixed(eval::OverlapFraction(train, sentences), 6) + "\n";
  }
  std::fputs(text.c_str(), stdout);
  if (!opt.output.empty()) {
    std::ofstream out(opt.output);
    out << text;
    Manifest manifest("stats");
    manifest.SetInput("corpus", opt.input);
    if (!opt.vocab.empty()) manifest.SetInput("vocab", opt.vocab);
    manifest.Write(opt.output + ".manifest");
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string corpus_file;
  std::string work_dir;
  std::string out_file;
  std::string lm_kind = "ngram";
  std::vector<int> vocab_sizes = {400, 800, 1600, 4000, 10000};
  std::vector<int> layers = {3, 4, 5};
  int jobs = 1;
  int64_t min_count = 3;
  int64_t valid_target = 5000;
  uint64_t seed = 1;
  double discount = 0.75;
  // lstm cell settings (kept tiny for desk-scale runs)
  int embedding_dim = 16;
  int hidden_dim = 32;
  int bptt_len = 16;
  int epochs = 1;
  int batch_size = 8;
  double lr_max = 1.0;
};

void AppendResultRow(const std::string& path, const std::string& row) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw DataError("cannot open results file: " + path);
  if (::flock(fd, LOCK_EX) != 0) {
    ::close(fd);
    throw DataError("cannot lock results file: " + path);
  }
  ssize_t n = ::write(fd, row.data(), row.size());
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (n != static_cast<ssize_t>(row.size())) {
    throw DataError("short write to results file: " + path);
  }
}

void CmdSweep(const SweepOptions& opt) {
  if (opt.vocab_sizes.empty() || opt.layers.empty()) {
    throw UsageError("sweep grid must be non-empty");
  }
  fs::create_directories(opt.work_dir);

  // Shared preprocessing (deterministic, cheap to redo on resume).
  PreprocessOptions pre;
  pre.input = opt.corpus_file;
  pre.work_dir = opt.work_dir;
  pre.min_count = opt.min_count;
  CmdPreprocess(pre);
  const std::string pre_corpus = opt.work_dir + "/corpus.txt";

  // One tokenizer and encoded split per vocabulary size; completed files are
  // reused on resume.
  for (int v : opt.vocab_sizes) {
    const std::string model_path =
        opt.work_dir + "/tok_" + std::to_string(v) + ".model";
    if (!fs::exists(model_path)) {
      TrainTokenizerOptions tok;
      tok.input = pre_corpus;
      tok.model_out = model_path;
      tok.vocab_size = v;
      CmdTrainTokenizer(tok);
    }
    const std::string enc_train =
        opt.work_dir + "/enc_" + std::to_string(v) + ".train";
    const std::string enc_valid =
        opt.work_dir + "/enc_" + std::to_string(v) + ".valid";
    if (!fs::exists(enc_train) || !fs::exists(enc_valid)) {
      EncodeOptions enc;
      enc.model = model_path;
      enc.input = pre_corpus;
      enc.output = enc_train;
      enc.valid_output = enc_valid;
      enc.valid_target = opt.valid_target;
      enc.seed = opt.seed;
      CmdEncode(enc);
    }
  }

  // Completed cells are recognized by their (size, layers) row.
  std::set<std::pair<int, int>> done;
  if (fs::exists(opt.out_file)) {
    for (const auto& line : ReadLines(opt.out_file)) {
      auto cols = SplitTokens(line);
      if (cols.size() == 3 && cols[0] != "size") {
        done.insert({static_cast<int>(ParseInt(cols[0])),
                     static_cast<int>(ParseInt(cols[1]))});
      }
    }
  } else {
    AppendResultRow(opt.out_file, "size layers perplexity\n");
  }

  struct Cell {
    int vocab;
    int layers;
  };
  std::vector<Cell> cells;
  for (int v : opt.vocab_sizes) {
    for (int l : opt.layers) {
      if (!done.count({v, l})) cells.push_back({v, l});
    }
  }

  auto run_cell = [&](const Cell& cell) {
    const std::string tag =
        std::to_string(cell.vocab) + "_" + std::to_string(cell.layers);
    const std::string model_path =
        opt.work_dir + "/tok_" + std::to_string(cell.vocab) + ".model";
    const std::string enc_train =
        opt.work_dir + "/enc_" + std::to_string(cell.vocab) + ".train";
    const std::string enc_valid =
        opt.work_dir + "/enc_" + std::to_string(cell.vocab) + ".valid";
    auto pieces = subword::SubwordModel::Load(model_path);

    // Word-level perplexity on the decoded validation split.
    auto valid_lines = ReadLines(enc_valid);
    std::vector<corpus::Sentence> valid_sentences;
    for (const auto& line : valid_lines) {
      valid_sentences.push_back(
          pieces.DecodeStrings(SplitTokens(line)).sentence);
    }

    double ppl = 0.0;
    if (opt.lm_kind == "ngram") {
      auto lines = ReadLines(enc_train);
      std::vector<std::vector<std::string>> sentences;
      sentences.reserve(lines.size());
      for (const auto& line : lines) sentences.push_back(SplitTokens(line));
      auto lm = ngram::TrainKneserNey(sentences, cell.layers, opt.discount);
      ppl = eval::WordLevelPerplexity(
                lm, pieces, valid_sentences,
                eval::TokenCountPolicy::kCountEosPrediction)
                .ppl_word_direct;
    } else if (opt.lm_kind == "lstm") {
      neural::LstmConfig config;
      config.layers = cell.layers;
      config.embedding_dim = opt.embedding_dim;
      config.hidden_dim = opt.hidden_dim;
      config.vocab_size = pieces.size();
      config.bptt_len = opt.bptt_len;
      config.seed = opt.seed;
      neural::LstmTrainOptions train_opt;
      train_opt.epochs = opt.epochs;
      train_opt.batch_size = opt.batch_size;
      train_opt.schedule.lr_max = opt.lr_max;
      train_opt.seed = opt.seed;
      auto trained = neural::TrainLstm(
          config, StreamFromEncodedLines(ReadLines(enc_train), pieces),
          StreamFromEncodedLines(valid_lines, pieces), train_opt);
      LstmSubwordLm lm(std::move(trained.model), &pieces);
      ppl = eval::WordLevelPerplexity(
                lm, pieces, valid_sentences,
                eval::TokenCountPolicy::kCountEosPrediction)
                .ppl_word_direct;
    } else {
      throw UsageError("unknown lm kind '" + opt.lm_kind + "'");
    }

    AppendResultRow(opt.out_file, std::to_string(cell.vocab) + " " +
                                      std::to_string(cell.layers) + " " +
                                      FormatFixed(ppl, 6) + "\n");
    std::fprintf(stderr, "sweep: cell %s done, perplexity %.3f\n", tag.c_str(),
                 ppl);
  };

  if (opt.jobs <= 1) {
    for (const auto& cell : cells) run_cell(cell);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    std::mutex error_mutex;
    std::string first_error;
    for (int w = 0; w < opt.jobs; ++w) {
      workers.emplace_back([&] {
        while (true) {
          size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          try {
            run_cell(cells[i]);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty()) first_error = e.what();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (!first_error.empty()) throw DataError("sweep cell failed: " + first_error);
  }

  Manifest manifest("sweep");
  manifest.SetInput("corpus", opt.corpus_file);
  manifest.Set("lm_kind", opt.lm_kind);
  manifest.Set("seed", static_cast<int64_t>(opt.seed));
  {
    std::string grid;
    for (int v : opt.vocab_sizes) grid += std::to_string(v) + ",";
    grid += "x";
    for (int l : opt.layers) grid += "," + std::to_string(l);
    manifest.Set("grid", grid);
  }
  manifest.Write(opt.out_file + ".manifest");
}

}  // namespace

corpus::Sentence CaseAwareReplaceOov(const corpus::Sentence& transformed,
                                     const corpus::Vocabulary& v) {
  corpus::Sentence out;
  out.tokens.reserve(transformed.tokens.size());
  for (size_t i = 0; i < transformed.tokens.size(); ++i) {
    const std::string& token = transformed.tokens[i];
    if (token == corpus::kUp) {
      out.tokens.push_back(token);
      if (i + 1 < transformed.tokens.size()) {
        const std::string& word = transformed.tokens[++i];
        out.tokens.push_back(
            v.Contains(corpus::UppercaseFirst(word)) ? word
                                                     : std::string(corpus::kUnk));
      }
      continue;
    }
    out.tokens.push_back(v.Contains(token) ? token
                                           : std::string(corpus::kUnk));
  }
  return out;
}

corpus::Sentence CaseAwareRemoveOov(const corpus::Sentence& transformed,
                                    const corpus::Vocabulary& v) {
  corpus::Sentence out;
  for (size_t i = 0; i < transformed.tokens.size(); ++i) {
    const std::string& token = transformed.tokens[i];
    if (token == corpus::kUp) {
      if (i + 1 < transformed.tokens.size()) {
        const std::string& word = transformed.tokens[++i];
        if (v.Contains(corpus::UppercaseFirst(word))) {
          out.tokens.push_back(token);
          out.tokens.push_back(word);
        }
      }
      continue;
    }
    if (v.Contains(token)) out.tokens.push_back(token);
  }
  return out;
}

int Run(int argc, const char* const* argv) {
  CLI::App app{"subword language modeling toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  PreprocessOptions pre;
  auto* cmd_pre = app.add_subcommand(
      "preprocess", "count tokens, build the vocabulary, deduplicate, "
                    "apply the <up> transform and handle OOV tokens");
  cmd_pre->set_config("--config");
  cmd_pre->add_option("--input", pre.input, "corpus, one sentence per line")
      ->required();
  cmd_pre->add_option("--work-dir", pre.work_dir, "output directory")
      ->envname("SUBLM_WORK_DIR")
      ->required();
  cmd_pre->add_option("--min-count", pre.min_count,
                      "vocabulary frequency threshold");
  cmd_pre->add_flag("--case-transform", pre.case_transform,
                    "lowercase initially-capitalized words behind <up>");
  cmd_pre->add_option("--oov-mode", pre.oov_mode, "replace | remove");

  TrainTokenizerOptions tok;
  auto* cmd_tok =
      app.add_subcommand("train-tokenizer", "train the unigram piece model");
  cmd_tok->set_config("--config");
  cmd_tok->add_option("--input", tok.input, "preprocessed corpus")->required();
  cmd_tok->add_option("--model-out", tok.model_out, "model file")->required();
  cmd_tok->add_option("--vocab-size", tok.vocab_size,
                      "total entries incl. control tokens")
      ->required();
  cmd_tok->add_option("--max-piece-len", tok.max_piece_len,
                      "max piece length in characters");
  cmd_tok->add_option("--seed-factor", tok.seed_factor,
                      "seed inventory = factor * vocab size");
  cmd_tok->add_option("--shrink", tok.shrink, "per-round prune factor");
  cmd_tok->add_option("--em-iters", tok.em_iters, "EM pairs per round");

  EncodeOptions enc;
  auto* cmd_enc = app.add_subcommand("encode",
                                     "encode a corpus into subword pieces");
  cmd_enc->set_config("--config");
  cmd_enc->add_option("--model", enc.model, "tokenizer model")->required();
  cmd_enc->add_option("--input", enc.input, "word corpus")->required();
  cmd_enc->add_option("--output", enc.output, "encoded output")->required();
  cmd_enc->add_option("--valid-output", enc.valid_output,
                      "validation split output");
  cmd_enc->add_option("--valid-target", enc.valid_target,
                      "validation size in subword tokens (0 = no split)");
  cmd_enc->add_option("--seed", enc.seed, "shuffle seed for the split");

  DecodeOptions dec;
  auto* cmd_dec = app.add_subcommand("decode",
                                     "decode subword pieces back to words");
  cmd_dec->set_config("--config");
  cmd_dec->add_option("--model", dec.model, "tokenizer model")->required();
  cmd_dec->add_option("--input", dec.input, "encoded corpus")->required();
  cmd_dec->add_option("--output", dec.output, "decoded output")->required();

  TrainLmOptions lm;
  auto* cmd_lm = app.add_subcommand("train-lm", "train a language model");
  cmd_lm->set_config("--config");
  cmd_lm->add_option("--kind", lm.kind, "ngram | lstm")->required();
  cmd_lm->add_option("--train", lm.train_file, "training token file")
      ->required();
  cmd_lm->add_option("--valid", lm.valid_file, "validation token file (lstm)");
  cmd_lm->add_option("--tokenizer", lm.tokenizer, "tokenizer model (lstm)");
  cmd_lm->add_option("--model-out", lm.model_out, "model output")->required();
  cmd_lm->add_option("--order", lm.order, "n-gram order");
  cmd_lm->add_option("--discount", lm.discount, "Kneser-Ney discount");
  cmd_lm->add_option("--layers", lm.layers, "recurrent layers");
  cmd_lm->add_option("--embedding-dim", lm.embedding_dim, "embedding width");
  cmd_lm->add_option("--hidden-dim", lm.hidden_dim, "hidden width");
  cmd_lm->add_option("--bptt", lm.bptt_len, "BPTT window");
  cmd_lm->add_option("--epochs", lm.epochs, "training epochs");
  cmd_lm->add_option("--batch-size", lm.batch_size, "batch streams");
  cmd_lm->add_option("--lr-max", lm.lr_max, "peak learning rate");
  cmd_lm->add_option("--cut-frac", lm.cut_frac, "warm-up fraction");
  cmd_lm->add_option("--ratio", lm.ratio, "peak / endpoint lr ratio");
  cmd_lm->add_option("--dropout-embed", lm.dropout_embed, "input dropout");
  cmd_lm->add_option("--dropout-hidden", lm.dropout_hidden,
                     "inter-layer dropout");
  cmd_lm->add_option("--dropout-output", lm.dropout_output, "output dropout");
  cmd_lm->add_flag("--no-tie-weights", lm.no_tie_weights,
                   "use a separate output projection");
  cmd_lm->add_option("--clip-norm", lm.clip_norm, "gradient clip norm");
  cmd_lm->add_option("--seed", lm.seed, "initialization/training seed");

  EvalOptions ev;
  auto* cmd_ev = app.add_subcommand("eval", "evaluate perplexity on a test set");
  cmd_ev->set_config("--config");
  cmd_ev->add_option("--lm-kind", ev.lm_kind, "ngram | lstm")->required();
  cmd_ev->add_option("--lm", ev.lm, "language model file")->required();
  cmd_ev->add_option("--tokenizer", ev.tokenizer, "tokenizer model")
      ->required();
  cmd_ev->add_option("--test", ev.test_file, "test corpus (word tokens)")
      ->required();
  cmd_ev->add_option("--vocab", ev.vocab, "word vocabulary for OOV handling");
  cmd_ev->add_option("--train-overlap", ev.train_overlap,
                     "training corpus for overlap statistics");
  cmd_ev->add_option("--report-out", ev.report_out,
                     "report path stem (.txt/.tsv)");
  cmd_ev->add_option("--dataset", ev.dataset, "dataset label");
  cmd_ev->add_option("--token-policy", ev.token_policy, "eos | tokens");
  cmd_ev->add_option("--oov-mode", ev.oov_mode, "replace | remove");
  cmd_ev->add_flag("--case-transform", ev.case_transform,
                   "apply the <up> transform before encoding");

  StatsOptions st;
  auto* cmd_st = app.add_subcommand("stats", "corpus statistics report");
  cmd_st->set_config("--config");
  cmd_st->add_option("--input", st.input, "corpus file")->required();
  cmd_st->add_option("--vocab", st.vocab, "vocabulary file");
  cmd_st->add_option("--overlap-against", st.overlap_against,
                     "reference corpus for overlap");
  cmd_st->add_option("--output", st.output, "report file");

  SweepOptions sw;
  auto* cmd_sw = app.add_subcommand(
      "sweep", "grid of vocabulary sizes x layers, one perplexity per cell");
  cmd_sw->set_config("--config");
  cmd_sw->add_option("--corpus", sw.corpus_file, "raw corpus")->required();
  cmd_sw->add_option("--work-dir", sw.work_dir, "working directory")
      ->envname("SUBLM_WORK_DIR")
      ->required();
  cmd_sw->add_option("--out", sw.out_file, "results data file")->required();
  cmd_sw->add_option("--lm-kind", sw.lm_kind, "ngram | lstm");
  cmd_sw->add_option("--vocab-sizes", sw.vocab_sizes, "vocabulary grid")
      ->delimiter(',');
  cmd_sw->add_option("--layers", sw.layers,
                     "layer grid (n-gram order for kind=ngram)")
      ->delimiter(',');
  cmd_sw->add_option("--jobs", sw.jobs, "parallel cells");
  cmd_sw->add_option("--min-count", sw.min_count, "vocabulary threshold");
  cmd_sw->add_option("--valid-target", sw.valid_target,
                     "validation subword tokens");
  cmd_sw->add_option("--seed", sw.seed, "seed");
  cmd_sw->add_option("--discount", sw.discount, "Kneser-Ney discount");
  cmd_sw->add_option("--embedding-dim", sw.embedding_dim, "lstm embedding");
  cmd_sw->add_option("--hidden-dim", sw.hidden_dim, "lstm hidden");
  cmd_sw->add_option("--bptt", sw.bptt_len, "lstm BPTT window");
  cmd_sw->add_option("--epochs", sw.epochs, "lstm epochs");
  cmd_sw->add_option("--batch-size", sw.batch_size, "lstm batch");
  cmd_sw->add_option("--lr-max", sw.lr_max, "lstm peak lr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_pre->parsed()) CmdPreprocess(pre);
    if (cmd_tok->parsed()) CmdTrainTokenizer(tok);
    if (cmd_enc->parsed()) CmdEncode(enc);
    if (cmd_dec->parsed()) CmdDecode(dec);
    if (cmd_lm->parsed()) CmdTrainLm(lm);
    if (cmd_ev->parsed()) CmdEval(ev);
    if (cmd_st->parsed()) CmdStats(st);
    if (cmd_sw->parsed()) CmdSweep(sw);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace cli
}  // namespace sublm
