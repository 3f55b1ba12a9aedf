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

#include "sublm/lstm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "sublm/util.h"

namespace sublm {
namespace neural {
namespace {

Eigen::ArrayXXd Sigmoid(const Eigen::ArrayXXd& x) {
  return 1.0 / (1.0 + (-x).exp());
}

// Per-time-step activations kept for backpropagation.
struct StepCache {
  std::vector<Eigen::MatrixXd> layer_input;  // post-dropout input per layer
  std::vector<Eigen::ArrayXXd> gate_i, gate_f, gate_g, gate_o;
  std::vector<Eigen::MatrixXd> c_prev, h_prev, c, tanh_c, h;
  Eigen::MatrixXd final_hidden;  // post output-dropout
  Eigen::MatrixXd log_probs;     // vocab x batch, natural log
};

void CheckIds(const IdBatch& ids, int vocab_size) {
  if (ids.empty()) return;
  size_t time = ids[0].size();
  for (const auto& row : ids) {
    if (row.size() != time) throw UsageError("ragged id batch");
    for (int id : row) {
      if (id < 0 || id >= vocab_size) {
        throw DataError("token id " + std::to_string(id) +
                        " out of range for vocab " +
                        std::to_string(vocab_size));
      }
    }
  }
}

// Shared forward machinery; fills per-step caches when requested.
void RunForward(const LstmModel& model, const IdBatch& inputs,
                const LstmState& state0, const DropoutMasks* masks,
                std::vector<StepCache>* caches, ForwardResult* result) {
  const LstmConfig& cfg = model.config;
  CheckIds(inputs, cfg.vocab_size);
  const int batch = static_cast<int>(inputs.size());
  const int time = batch == 0 ? 0 : static_cast<int>(inputs[0].size());

  LstmState state = state0;
  if (static_cast<int>(state.h.size()) != cfg.layers) {
    throw UsageError("state layer count mismatch");
  }
  if (result) result->log_probs.reserve(time);
  if (caches) caches->reserve(time);

  const Eigen::MatrixXd& decoder = model.decoder();
  for (int t = 0; t < time; ++t) {
    StepCache cache;
    Eigen::MatrixXd x(cfg.embedding_dim, batch);
    for (int b = 0; b < batch; ++b) {
      x.col(b) = model.embedding.row(inputs[b][t]).transpose();
    }
    if (masks) x.array() *= masks->embed.array();

    for (int l = 0; l < cfg.layers; ++l) {
      const int h_dim = cfg.LayerHiddenDim(l);
      const LstmLayerParams& p = model.layers[l];
      Eigen::MatrixXd gates = p.w_input * x + p.w_recur * state.h[l];
      gates.colwise() += p.bias;

      Eigen::ArrayXXd gi = Sigmoid(gates.topRows(h_dim).array());
      Eigen::ArrayXXd gf = Sigmoid(gates.middleRows(h_dim, h_dim).array());
      Eigen::ArrayXXd gg = gates.middleRows(2 * h_dim, h_dim).array().tanh();
      Eigen::ArrayXXd go = Sigmoid(gates.bottomRows(h_dim).array());

      Eigen::MatrixXd c_new =
          (gf * state.c[l].array() + gi * gg).matrix();
      Eigen::MatrixXd tc = c_new.array().tanh().matrix();
      Eigen::MatrixXd h_new = (go * tc.array()).matrix();

      if (caches) {
        cache.layer_input.push_back(x);
        cache.gate_i.push_back(gi);
        cache.gate_f.push_back(gf);
        cache.gate_g.push_back(gg);
        cache.gate_o.push_back(go);
        cache.c_prev.push_back(state.c[l]);
        cache.h_prev.push_back(state.h[l]);
        cache.c.push_back(c_new);
        cache.tanh_c.push_back(tc);
        cache.h.push_back(h_new);
      }
      state.c[l] = c_new;
      state.h[l] = h_new;
      x = h_new;
      if (l < cfg.layers - 1 && masks) {
        x.array() *= masks->hidden[l].array();
      }
    }
    if (masks) x.array() *= masks->output.array();

    Eigen::MatrixXd logits = decoder * x;
    logits.colwise() += model.out_bias;
    Eigen::RowVectorXd max = logits.colwise().maxCoeff();
    Eigen::RowVectorXd lse =
        (logits.rowwise() - max).array().exp().colwise().sum().log().matrix() +
        max;
    Eigen::MatrixXd log_probs = logits.rowwise() - lse;

    if (caches) {
      cache.final_hidden = x;
      cache.log_probs = log_probs;
      caches->push_back(std::move(cache));
    }
    if (result) result->log_probs.push_back(std::move(log_probs));
  }
  if (result) result->state = std::move(state);
}

}  // namespace

void LstmConfig::Validate() const {
  if (layers < 1) throw UsageError("layers must be >= 1");
  if (embedding_dim < 1 || hidden_dim < 1 || vocab_size < 1) {
    throw UsageError("model dimensions must be >= 1");
  }
  if (bptt_len < 1) throw UsageError("bptt_len must be >= 1");
  for (double rate : {dropout_embed, dropout_hidden, dropout_output}) {
    if (rate < 0.0 || rate >= 1.0) {
      throw UsageError("dropout rates must lie in [0, 1)");
    }
  }
  if (clip_norm <= 0.0) throw UsageError("clip_norm must be positive");
}

int64_t LstmModel::ParameterCount() const {
  int64_t total = embedding.size();
  for (const auto& layer : layers) {
    total += layer.w_input.size() + layer.w_recur.size() + layer.bias.size();
  }
  total += out_proj.size() + out_bias.size();
  return total;
}

LstmModel InitModel(const LstmConfig& config) {
  config.Validate();
  LstmModel model;
  model.config = config;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto fill = [&](Eigen::MatrixXd& m, double scale) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = scale * unit(rng);
      }
    }
  };

  model.embedding.resize(config.vocab_size, config.embedding_dim);
  fill(model.embedding, 0.1);

  model.layers.resize(config.layers);
  for (int l = 0; l < config.layers; ++l) {
    const int h = config.LayerHiddenDim(l);
    const int in = config.LayerInputDim(l);
    const double scale = 1.0 / std::sqrt(static_cast<double>(h));
    model.layers[l].w_input.resize(4 * h, in);
    model.layers[l].w_recur.resize(4 * h, h);
    fill(model.layers[l].w_input, scale);
    fill(model.layers[l].w_recur, scale);
    model.layers[l].bias = Eigen::VectorXd::Zero(4 * h);
  }

  if (!config.tie_weights) {
    model.out_proj.resize(config.vocab_size, config.embedding_dim);
    fill(model.out_proj, 0.1);
  }
  model.out_bias = Eigen::VectorXd::Zero(config.vocab_size);
  return model;
}

LstmState ZeroState(const LstmConfig& config, int batch) {
  LstmState state;
  state.h.reserve(config.layers);
  state.c.reserve(config.layers);
  for (int l = 0; l < config.layers; ++l) {
    state.h.push_back(
        Eigen::MatrixXd::Zero(config.LayerHiddenDim(l), batch));
    state.c.push_back(
        Eigen::MatrixXd::Zero(config.LayerHiddenDim(l), batch));
  }
  return state;
}

DropoutMasks MakeDropoutMasks(const LstmConfig& config, int batch,
                              uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto mask = [&](int dim, double rate) {
    Eigen::MatrixXd m(dim, batch);
    const double keep = 1.0 - rate;
    for (int i = 0; i < dim; ++i) {
      for (int b = 0; b < batch; ++b) {
        m(i, b) = (rate > 0.0 && unit(rng) < rate) ? 0.0 : 1.0 / keep;
      }
    }
    return m;
  };
  DropoutMasks masks;
  masks.embed = mask(config.embedding_dim, config.dropout_embed);
  for (int l = 0; l + 1 < config.layers; ++l) {
    masks.hidden.push_back(
        mask(config.LayerHiddenDim(l), config.dropout_hidden));
  }
  masks.output = mask(config.embedding_dim, config.dropout_output);
  return masks;
}

ForwardResult Forward(const LstmModel& model, const IdBatch& inputs,
                      const LstmState& state, const DropoutMasks* masks) {
  ForwardResult result;
  RunForward(model, inputs, state, masks, nullptr, &result);
  return result;
}

double Loss(const std::vector<Eigen::MatrixXd>& log_probs,
            const IdBatch& targets) {
  const int time = static_cast<int>(log_probs.size());
  const int batch = targets.empty() ? 0 : static_cast<int>(targets.size());
  if (batch == 0 || time == 0) throw UsageError("empty loss batch");
  double total = 0.0;
  int64_t count = 0;
  for (int t = 0; t < time; ++t) {
    for (int b = 0; b < batch; ++b) {
      total -= log_probs[t](targets[b][t], b);
      ++count;
    }
  }
  return total / (static_cast<double>(count) * M_LN2);
}

double ForwardLoss(const LstmModel& model, const IdBatch& inputs,
                   const IdBatch& targets, const LstmState& state,
                   const DropoutMasks* masks) {
  ForwardResult result = Forward(model, inputs, state, masks);
  return Loss(result.log_probs, targets);
}

double LstmGradients::Norm() const {
  double sq = embedding.squaredNorm() + out_proj.squaredNorm() +
              out_bias.squaredNorm();
  for (const auto& layer : layers) {
    sq += layer.w_input.squaredNorm() + layer.w_recur.squaredNorm() +
          layer.bias.squaredNorm();
  }
  return std::sqrt(sq);
}

void LstmGradients::Scale(double factor) {
  embedding *= factor;
  out_proj *= factor;
  out_bias *= factor;
  for (auto& layer : layers) {
    layer.w_input *= factor;
    layer.w_recur *= factor;
    layer.bias *= factor;
  }
}

LstmGradients BackwardPass(const LstmModel& model, const IdBatch& inputs,
                           const IdBatch& targets, const LstmState& state,
                           const DropoutMasks* masks, LstmState* final_state) {
  const LstmConfig& cfg = model.config;
  CheckIds(targets, cfg.vocab_size);
  std::vector<StepCache> caches;
  ForwardResult fwd;
  RunForward(model, inputs, state, masks, &caches, &fwd);
  const int batch = static_cast<int>(inputs.size());
  const int time = static_cast<int>(caches.size());
  if (batch == 0 || time == 0) throw UsageError("empty training batch");
  if (final_state) *final_state = fwd.state;

  LstmGradients grads;
  grads.loss_bits = Loss(fwd.log_probs, targets);
  grads.embedding = Eigen::MatrixXd::Zero(cfg.vocab_size, cfg.embedding_dim);
  grads.layers.resize(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) {
    const int h = cfg.LayerHiddenDim(l);
    const int in = cfg.LayerInputDim(l);
    grads.layers[l].w_input = Eigen::MatrixXd::Zero(4 * h, in);
    grads.layers[l].w_recur = Eigen::MatrixXd::Zero(4 * h, h);
    grads.layers[l].bias = Eigen::VectorXd::Zero(4 * h);
  }
  grads.out_proj = cfg.tie_weights
                       ? Eigen::MatrixXd()
                       : Eigen::MatrixXd::Zero(cfg.vocab_size,
                                               cfg.embedding_dim);
  grads.out_bias = Eigen::VectorXd::Zero(cfg.vocab_size);

  // Loss is the mean over batch*time predictions, in bits.
  const double inv_scale =
      1.0 / (static_cast<double>(batch) * time * M_LN2);
  const Eigen::MatrixXd& decoder = model.decoder();
  Eigen::MatrixXd& decoder_grad =
      cfg.tie_weights ? grads.embedding : grads.out_proj;

  std::vector<Eigen::MatrixXd> dh_next(cfg.layers), dc_next(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) {
    dh_next[l] = Eigen::MatrixXd::Zero(cfg.LayerHiddenDim(l), batch);
    dc_next[l] = Eigen::MatrixXd::Zero(cfg.LayerHiddenDim(l), batch);
  }

  for (int t = time - 1; t >= 0; --t) {
    const StepCache& cache = caches[t];
    Eigen::MatrixXd dlogits = cache.log_probs.array().exp().matrix();
    for (int b = 0; b < batch; ++b) {
      dlogits(targets[b][t], b) -= 1.0;
    }
    dlogits *= inv_scale;

    grads.out_bias += dlogits.rowwise().sum();
    decoder_grad += dlogits * cache.final_hidden.transpose();
    Eigen::MatrixXd dx = decoder.transpose() * dlogits;
    if (masks) dx.array() *= masks->output.array();

    for (int l = cfg.layers - 1; l >= 0; --l) {
      Eigen::MatrixXd dh = dh_next[l] + dx;
      const Eigen::ArrayXXd& gi = cache.gate_i[l];
      const Eigen::ArrayXXd& gf = cache.gate_f[l];
      const Eigen::ArrayXXd& gg = cache.gate_g[l];
      const Eigen::ArrayXXd& go = cache.gate_o[l];
      const Eigen::ArrayXXd tc = cache.tanh_c[l].array();

      Eigen::ArrayXXd dc =
          dc_next[l].array() + dh.array() * go * (1.0 - tc * tc);
      Eigen::ArrayXXd dgo = dh.array() * tc * go * (1.0 - go);
      Eigen::ArrayXXd dgi = dc * gg * gi * (1.0 - gi);
      Eigen::ArrayXXd dgg = dc * gi * (1.0 - gg * gg);
      Eigen::ArrayXXd dgf =
          dc * cache.c_prev[l].array() * gf * (1.0 - gf);

      const int h_dim = cfg.LayerHiddenDim(l);
      Eigen::MatrixXd dgates(4 * h_dim, batch);
      dgates.topRows(h_dim) = dgi.matrix();
      dgates.middleRows(h_dim, h_dim) = dgf.matrix();
      dgates.middleRows(2 * h_dim, h_dim) = dgg.matrix();
      dgates.bottomRows(h_dim) = dgo.matrix();

      const LstmLayerParams& p = model.layers[l];
      grads.layers[l].w_input += dgates * cache.layer_input[l].transpose();
      grads.layers[l].w_recur += dgates * cache.h_prev[l].transpose();
      grads.layers[l].bias += dgates.rowwise().sum();

      dx = p.w_input.transpose() * dgates;
      if (l > 0 && masks) dx.array() *= masks->hidden[l - 1].array();
      dh_next[l] = p.w_recur.transpose() * dgates;
      dc_next[l] = (dc * gf).matrix();
    }

    if (masks) dx.array() *= masks->embed.array();
    for (int b = 0; b < batch; ++b) {
      grads.embedding.row(inputs[b][t]) += dx.col(b).transpose();
    }
  }
  return grads;
}

double ApplySgdUpdate(LstmModel* model, const LstmGradients& grads,
                      double learning_rate) {
  if (!std::isfinite(grads.loss_bits)) {
    throw NumericalError("non-finite training loss");
  }
  double norm = grads.Norm();
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
  double factor = learning_rate;
  const double clip = model->config.clip_norm;
  if (norm > clip) factor *= clip / norm;

  model->embedding -= factor * grads.embedding;
  for (int l = 0; l < model->config.layers; ++l) {
    model->layers[l].w_input -= factor * grads.layers[l].w_input;
    model->layers[l].w_recur -= factor * grads.layers[l].w_recur;
    model->layers[l].bias -= factor * grads.layers[l].bias;
  }
  if (!model->config.tie_weights) model->out_proj -= factor * grads.out_proj;
  model->out_bias -= factor * grads.out_bias;
  return norm;
}

StepResult BackwardAndStep(LstmModel* model, const IdBatch& inputs,
                           const IdBatch& targets, LstmState* state,
                           double learning_rate, const DropoutMasks* masks) {
  LstmState carried;
  LstmGradients grads =
      BackwardPass(*model, inputs, targets, *state, masks, &carried);
  double norm = ApplySgdUpdate(model, grads, learning_rate);
  *state = std::move(carried);
  return {grads.loss_bits, norm};
}

double Stlr(int64_t step, const TrainSchedule& schedule) {
  if (schedule.total_steps < 1) throw UsageError("total_steps must be >= 1");
  if (schedule.cut_frac <= 0.0 || schedule.cut_frac >= 1.0) {
    throw UsageError("cut_frac must lie in (0, 1)");
  }
  if (schedule.ratio <= 1.0) throw UsageError("ratio must exceed 1");
  if (step < 0 || step > schedule.total_steps) {
    throw UsageError("step outside [0, total_steps]");
  }
  const double cut = std::max(
      1.0, std::floor(schedule.cut_frac * schedule.total_steps));
  double p;
  if (step < cut) {
    p = static_cast<double>(step) / cut;
  } else {
    p = 1.0 - (static_cast<double>(step) - cut) /
                  (cut * (1.0 / schedule.cut_frac - 1.0));
  }
  p = std::clamp(p, 0.0, 1.0);
  return schedule.lr_max * (1.0 + p * (schedule.ratio - 1.0)) / schedule.ratio;
}

namespace {

// Systematic probability-proportional-to-size sampling without replacement:
// exactly `want` distinct items with inclusion probability want * p_j /
// total, after splitting off items whose scaled weight reaches certainty.
// Exact inclusion probabilities make the proposal correction unbiased, and
// the exhaustive case degenerates to every item with probability 1.
struct PpsDraw {
  std::vector<int> items;
  std::vector<double> inclusion;  // aligned with items
};

PpsDraw SystematicPpsSample(const std::vector<int>& pool,
                            const std::vector<double>& weights, int want,
                            std::mt19937_64& rng) {
  PpsDraw draw;
  std::vector<int> active = pool;
  int remaining = want;
  while (remaining > 0 && !active.empty()) {
    double total = 0.0;
    for (int j : active) total += weights[j];
    std::vector<int> still;
    bool split = false;
    for (int j : active) {
      if (remaining * weights[j] >= total) {
        draw.items.push_back(j);
        draw.inclusion.push_back(1.0);
        --remaining;
        split = true;
      } else {
        still.push_back(j);
      }
    }
    active.swap(still);
    if (!split) break;
  }
  if (remaining > 0 && !active.empty()) {
    double total = 0.0;
    for (int j : active) total += weights[j];
    const double stride = total / remaining;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double position = unit(rng) * stride;
    double cumulative = 0.0;
    size_t idx = 0;
    for (int m = 0; m < remaining; ++m) {
      double point = position + m * stride;
      while (idx < active.size() &&
             cumulative + weights[active[idx]] <= point) {
        cumulative += weights[active[idx]];
        ++idx;
      }
      if (idx >= active.size()) break;  // float edge at the upper boundary
      draw.items.push_back(active[idx]);
      draw.inclusion.push_back(
          std::min(1.0, remaining * weights[active[idx]] / total));
      cumulative += weights[active[idx]];
      ++idx;
    }
  }
  return draw;
}

}  // namespace

double SampledSoftmaxLoss(const LstmModel& model,
                          const Eigen::MatrixXd& final_hidden,
                          const std::vector<int>& targets, int sample_count,
                          const std::vector<double>& proposal, uint64_t seed) {
  const int vocab = model.config.vocab_size;
  if (sample_count >= vocab) {
    throw UsageError("sample_count must be below vocab_size; "
                     "use the full softmax instead");
  }
  if (sample_count < 1) throw UsageError("sample_count must be >= 1");
  if (static_cast<int>(proposal.size()) != vocab) {
    throw UsageError("proposal size must match vocab_size");
  }
  const int n = static_cast<int>(targets.size());
  if (n == 0 || final_hidden.cols() != n) {
    throw UsageError("activations and targets disagree");
  }
  for (double p : proposal) {
    if (p <= 0.0 || !std::isfinite(p)) {
      throw UsageError("proposal weights must be positive and finite");
    }
  }

  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd& decoder = model.decoder();

  double total_bits = 0.0;
  for (int i = 0; i < n; ++i) {
    const int target = targets[i];
    if (target < 0 || target >= vocab) throw DataError("target out of range");
    std::vector<int> pool;
    pool.reserve(vocab - 1);
    for (int j = 0; j < vocab; ++j) {
      if (j != target) pool.push_back(j);
    }
    PpsDraw negatives = SystematicPpsSample(pool, proposal, sample_count, rng);

    const Eigen::VectorXd h = final_hidden.col(i);
    auto logit = [&](int j) {
      return decoder.row(j).dot(h) + model.out_bias(j);
    };
    const double z_target = logit(target);
    double max_z = z_target;
    std::vector<double> zs;
    zs.reserve(negatives.items.size() + 1);
    zs.push_back(z_target);
    for (size_t s = 0; s < negatives.items.size(); ++s) {
      double z = logit(negatives.items[s]) - std::log(negatives.inclusion[s]);
      zs.push_back(z);
      max_z = std::max(max_z, z);
    }
    double lse = 0.0;
    for (double z : zs) lse += std::exp(z - max_z);
    lse = max_z + std::log(lse);
    total_bits += (lse - z_target) / M_LN2;
  }
  return total_bits / n;
}

LstmTrainResult TrainLstm(const LstmConfig& config,
                          const std::vector<int>& train_stream,
                          const std::vector<int>& valid_stream,
                          const LstmTrainOptions& options) {
  config.Validate();
  if (options.epochs < 1) throw UsageError("epochs must be >= 1");
  if (options.batch_size < 1) throw UsageError("batch_size must be >= 1");
  const int batch = options.batch_size;
  const int64_t per_row = static_cast<int64_t>(train_stream.size()) / batch;
  if (per_row < 2) {
    throw DataError("training stream too short for batch size " +
                    std::to_string(batch));
  }

  LstmModel model = InitModel(config);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> jitter(0.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrainSchedule schedule = options.schedule;
  if (schedule.total_steps <= 0) {
    int64_t est_steps_per_epoch =
        std::max<int64_t>(1, (per_row - 1 + config.bptt_len - 1) /
                                 config.bptt_len);
    schedule.total_steps = est_steps_per_epoch * options.epochs;
  }

  auto window_length = [&]() {
    if (!options.randomize_window) return config.bptt_len;
    double base = unit(rng) < 0.95 ? config.bptt_len : config.bptt_len / 2.0;
    double len = base + jitter(rng);
    len = std::clamp(len, 5.0, 2.0 * config.bptt_len);
    return std::max(1, static_cast<int>(std::lround(len)));
  };

  LstmTrainResult result;
  result.best_val_ppl = std::numeric_limits<double>::infinity();
  int64_t global_step = 0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    LstmState state = ZeroState(config, batch);
    int64_t pos = 0;
    double epoch_bits = 0.0;
    int64_t epoch_tokens = 0;
    double lr = schedule.lr_max / schedule.ratio;
    while (pos + 1 < per_row) {
      int window = window_length();
      window = static_cast<int>(
          std::min<int64_t>(window, per_row - 1 - pos));
      IdBatch inputs(batch), targets(batch);
      for (int b = 0; b < batch; ++b) {
        const int64_t row_start = b * per_row;
        inputs[b].assign(
            train_stream.begin() + row_start + pos,
            train_stream.begin() + row_start + pos + window);
        targets[b].assign(
            train_stream.begin() + row_start + pos + 1,
            train_stream.begin() + row_start + pos + 1 + window);
      }
      lr = Stlr(std::min(global_step, schedule.total_steps), schedule);
      DropoutMasks masks = MakeDropoutMasks(config, batch, rng());
      bool use_dropout = config.dropout_embed > 0.0 ||
                         config.dropout_hidden > 0.0 ||
                         config.dropout_output > 0.0;
      StepResult step = BackwardAndStep(&model, inputs, targets, &state, lr,
                                        use_dropout ? &masks : nullptr);
      epoch_bits += step.loss_bits * window * batch;
      epoch_tokens += static_cast<int64_t>(window) * batch;
      pos += window;
      ++global_step;
    }
    double train_xent =
        epoch_tokens == 0 ? 0.0 : epoch_bits / static_cast<double>(epoch_tokens);
    double val_ppl = StreamPerplexity(model, valid_stream);
    result.log.push_back({epoch, train_xent, val_ppl, lr});
    if (val_ppl < result.best_val_ppl) {
      result.best_val_ppl = val_ppl;
      result.model = model;
    }
  }
  return result;
}

std::string FormatEpochLog(const std::vector<EpochLogRow>& log) {
  std::string out = "epoch\ttrain_xent\tval_ppl\tlr\n";
  for (const auto& row : log) {
    out += std::to_string(row.epoch) + "\t" + FormatDouble(row.train_xent) +
           "\t" + FormatDouble(row.val_ppl) + "\t" + FormatDouble(row.lr) +
           "\n";
  }
  return out;
}

double StreamPerplexity(const LstmModel& model,
                        const std::vector<int>& stream) {
  const int64_t len = static_cast<int64_t>(stream.size());
  if (len < 2) throw DataError("validation stream too short");
  const int window = model.config.bptt_len;
  LstmState state = ZeroState(model.config, 1);
  double total_bits = 0.0;
  int64_t count = 0;
  int64_t pos = 0;
  while (pos + 1 < len) {
    int w = static_cast<int>(std::min<int64_t>(window, len - 1 - pos));
    IdBatch inputs(1), targets(1);
    inputs[0].assign(stream.begin() + pos, stream.begin() + pos + w);
    targets[0].assign(stream.begin() + pos + 1, stream.begin() + pos + 1 + w);
    ForwardResult fwd = Forward(model, inputs, state);
    state = std::move(fwd.state);
    for (int t = 0; t < w; ++t) {
      total_bits -= fwd.log_probs[t](targets[0][t], 0) / M_LN2;
      ++count;
    }
    pos += w;
  }
  return std::exp2(total_bits / static_cast<double>(count));
}

namespace {

void WriteTensor(std::ofstream& out, const std::string& name,
                 const Eigen::MatrixXd& m) {
  out << "tensor\t" << name << "\t" << m.rows() << "\t" << m.cols() << "\n";
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd ReadTensor(std::ifstream& in, const std::string& path,
                           const std::string& expected_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(path + ": truncated checkpoint");
  }
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cols.size() != 4 || cols[0] != "tensor" || cols[1] != expected_name) {
    throw DataError(path + ": expected tensor '" + expected_name + "'");
  }
  Eigen::MatrixXd m(ParseInt(cols[2]), ParseInt(cols[3]));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw DataError(path + ": truncated tensor data");
  return m;
}

}  // namespace

void LstmModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << "lstm-checkpoint\t1\n";
  out << "layers\t" << config.layers << "\n";
  out << "embedding_dim\t" << config.embedding_dim << "\n";
  out << "hidden_dim\t" << config.hidden_dim << "\n";
  out << "vocab_size\t" << config.vocab_size << "\n";
  out << "bptt_len\t" << config.bptt_len << "\n";
  out << "dropout_embed\t" << FormatDouble(config.dropout_embed) << "\n";
  out << "dropout_hidden\t" << FormatDouble(config.dropout_hidden) << "\n";
  out << "dropout_output\t" << FormatDouble(config.dropout_output) << "\n";
  out << "tie_weights\t" << (config.tie_weights ? 1 : 0) << "\n";
  out << "seed\t" << config.seed << "\n";
  out << "clip_norm\t" << FormatDouble(config.clip_norm) << "\n";

  WriteTensor(out, "embedding", embedding);
  for (int l = 0; l < config.layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    WriteTensor(out, prefix + ".w_input", layers[l].w_input);
    WriteTensor(out, prefix + ".w_recur", layers[l].w_recur);
    WriteTensor(out, prefix + ".bias", layers[l].bias);
  }
  if (!config.tie_weights) WriteTensor(out, "out_proj", out_proj);
  WriteTensor(out, "out_bias", out_bias);
  if (!out) throw DataError("write failed: " + path);
}

LstmModel LstmModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "lstm-checkpoint\t1") {
    throw DataError(path + ": not an lstm checkpoint");
  }
  auto header = [&](const std::string& name) {
    if (!std::getline(in, line)) {
      throw DataError(path + ": truncated header");
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != name) {
      throw DataError(path + ": expected header '" + name + "'");
    }
    return line.substr(tab + 1);
  };
  LstmModel model;
  model.config.layers = static_cast<int>(ParseInt(header("layers")));
  model.config.embedding_dim =
      static_cast<int>(ParseInt(header("embedding_dim")));
  model.config.hidden_dim = static_cast<int>(ParseInt(header("hidden_dim")));
  model.config.vocab_size = static_cast<int>(ParseInt(header("vocab_size")));
  model.config.bptt_len = static_cast<int>(ParseInt(header("bptt_len")));
  model.config.dropout_embed = ParseDouble(header("dropout_embed"));
  model.config.dropout_hidden = ParseDouble(header("dropout_hidden"));
  model.config.dropout_output = ParseDouble(header("dropout_output"));
  model.config.tie_weights = ParseInt(header("tie_weights")) != 0;
  model.config.seed = static_cast<uint64_t>(ParseInt(header("seed")));
  model.config.clip_norm = ParseDouble(header("clip_norm"));
  model.config.Validate();

  model.embedding = ReadTensor(in, path, "embedding");
  model.layers.resize(model.config.layers);
  for (int l = 0; l < model.config.layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    model.layers[l].w_input = ReadTensor(in, path, prefix + ".w_input");
    model.layers[l].w_recur = ReadTensor(in, path, prefix + ".w_recur");
    model.layers[l].bias = ReadTensor(in, path, prefix + ".bias");
  }
  if (!model.config.tie_weights) {
    model.out_proj = ReadTensor(in, path, "out_proj");
  }
  model.out_bias = ReadTensor(in, path, "out_bias");
  return model;
}

}  // namespace neural
}  // namespace sublm
