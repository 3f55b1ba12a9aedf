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

#ifndef SUBLM_LSTM_H_
#define SUBLM_LSTM_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sublm {
namespace neural {

struct LstmConfig {
  int layers = 4;
  int embedding_dim = 400;
  int hidden_dim = 1150;
  int vocab_size = 0;
  int bptt_len = 70;
  double dropout_embed = 0.0;
  double dropout_hidden = 0.0;
  double dropout_output = 0.0;
  bool tie_weights = true;
  uint64_t seed = 1;
  double clip_norm = 0.25;

  void Validate() const;
  // The last layer projects back to embedding width so the decoder can share
  // the embedding matrix.
  int LayerHiddenDim(int layer) const {
    return layer == layers - 1 ? embedding_dim : hidden_dim;
  }
  int LayerInputDim(int layer) const {
    return layer == 0 ? embedding_dim : LayerHiddenDim(layer - 1);
  }
};

// Gate order in the stacked 4h rows: input, forget, cell, output.
struct LstmLayerParams {
  Eigen::MatrixXd w_input;  // 4h x in
  Eigen::MatrixXd w_recur;  // 4h x h
  Eigen::VectorXd bias;     // 4h
};

struct LstmModel {
  LstmConfig config;
  Eigen::MatrixXd embedding;  // vocab x emb; doubles as decoder when tied
  std::vector<LstmLayerParams> layers;
  Eigen::MatrixXd out_proj;  // vocab x emb; empty when tied
  Eigen::VectorXd out_bias;  // vocab

  int64_t ParameterCount() const;
  // Decoder weight view: embedding when tied, out_proj otherwise.
  const Eigen::MatrixXd& decoder() const {
    return config.tie_weights ? embedding : out_proj;
  }

  void Save(const std::string& path) const;
  static LstmModel Load(const std::string& path);
};

// Deterministic initialization: embeddings uniform in [-0.1, 0.1], LSTM
// weights uniform scaled by 1/sqrt(layer hidden size), biases zero.
LstmModel InitModel(const LstmConfig& config);

struct LstmState {
  std::vector<Eigen::MatrixXd> h;  // per layer: dim x batch
  std::vector<Eigen::MatrixXd> c;
};

LstmState ZeroState(const LstmConfig& config, int batch);

// Token ids, one row per batch stream: ids[b][t].
using IdBatch = std::vector<std::vector<int>>;

// Variational dropout: one mask per site, constant across time steps within
// a sequence.  Masks hold 0 or 1/(1-p) (inverted dropout).
struct DropoutMasks {
  Eigen::MatrixXd embed;                 // emb x batch
  std::vector<Eigen::MatrixXd> hidden;   // per inter-layer boundary
  Eigen::MatrixXd output;                // emb x batch
};

DropoutMasks MakeDropoutMasks(const LstmConfig& config, int batch,
                              uint64_t seed);

struct ForwardResult {
  // Natural-log probabilities, one vocab x batch matrix per time step.
  std::vector<Eigen::MatrixXd> log_probs;
  LstmState state;
};

// Pure forward pass.  masks == nullptr disables dropout (evaluation mode).
ForwardResult Forward(const LstmModel& model, const IdBatch& inputs,
                      const LstmState& state,
                      const DropoutMasks* masks = nullptr);

// Mean cross-entropy in bits per token: -lg P(target) averaged over every
// (batch, time) position.
double Loss(const std::vector<Eigen::MatrixXd>& log_probs,
            const IdBatch& targets);

// Forward + Loss as one scalar function of the parameters; the finite
// difference oracle in the tests perturbs parameters against this.
double ForwardLoss(const LstmModel& model, const IdBatch& inputs,
                   const IdBatch& targets, const LstmState& state,
                   const DropoutMasks* masks = nullptr);

struct LstmGradients {
  Eigen::MatrixXd embedding;
  std::vector<LstmLayerParams> layers;
  Eigen::MatrixXd out_proj;
  Eigen::VectorXd out_bias;
  double loss_bits = 0.0;

  double Norm() const;
  void Scale(double factor);
};

// Full backpropagation through the window.  final_state, when non-null,
// receives the carried (h, c) for stateful continuation.
LstmGradients BackwardPass(const LstmModel& model, const IdBatch& inputs,
                           const IdBatch& targets, const LstmState& state,
                           const DropoutMasks* masks = nullptr,
                           LstmState* final_state = nullptr);

// Gradient clipping by global norm followed by an SGD update.  Returns the
// pre-clip gradient norm.  Non-finite loss raises NumericalError.
double ApplySgdUpdate(LstmModel* model, const LstmGradients& grads,
                      double learning_rate);

struct StepResult {
  double loss_bits;
  double grad_norm;
};

StepResult BackwardAndStep(LstmModel* model, const IdBatch& inputs,
                           const IdBatch& targets, LstmState* state,
                           double learning_rate,
                           const DropoutMasks* masks = nullptr);

// Slanted triangular learning rate: linear warm-up to lr_max at
// cut = floor(cut_frac * total_steps), then linear decay back to
// lr_max / ratio.
struct TrainSchedule {
  int64_t total_steps = 1;
  double lr_max = 0.1;
  double cut_frac = 0.1;
  double ratio = 32.0;
};

double Stlr(int64_t step, const TrainSchedule& schedule);

// Softmax cross-entropy approximated over each target plus sample_count
// negatives drawn without replacement from the proposal distribution, with
// logits corrected by the inclusion probability.  sample_count must be
// below vocab_size; sample_count == vocab_size - 1 reproduces the full loss.
double SampledSoftmaxLoss(const LstmModel& model,
                          const Eigen::MatrixXd& final_hidden,
                          const std::vector<int>& targets, int sample_count,
                          const std::vector<double>& proposal, uint64_t seed);

struct LstmTrainOptions {
  int epochs = 1;
  int batch_size = 8;
  TrainSchedule schedule;
  uint64_t seed = 1;
  // Randomized BPTT window: base length with probability 0.95, else half,
  // plus Gaussian jitter (sigma 5), clamped to [5, 2 * bptt_len].
  bool randomize_window = true;
};

struct EpochLogRow {
  int epoch;
  double train_xent;  // bits per token
  double val_ppl;
  double lr;
};

struct LstmTrainResult {
  LstmModel model;  // best-validation checkpoint
  std::vector<EpochLogRow> log;
  double best_val_ppl = 0.0;
};

// Trains on a flat id stream (sentences joined with </s> ids by the caller);
// validation perplexity is per-token over the validation stream.
LstmTrainResult TrainLstm(const LstmConfig& config,
                          const std::vector<int>& train_stream,
                          const std::vector<int>& valid_stream,
                          const LstmTrainOptions& options);

std::string FormatEpochLog(const std::vector<EpochLogRow>& log);

// Per-token validation perplexity (base 2) of a stream under the model.
double StreamPerplexity(const LstmModel& model,
                        const std::vector<int>& stream);

}  // namespace neural
}  // namespace sublm

#endif  // SUBLM_LSTM_H_
