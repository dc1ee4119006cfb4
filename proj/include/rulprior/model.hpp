// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rulprior/data_ingest.hpp"
#include "rulprior/graph.hpp"
#include "rulprior/layers.hpp"
#include "rulprior/vq.hpp"

namespace rulprior::model {

struct ModelConfig {
  std::size_t window_length = 20;  // T
  std::size_t features = 17;       // F
  std::size_t latent_sequences = 10;  // S
  std::size_t latent_dim = 32;        // E
  std::size_t codebook_size = 25;     // N_e
  std::size_t model_dim = 48;
  std::size_t ffn_hidden = 0;  // 0 means 4 * model_dim
  std::size_t encoder_layers = 3;
  std::size_t encoder_heads = 3;
  std::size_t decoder_layers = 2;
  std::size_t decoder_heads = 3;
  double beta = 0.25;
  double learning_rate = 2e-4;
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;
  double rul_cap = 125.0;
  nn::PositionOrigin position_origin = nn::PositionOrigin::Zero;

  std::size_t hidden_width() const noexcept { return ffn_hidden ? ffn_hidden : 4 * model_dim; }
  /// Throws ErrorKind::Config on zero sizes or indivisible head counts.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double total = 0.0;
  double task = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
};

/// Quantization decisions held fixed so the training objective becomes a
/// smooth function of the parameters near one point; used by gradient
/// checks to reproduce the straight-through estimator with finite
/// differences.
struct FrozenAssignment {
  std::vector<std::size_t> indices;
  nn::Tensor z_e;
  nn::Tensor selected;
};

struct ForwardPass {
  nn::NodeId z_e;
  vq::QuantizationResult quantized;
  nn::NodeId prediction;  // normalized RUL (RUL / cap), unclamped
  vq::LossNodes loss;
};

/// Encoder (input projection, positional encoding, Transformer blocks,
/// flatten-and-project to S x E), codebook, and decoder (projection,
/// positional encoding, Transformer blocks, mean pool, scalar head).
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  const nn::Tensor& codebook() const noexcept { return codebook_.value; }

  /// Builds the training objective for one window on g. The task term
  /// compares RUL / cap against target_rul / cap.
  ForwardPass forward(nn::Graph& g, const nn::Tensor& window, double target_rul,
                      const FrozenAssignment* frozen = nullptr) const;

  nn::Tensor encode(const nn::Tensor& window) const;
  /// Head output in RUL units without clamping.
  double decode_raw(const nn::Tensor& z_q) const;
  /// decode_raw clamped to [0, cap].
  double decode(const nn::Tensor& z_q) const;
  std::vector<std::size_t> latent_states(const nn::Tensor& window) const;
  double predict(const nn::Tensor& window) const;

  // Preprocessing the model was trained against.
  data::FeatureSpec features;
  data::NormalizationStats stats;
  std::vector<EpochStats> log;

 private:
  void check_window(const nn::Tensor& window) const;
  nn::NodeId encode_node(nn::Graph& g, const nn::Tensor& window) const;
  nn::NodeId decode_node(nn::Graph& g, nn::NodeId z_q) const;

  ModelConfig config_;
  nn::Tensor encoder_positions_;
  nn::Tensor decoder_positions_;
  nn::Parameter input_w_, input_b_;
  std::vector<nn::EncoderBlock> encoder_;
  nn::Parameter latent_w_, latent_b_;
  nn::Parameter codebook_;
  nn::Parameter decoder_in_w_, decoder_in_b_;
  std::vector<nn::EncoderBlock> decoder_;
  nn::Parameter head_w_, head_b_;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Seeded mini-batch Adam on the vector-quantized objective. Throws
/// ErrorKind::Numeric naming the epoch and batch if the loss turns non-finite.
Model train(const std::vector<const data::TimeWindow*>& windows, const ModelConfig& config,
            const EpochCallback& on_epoch = {});

std::string model_to_json(const Model& m);
/// Throws ErrorKind::Validation on unknown versions or shape mismatches.
Model model_from_json(const std::string& text);

}  // namespace rulprior::model
