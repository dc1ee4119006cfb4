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
#include <vector>

#include "rulprior/graph.hpp"
#include "rulprior/rng.hpp"
#include "rulprior/tensor.hpp"

namespace rulprior::nn {

enum class PositionOrigin { Zero, One };

/// Sinusoidal encoding: column 2j holds sin(pos / 10000^(2j/d)), column
/// 2j+1 the matching cos. Row r encodes position r (or r+1 with One).
Tensor positional_encoding(std::size_t seq_len, std::size_t dim,
                           PositionOrigin origin = PositionOrigin::Zero);

/// softmax(Q K^T / sqrt(d_k)) V
NodeId scaled_dot_attention(Graph& g, NodeId q, NodeId k, NodeId v);

struct AttentionHead {
  Parameter w_query;  // [d, d/h]
  Parameter w_key;
  Parameter w_value;
};

struct MultiHeadAttention {
  std::vector<AttentionHead> heads;
  Parameter w_out;  // [d, d]
};

struct FeedForward {
  Parameter w1;  // [d, hidden]
  Parameter b1;  // [1, hidden]
  Parameter w2;  // [hidden, d]
  Parameter b2;  // [1, d]
};

struct LayerNorm {
  Parameter gain;  // [1, d]
  Parameter bias;
};

/// Post-norm Transformer encoder block:
///   x = norm1(x + attention(x)); x = norm2(x + ffn(x))
struct EncoderBlock {
  MultiHeadAttention attention;
  LayerNorm norm1;
  FeedForward ffn;
  LayerNorm norm2;
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Parameter init_weight(std::string name, std::size_t fan_in, std::size_t fan_out, SplitMix64& rng);
Parameter init_bias(std::string name, std::size_t fan_in, std::size_t width, SplitMix64& rng);

MultiHeadAttention make_attention(const std::string& prefix, std::size_t dim, std::size_t heads,
                                  SplitMix64& rng);
FeedForward make_feed_forward(const std::string& prefix, std::size_t dim, std::size_t hidden,
                              SplitMix64& rng);
LayerNorm make_layer_norm(const std::string& prefix, std::size_t dim);
EncoderBlock make_encoder_block(const std::string& prefix, std::size_t dim, std::size_t heads,
                                std::size_t hidden, SplitMix64& rng);

NodeId multi_head_attention(Graph& g, NodeId x, const MultiHeadAttention& mha);
NodeId feed_forward(Graph& g, NodeId x, const FeedForward& ffn);
NodeId layer_norm(Graph& g, NodeId x, const LayerNorm& ln);
NodeId encoder_block(Graph& g, NodeId x, const EncoderBlock& block);

/// Appends pointers to every parameter of the block, in a fixed order.
void collect(EncoderBlock& block, std::vector<Parameter*>& out);

// Tensor-level conveniences built on a throwaway graph.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);
Tensor feed_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2);

}  // namespace rulprior::nn
