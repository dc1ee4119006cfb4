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

#include "rulprior/layers.hpp"

#include <cmath>
#include <string>

#include "rulprior/errors.hpp"

namespace rulprior::nn {

Tensor positional_encoding(std::size_t seq_len, std::size_t dim, PositionOrigin origin) {
  if (dim == 0 || dim % 2 != 0) {
    fail(ErrorKind::Domain, "positional encoding dimension must be even, got " + std::to_string(dim));
  }
  if (seq_len == 0) fail(ErrorKind::Domain, "positional encoding needs at least one position");
  Tensor pe = Tensor::matrix(seq_len, dim);
  const double offset = origin == PositionOrigin::One ? 1.0 : 0.0;
  for (std::size_t r = 0; r < seq_len; ++r) {
    const double pos = static_cast<double>(r) + offset;
    for (std::size_t j = 0; j < dim / 2; ++j) {
      const double rate = std::pow(10000.0, static_cast<double>(2 * j) / static_cast<double>(dim));
      pe(r, 2 * j) = std::sin(pos / rate);
      pe(r, 2 * j + 1) = std::cos(pos / rate);
    }
  }
  return pe;
}

NodeId scaled_dot_attention(Graph& g, NodeId q, NodeId k, NodeId v) {
  const Tensor& Q = g.value(q);
  const Tensor& K = g.value(k);
  const Tensor& V = g.value(v);
  if (Q.cols() != K.cols() || K.rows() != V.rows()) {
    fail(ErrorKind::Domain, "attention: query/key widths or key/value lengths disagree");
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(K.cols()));
  NodeId logits = g.scale(g.matmul(q, g.transpose(k)), inv_sqrt_dk);
  return g.matmul(g.softmax_rows(logits), v);
}

Parameter init_weight(std::string name, std::size_t fan_in, std::size_t fan_out, SplitMix64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor w = Tensor::matrix(fan_in, fan_out);
  for (double& x : w.values()) x = rng.uniform(-bound, bound);
  return Parameter(std::move(name), std::move(w));
}

Parameter init_bias(std::string name, std::size_t fan_in, std::size_t width, SplitMix64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor b = Tensor::matrix(1, width);
  for (double& x : b.values()) x = rng.uniform(-bound, bound);
  return Parameter(std::move(name), std::move(b));
}

MultiHeadAttention make_attention(const std::string& prefix, std::size_t dim, std::size_t heads,
                                  SplitMix64& rng) {
  if (heads == 0 || dim % heads != 0) {
    fail(ErrorKind::Config, "model dimension " + std::to_string(dim) +
                                " is not divisible by head count " + std::to_string(heads));
  }
  const std::size_t head_dim = dim / heads;
  MultiHeadAttention mha;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string p = prefix + ".head" + std::to_string(h);
    mha.heads.push_back(AttentionHead{init_weight(p + ".wq", dim, head_dim, rng),
                                      init_weight(p + ".wk", dim, head_dim, rng),
                                      init_weight(p + ".wv", dim, head_dim, rng)});
  }
  mha.w_out = init_weight(prefix + ".wo", dim, dim, rng);
  return mha;
}

FeedForward make_feed_forward(const std::string& prefix, std::size_t dim, std::size_t hidden,
                              SplitMix64& rng) {
  return FeedForward{init_weight(prefix + ".w1", dim, hidden, rng),
                     init_bias(prefix + ".b1", dim, hidden, rng),
                     init_weight(prefix + ".w2", hidden, dim, rng),
                     init_bias(prefix + ".b2", hidden, dim, rng)};
}

LayerNorm make_layer_norm(const std::string& prefix, std::size_t dim) {
  return LayerNorm{Parameter(prefix + ".gain", Tensor::matrix(1, dim, 1.0)),
                   Parameter(prefix + ".bias", Tensor::matrix(1, dim, 0.0))};
}

EncoderBlock make_encoder_block(const std::string& prefix, std::size_t dim, std::size_t heads,
                                std::size_t hidden, SplitMix64& rng) {
  EncoderBlock block;
  block.attention = make_attention(prefix + ".mha", dim, heads, rng);
  block.norm1 = make_layer_norm(prefix + ".norm1", dim);
  block.ffn = make_feed_forward(prefix + ".ffn", dim, hidden, rng);
  block.norm2 = make_layer_norm(prefix + ".norm2", dim);
  return block;
}

NodeId multi_head_attention(Graph& g, NodeId x, const MultiHeadAttention& mha) {
  const std::size_t dim = g.value(x).cols();
  if (mha.heads.empty() || dim % mha.heads.size() != 0) {
    fail(ErrorKind::Config, "model dimension not divisible by head count");
  }
  std::vector<NodeId> outputs;
  outputs.reserve(mha.heads.size());
  for (const AttentionHead& head : mha.heads) {
    NodeId q = g.matmul(x, g.parameter(head.w_query));
    NodeId k = g.matmul(x, g.parameter(head.w_key));
    NodeId v = g.matmul(x, g.parameter(head.w_value));
    outputs.push_back(scaled_dot_attention(g, q, k, v));
  }
  NodeId joined = outputs.size() == 1 ? outputs[0] : g.concat_cols(outputs);
  return g.matmul(joined, g.parameter(mha.w_out));
}

NodeId feed_forward(Graph& g, NodeId x, const FeedForward& ffn) {
  NodeId hidden = g.relu(g.add_row(g.matmul(x, g.parameter(ffn.w1)), g.parameter(ffn.b1)));
  return g.add_row(g.matmul(hidden, g.parameter(ffn.w2)), g.parameter(ffn.b2));
}

NodeId layer_norm(Graph& g, NodeId x, const LayerNorm& ln) {
  return g.layer_norm(x, g.parameter(ln.gain), g.parameter(ln.bias));
}

NodeId encoder_block(Graph& g, NodeId x, const EncoderBlock& block) {
  NodeId attended = layer_norm(g, g.add(x, multi_head_attention(g, x, block.attention)), block.norm1);
  return layer_norm(g, g.add(attended, feed_forward(g, attended, block.ffn)), block.norm2);
}

void collect(EncoderBlock& block, std::vector<Parameter*>& out) {
  for (AttentionHead& h : block.attention.heads) {
    out.push_back(&h.w_query);
    out.push_back(&h.w_key);
    out.push_back(&h.w_value);
  }
  out.push_back(&block.attention.w_out);
  out.push_back(&block.norm1.gain);
  out.push_back(&block.norm1.bias);
  out.push_back(&block.ffn.w1);
  out.push_back(&block.ffn.b1);
  out.push_back(&block.ffn.w2);
  out.push_back(&block.ffn.b2);
  out.push_back(&block.norm2.gain);
  out.push_back(&block.norm2.bias);
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  Graph g;
  return g.value(scaled_dot_attention(g, g.constant(q), g.constant(k), g.constant(v)));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  Graph g;
  return g.value(g.layer_norm(g.constant(x), g.constant(gain), g.constant(bias)));
}

Tensor feed_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2) {
  Graph g;
  NodeId hidden = g.relu(g.add_row(g.matmul(g.constant(x), g.constant(w1)), g.constant(b1)));
  return g.value(g.add_row(g.matmul(hidden, g.constant(w2)), g.constant(b2)));
}

}  // namespace rulprior::nn
