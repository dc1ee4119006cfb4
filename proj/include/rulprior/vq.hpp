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

namespace rulprior::vq {

/// N_e x E embedding matrix, uniform in [-1/N_e, 1/N_e].
nn::Parameter make_codebook(std::size_t entries, std::size_t dim, SplitMix64& rng);

struct QuantizationResult {
  std::vector<std::size_t> indices;  // one per row of z_e
  nn::Tensor z_q;                    // codebook rows, copied exactly
  nn::Tensor z_e;
};

/// Nearest codebook row by Euclidean distance; ties go to the lower index.
QuantizationResult quantize(const nn::Tensor& z_e, const nn::Tensor& codebook);

struct LossNodes {
  nn::NodeId total;
  nn::NodeId task;        // (prediction - target)^2
  nn::NodeId codebook;    // ||sg(z_e) - e||^2, reaches the codebook only
  nn::NodeId commitment;  // beta ||z_e - sg(e)||^2, reaches the encoder only
};

/// Builds the three-term objective. selected holds the gathered codebook
/// rows for the current assignment.
LossNodes vq_loss(nn::Graph& g, nn::NodeId prediction, nn::NodeId target, nn::NodeId z_e,
                  nn::NodeId selected, double beta);

struct LossBreakdown {
  double total = 0.0;
  double task = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
};

LossBreakdown vq_loss(const nn::Tensor& prediction, const nn::Tensor& target, const nn::Tensor& z_e,
                      const nn::Tensor& selected, double beta);

/// Decoder input: value of z_q, gradient passed straight to z_e.
inline nn::NodeId straight_through(nn::Graph& g, nn::NodeId z_e, nn::NodeId z_q) {
  return g.straight_through(z_e, z_q);
}

}  // namespace rulprior::vq
