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

#include "rulprior/vq.hpp"

#include <limits>
#include <string>

#include "rulprior/errors.hpp"

namespace rulprior::vq {

nn::Parameter make_codebook(std::size_t entries, std::size_t dim, SplitMix64& rng) {
  if (entries < 2) fail(ErrorKind::Config, "codebook needs at least two entries");
  const double bound = 1.0 / static_cast<double>(entries);
  nn::Tensor e = nn::Tensor::matrix(entries, dim);
  for (double& v : e.values()) v = rng.uniform(-bound, bound);
  return nn::Parameter("codebook", std::move(e));
}

QuantizationResult quantize(const nn::Tensor& z_e, const nn::Tensor& codebook) {
  const std::size_t dim = codebook.cols();
  if (z_e.cols() != dim) {
    fail(ErrorKind::Domain, "latent width " + std::to_string(z_e.cols()) +
                                " does not match codebook width " + std::to_string(dim));
  }
  QuantizationResult out;
  out.z_e = z_e;
  out.z_q = nn::Tensor::matrix(z_e.rows(), dim);
  out.indices.resize(z_e.rows());
  for (std::size_t i = 0; i < z_e.rows(); ++i) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < codebook.rows(); ++k) {
      double dist = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = z_e(i, j) - codebook(k, j);
        dist += diff * diff;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    out.indices[i] = best;
    for (std::size_t j = 0; j < dim; ++j) out.z_q(i, j) = codebook(best, j);
  }
  return out;
}

LossNodes vq_loss(nn::Graph& g, nn::NodeId prediction, nn::NodeId target, nn::NodeId z_e,
                  nn::NodeId selected, double beta) {
  if (beta < 0.0) fail(ErrorKind::Domain, "commitment weight must be non-negative");
  LossNodes out;
  out.task = g.sum_squares(g.sub(prediction, target));
  out.codebook = g.sum_squares(g.sub(g.stop_gradient(z_e), selected));
  out.commitment = g.scale(g.sum_squares(g.sub(z_e, g.stop_gradient(selected))), beta);
  out.total = g.add(g.add(out.task, out.codebook), out.commitment);
  return out;
}

LossBreakdown vq_loss(const nn::Tensor& prediction, const nn::Tensor& target, const nn::Tensor& z_e,
                      const nn::Tensor& selected, double beta) {
  nn::Graph g;
  const LossNodes nodes = vq_loss(g, g.constant(prediction), g.constant(target), g.constant(z_e),
                                  g.constant(selected), beta);
  return LossBreakdown{g.value(nodes.total).item(), g.value(nodes.task).item(),
                       g.value(nodes.codebook).item(), g.value(nodes.commitment).item()};
}

}  // namespace rulprior::vq
