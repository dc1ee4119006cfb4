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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "rulprior/graph.hpp"
#include "rulprior/model.hpp"
#include "rulprior/rng.hpp"

namespace rulprior::testing {

inline constexpr double kFdStep = 1e-5;
// Denominator floor so that gradients that are zero on both sides compare
// as equal.
inline constexpr double kRelFloor = 1e-6;
inline constexpr double kKinkMargin = 1e-3;

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  double relu_margin = 0.0;  // of the unperturbed point

  /// False when a ReLU input lies so close to zero that the finite
  /// difference step may cross the kink; such draws are resampled.
  bool smooth() const { return relu_margin >= kKinkMargin; }
};

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
  return std::abs(analytic - numeric) / scale;
}

inline nn::Tensor random_tensor(std::size_t rows, std::size_t cols, SplitMix64& rng, double lo = -1.0,
                                double hi = 1.0) {
  nn::Tensor t = nn::Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

using Builder = std::function<nn::NodeId(nn::Graph&)>;

/// Central differences of sum(build() * R) against backward(), where R is a
/// fixed random weighting. build must create its leaves from params.
inline GradCheck check_gradients(const Builder& build, const std::vector<nn::Parameter*>& params,
                                 std::uint64_t seed, double h = kFdStep) {
  SplitMix64 rng(seed);
  nn::Tensor weights;
  auto loss_of = [&](nn::Graph& g) {
    const nn::NodeId out = build(g);
    if (weights.size() == 0) weights = random_tensor(g.value(out).rows(), g.value(out).cols(), rng);
    return g.sum(g.mul(out, g.constant(weights)));
  };

  for (nn::Parameter* p : params) p->zero_grad();
  double margin = 0.0;
  {
    nn::Graph g;
    g.backward(loss_of(g));
    for (nn::Parameter* p : params) g.accumulate_into(*p);
    margin = g.relu_margin();
  }

  GradCheck result;
  result.relu_margin = margin;
  for (nn::Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      nn::Graph gp(false);
      const double up = gp.value(loss_of(gp)).item();
      p->value[i] = saved - h;
      nn::Graph gm(false);
      const double down = gm.value(loss_of(gm)).item();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_rel_error = std::max(result.max_rel_error, relative_error(p->grad[i], numeric));
      ++result.checked;
    }
  }
  return result;
}

/// Gradient of the full training objective with respect to every model
/// parameter. The quantization choice is frozen at the unperturbed point so
/// the finite differences see the straight-through surrogate.
inline GradCheck check_model_gradients(model::Model& m, const nn::Tensor& window, double target_rul,
                                       double h = kFdStep) {
  const auto params = m.parameters();
  for (nn::Parameter* p : params) p->zero_grad();
  model::FrozenAssignment frozen;
  double margin = 0.0;
  {
    nn::Graph g;
    const auto fp = m.forward(g, window, target_rul);
    g.backward(fp.loss.total);
    for (nn::Parameter* p : params) g.accumulate_into(*p);
    frozen.indices = fp.quantized.indices;
    frozen.z_e = fp.quantized.z_e;
    frozen.selected = fp.quantized.z_q;
    margin = g.relu_margin();
  }
  auto loss_at = [&] {
    nn::Graph g(false);
    return g.value(m.forward(g, window, target_rul, &frozen).loss.total).item();
  };

  GradCheck result;
  result.relu_margin = margin;
  for (nn::Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss_at();
      p->value[i] = saved - h;
      const double down = loss_at();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_rel_error = std::max(result.max_rel_error, relative_error(p->grad[i], numeric));
      ++result.checked;
    }
  }
  return result;
}

/// The miniature configuration used for whole-model gradient checks.
inline model::ModelConfig miniature_config(std::uint64_t seed) {
  model::ModelConfig c;
  c.window_length = 4;
  c.features = 3;
  c.latent_sequences = 2;
  c.latent_dim = 4;
  c.codebook_size = 4;
  c.model_dim = 12;
  c.encoder_layers = 1;
  c.encoder_heads = 3;
  c.decoder_layers = 1;
  c.decoder_heads = 3;
  c.seed = seed;
  return c;
}

}  // namespace rulprior::testing
