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

#include "rulprior/prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rulprior/data_ingest.hpp"
#include "rulprior/errors.hpp"
#include "rulprior/model.hpp"

namespace rulprior::prior {

TransitionMatrix estimate_transition(std::span<const std::size_t> sequence, std::size_t states) {
  if (sequence.size() < 2) {
    fail(ErrorKind::Domain, "transition estimation needs at least two states, got " +
                                std::to_string(sequence.size()));
  }
  if (states == 0) fail(ErrorKind::Domain, "state space is empty");
  for (std::size_t s : sequence) {
    if (s >= states) {
      fail(ErrorKind::Domain, "state " + std::to_string(s) + " outside [0, " + std::to_string(states) + ")");
    }
  }
  TransitionMatrix out{StateMatrix(states), std::vector<std::size_t>(states, 0)};
  for (std::size_t m = 0; m + 1 < sequence.size(); ++m) {
    out.probabilities(sequence[m], sequence[m + 1]) += 1.0;
    ++out.visits[sequence[m]];
  }
  for (std::size_t a = 0; a < states; ++a) {
    if (out.visits[a] == 0) continue;
    const double n = static_cast<double>(out.visits[a]);
    for (std::size_t b = 0; b < states; ++b) out.probabilities(a, b) /= n;
  }
  return out;
}

SmoothedTransitionMatrix ema_update(const std::optional<SmoothedTransitionMatrix>& previous,
                                    const TransitionMatrix& latest, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::Domain, "lambda must lie in [0, 1]");
  if (!previous) return SmoothedTransitionMatrix{latest.probabilities, lambda, 1};

  const std::size_t n = latest.probabilities.states();
  if (previous->values.states() != n) {
    fail(ErrorKind::Domain, "EMA operands have different state counts");
  }
  SmoothedTransitionMatrix out{StateMatrix(n), lambda, previous->windows + 1};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      out.values(a, b) = lambda * previous->values(a, b) + (1.0 - lambda) * latest.probabilities(a, b);
    }
  }
  return out;
}

StateMatrix regularize(const StateMatrix& m, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
  const std::size_t n = m.states();
  StateMatrix out(n);
  for (std::size_t a = 0; a < n; ++a) {
    double total = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      out(a, b) = m(a, b) + epsilon;
      total += out(a, b);
    }
    for (std::size_t b = 0; b < n; ++b) out(a, b) /= total;
  }
  return out;
}

namespace {

// Squaring starts after this many plain steps.
constexpr std::size_t kPlainSteps = 32;

double fixed_point_residual(const StateMatrix& m, std::span<const double> pi, std::vector<double>& scratch) {
  const std::size_t n = m.states();
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) scratch[b] += pi[a] * m(a, b);
  }
  double r = 0.0;
  for (std::size_t b = 0; b < n; ++b) r += std::abs(scratch[b] - pi[b]);
  return r;
}

StateMatrix square_stochastic(const StateMatrix& m) {
  const std::size_t n = m.states();
  StateMatrix out(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < n; ++k) {
      const double w = m(a, k);
      for (std::size_t b = 0; b < n; ++b) out(a, b) += w * m(k, b);
    }
    double total = 0.0;
    for (std::size_t b = 0; b < n; ++b) total += out(a, b);
    for (std::size_t b = 0; b < n; ++b) out(a, b) /= total;
  }
  return out;
}

}  // namespace

SteadyState steady_state(const StateMatrix& m, double tolerance, std::size_t max_iterations) {
  const std::size_t n = m.states();
  if (n == 0) fail(ErrorKind::Domain, "steady state of an empty matrix");
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  std::vector<double> scratch(n);
  // pi advances by stride = M^(2^j). Nearly absorbing states would
  // otherwise need on the order of 1/epsilon plain steps.
  StateMatrix stride = m;
  double residual = fixed_point_residual(m, pi, scratch);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    if (it > kPlainSteps) stride = square_stochastic(stride);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      const double weight = pi[a];
      for (std::size_t b = 0; b < n; ++b) next[b] += weight * stride(a, b);
    }
    double mass = 0.0;
    for (double v : next) mass += v;
    for (double& v : next) v /= mass;
    pi.swap(next);
    residual = fixed_point_residual(m, pi, scratch);
    if (!std::isfinite(residual)) break;
    if (residual <= tolerance) return SteadyState{std::move(pi), residual, it};
  }
  fail(ErrorKind::Numeric, "steady state did not converge within " + std::to_string(max_iterations) +
                               " iterations (residual " + std::to_string(residual) + ")");
}

std::vector<WindowPrior> priors_for_sequences(std::span<const std::vector<std::size_t>> sequences,
                                              std::span<const int> window_ids, std::size_t states,
                                              const PriorOptions& options) {
  if (sequences.size() != window_ids.size()) {
    fail(ErrorKind::Domain, "one window id is needed per state sequence");
  }
  std::vector<WindowPrior> out;
  out.reserve(sequences.size());
  std::optional<SmoothedTransitionMatrix> smoothed;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const TransitionMatrix p = estimate_transition(sequences[i], states);
    smoothed = ema_update(smoothed, p, options.lambda);
    const StateMatrix positive = regularize(smoothed->values, options.epsilon);
    out.push_back(WindowPrior{window_ids[i],
                              steady_state(positive, options.tolerance, options.max_iterations)});
  }
  return out;
}

std::vector<WindowPrior> priors_for_system(std::span<const data::TimeWindow> windows,
                                           const model::Model& model, const PriorOptions& options) {
  std::vector<std::vector<std::size_t>> sequences;
  std::vector<int> ids;
  sequences.reserve(windows.size());
  ids.reserve(windows.size());
  for (const auto& w : windows) {
    if (!ids.empty() && w.window_id <= ids.back()) {
      fail(ErrorKind::Domain, "windows must be ordered by window id");
    }
    sequences.push_back(model.latent_states(w.values));
    ids.push_back(w.window_id);
  }
  return priors_for_sequences(sequences, ids, model.config().codebook_size, options);
}

}  // namespace rulprior::prior
