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
#include <optional>
#include <span>
#include <vector>

namespace rulprior::data {
struct TimeWindow;
}
namespace rulprior::model {
class Model;
}

namespace rulprior::prior {

/// Dense row-major square matrix over the latent states.
class StateMatrix {
 public:
  StateMatrix() = default;
  explicit StateMatrix(std::size_t states, double fill = 0.0)
      : states_(states), cells_(states * states, fill) {}

  std::size_t states() const noexcept { return states_; }
  double& operator()(std::size_t from, std::size_t to) { return cells_[from * states_ + to]; }
  double operator()(std::size_t from, std::size_t to) const { return cells_[from * states_ + to]; }
  std::span<const double> row(std::size_t from) const {
    return std::span<const double>(cells_).subspan(from * states_, states_);
  }
  std::span<const double> cells() const noexcept { return cells_; }

  friend bool operator==(const StateMatrix&, const StateMatrix&) = default;

 private:
  std::size_t states_ = 0;
  std::vector<double> cells_;
};

/// Empirical transition probabilities of one state sequence. Rows of states
/// never left stay all-zero.
struct TransitionMatrix {
  StateMatrix probabilities;
  std::vector<std::size_t> visits;  // visits that have a successor
};

struct SmoothedTransitionMatrix {
  StateMatrix values;
  double lambda = 0.0;
  std::size_t windows = 0;  // number of matrices folded in
};

struct SteadyState {
  std::vector<double> pi;
  double residual = 0.0;  // ||pi M - pi||_1
  std::size_t iterations = 0;
};

struct PriorOptions {
  double lambda = 0.9;
  double epsilon = 1e-6;
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

/// Counts the S-1 adjacent pairs; row a is divided by the number of visits
/// to a that are followed by another state. Throws ErrorKind::Domain for
/// fewer than two states or indices outside [0, states).
TransitionMatrix estimate_transition(std::span<const std::size_t> sequence, std::size_t states);

/// lambda * previous + (1 - lambda) * latest. Without a previous matrix the
/// result is the latest estimate itself.
SmoothedTransitionMatrix ema_update(const std::optional<SmoothedTransitionMatrix>& previous,
                                    const TransitionMatrix& latest, double lambda);

/// Adds epsilon to every cell and renormalizes each row.
StateMatrix regularize(const StateMatrix& m, double epsilon);

/// Power iteration from the uniform vector; after a few plain steps the step
/// matrix is squared each iteration. Stops once ||pi M - pi||_1 <= tolerance.
/// Throws ErrorKind::Numeric with the final residual when it does not
/// converge.
SteadyState steady_state(const StateMatrix& m, double tolerance = 1e-10,
                         std::size_t max_iterations = 100000);

struct WindowPrior {
  int window_id = 0;
  SteadyState state;
};

/// Folds the state sequences of one system, in order, into one prior per
/// sequence.
std::vector<WindowPrior> priors_for_sequences(std::span<const std::vector<std::size_t>> sequences,
                                              std::span<const int> window_ids, std::size_t states,
                                              const PriorOptions& options);

/// Same fold with the latent states produced by a trained model.
std::vector<WindowPrior> priors_for_system(std::span<const data::TimeWindow> windows,
                                           const model::Model& model, const PriorOptions& options);

}  // namespace rulprior::prior
