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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rulprior::similarity {

/// Returned by kl() when p puts mass where q has none.
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

/// Tolerance on the total mass of a distribution.
inline constexpr double kMassTolerance = 1e-9;

/// Kullback-Leibler divergence in nats. Zero-mass terms of p contribute 0.
/// Throws ErrorKind::Domain on length mismatch, negative entries, or mass
/// off by more than kMassTolerance.
double kl(std::span<const double> p, std::span<const double> q);

/// Jensen-Shannon divergence in nats, always within [0, ln 2].
double js(std::span<const double> p, std::span<const double> q);

struct LibraryEntry {
  int system_id = 0;
  int window_id = 0;
  std::vector<double> pi;
  double rul = 0.0;
};

/// Steady-state priors with known RUL, built from run-to-failure data.
class PriorLibrary {
 public:
  PriorLibrary() = default;
  explicit PriorLibrary(std::size_t states) : states_(states) {}

  /// Throws ErrorKind::Validation if pi has the wrong length, does not sum
  /// to one, or rul is negative.
  void add(LibraryEntry entry);

  std::size_t states() const noexcept { return states_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<LibraryEntry>& entries() const noexcept { return entries_; }

  // Ties the library to the model that produced it.
  std::string model_fingerprint;
  double lambda = 0.0;
  double epsilon = 0.0;

 private:
  std::size_t states_ = 0;
  std::vector<LibraryEntry> entries_;
};

struct Neighbor {
  std::size_t index = 0;  // position in the library
  int system_id = 0;
  int window_id = 0;
  double rul = 0.0;
  double divergence = 0.0;
};

/// Ascending by divergence, then system id, then window id.
struct NeighborSet {
  std::vector<Neighbor> neighbors;

  std::size_t size() const noexcept { return neighbors.size(); }
};

/// Exhaustive JS scan over every entry not belonging to exclude_system.
/// Throws ErrorKind::Query when no entry is eligible, ErrorKind::Domain when
/// k is zero.
NeighborSet nearest(std::span<const double> query, const PriorLibrary& library, std::size_t k,
                    std::optional<int> exclude_system = std::nullopt);

/// Uniform mean of the neighbors' RUL. Throws ErrorKind::Query when empty.
double predict_rul(const NeighborSet& neighbors);

std::string library_to_json(const PriorLibrary& library);
/// Re-validates every entry. Throws ErrorKind::Validation on bad input.
PriorLibrary library_from_json(const std::string& text);

}  // namespace rulprior::similarity
