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

#include "rulprior/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "rulprior/errors.hpp"

namespace rulprior::similarity {
namespace {

using nlohmann::json;

constexpr int kLibraryFormatVersion = 1;

void check_distribution(std::span<const double> p, const char* name) {
  double mass = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::Domain, std::string(name) + " has a negative or non-finite entry");
    }
    mass += v;
  }
  if (std::abs(mass - 1.0) > kMassTolerance) {
    fail(ErrorKind::Domain, std::string(name) + " sums to " + std::to_string(mass) + ", not 1");
  }
}

void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    fail(ErrorKind::Domain, "distributions have lengths " + std::to_string(p.size()) + " and " +
                                std::to_string(q.size()));
  }
  check_distribution(p, "p");
  check_distribution(q, "q");
}

double kl_unchecked(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInfiniteDivergence;
    total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double js_unchecked(std::span<const double> p, std::span<const double> q) {
  // Per-term form of 0.5 KL(p||m) + 0.5 KL(q||m); m_i > 0 wherever either
  // operand is positive, so no term is infinite.
  double from_p = 0.0;
  double from_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) from_p += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) from_q += q[i] * std::log(q[i] / m);
  }
  return std::clamp(0.5 * (from_p + from_q), 0.0, std::numbers::ln2);
}

bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.divergence != b.divergence) return a.divergence < b.divergence;
  if (a.system_id != b.system_id) return a.system_id < b.system_id;
  if (a.window_id != b.window_id) return a.window_id < b.window_id;
  return a.index < b.index;
}

}  // namespace

double kl(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  return std::max(0.0, kl_unchecked(p, q));
}

double js(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  return js_unchecked(p, q);
}

void PriorLibrary::add(LibraryEntry entry) {
  if (entry.pi.size() != states_) {
    fail(ErrorKind::Validation, "prior for system " + std::to_string(entry.system_id) + " has " +
                                    std::to_string(entry.pi.size()) + " states, library has " +
                                    std::to_string(states_));
  }
  try {
    check_distribution(entry.pi, "prior");
  } catch (const Error& e) {
    fail(ErrorKind::Validation, "system " + std::to_string(entry.system_id) + " window " +
                                    std::to_string(entry.window_id) + ": " + e.what());
  }
  if (!(entry.rul >= 0.0)) fail(ErrorKind::Validation, "library RUL must be non-negative");
  entries_.push_back(std::move(entry));
}

NeighborSet nearest(std::span<const double> query, const PriorLibrary& library, std::size_t k,
                    std::optional<int> exclude_system) {
  if (k == 0) fail(ErrorKind::Domain, "k must be at least 1");
  if (query.size() != library.states()) {
    fail(ErrorKind::Domain, "query has " + std::to_string(query.size()) + " states, library has " +
                                std::to_string(library.states()));
  }
  check_distribution(query, "query");

  std::vector<Neighbor> all;
  all.reserve(library.size());
  const auto& entries = library.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LibraryEntry& e = entries[i];
    if (exclude_system && e.system_id == *exclude_system) continue;
    all.push_back(Neighbor{i, e.system_id, e.window_id, e.rul, js_unchecked(query, e.pi)});
  }
  if (all.empty()) fail(ErrorKind::Query, "no eligible library entries");

  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    neighbor_before);
  all.resize(keep);
  return NeighborSet{std::move(all)};
}

double predict_rul(const NeighborSet& neighbors) {
  if (neighbors.neighbors.empty()) fail(ErrorKind::Query, "cannot predict from an empty neighbor set");
  double total = 0.0;
  for (const auto& n : neighbors.neighbors) total += n.rul;
  return total / static_cast<double>(neighbors.size());
}

std::string library_to_json(const PriorLibrary& library) {
  json entries = json::array();
  for (const auto& e : library.entries()) {
    entries.push_back(
        {{"system_id", e.system_id}, {"window_id", e.window_id}, {"rul", e.rul}, {"pi", e.pi}});
  }
  json doc = {
      {"format", "rulprior.library"},
      {"version", kLibraryFormatVersion},
      {"states", library.states()},
      {"model_fingerprint", library.model_fingerprint},
      {"lambda", library.lambda},
      {"epsilon", library.epsilon},
      {"entries", entries},
  };
  return doc.dump();
}

PriorLibrary library_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "rulprior.library") fail(ErrorKind::Validation, "not a prior library file");
    if (doc.at("version").get<int>() != kLibraryFormatVersion) {
      fail(ErrorKind::Validation, "unsupported prior library version");
    }
    PriorLibrary library(doc.at("states").get<std::size_t>());
    library.model_fingerprint = doc.at("model_fingerprint").get<std::string>();
    library.lambda = doc.at("lambda").get<double>();
    library.epsilon = doc.at("epsilon").get<double>();
    for (const auto& e : doc.at("entries")) {
      library.add(LibraryEntry{e.at("system_id").get<int>(), e.at("window_id").get<int>(),
                               e.at("pi").get<std::vector<double>>(), e.at("rul").get<double>()});
    }
    return library;
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed prior library: ") + e.what());
  }
}

}  // namespace rulprior::similarity
