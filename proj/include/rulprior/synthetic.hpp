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

#include <cstdint>
#include <string>
#include <vector>

#include "rulprior/data_ingest.hpp"

namespace rulprior::synthetic {

/// A small run-to-failure fleet in C-MAPSS layout. Three channels
/// (sensors 2, 3, 4) follow a hidden health index that stays flat until a
/// random onset and then grows towards failure; the remaining columns are
/// constant.
struct FleetOptions {
  std::size_t train_units = 40;
  std::size_t test_units = 10;
  int min_life = 80;
  int max_life = 150;
  int min_truth = 10;   // RUL left in pruned test units
  int max_truth = 120;
  double noise = 0.04;  // relative to each channel's amplitude
  std::uint64_t seed = 0;
};

struct Fleet {
  std::vector<data::EngineSeries> train;
  std::vector<data::EngineSeries> test;  // truth_rul set
};

Fleet generate(const FleetOptions& options);

/// Sensors of the degrading channels, 1-based.
std::vector<int> channel_sensors();

/// Writes train_<tag>.txt, test_<tag>.txt and RUL_<tag>.txt into dir.
void write_fleet(const Fleet& fleet, const std::string& dir, const std::string& tag);

}  // namespace rulprior::synthetic
