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

#include "rulprior/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rulprior/errors.hpp"
#include "rulprior/rng.hpp"

namespace rulprior::synthetic {
namespace {

struct Channel {
  int sensor;
  double base;
  double amplitude;
};

constexpr Channel kChannels[] = {{2, 642.0, 8.0}, {3, 1590.0, 40.0}, {4, 1400.0, -30.0}};

std::vector<data::RawRecord> simulate(int unit_id, int life, SplitMix64& rng, double noise) {
  const double onset = rng.uniform(100.0, 140.0);
  const double shape = rng.uniform(1.1, 1.5);
  std::vector<data::RawRecord> out;
  for (int cycle = 1; cycle <= life; ++cycle) {
    data::RawRecord r;
    r.unit_id = unit_id;
    r.cycle = cycle;
    r.settings = {0.0, 0.0, 100.0};
    for (std::size_t s = 0; s < data::kSensorCount; ++s) r.sensors[s] = 10.0 * static_cast<double>(s + 1);
    const double rul = life - cycle;
    const double health = rul < onset ? std::pow((onset - rul) / onset, shape) : 0.0;
    for (const Channel& c : kChannels) {
      const double jitter = noise * std::abs(c.amplitude) * rng.normal();
      r.sensors[static_cast<std::size_t>(c.sensor - 1)] = c.base + c.amplitude * health + jitter;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<int> channel_sensors() {
  std::vector<int> out;
  for (const Channel& c : kChannels) out.push_back(c.sensor);
  return out;
}

Fleet generate(const FleetOptions& o) {
  if (o.train_units == 0 || o.min_life < 2 || o.max_life < o.min_life || o.min_truth < 0 ||
      o.max_truth < o.min_truth || o.min_truth >= o.min_life) {
    fail(ErrorKind::Config, "invalid synthetic fleet options");
  }
  const SplitMix64 root(o.seed);
  SplitMix64 rng = root.split("fleet");
  auto draw_int = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };

  Fleet fleet;
  int unit = 1;
  for (std::size_t i = 0; i < o.train_units; ++i, ++unit) {
    data::EngineSeries s;
    s.unit_id = unit;
    const int life = draw_int(o.min_life, o.max_life);
    s.records = simulate(unit, life, rng, o.noise);
    s.total_life = life;
    fleet.train.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < o.test_units; ++i) {
    data::EngineSeries s;
    s.unit_id = static_cast<int>(i) + 1;
    const int life = draw_int(o.min_life, o.max_life);
    const int truth = draw_int(o.min_truth, std::min(o.max_truth, life - 1));
    auto records = simulate(s.unit_id, life, rng, o.noise);
    records.resize(static_cast<std::size_t>(life - truth));
    s.records = std::move(records);
    s.truth_rul = truth;
    fleet.test.push_back(std::move(s));
  }
  return fleet;
}

void write_fleet(const Fleet& fleet, const std::string& dir, const std::string& tag) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const std::string& name) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    return out;
  };
  auto train = open("train_" + tag + ".txt");
  for (const auto& s : fleet.train) {
    for (const auto& r : s.records) train << data::format_record(r) << '\n';
  }
  auto test = open("test_" + tag + ".txt");
  auto rul = open("RUL_" + tag + ".txt");
  for (const auto& s : fleet.test) {
    for (const auto& r : s.records) test << data::format_record(r) << '\n';
    rul << s.truth_rul.value_or(0) << '\n';
  }
}

}  // namespace rulprior::synthetic
