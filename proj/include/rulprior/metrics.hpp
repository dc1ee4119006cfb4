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

#include <span>
#include <string>
#include <vector>

namespace rulprior::metrics {

double rmse(std::span<const double> predicted, std::span<const double> truth);

/// PHM08 penalty of a single error h = predicted - truth:
/// exp(-h/13) - 1 when early (h < 0), exp(h/10) - 1 otherwise.
double phm_contribution(double h);

/// Sum of phm_contribution over all units.
double phm_score(std::span<const double> predicted, std::span<const double> truth);

struct UnitResult {
  int unit_id = 0;
  double predicted = 0.0;
  double truth = 0.0;
  double error = 0.0;  // predicted - truth
};

struct EvaluationReport {
  std::vector<UnitResult> units;  // ascending by truth, then unit id
  double rmse = 0.0;
  double score = 0.0;

  std::size_t count() const noexcept { return units.size(); }
};

EvaluationReport evaluate(std::vector<UnitResult> units);

/// unit_id,predicted,truth,error rows followed by a "# rmse=... score=..." line.
std::string report_to_csv(const EvaluationReport& report);
std::string report_to_json(const EvaluationReport& report);

}  // namespace rulprior::metrics
