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

#include "rulprior/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"
#include "rulprior/errors.hpp"

namespace rulprior::metrics {
namespace {

void check_lengths(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.empty()) fail(ErrorKind::Domain, "no predictions to score");
  if (predicted.size() != truth.size()) {
    fail(ErrorKind::Domain, std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " ground-truth values");
  }
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  check_lengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double h = predicted[i] - truth[i];
    total += h * h;
  }
  return std::sqrt(total / static_cast<double>(predicted.size()));
}

double phm_contribution(double h) {
  return h < 0.0 ? std::exp(-h / 13.0) - 1.0 : std::exp(h / 10.0) - 1.0;
}

double phm_score(std::span<const double> predicted, std::span<const double> truth) {
  check_lengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += phm_contribution(predicted[i] - truth[i]);
  return total;
}

EvaluationReport evaluate(std::vector<UnitResult> units) {
  for (auto& u : units) u.error = u.predicted - u.truth;
  std::stable_sort(units.begin(), units.end(), [](const UnitResult& a, const UnitResult& b) {
    if (a.truth != b.truth) return a.truth < b.truth;
    return a.unit_id < b.unit_id;
  });
  std::vector<double> predicted, truth;
  for (const auto& u : units) {
    predicted.push_back(u.predicted);
    truth.push_back(u.truth);
  }
  EvaluationReport report;
  report.rmse = rmse(predicted, truth);
  report.score = phm_score(predicted, truth);
  report.units = std::move(units);
  return report;
}

std::string report_to_csv(const EvaluationReport& report) {
  std::string out = "unit_id,predicted,truth,error\n";
  for (const auto& u : report.units) {
    out += std::to_string(u.unit_id) + "," + number(u.predicted) + "," + number(u.truth) + "," +
           number(u.error) + "\n";
  }
  out += "# rmse=" + number(report.rmse) + " score=" + number(report.score) +
         " n=" + std::to_string(report.count()) + "\n";
  return out;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : report.units) {
    units.push_back({{"unit_id", u.unit_id},
                     {"predicted", u.predicted},
                     {"truth", u.truth},
                     {"error", u.error}});
  }
  nlohmann::json doc = {{"format", "rulprior.report"},
                        {"version", 1},
                        {"rmse", report.rmse},
                        {"score", report.score},
                        {"count", report.count()},
                        {"units", units}};
  return doc.dump(2);
}

}  // namespace rulprior::metrics
