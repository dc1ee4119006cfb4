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
#include <functional>
#include <string>
#include <vector>

#include "rulprior/data_ingest.hpp"
#include "rulprior/metrics.hpp"
#include "rulprior/model.hpp"
#include "rulprior/run_config.hpp"
#include "rulprior/similarity.hpp"

namespace rulprior::pipeline {

// Output files, relative to RunConfig::out_dir.
inline constexpr const char* kTrainWindowsFile = "train_windows.json";
inline constexpr const char* kTestWindowsFile = "test_windows.json";
inline constexpr const char* kTrainingLogFile = "training_log.csv";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kTrajectoriesFile = "trajectories.csv";
inline constexpr const char* kReportCsvFile = "report.csv";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kSortedPredictionsFile = "sorted_predictions.csv";

using Logger = std::function<void(const std::string&)>;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// Hex FNV-1a of a serialized model; libraries record it.
std::string fingerprint(const std::string& model_json);

struct PreprocessSummary {
  std::size_t train_units = 0;
  std::size_t train_windows = 0;
  std::size_t test_units = 0;
  std::size_t test_windows = 0;
};

/// Reads the raw files, fits min-max stats on the training set and writes
/// the windowed datasets. The test set is processed when a test file is
/// configured; it then requires the RUL file.
PreprocessSummary preprocess(const RunConfig& cfg, const Logger& log = {});

/// Trains on <out>/train_windows.json and writes the model and its log.
model::Model train(const RunConfig& cfg, const Logger& log = {});

/// Priors of every training window with its RUL target.
similarity::PriorLibrary build_library(const model::Model& model, const std::string& model_json,
                                       const data::WindowedDataset& train,
                                       const prior::PriorOptions& options);
similarity::PriorLibrary build_library(const RunConfig& cfg, const Logger& log = {});

struct UnitPrediction {
  int unit_id = 0;
  double predicted = 0.0;
};

struct WindowPrediction {
  int unit_id = 0;
  int window_id = 0;
  double predicted = 0.0;
};

struct Predictions {
  std::vector<UnitPrediction> units;
  std::vector<WindowPrediction> trajectory;  // filled only on request
};

/// Folds each unit's windows into its final prior and averages the RUL of
/// the k nearest library entries.
Predictions predict(const model::Model& model, const similarity::PriorLibrary& library,
                    const data::WindowedDataset& test, const prior::PriorOptions& options,
                    std::size_t k, bool with_trajectory);
/// Checks that model, library and test windows belong together, then writes
/// predictions.csv (and trajectories.csv on request).
Predictions predict(const RunConfig& cfg, const Logger& log = {});

std::string predictions_to_csv(const std::vector<UnitPrediction>& predictions);
std::vector<UnitPrediction> predictions_from_csv(const std::string& text);

/// Pairs predictions with the ground truth stored in the test windows.
metrics::EvaluationReport evaluate(const std::vector<UnitPrediction>& predictions,
                                   const data::WindowedDataset& test);
metrics::EvaluationReport evaluate(const RunConfig& cfg, const Logger& log = {});

}  // namespace rulprior::pipeline
