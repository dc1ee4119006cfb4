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

#include "rulprior/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rulprior/errors.hpp"
#include "rulprior/prior.hpp"
#include "rulprior/rng.hpp"

namespace rulprior::pipeline {
namespace {

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

data::WindowedDataset load_dataset(const std::string& path) {
  try {
    return data::dataset_from_json(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void check_model_matches(const model::Model& m, const data::WindowedDataset& ds, const std::string& what) {
  if (m.config().window_length != ds.window_length || m.config().features != ds.features.count() ||
      m.features.sensor_indices != ds.features.sensor_indices ||
      m.features.settings != ds.features.settings || m.stats.min != ds.stats.min ||
      m.stats.max != ds.stats.max) {
    fail(ErrorKind::Validation, what + " was preprocessed differently from the model's training data");
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << contents;
  if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

std::string fingerprint(const std::string& model_json) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(model_json)));
  return buf;
}

PreprocessSummary preprocess(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  if (cfg.train_file.empty()) fail(ErrorKind::Config, "no training file configured");
  auto train = data::parse_cmapss_file(cfg.train_file, data::SeriesKind::Training);
  const auto stats = data::fit_minmax(train, cfg.features);
  const auto train_ds = data::make_dataset(train, data::SeriesKind::Training, cfg.model.window_length,
                                           cfg.features, stats, cfg.model.rul_cap);
  write_file(cfg.out_path(kTrainWindowsFile), data::dataset_to_json(train_ds));

  PreprocessSummary summary;
  summary.train_units = train_ds.units.size();
  summary.train_windows = train_ds.window_count();
  say(log, "train: " + std::to_string(summary.train_units) + " units, " +
               std::to_string(summary.train_windows) + " windows");

  if (!cfg.test_file.empty()) {
    auto test = data::parse_cmapss_file(cfg.test_file, data::SeriesKind::Test);
    if (cfg.rul_file.empty()) fail(ErrorKind::Io, "a test file needs a RUL file (--rul-file)");
    std::ifstream rul(cfg.rul_file);
    if (!rul) fail(ErrorKind::Io, "cannot open RUL file " + cfg.rul_file);
    data::attach_truth_rul(test, data::read_lines(rul));
    const auto test_ds = data::make_dataset(test, data::SeriesKind::Test, cfg.model.window_length,
                                            cfg.features, stats, cfg.model.rul_cap);
    write_file(cfg.out_path(kTestWindowsFile), data::dataset_to_json(test_ds));
    summary.test_units = test_ds.units.size();
    summary.test_windows = test_ds.window_count();
    say(log, "test: " + std::to_string(summary.test_units) + " units, " +
                 std::to_string(summary.test_windows) + " windows");
  }
  return summary;
}

model::Model train(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  const auto ds = load_dataset(cfg.out_path(kTrainWindowsFile));
  model::ModelConfig mc = cfg.model;
  if (mc.window_length != ds.window_length) {
    fail(ErrorKind::Validation, "configured window length " + std::to_string(mc.window_length) +
                                    " differs from the preprocessed " + std::to_string(ds.window_length));
  }
  mc.features = ds.features.count();
  mc.rul_cap = ds.rul_cap;

  std::vector<const data::TimeWindow*> windows;
  for (const auto& u : ds.units) {
    for (const auto& w : u.windows) windows.push_back(&w);
  }
  say(log, "training on " + std::to_string(windows.size()) + " windows for " +
               std::to_string(mc.epochs) + " epochs");
  model::Model m = model::train(windows, mc, [&](const model::EpochStats& e) {
    say(log, "epoch " + std::to_string(e.epoch) + " loss " + number(e.total));
  });
  m.features = ds.features;
  m.stats = ds.stats;

  write_file(cfg.model_path(), model::model_to_json(m));
  std::string csv = "epoch,total,task,codebook,commitment\n";
  for (const auto& e : m.log) {
    csv += std::to_string(e.epoch) + "," + number(e.total) + "," + number(e.task) + "," +
           number(e.codebook) + "," + number(e.commitment) + "\n";
  }
  write_file(cfg.out_path(kTrainingLogFile), csv);
  return m;
}

similarity::PriorLibrary build_library(const model::Model& model, const std::string& model_json,
                                       const data::WindowedDataset& train,
                                       const prior::PriorOptions& options) {
  check_model_matches(model, train, "training data");
  similarity::PriorLibrary library(model.config().codebook_size);
  library.model_fingerprint = fingerprint(model_json);
  library.lambda = options.lambda;
  library.epsilon = options.epsilon;
  for (const auto& unit : train.units) {
    const auto priors = prior::priors_for_system(unit.windows, model, options);
    for (std::size_t i = 0; i < priors.size(); ++i) {
      library.add(similarity::LibraryEntry{unit.unit_id, priors[i].window_id, priors[i].state.pi,
                                           unit.windows[i].rul_target});
    }
  }
  return library;
}

similarity::PriorLibrary build_library(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  const std::string model_json = read_file(cfg.model_path());
  const model::Model m = model::model_from_json(model_json);
  if (m.config().codebook_size != cfg.model.codebook_size) {
    fail(ErrorKind::Validation, "model has " + std::to_string(m.config().codebook_size) +
                                    " codebook entries but the configuration asks for " +
                                    std::to_string(cfg.model.codebook_size));
  }
  const auto ds = load_dataset(cfg.out_path(kTrainWindowsFile));
  auto library = build_library(m, model_json, ds, cfg.prior);
  write_file(cfg.library_path(), similarity::library_to_json(library));
  say(log, "library: " + std::to_string(library.size()) + " entries");
  return library;
}

Predictions predict(const model::Model& model, const similarity::PriorLibrary& library,
                    const data::WindowedDataset& test, const prior::PriorOptions& options,
                    std::size_t k, bool with_trajectory) {
  if (library.states() != model.config().codebook_size) {
    fail(ErrorKind::Validation, "library has " + std::to_string(library.states()) +
                                    " states but the model has " +
                                    std::to_string(model.config().codebook_size) + " codebook entries");
  }
  check_model_matches(model, test, "test data");
  Predictions out;
  for (const auto& unit : test.units) {
    if (unit.windows.empty()) fail(ErrorKind::Validation, "test unit " + std::to_string(unit.unit_id) + " has no windows");
    const auto priors = prior::priors_for_system(unit.windows, model, options);
    if (with_trajectory) {
      for (const auto& p : priors) {
        const auto nn = similarity::nearest(p.state.pi, library, k);
        out.trajectory.push_back({unit.unit_id, p.window_id, similarity::predict_rul(nn)});
      }
    }
    const auto neighbors = similarity::nearest(priors.back().state.pi, library, k);
    out.units.push_back({unit.unit_id, similarity::predict_rul(neighbors)});
  }
  return out;
}

Predictions predict(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  const std::string model_json = read_file(cfg.model_path());
  const model::Model m = model::model_from_json(model_json);
  const auto library = similarity::library_from_json(read_file(cfg.library_path()));
  if (library.states() != m.config().codebook_size) {
    fail(ErrorKind::Validation, "library has " + std::to_string(library.states()) +
                                    " states but the model has " +
                                    std::to_string(m.config().codebook_size) + " codebook entries");
  }
  if (library.model_fingerprint != fingerprint(model_json)) {
    fail(ErrorKind::Validation, "library was built from a different model");
  }
  const auto test = load_dataset(cfg.out_path(kTestWindowsFile));
  auto preds = predict(m, library, test, cfg.prior, cfg.neighbors, cfg.intermediate_predictions);
  write_file(cfg.out_path(kPredictionsFile), predictions_to_csv(preds.units));
  if (cfg.intermediate_predictions) {
    std::string csv = "unit_id,window_id,predicted_rul\n";
    for (const auto& p : preds.trajectory) {
      csv += std::to_string(p.unit_id) + "," + std::to_string(p.window_id) + "," + number(p.predicted) + "\n";
    }
    write_file(cfg.out_path(kTrajectoriesFile), csv);
  }
  say(log, "predicted " + std::to_string(preds.units.size()) + " units");
  return preds;
}

std::string predictions_to_csv(const std::vector<UnitPrediction>& predictions) {
  std::string csv = "unit_id,predicted_rul\n";
  for (const auto& p : predictions) csv += std::to_string(p.unit_id) + "," + number(p.predicted) + "\n";
  return csv;
}

std::vector<UnitPrediction> predictions_from_csv(const std::string& text) {
  std::vector<UnitPrediction> out;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("unit_id", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::Parse, "predictions line " + std::to_string(line_no) + " lacks a comma");
    }
    UnitPrediction p;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + comma, p.unit_id);
    auto r2 = std::from_chars(b + comma + 1, b + line.size(), p.predicted);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != b + line.size()) {
      fail(ErrorKind::Parse, "predictions line " + std::to_string(line_no) + " is malformed");
    }
    out.push_back(p);
  }
  return out;
}

metrics::EvaluationReport evaluate(const std::vector<UnitPrediction>& predictions,
                                   const data::WindowedDataset& test) {
  std::map<int, double> truth;
  for (const auto& u : test.units) {
    if (!u.truth_rul) fail(ErrorKind::Validation, "test unit " + std::to_string(u.unit_id) + " has no ground truth");
    truth[u.unit_id] = *u.truth_rul;
  }
  if (predictions.size() != truth.size()) {
    fail(ErrorKind::Validation, std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(truth.size()) + " test units");
  }
  std::vector<metrics::UnitResult> rows;
  std::map<int, bool> seen;
  for (const auto& p : predictions) {
    auto it = truth.find(p.unit_id);
    if (it == truth.end() || seen[p.unit_id]) {
      fail(ErrorKind::Validation, "prediction for unknown or repeated unit " + std::to_string(p.unit_id));
    }
    seen[p.unit_id] = true;
    rows.push_back({p.unit_id, p.predicted, it->second, 0.0});
  }
  return metrics::evaluate(std::move(rows));
}

metrics::EvaluationReport evaluate(const RunConfig& cfg, const Logger& log) {
  const auto predictions = predictions_from_csv(read_file(cfg.out_path(kPredictionsFile)));
  const auto test = load_dataset(cfg.out_path(kTestWindowsFile));
  auto report = evaluate(predictions, test);
  write_file(cfg.out_path(kReportCsvFile), metrics::report_to_csv(report));
  write_file(cfg.out_path(kReportJsonFile), metrics::report_to_json(report));
  std::string table = "rank,unit_id,truth,predicted\n";
  for (std::size_t i = 0; i < report.units.size(); ++i) {
    const auto& u = report.units[i];
    table += std::to_string(i + 1) + "," + std::to_string(u.unit_id) + "," + number(u.truth) + "," +
             number(u.predicted) + "\n";
  }
  write_file(cfg.out_path(kSortedPredictionsFile), table);
  say(log, "rmse " + number(report.rmse) + " score " + number(report.score) + " over " +
               std::to_string(report.count()) + " units");
  return report;
}

}  // namespace rulprior::pipeline
