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
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "rulprior/data_ingest.hpp"
#include "rulprior/model.hpp"
#include "rulprior/prior.hpp"

namespace rulprior {

/// Everything one pipeline run needs. Values are layered: defaults, then the
/// dataset preset, then the JSON config file, then explicit overrides.
struct RunConfig {
  std::optional<std::string> dataset;  // FD001..FD004
  std::string data_dir = ".";
  std::string train_file;
  std::string test_file;
  std::string rul_file;
  std::string out_dir = ".";
  std::string model_file;    // defaults to <out>/model.json
  std::string library_file;  // defaults to <out>/library.json

  data::FeatureSpec features = data::FeatureSpec::defaults();
  model::ModelConfig model;
  prior::PriorOptions prior;
  std::size_t neighbors = 30;  // |S_pi|
  bool intermediate_predictions = false;

  /// Applies the per-dataset hyperparameters (epochs, batch, window,
  /// codebook size, lambda). Throws ErrorKind::Config on unknown ids.
  void apply_preset(const std::string& dataset_id);

  /// Sets one field from its textual form; keys match the CLI flag names
  /// without the leading dashes. Throws ErrorKind::Config on unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Fills file paths implied by the dataset id and output directory.
  void resolve_paths();
  void validate() const;

  std::string model_path() const;
  std::string library_path() const;
  std::string out_path(const std::string& file) const;
};

/// defaults < preset (dataset from overrides or file) < file < overrides.
RunConfig resolve_config(const std::optional<std::string>& config_json,
                         const std::map<std::string, std::string>& overrides);

}  // namespace rulprior
