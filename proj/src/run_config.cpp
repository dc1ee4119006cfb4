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

#include "rulprior/run_config.hpp"

#include <charconv>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "rulprior/errors.hpp"

namespace rulprior {
namespace {

struct Preset {
  const char* id;
  std::size_t epochs;
  std::size_t batch;
  std::size_t window;
  std::size_t codebook;
  double lambda;
};

constexpr Preset kPresets[] = {
    {"FD001", 100, 100, 20, 25, 0.9},
    {"FD002", 125, 256, 10, 45, 0.99},
    {"FD003", 100, 100, 20, 25, 0.9},
    {"FD004", 150, 256, 10, 60, 0.99},
};

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(ErrorKind::Config, "--" + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(ErrorKind::Config, "--" + key + " expects a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::Config, "--" + key + " expects true or false, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_u64(key, item)));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + json_scalar(v[i]);
    return out;
  }
  if (v.is_number_float()) return fmt(v.get<double>());
  return v.dump();
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace

void RunConfig::apply_preset(const std::string& dataset_id) {
  for (const Preset& p : kPresets) {
    if (dataset_id != p.id) continue;
    dataset = dataset_id;
    model.epochs = p.epochs;
    model.batch_size = p.batch;
    model.window_length = p.window;
    model.codebook_size = p.codebook;
    prior.lambda = p.lambda;
    model.latent_sequences = 10;
    model.latent_dim = 32;
    model.learning_rate = 2e-4;
    neighbors = 30;
    model.rul_cap = 125.0;
    return;
  }
  fail(ErrorKind::Config, "unknown dataset '" + dataset_id + "' (expected FD001..FD004)");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") apply_preset(value);
  else if (key == "data-dir") data_dir = value;
  else if (key == "train-file") train_file = value;
  else if (key == "test-file") test_file = value;
  else if (key == "rul-file") rul_file = value;
  else if (key == "out") out_dir = value;
  else if (key == "model") model_file = value;
  else if (key == "library") library_file = value;
  else if (key == "seed") model.seed = to_u64(key, value);
  else if (key == "epochs") model.epochs = to_size(key, value);
  else if (key == "batch") model.batch_size = to_size(key, value);
  else if (key == "window") model.window_length = to_size(key, value);
  else if (key == "codebook") model.codebook_size = to_size(key, value);
  else if (key == "latent-sequences") model.latent_sequences = to_size(key, value);
  else if (key == "latent-dim") model.latent_dim = to_size(key, value);
  else if (key == "model-dim") model.model_dim = to_size(key, value);
  else if (key == "ffn-hidden") model.ffn_hidden = to_size(key, value);
  else if (key == "encoder-layers") model.encoder_layers = to_size(key, value);
  else if (key == "encoder-heads") model.encoder_heads = to_size(key, value);
  else if (key == "decoder-layers") model.decoder_layers = to_size(key, value);
  else if (key == "decoder-heads") model.decoder_heads = to_size(key, value);
  else if (key == "beta") model.beta = to_double(key, value);
  else if (key == "learning-rate") model.learning_rate = to_double(key, value);
  else if (key == "rul-cap") model.rul_cap = to_double(key, value);
  else if (key == "position-origin") {
    const auto origin = to_size(key, value);
    if (origin > 1) fail(ErrorKind::Config, "--position-origin expects 0 or 1");
    model.position_origin = origin == 1 ? nn::PositionOrigin::One : nn::PositionOrigin::Zero;
  }
  else if (key == "lambda") prior.lambda = to_double(key, value);
  else if (key == "epsilon") prior.epsilon = to_double(key, value);
  else if (key == "tolerance") prior.tolerance = to_double(key, value);
  else if (key == "max-iterations") prior.max_iterations = to_size(key, value);
  else if (key == "k") neighbors = to_size(key, value);
  else if (key == "sensors") features.sensor_indices = to_int_list(key, value);
  else if (key == "settings") features.settings = static_cast<int>(to_size(key, value));
  else if (key == "intermediate-predictions") intermediate_predictions = to_bool(key, value);
  else fail(ErrorKind::Config, "unknown configuration key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "dataset") return dataset.value_or("");
  if (key == "data-dir") return data_dir;
  if (key == "train-file") return train_file;
  if (key == "test-file") return test_file;
  if (key == "rul-file") return rul_file;
  if (key == "out") return out_dir;
  if (key == "model") return model_path();
  if (key == "library") return library_path();
  if (key == "seed") return std::to_string(model.seed);
  if (key == "epochs") return std::to_string(model.epochs);
  if (key == "batch") return std::to_string(model.batch_size);
  if (key == "window") return std::to_string(model.window_length);
  if (key == "codebook") return std::to_string(model.codebook_size);
  if (key == "latent-sequences") return std::to_string(model.latent_sequences);
  if (key == "latent-dim") return std::to_string(model.latent_dim);
  if (key == "model-dim") return std::to_string(model.model_dim);
  if (key == "ffn-hidden") return std::to_string(model.hidden_width());
  if (key == "encoder-layers") return std::to_string(model.encoder_layers);
  if (key == "encoder-heads") return std::to_string(model.encoder_heads);
  if (key == "decoder-layers") return std::to_string(model.decoder_layers);
  if (key == "decoder-heads") return std::to_string(model.decoder_heads);
  if (key == "beta") return fmt(model.beta);
  if (key == "learning-rate") return fmt(model.learning_rate);
  if (key == "rul-cap") return fmt(model.rul_cap);
  if (key == "position-origin") return model.position_origin == nn::PositionOrigin::One ? "1" : "0";
  if (key == "lambda") return fmt(prior.lambda);
  if (key == "epsilon") return fmt(prior.epsilon);
  if (key == "tolerance") return fmt(prior.tolerance);
  if (key == "max-iterations") return std::to_string(prior.max_iterations);
  if (key == "k") return std::to_string(neighbors);
  if (key == "sensors") return join(features.sensor_indices);
  if (key == "settings") return std::to_string(features.settings);
  if (key == "intermediate-predictions") return intermediate_predictions ? "true" : "false";
  fail(ErrorKind::Config, "unknown configuration key '" + key + "'");
}

void RunConfig::resolve_paths() {
  if (dataset) {
    if (train_file.empty()) train_file = join_path(data_dir, "train_" + *dataset + ".txt");
    if (test_file.empty()) test_file = join_path(data_dir, "test_" + *dataset + ".txt");
    if (rul_file.empty()) rul_file = join_path(data_dir, "RUL_" + *dataset + ".txt");
  }
}

void RunConfig::validate() const {
  features.validate();
  model::ModelConfig probe = model;
  probe.features = features.count();
  probe.validate();
  if (neighbors == 0) fail(ErrorKind::Config, "k must be at least 1");
  if (!(prior.lambda >= 0.0 && prior.lambda <= 1.0)) fail(ErrorKind::Config, "lambda must lie in [0, 1]");
  if (!(prior.epsilon > 0.0)) fail(ErrorKind::Config, "epsilon must be positive");
  if (!(prior.tolerance > 0.0)) fail(ErrorKind::Config, "tolerance must be positive");
  if (model.latent_sequences < 2) {
    fail(ErrorKind::Config, "latent-sequences must be at least 2 to estimate transitions");
  }
}

std::string RunConfig::model_path() const {
  return model_file.empty() ? out_path("model.json") : model_file;
}

std::string RunConfig::library_path() const {
  return library_file.empty() ? out_path("library.json") : library_file;
}

std::string RunConfig::out_path(const std::string& file) const { return join_path(out_dir, file); }

RunConfig resolve_config(const std::optional<std::string>& config_json,
                         const std::map<std::string, std::string>& overrides) {
  nlohmann::json file = nlohmann::json::object();
  if (config_json) {
    try {
      file = nlohmann::json::parse(*config_json);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Config, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) fail(ErrorKind::Config, "config file must hold a JSON object");
  }

  RunConfig cfg;
  if (auto it = overrides.find("dataset"); it != overrides.end()) {
    cfg.apply_preset(it->second);
  } else if (file.contains("dataset")) {
    cfg.apply_preset(json_scalar(file["dataset"]));
  }
  for (const auto& [key, value] : file.items()) {
    if (key != "dataset") cfg.set(key, json_scalar(value));
  }
  for (const auto& [key, value] : overrides) {
    if (key != "dataset") cfg.set(key, value);
  }
  cfg.model.features = cfg.features.count();
  cfg.resolve_paths();
  return cfg;
}

}  // namespace rulprior
