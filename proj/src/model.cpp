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

#include "rulprior/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "json.hpp"
#include "rulprior/adam.hpp"
#include "rulprior/errors.hpp"
#include "rulprior/rng.hpp"

namespace rulprior::model {
namespace {

using nlohmann::json;
using nn::Graph;
using nn::NodeId;
using nn::Tensor;

constexpr int kModelFormatVersion = 1;

json config_to_json(const ModelConfig& c) {
  return {
      {"window_length", c.window_length},
      {"features", c.features},
      {"latent_sequences", c.latent_sequences},
      {"latent_dim", c.latent_dim},
      {"codebook_size", c.codebook_size},
      {"model_dim", c.model_dim},
      {"ffn_hidden", c.hidden_width()},
      {"encoder_layers", c.encoder_layers},
      {"encoder_heads", c.encoder_heads},
      {"decoder_layers", c.decoder_layers},
      {"decoder_heads", c.decoder_heads},
      {"beta", c.beta},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"rul_cap", c.rul_cap},
      {"position_origin", c.position_origin == nn::PositionOrigin::One ? 1 : 0},
  };
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.window_length = j.at("window_length").get<std::size_t>();
  c.features = j.at("features").get<std::size_t>();
  c.latent_sequences = j.at("latent_sequences").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.codebook_size = j.at("codebook_size").get<std::size_t>();
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
  c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
  c.encoder_heads = j.at("encoder_heads").get<std::size_t>();
  c.decoder_layers = j.at("decoder_layers").get<std::size_t>();
  c.decoder_heads = j.at("decoder_heads").get<std::size_t>();
  c.beta = j.at("beta").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.rul_cap = j.at("rul_cap").get<double>();
  c.position_origin = j.at("position_origin").get<int>() == 1 ? nn::PositionOrigin::One
                                                              : nn::PositionOrigin::Zero;
  return c;
}

json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) fail(ErrorKind::Config, std::string(name) + " must be positive");
  };
  positive(window_length, "window_length");
  positive(features, "features");
  positive(latent_sequences, "latent_sequences");
  positive(latent_dim, "latent_dim");
  positive(model_dim, "model_dim");
  positive(encoder_layers, "encoder_layers");
  positive(encoder_heads, "encoder_heads");
  positive(decoder_layers, "decoder_layers");
  positive(decoder_heads, "decoder_heads");
  positive(batch_size, "batch_size");
  if (codebook_size < 2) fail(ErrorKind::Config, "codebook_size must be at least 2");
  if (model_dim % 2 != 0) fail(ErrorKind::Config, "model_dim must be even for positional encoding");
  if (model_dim % encoder_heads != 0 || model_dim % decoder_heads != 0) {
    fail(ErrorKind::Config, "model_dim " + std::to_string(model_dim) +
                                " must be divisible by the encoder and decoder head counts");
  }
  if (!(beta >= 0.0)) fail(ErrorKind::Config, "beta must be non-negative");
  if (!(learning_rate > 0.0)) fail(ErrorKind::Config, "learning_rate must be positive");
  if (!(rul_cap > 0.0)) fail(ErrorKind::Config, "rul_cap must be positive");
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d = config_.model_dim;
  const std::size_t hidden = config_.hidden_width();
  encoder_positions_ = nn::positional_encoding(config_.window_length, d, config_.position_origin);
  decoder_positions_ = nn::positional_encoding(config_.latent_sequences, d, config_.position_origin);

  const SplitMix64 root(config_.seed);
  SplitMix64 rng = root.split("init");
  input_w_ = nn::init_weight("input.w", config_.features, d, rng);
  input_b_ = nn::init_bias("input.b", config_.features, d, rng);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_.push_back(
        nn::make_encoder_block("encoder" + std::to_string(i), d, config_.encoder_heads, hidden, rng));
  }
  const std::size_t flat = config_.window_length * d;
  const std::size_t latent = config_.latent_sequences * config_.latent_dim;
  latent_w_ = nn::init_weight("latent.w", flat, latent, rng);
  latent_b_ = nn::init_bias("latent.b", flat, latent, rng);
  decoder_in_w_ = nn::init_weight("decoder_in.w", config_.latent_dim, d, rng);
  decoder_in_b_ = nn::init_bias("decoder_in.b", config_.latent_dim, d, rng);
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    decoder_.push_back(
        nn::make_encoder_block("decoder" + std::to_string(i), d, config_.decoder_heads, hidden, rng));
  }
  head_w_ = nn::init_weight("head.w", d, 1, rng);
  head_b_ = nn::init_bias("head.b", d, 1, rng);

  SplitMix64 code_rng = root.split("codebook");
  codebook_ = vq::make_codebook(config_.codebook_size, config_.latent_dim, code_rng);
}

std::vector<nn::Parameter*> Model::parameters() {
  std::vector<nn::Parameter*> out{&input_w_, &input_b_};
  for (auto& block : encoder_) nn::collect(block, out);
  out.push_back(&latent_w_);
  out.push_back(&latent_b_);
  out.push_back(&codebook_);
  out.push_back(&decoder_in_w_);
  out.push_back(&decoder_in_b_);
  for (auto& block : decoder_) nn::collect(block, out);
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

std::vector<const nn::Parameter*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void Model::check_window(const Tensor& window) const {
  if (window.rows() != config_.window_length || window.cols() != config_.features) {
    fail(ErrorKind::Domain, "window is " + std::to_string(window.rows()) + "x" +
                                std::to_string(window.cols()) + ", model expects " +
                                std::to_string(config_.window_length) + "x" +
                                std::to_string(config_.features));
  }
}

NodeId Model::encode_node(Graph& g, const Tensor& window) const {
  check_window(window);
  NodeId h = g.add_row(g.matmul(g.constant(window), g.parameter(input_w_)), g.parameter(input_b_));
  h = g.add(h, g.constant(encoder_positions_));
  for (const auto& block : encoder_) h = nn::encoder_block(g, h, block);
  NodeId flat = g.reshape(h, 1, config_.window_length * config_.model_dim);
  NodeId latent = g.add_row(g.matmul(flat, g.parameter(latent_w_)), g.parameter(latent_b_));
  return g.reshape(latent, config_.latent_sequences, config_.latent_dim);
}

NodeId Model::decode_node(Graph& g, NodeId z_q) const {
  NodeId h = g.add_row(g.matmul(z_q, g.parameter(decoder_in_w_)), g.parameter(decoder_in_b_));
  h = g.add(h, g.constant(decoder_positions_));
  for (const auto& block : decoder_) h = nn::encoder_block(g, h, block);
  NodeId pooled = g.mean_rows(h);
  return g.add_row(g.matmul(pooled, g.parameter(head_w_)), g.parameter(head_b_));
}

ForwardPass Model::forward(Graph& g, const Tensor& window, double target_rul,
                           const FrozenAssignment* frozen) const {
  ForwardPass out;
  out.z_e = encode_node(g, window);
  NodeId codebook = g.parameter(codebook_);
  NodeId target = g.constant(Tensor::scalar(target_rul / config_.rul_cap));

  if (frozen == nullptr) {
    out.quantized = vq::quantize(g.value(out.z_e), codebook_.value);
    NodeId selected = g.gather_rows(codebook, out.quantized.indices);
    out.prediction = decode_node(g, vq::straight_through(g, out.z_e, selected));
    out.loss = vq::vq_loss(g, out.prediction, target, out.z_e, selected, config_.beta);
    return out;
  }

  // Same objective with every stop-gradient operand pinned to its value at
  // the frozen point: sg(x) becomes a constant and straight-through becomes
  // z_e plus a constant offset.
  out.quantized.indices = frozen->indices;
  out.quantized.z_e = frozen->z_e;
  out.quantized.z_q = frozen->selected;
  NodeId selected = g.gather_rows(codebook, frozen->indices);
  Tensor offset = frozen->selected;
  for (std::size_t i = 0; i < offset.size(); ++i) offset[i] -= frozen->z_e[i];
  out.prediction = decode_node(g, g.add(out.z_e, g.constant(offset)));
  out.loss.task = g.sum_squares(g.sub(out.prediction, target));
  out.loss.codebook = g.sum_squares(g.sub(g.constant(frozen->z_e), selected));
  out.loss.commitment =
      g.scale(g.sum_squares(g.sub(out.z_e, g.constant(frozen->selected))), config_.beta);
  out.loss.total = g.add(g.add(out.loss.task, out.loss.codebook), out.loss.commitment);
  return out;
}

Tensor Model::encode(const Tensor& window) const {
  Graph g(false);
  return g.value(encode_node(g, window));
}

double Model::decode_raw(const Tensor& z_q) const {
  if (z_q.rows() != config_.latent_sequences || z_q.cols() != config_.latent_dim) {
    fail(ErrorKind::Domain, "latent block has the wrong shape");
  }
  Graph g(false);
  return g.value(decode_node(g, g.constant(z_q))).item() * config_.rul_cap;
}

double Model::decode(const Tensor& z_q) const {
  return std::clamp(decode_raw(z_q), 0.0, config_.rul_cap);
}

std::vector<std::size_t> Model::latent_states(const Tensor& window) const {
  return vq::quantize(encode(window), codebook_.value).indices;
}

double Model::predict(const Tensor& window) const {
  return decode(vq::quantize(encode(window), codebook_.value).z_q);
}

Model train(const std::vector<const data::TimeWindow*>& windows, const ModelConfig& config,
            const EpochCallback& on_epoch) {
  Model model(config);
  if (config.epochs == 0) return model;
  if (windows.empty()) fail(ErrorKind::Domain, "training needs at least one window");

  auto params = model.parameters();
  nn::Adam adam(params, nn::AdamConfig{config.learning_rate});
  SplitMix64 shuffler = SplitMix64(config.seed).split("shuffle");
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      ++batch_no;
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (auto* p : params) p->zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const data::TimeWindow& w = *windows[order[i]];
        Graph g;
        const ForwardPass pass = model.forward(g, w.values, w.rul_target);
        const double total = g.value(pass.loss.total).item();
        if (!std::isfinite(total)) {
          fail(ErrorKind::Numeric, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_no));
        }
        stats.total += total;
        stats.task += g.value(pass.loss.task).item();
        stats.codebook += g.value(pass.loss.codebook).item();
        stats.commitment += g.value(pass.loss.commitment).item();
        g.backward(pass.loss.total, weight);
        for (auto* p : params) g.accumulate_into(*p);
      }
      try {
        adam.step(params);
      } catch (const Error& e) {
        fail(e.kind(), std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no));
      }
    }
    const double n = static_cast<double>(windows.size());
    stats.total /= n;
    stats.task /= n;
    stats.codebook /= n;
    stats.commitment /= n;
    model.log.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return model;
}

std::string model_to_json(const Model& m) {
  json params = json::array();
  const Tensor* codebook = nullptr;
  for (const nn::Parameter* p : m.parameters()) {
    if (p->name == "codebook") {
      codebook = &p->value;
      continue;
    }
    json entry = tensor_to_json(p->value);
    entry["name"] = p->name;
    params.push_back(std::move(entry));
  }
  json log = json::array();
  for (const auto& e : m.log) {
    log.push_back({{"epoch", e.epoch},
                   {"total", e.total},
                   {"task", e.task},
                   {"codebook", e.codebook},
                   {"commitment", e.commitment}});
  }
  json doc = {
      {"format", "rulprior.model"},
      {"version", kModelFormatVersion},
      {"config", config_to_json(m.config())},
      {"seed", m.config().seed},
      {"features", {{"sensors", m.features.sensor_indices}, {"settings", m.features.settings}}},
      {"stats", {{"min", m.stats.min}, {"max", m.stats.max}}},
      {"parameters", params},
      {"codebook", tensor_to_json(*codebook)},
      {"training_log", log},
  };
  return doc.dump();
}

Model model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "rulprior.model") fail(ErrorKind::Validation, "not a model file");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      fail(ErrorKind::Validation, "unsupported model file version");
    }
    Model m(config_from_json(doc.at("config")));
    m.features.sensor_indices = doc.at("features").at("sensors").get<std::vector<int>>();
    m.features.settings = doc.at("features").at("settings").get<int>();
    m.stats.min = doc.at("stats").at("min").get<std::vector<double>>();
    m.stats.max = doc.at("stats").at("max").get<std::vector<double>>();
    if (!m.stats.min.empty() &&
        (m.features.count() != m.config().features || m.stats.size() != m.config().features)) {
      fail(ErrorKind::Validation, "feature selection does not match the model input width");
    }

    std::map<std::string, const json*> stored;
    for (const auto& entry : doc.at("parameters")) {
      stored[entry.at("name").get<std::string>()] = &entry;
    }
    stored["codebook"] = &doc.at("codebook");
    auto params = m.parameters();
    if (stored.size() != params.size()) {
      fail(ErrorKind::Validation, "model file has " + std::to_string(stored.size()) +
                                      " tensors, config implies " + std::to_string(params.size()));
    }
    for (nn::Parameter* p : params) {
      auto it = stored.find(p->name);
      if (it == stored.end()) fail(ErrorKind::Validation, "model file lacks tensor " + p->name);
      const auto shape = it->second->at("shape").get<std::vector<std::size_t>>();
      auto values = it->second->at("values").get<std::vector<double>>();
      if (shape != p->value.shape() || values.size() != p->value.size()) {
        fail(ErrorKind::Validation, "tensor " + p->name + " has the wrong shape");
      }
      for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorKind::Validation, "tensor " + p->name + " has non-finite values");
      }
      p->value = Tensor(shape, std::move(values));
    }
    for (const auto& e : doc.at("training_log")) {
      m.log.push_back(EpochStats{e.at("epoch").get<std::size_t>(), e.at("total").get<double>(),
                                 e.at("task").get<double>(), e.at("codebook").get<double>(),
                                 e.at("commitment").get<double>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace rulprior::model
