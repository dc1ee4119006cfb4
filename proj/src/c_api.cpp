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

#include "rulprior/rulprior.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "rulprior/errors.hpp"
#include "rulprior/metrics.hpp"
#include "rulprior/model.hpp"
#include "rulprior/pipeline.hpp"
#include "rulprior/run_config.hpp"
#include "rulprior/similarity.hpp"
#include "rulprior/synthetic.hpp"

struct rp_config {
  rulprior::RunConfig value;
};

struct rp_model {
  rulprior::model::Model value;
};

struct rp_library {
  rulprior::similarity::PriorLibrary value;
};

namespace {

thread_local std::string g_last_error;

rp_status status_of(rulprior::ErrorKind kind) {
  switch (kind) {
    case rulprior::ErrorKind::Config:
      return RP_ERR_USAGE;
    case rulprior::ErrorKind::Numeric:
      return RP_ERR_NUMERIC;
    default:
      return RP_ERR_VALIDATION;
  }
}

template <typename F>
rp_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RP_OK;
  } catch (const rulprior::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RP_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RP_ERR_VALIDATION;
  }
}

void require(bool present, const char* what) {
  if (!present) rulprior::fail(rulprior::ErrorKind::Config, std::string(what) + " is null");
}

rulprior::pipeline::Logger logger(rp_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

rulprior::nn::Tensor window_tensor(const double* window, size_t rows, size_t cols) {
  require(window != nullptr, "window");
  return rulprior::nn::Tensor({rows, cols}, std::vector<double>(window, window + rows * cols));
}

}  // namespace

extern "C" {

const char* rp_version(void) { return "1.0.0"; }

const char* rp_last_error(void) { return g_last_error.c_str(); }

rp_status rp_config_resolve(const char* config_path, const char* const* keys, const char* const* values,
                            size_t n, rp_config** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = nullptr;
    std::optional<std::string> text;
    if (config_path) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) rulprior::fail(rulprior::ErrorKind::Config, std::string("cannot open config file ") + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    std::map<std::string, std::string> overrides;
    for (size_t i = 0; i < n; ++i) {
      require(keys && keys[i], "override key");
      require(values && values[i], "override value");
      overrides[keys[i]] = values[i];
    }
    auto cfg = std::make_unique<rp_config>(rp_config{rulprior::resolve_config(text, overrides)});
    cfg->value.validate();
    *out = cfg.release();
  });
}

void rp_config_free(rp_config* config) { delete config; }

rp_status rp_config_get(const rp_config* config, const char* key, char* buf, size_t size, size_t* needed) {
  return guarded([&] {
    require(config != nullptr, "config");
    require(key != nullptr, "key");
    const std::string v = config->value.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && size > 0) {
      const size_t n = std::min(size - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

rp_status rp_cmd_preprocess(const rp_config* config, rp_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "config");
    rulprior::pipeline::preprocess(config->value, logger(log, user));
  });
}

rp_status rp_cmd_train(const rp_config* config, rp_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "config");
    rulprior::pipeline::train(config->value, logger(log, user));
  });
}

rp_status rp_cmd_build_library(const rp_config* config, rp_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "config");
    rulprior::pipeline::build_library(config->value, logger(log, user));
  });
}

rp_status rp_cmd_predict(const rp_config* config, rp_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "config");
    rulprior::pipeline::predict(config->value, logger(log, user));
  });
}

rp_status rp_cmd_evaluate(const rp_config* config, rp_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "config");
    rulprior::pipeline::evaluate(config->value, logger(log, user));
  });
}

rp_status rp_synth(const char* dir, const char* tag, uint64_t seed, size_t train_units, size_t test_units) {
  return guarded([&] {
    require(dir != nullptr, "dir");
    require(tag != nullptr, "tag");
    rulprior::synthetic::FleetOptions o;
    o.seed = seed;
    o.train_units = train_units;
    o.test_units = test_units;
    rulprior::synthetic::write_fleet(rulprior::synthetic::generate(o), dir, tag);
  });
}

rp_status rp_kl(const double* p, const double* q, size_t n, double* out) {
  return guarded([&] {
    require(p != nullptr, "p");
    require(q != nullptr, "q");
    require(out != nullptr, "out");
    *out = rulprior::similarity::kl({p, n}, {q, n});
  });
}

rp_status rp_js(const double* p, const double* q, size_t n, double* out) {
  return guarded([&] {
    require(p != nullptr, "p");
    require(q != nullptr, "q");
    require(out != nullptr, "out");
    *out = rulprior::similarity::js({p, n}, {q, n});
  });
}

rp_status rp_rmse(const double* predicted, const double* truth, size_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = rulprior::metrics::rmse({predicted, n}, {truth, n});
  });
}

rp_status rp_phm_score(const double* predicted, const double* truth, size_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = rulprior::metrics::phm_score({predicted, n}, {truth, n});
  });
}

rp_status rp_model_load(const char* path, rp_model** out) {
  return guarded([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    *out = nullptr;
    auto m = rulprior::model::model_from_json(rulprior::pipeline::read_file(path));
    *out = new rp_model{std::move(m)};
  });
}

void rp_model_free(rp_model* model) { delete model; }

size_t rp_model_window_length(const rp_model* model) { return model ? model->value.config().window_length : 0; }
size_t rp_model_features(const rp_model* model) { return model ? model->value.config().features : 0; }
size_t rp_model_codebook_size(const rp_model* model) { return model ? model->value.config().codebook_size : 0; }
size_t rp_model_latent_sequences(const rp_model* model) {
  return model ? model->value.config().latent_sequences : 0;
}

rp_status rp_model_predict(const rp_model* model, const double* window, size_t rows, size_t cols, double* out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(out != nullptr, "out");
    *out = model->value.predict(window_tensor(window, rows, cols));
  });
}

rp_status rp_model_latent_states(const rp_model* model, const double* window, size_t rows, size_t cols,
                                 size_t* states) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(states != nullptr, "states");
    const auto s = model->value.latent_states(window_tensor(window, rows, cols));
    std::copy(s.begin(), s.end(), states);
  });
}

rp_status rp_library_load(const char* path, rp_library** out) {
  return guarded([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    *out = nullptr;
    auto lib = rulprior::similarity::library_from_json(rulprior::pipeline::read_file(path));
    *out = new rp_library{std::move(lib)};
  });
}

void rp_library_free(rp_library* library) { delete library; }

size_t rp_library_size(const rp_library* library) { return library ? library->value.size() : 0; }
size_t rp_library_states(const rp_library* library) { return library ? library->value.states() : 0; }

rp_status rp_library_query(const rp_library* library, const double* pi, size_t n, size_t k, double* out) {
  return guarded([&] {
    require(library != nullptr, "library");
    require(pi != nullptr, "pi");
    require(out != nullptr, "out");
    const auto nn = rulprior::similarity::nearest({pi, n}, library->value, k);
    *out = rulprior::similarity::predict_rul(nn);
  });
}

}  // extern "C"
