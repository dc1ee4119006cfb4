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

#include "rulprior/adam.hpp"

#include <cmath>
#include <string>

#include "rulprior/errors.hpp"

namespace rulprior::nn {

Adam::Adam(std::span<Parameter* const> params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Parameter* p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step(std::span<Parameter* const> params) {
  if (params.size() != m_.size()) {
    fail(ErrorKind::Domain, "Adam::step called with a different parameter list");
  }
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) fail(ErrorKind::Numeric, "non-finite gradient in parameter " + p->name);
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i]->value.values();
    auto grad = params[i]->grad.values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    if (value.size() != m.size()) fail(ErrorKind::Domain, "Adam: parameter shape changed");
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * grad[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace rulprior::nn
