// Copyright 2026 The skelproto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skelproto/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace skelproto::num {

void AdamState::restore(std::int64_t step, std::map<std::string, AdamMoments> moments) {
  if (step < 0) throw std::invalid_argument("AdamState: negative step");
  step_ = step;
  moments_ = std::move(moments);
}

void adam_step(ParamTape& params, AdamState& state) {
  for (const auto& p : params) {
    if (!p.grad.allFinite()) throw std::domain_error("adam_step: non-finite gradient in parameter " + p.name);
  }
  const AdamConfig& c = state.config_;
  const std::int64_t t = ++state.step_;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));

  for (auto& p : params) {
    auto [it, fresh] = state.moments_.try_emplace(p.name);
    AdamMoments& m = it->second;
    if (fresh || m.first.rows() != p.value.rows() || m.first.cols() != p.value.cols()) {
      m.first = Tensor2::Zero(p.value.rows(), p.value.cols());
      m.second = Tensor2::Zero(p.value.rows(), p.value.cols());
    }
    m.first = c.beta1 * m.first + (1.0 - c.beta1) * p.grad;
    m.second = c.beta2 * m.second + (1.0 - c.beta2) * p.grad.cwiseAbs2();
    const auto m_hat = m.first.array() / bias1;
    const auto v_hat = m.second.array() / bias2;
    p.value.array() -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
  }
  params.zero_grad();
}

}  // namespace skelproto::num
