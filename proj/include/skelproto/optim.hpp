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

#ifndef SKELPROTO_OPTIM_HPP
#define SKELPROTO_OPTIM_HPP

#include <cstdint>
#include <map>
#include <string>

#include "skelproto/params.hpp"

namespace skelproto::num {

struct AdamConfig {
  double learning_rate = 0.00035;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  Tensor2 first;
  Tensor2 second;
};

/// Per-parameter moment estimates, keyed by parameter name so that the
/// update does not depend on registration order.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }
  std::int64_t step() const { return step_; }

  const std::map<std::string, AdamMoments>& moments() const { return moments_; }

  // Used when restoring from a checkpoint.
  void restore(std::int64_t step, std::map<std::string, AdamMoments> moments);

 private:
  friend void adam_step(ParamTape& params, AdamState& state);

  AdamConfig config_;
  std::int64_t step_ = 0;
  std::map<std::string, AdamMoments> moments_;
};

/// Bias-corrected Adam update of every parameter from its accumulated
/// gradient, followed by zeroing the gradients. Throws std::domain_error
/// naming the first parameter with a non-finite gradient; nothing is
/// updated in that case.
void adam_step(ParamTape& params, AdamState& state);

}  // namespace skelproto::num

#endif  // SKELPROTO_OPTIM_HPP
