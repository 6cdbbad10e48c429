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

#include "skelproto/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace skelproto::rel {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("unknown activation '" + name + "' (expected tanh or sigmoid)");
}

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "sigmoid"; }

void ModelConfig::validate() const {
  if (hidden_dim < 1) throw std::invalid_argument("hidden dimension must be >= 1");
  if (heads < 1) throw std::invalid_argument("head count must be >= 1");
  if (!(fusion_weight >= 0.0) || !std::isfinite(fusion_weight)) {
    throw std::invalid_argument("fusion weight must be finite and >= 0");
  }
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("leaky slope must lie in (0, 1)");
}

const std::array<std::pair<int, int>, kLevelPairs>& level_pairs() {
  static const std::array<std::pair<int, int>, kLevelPairs> pairs = {
      {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  return pairs;
}

int pair_index(int a, int b) {
  const auto& pairs = level_pairs();
  for (int i = 0; i < kLevelPairs; ++i) {
    if (pairs[static_cast<std::size_t>(i)] == std::pair{a, b}) return i;
  }
  throw std::out_of_range("no level pair (" + std::to_string(a) + ", " + std::to_string(b) + ")");
}

ModelParams::ModelParams(ModelConfig config) : config_(config) {
  config_.validate();
  const int dh = config_.hidden_dim;
  for (int l = 0; l < skel::kLevels; ++l) {
    for (int s = 0; s < config_.heads; ++s) {
      const std::string prefix = "msrl.l" + std::to_string(l + 1) + ".h" + std::to_string(s);
      tensors_.add(prefix + ".Wv", num::Tensor2::Zero(kCoordDim, dh));
      tensors_.add(prefix + ".Wr", num::Tensor2::Zero(2 * dh, 1));
    }
  }
  for (const auto& [a, b] : level_pairs()) {
    tensors_.add("fcrl." + std::to_string(a + 1) + "-" + std::to_string(b + 1) + ".Wc",
                 num::Tensor2::Zero(dh, dh));
  }
}

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
  ModelParams model(config);
  std::mt19937_64 rng(seed);
  for (auto& p : model.tensors_) {
    // Fan-in is the length of the input each weight column sees.
    const double fan_in = static_cast<double>(p.value.rows());
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = dist(rng);
    }
  }
  return model;
}

std::size_t ModelParams::feature_map(int level, int head) const {
  return static_cast<std::size_t>((level * config_.heads + head) * 2);
}

std::size_t ModelParams::relation_vector(int level, int head) const { return feature_map(level, head) + 1; }

std::size_t ModelParams::fusion_map(int a, int b) const {
  return static_cast<std::size_t>(skel::kLevels * config_.heads * 2 + pair_index(a, b));
}

}  // namespace skelproto::rel
