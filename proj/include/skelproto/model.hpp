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

#ifndef SKELPROTO_MODEL_HPP
#define SKELPROTO_MODEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "skelproto/params.hpp"
#include "skelproto/skeleton.hpp"

namespace skelproto::rel {

inline constexpr int kCoordDim = 3;
inline constexpr int kLevelPairs = 6;

/// Non-linearity applied to each structural head's aggregate.
enum class Activation { kTanh, kSigmoid };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct ModelConfig {
  int hidden_dim = 8;          // D_h
  int heads = 8;               // m
  double fusion_weight = 1.0;  // lambda_C, shared by every level pair
  Activation activation = Activation::kTanh;
  double leaky_slope = num::kLeakySlope;

  void validate() const;
};

/// Level pairs (a, b) with a <= b, in the order (1,1) (1,2) (1,3) (2,2) (2,3) (3,3).
const std::array<std::pair<int, int>, kLevelPairs>& level_pairs();
int pair_index(int a, int b);

/// Every learnable weight of the encoder, stored in a ParamTape:
/// per level and head a D x D_h feature map and a 2 D_h relation vector,
/// and per level pair a D_h x D_h fusion map.
class ModelParams {
 public:
  explicit ModelParams(ModelConfig config = {});

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation from `seed`.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  num::ParamTape& tensors() { return tensors_; }
  const num::ParamTape& tensors() const { return tensors_; }

  std::size_t feature_map(int level, int head) const;
  std::size_t relation_vector(int level, int head) const;
  std::size_t fusion_map(int a, int b) const;

  std::size_t embedding_dim(const skel::PartitionScheme& scheme) const {
    return static_cast<std::size_t>(scheme.total_nodes()) * static_cast<std::size_t>(config_.hidden_dim);
  }

 private:
  ModelConfig config_;
  num::ParamTape tensors_;
};

}  // namespace skelproto::rel

#endif  // SKELPROTO_MODEL_HPP
