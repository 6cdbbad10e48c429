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


#ifndef SKELPROTO_EXPORTS_HPP
#define SKELPROTO_EXPORTS_HPP

#include <array>
#include <string>
#include <vector>

#include "skelproto/encoder.hpp"

namespace skelproto::eval {

/// CSV with header `seq_index,id,view,e0,...`; one row per sequence, values
/// printed with 17 significant digits. Missing tags are left empty.
std::string embeddings_to_csv(const std::vector<skel::SkeletonSequence>& sequences, const num::Tensor2& embeddings);

/// Collaborative relation matrices averaged over every frame of every
/// sequence, in rel::level_pairs() order.
std::array<num::Tensor2, rel::kLevelPairs> mean_relations(const std::vector<skel::SkeletonSequence>& sequences,
                                                           const rel::ModelParams& model,
                                                           const skel::PartitionScheme& scheme);

/// Plain numeric CSV, one matrix row per line.
std::string matrix_to_csv(const num::Tensor2& m);

/// Stable file name for a level pair, e.g. "relations_1-2.csv".
std::string relation_file_name(int a, int b);

}  // namespace skelproto::eval

#endif  // SKELPROTO_EXPORTS_HPP
