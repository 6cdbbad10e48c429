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


#include "skelproto/exports.hpp"

#include <cstdio>
#include <stdexcept>

namespace skelproto::eval {
namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string embeddings_to_csv(const std::vector<skel::SkeletonSequence>& sequences, const num::Tensor2& embeddings) {
  if (static_cast<Eigen::Index>(sequences.size()) != embeddings.rows()) {
    throw std::invalid_argument("embeddings_to_csv: one embedding row per sequence required");
  }
  std::string out = "seq_index,id,view";
  for (Eigen::Index c = 0; c < embeddings.cols(); ++c) out += ",e" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    out += std::to_string(i) + ',' + sequences[i].identity.value_or("") + ',' + sequences[i].view.value_or("");
    for (Eigen::Index c = 0; c < embeddings.cols(); ++c) out += ',' + number(embeddings(static_cast<Eigen::Index>(i), c));
    out += '\n';
  }
  return out;
}

std::array<num::Tensor2, rel::kLevelPairs> mean_relations(const std::vector<skel::SkeletonSequence>& sequences,
                                                           const rel::ModelParams& model,
                                                           const skel::PartitionScheme& scheme) {
  std::array<num::Tensor2, rel::kLevelPairs> sum;
  std::size_t frames = 0;
  for (const auto& seq : sequences) {
    for (const auto& frame : seq.frames) {
      const auto rel = rel::frame_relations(frame, model, scheme);
      for (int k = 0; k < rel::kLevelPairs; ++k) {
        if (frames == 0) {
          sum[k] = rel[k];
        } else {
          sum[k] += rel[k];
        }
      }
      ++frames;
    }
  }
  if (frames == 0) throw std::invalid_argument("mean_relations: no frames");
  for (auto& m : sum) m /= static_cast<double>(frames);
  return sum;
}

std::string matrix_to_csv(const num::Tensor2& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += number(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string relation_file_name(int a, int b) {
  return "relations_" + std::to_string(a + 1) + "-" + std::to_string(b + 1) + ".csv";
}

}  // namespace skelproto::eval
