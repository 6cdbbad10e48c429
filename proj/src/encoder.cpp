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

#include "skelproto/encoder.hpp"

#include "skelproto/parallel.hpp"

namespace skelproto::rel {

SequenceEmbedding embed(const skel::SkeletonSequence& sequence, const ModelParams& model,
                        const skel::PartitionScheme& scheme) {
  const PlainContext<double> ctx(model);
  SequenceEmbedding out;
  out.values = encode_sequence(ctx, sequence, model, scheme).row(0);
  out.identity = sequence.identity;
  out.view = sequence.view;
  return out;
}

num::Tensor2 embed_all(const std::vector<skel::SkeletonSequence>& sequences, const ModelParams& model,
                       const skel::PartitionScheme& scheme, int threads) {
  const PlainContext<double> ctx(model);
  num::Tensor2 out(static_cast<Eigen::Index>(sequences.size()),
                   static_cast<Eigen::Index>(model.embedding_dim(scheme)));
  parallel_for(sequences.size(), threads, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = encode_sequence(ctx, sequences[i], model, scheme);
  });
  return out;
}

std::array<num::Tensor2, kLevelPairs> frame_relations(const skel::SkeletonFrame& frame, const ModelParams& model,
                                                     const skel::PartitionScheme& scheme) {
  const PlainContext<double> ctx(model);
  FrameTrace<num::Tensor2> trace;
  encode_frame(ctx, skel::build_graphs(frame, scheme), model, &trace);
  return trace.relations;
}

}  // namespace skelproto::rel
