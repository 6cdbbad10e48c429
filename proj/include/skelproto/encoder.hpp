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

#ifndef SKELPROTO_ENCODER_HPP
#define SKELPROTO_ENCODER_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "skelproto/model.hpp"
#include "skelproto/skeleton.hpp"
#include "skelproto/tape.hpp"
#include "skelproto/tensor.hpp"

namespace skelproto::rel {

// The encoder is written once against a "context" that supplies parameters
// and constants. PlainContext evaluates with Eigen matrices of any scalar;
// TapeContext records onto a num::Tape for reverse-mode gradients.

template <typename Scalar>
class PlainContext {
 public:
  using Value = num::Matrix<Scalar>;

  explicit PlainContext(const ModelParams& model) {
    params_.reserve(model.tensors().size());
    for (const auto& p : model.tensors()) params_.push_back(p.value.template cast<Scalar>());
  }

  const Value& param(std::size_t index) const { return params_.at(index); }
  Value constant(const num::Tensor2& t) const { return t.template cast<Scalar>(); }

 private:
  std::vector<Value> params_;
};

class TapeContext {
 public:
  using Value = num::Var;

  /// `tape` must be bound to the ModelParams tensors being differentiated.
  explicit TapeContext(num::Tape& tape) : tape_(tape) {}

  Value param(std::size_t index) const { return tape_.parameter(index); }
  Value constant(const num::Tensor2& t) const { return tape_.constant(t); }
  num::Tape& tape() const { return tape_; }

 private:
  num::Tape& tape_;
};

template <typename Value>
Value activate(const Value& x, Activation a) {
  using num::sigmoid;
  using num::tanh;
  return a == Activation::kTanh ? tanh(x) : sigmoid(x);
}

/// Intermediate results of one frame, kept for inspection and export.
template <typename Value>
struct FrameTrace {
  std::array<std::vector<Value>, skel::kLevels> attention;     // per head, n_l x n_l
  std::array<std::vector<Value>, skel::kLevels> head_outputs;  // per head, n_l x D_h
  std::array<Value, skel::kLevels> structural;                 // head mean, n_l x D_h
  std::array<Value, kLevelPairs> relations;                    // n_a x n_b
  std::array<Value, skel::kLevels> fused;                      // n_l x D_h
};

template <typename Value>
struct HeadResult {
  Value attention;  // n x n, zero outside the neighbour mask
  Value output;     // n x D_h
};

/// Structural relation heads of one graph level: masked graph attention with
/// LeakyReLU logits over (W_v v_i || W_v v_j), softmax over the neighbours
/// (self included), and an activated attention-weighted aggregate.
template <typename Context>
std::vector<HeadResult<typename Context::Value>> structural_heads(const Context& ctx,
                                                                  const skel::MultiLevelGraph& graph, int level,
                                                                  const ModelParams& model) {
  using num::block;
  using num::leaky_relu;
  using num::matmul;
  using num::outer_sum;
  using num::softmax_rows;
  using Value = typename Context::Value;

  const ModelConfig& cfg = model.config();
  const Eigen::Index dh = cfg.hidden_dim;
  const num::Mask mask = graph.scheme->neighbor_mask(level);
  const Value nodes = ctx.constant(graph.nodes[static_cast<std::size_t>(level)]);

  std::vector<HeadResult<Value>> heads;
  heads.reserve(static_cast<std::size_t>(cfg.heads));
  for (int s = 0; s < cfg.heads; ++s) {
    const Value wv = ctx.param(model.feature_map(level, s));
    const Value wr = ctx.param(model.relation_vector(level, s));
    const Value mapped = matmul(nodes, wv);                        // rows are W_v v_i
    const Value src = matmul(mapped, block(wr, 0, 0, dh, 1));      // source half of W_r
    const Value dst = matmul(mapped, block(wr, dh, 0, dh, 1));     // neighbour half
    const Value logits = leaky_relu(outer_sum(src, dst), cfg.leaky_slope);
    Value attention = softmax_rows(logits, mask);
    Value output = activate(matmul(attention, mapped), cfg.activation);
    heads.push_back({std::move(attention), std::move(output)});
  }
  return heads;
}

/// Per-level mean of the structural heads.
template <typename Context>
std::array<typename Context::Value, skel::kLevels> msrl(const Context& ctx, const skel::MultiLevelGraph& graph,
                                                        const ModelParams& model,
                                                        FrameTrace<typename Context::Value>* trace = nullptr) {
  using num::add;
  using num::scale;
  using Value = typename Context::Value;

  std::array<Value, skel::kLevels> out;
  for (int l = 0; l < skel::kLevels; ++l) {
    auto heads = structural_heads(ctx, graph, l, model);
    Value total = heads.front().output;
    for (std::size_t s = 1; s < heads.size(); ++s) total = add(total, heads[s].output);
    out[static_cast<std::size_t>(l)] = scale(total, 1.0 / static_cast<double>(heads.size()));
    if (trace != nullptr) {
      for (auto& h : heads) {
        trace->attention[static_cast<std::size_t>(l)].push_back(h.attention);
        trace->head_outputs[static_cast<std::size_t>(l)].push_back(h.output);
      }
    }
  }
  return out;
}

/// Collaborative relations: row softmax of the inner products between level-a
/// and level-b node features, for every pair a <= b.
template <typename Value>
std::array<Value, kLevelPairs> fcrl(const std::array<Value, skel::kLevels>& features) {
  using num::matmul;
  using num::softmax_rows;
  using num::transpose;
  std::array<Value, kLevelPairs> out;
  for (int p = 0; p < kLevelPairs; ++p) {
    const auto [a, b] = level_pairs()[static_cast<std::size_t>(p)];
    out[static_cast<std::size_t>(p)] = softmax_rows(
        matmul(features[static_cast<std::size_t>(a)], transpose(features[static_cast<std::size_t>(b)])));
  }
  return out;
}

/// Residual fusion v_i^a += sum_{b >= a} lambda * sum_j R^{a,b}_{ij} W_C^{a,b} v_j^b.
/// Every level reads the pre-fusion features.
template <typename Context>
std::array<typename Context::Value, skel::kLevels> fuse(const Context& ctx,
                                                        const std::array<typename Context::Value, skel::kLevels>& features,
                                                        const std::array<typename Context::Value, kLevelPairs>& relations,
                                                        const ModelParams& model) {
  using num::add;
  using num::matmul;
  using num::scale;
  using num::transpose;
  using Value = typename Context::Value;

  const double lambda = model.config().fusion_weight;
  std::array<Value, skel::kLevels> out = features;
  if (lambda == 0.0) return out;
  for (int p = 0; p < kLevelPairs; ++p) {
    const auto [a, b] = level_pairs()[static_cast<std::size_t>(p)];
    const Value wc = ctx.param(model.fusion_map(a, b));
    // Feature rows times W_C^T applies W_C to each node vector.
    const Value mapped = matmul(features[static_cast<std::size_t>(b)], transpose(wc));
    const Value message = matmul(relations[static_cast<std::size_t>(p)], mapped);
    out[static_cast<std::size_t>(a)] = add(out[static_cast<std::size_t>(a)], scale(message, lambda));
  }
  return out;
}

/// Skeleton representation [F^1; F^2; F^3], (n_1 + n_2 + n_3) x D_h.
template <typename Context>
typename Context::Value encode_frame(const Context& ctx, const skel::MultiLevelGraph& graph,
                                     const ModelParams& model,
                                     FrameTrace<typename Context::Value>* trace = nullptr) {
  using Value = typename Context::Value;
  const auto structural = msrl(ctx, graph, model, trace);
  const auto relations = fcrl(structural);
  const auto fused = fuse(ctx, structural, relations, model);
  if (trace != nullptr) {
    trace->structural = structural;
    trace->relations = relations;
    trace->fused = fused;
  }
  return num::vstack(std::vector<Value>(fused.begin(), fused.end()));
}

namespace detail {

template <typename Scalar>
const num::Matrix<Scalar>& value_of(const num::Matrix<Scalar>& m) {
  return m;
}
inline const num::Tensor2& value_of(const num::Var& v) { return v.value(); }

template <typename Scalar>
bool lexicographic_less(const num::Matrix<Scalar>& a, const num::Matrix<Scalar>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.data()[i] < b.data()[i]) return true;
    if (b.data()[i] < a.data()[i]) return false;
  }
  return false;
}

}  // namespace detail

/// Frame-mean of the skeleton representations, flattened row-major to 1 x (N D_h).
/// Frame representations are summed in a canonical (lexicographic) order, so
/// the result is bit-identical under any permutation of the frames.
template <typename Context>
typename Context::Value encode_sequence(const Context& ctx, const skel::SkeletonSequence& sequence,
                                        const ModelParams& model, const skel::PartitionScheme& scheme) {
  using num::add;
  using num::flatten_rows;
  using num::scale;
  using Value = typename Context::Value;
  if (sequence.frames.empty()) throw std::invalid_argument("encode_sequence: empty sequence");
  std::vector<Value> reps;
  reps.reserve(sequence.frames.size());
  for (const auto& frame : sequence.frames) reps.push_back(encode_frame(ctx, skel::build_graphs(frame, scheme), model));
  std::vector<std::size_t> order(reps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::lexicographic_less(detail::value_of(reps[a]), detail::value_of(reps[b]));
  });
  Value total = reps[order.front()];
  for (std::size_t k = 1; k < order.size(); ++k) total = add(total, reps[order[k]]);
  return flatten_rows(scale(total, 1.0 / static_cast<double>(reps.size())));
}

/// A sequence-level embedding together with the tags carried for evaluation.
struct SequenceEmbedding {
  Eigen::RowVectorXd values;
  std::optional<std::string> identity;
  std::optional<std::string> view;
};

SequenceEmbedding embed(const skel::SkeletonSequence& sequence, const ModelParams& model,
                        const skel::PartitionScheme& scheme);

/// Embeds every sequence (rows of the result follow input order). Work is
/// split over up to `threads` workers; the result does not depend on it.
num::Tensor2 embed_all(const std::vector<skel::SkeletonSequence>& sequences, const ModelParams& model,
                       const skel::PartitionScheme& scheme, int threads = 1);

/// Collaborative relation matrices of one frame, in level_pairs() order.
std::array<num::Tensor2, kLevelPairs> frame_relations(const skel::SkeletonFrame& frame, const ModelParams& model,
                                                     const skel::PartitionScheme& scheme);

}  // namespace skelproto::rel

#endif  // SKELPROTO_ENCODER_HPP
