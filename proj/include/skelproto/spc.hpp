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

#ifndef SKELPROTO_SPC_HPP
#define SKELPROTO_SPC_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "skelproto/encoder.hpp"
#include "skelproto/gradcheck.hpp"
#include "skelproto/model.hpp"
#include "skelproto/optim.hpp"
#include "skelproto/skeleton.hpp"
#include "skelproto/tensor.hpp"

namespace skelproto::spc {

inline constexpr int kOutlier = -1;

struct ClusterState {
  std::vector<int> assignment;  // cluster id in [0, clusters) or kOutlier
  int clusters = 0;
  std::vector<int> sizes;
  num::Tensor2 prototypes;  // clusters x d, unit rows; empty until make_prototypes

  int outliers() const;
  std::vector<int> members(int cluster) const;
};

/// Preprocessing of raw instances before unit normalisation. The statistics
/// are taken over the whole training set at the start of each epoch and are
/// constants for that epoch.
enum class Whitening { kNone, kCenter, kStandardize };

Whitening parse_whitening(const std::string& text);
std::string to_string(Whitening w);

struct SpcConfig {
  double eps = 0.8;        // DBSCAN neighbourhood radius on unit-norm embeddings
  int min_samples = 2;     // neighbourhood size (self included) of a core point
  double temperature = 0.08;
  int batch_size = 128;
  int epochs = 30;
  std::uint64_t seed = 0;
  int max_empty_epochs = 5;  // consecutive cluster-free epochs before aborting
  Whitening whitening = Whitening::kStandardize;

  void validate() const;
};

class NoClustersError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density clustering with Euclidean distance. A point is core when at least
/// `min_samples` points (itself included) lie within `eps`. Points are scanned
/// in ascending index order and clusters expanded breadth-first, so a border
/// point reachable from several clusters joins the one discovered first.
ClusterState dbscan(const num::Tensor2& points, double eps, int min_samples);

/// Fills prototypes with the unit-normalised mean of each cluster's members.
/// `points` must be the (normalised) instances the state was built from.
ClusterState make_prototypes(ClusterState state, const num::Tensor2& points);

/// Per-epoch affine map applied to raw instances: (x - offset) * inv_scale.
struct InstanceTransform {
  Whitening mode = Whitening::kNone;
  Eigen::RowVectorXd offset;
  Eigen::RowVectorXd inv_scale;

  static InstanceTransform fit(const num::Tensor2& raw, Whitening mode);
  num::Tensor2 apply(const num::Tensor2& raw) const;
};

/// Prototype contrastive loss for a batch of raw embeddings (rows). With a
/// transform, rows are centred on the batch mean (the epoch offset for a batch
/// of one) and rescaled by its inv_scale. Each row is then unit-normalised, scored against the constant prototypes by dot product
/// over `temperature`, and the mean negative log-softmax of its own prototype
/// is returned as a 1 x 1 value.
template <typename Context>
typename Context::Value spc_loss(const Context& ctx, const typename Context::Value& embeddings,
                                 const std::vector<int>& targets, const num::Tensor2& prototypes,
                                 double temperature, const InstanceTransform* transform = nullptr) {
  using num::add;
  using num::cross_entropy_rows;
  using num::matmul;
  using num::normalize_rows;
  using num::scale;
  if (!(temperature > 0.0)) throw std::invalid_argument("spc_loss: temperature must be > 0");
  if (embeddings.rows() == 0 || targets.empty()) throw std::invalid_argument("spc_loss: empty batch");
  auto shifted = embeddings;
  if (transform != nullptr && transform->mode != Whitening::kNone) {
    // The loss recentres on the batch's own mean, which stays differentiable;
    // a constant offset would let the encoder lower the loss by translating
    // every instance together, a move undone by the next epoch's statistics.
    const Eigen::Index b = embeddings.rows();
    const num::Tensor2 diag = Eigen::VectorXd(transform->inv_scale.transpose()).asDiagonal();
    if (b >= 2) {
      const num::Tensor2 centering =
          num::Tensor2::Identity(b, b) - num::Tensor2::Constant(b, b, 1.0 / static_cast<double>(b));
      shifted = matmul(matmul(ctx.constant(centering), embeddings), ctx.constant(diag));
    } else {
      const num::Tensor2 minus = -(Eigen::VectorXd::Ones(b) * transform->offset);
      shifted = matmul(add(embeddings, ctx.constant(minus)), ctx.constant(diag));
    }
  }
  const auto keys = ctx.constant(num::Tensor2(prototypes.transpose()));
  const auto logits = scale(matmul(normalize_rows(shifted), keys), 1.0 / temperature);
  return cross_entropy_rows(logits, targets);
}

/// Same loss on already-normalised instance rows.
double spc_loss_normalized(const num::Tensor2& instances, const std::vector<int>& targets,
                           const num::Tensor2& prototypes, double temperature);

struct EpochLog {
  int epoch = 0;
  int clusters = 0;
  int outliers = 0;
  double mean_loss = 0.0;  // NaN when the epoch was skipped
  double wall_time_ms = 0.0;
  bool skipped = false;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  int threads = 1;
};

/// Alternating clustering and contrastive updates. Labels are never read.
std::vector<EpochLog> train(const std::vector<skel::SkeletonSequence>& train_set, rel::ModelParams& model,
                            const skel::PartitionScheme& scheme, const SpcConfig& config, num::AdamState& adam,
                            const TrainHooks& hooks = {});

/// One gradient evaluation of the loss for a batch of sequences; accumulates
/// into model.tensors() gradients and returns the loss.
double accumulate_batch_gradient(const std::vector<const skel::SkeletonSequence*>& batch,
                                 const std::vector<int>& targets, const num::Tensor2& prototypes,
                                 double temperature, rel::ModelParams& model, const skel::PartitionScheme& scheme,
                                 const InstanceTransform* transform = nullptr);

/// Plain (non-recording) loss for the same batch.
double batch_loss(const std::vector<const skel::SkeletonSequence*>& batch, const std::vector<int>& targets,
                  const num::Tensor2& prototypes, double temperature, const rel::ModelParams& model,
                  const skel::PartitionScheme& scheme, const InstanceTransform* transform = nullptr);

/// The batch loss as a gradient-checkable objective over model.tensors().
/// The referenced batch, prototypes, model and transform must outlive it.
num::Objective loss_objective(const std::vector<const skel::SkeletonSequence*>& batch,
                              const std::vector<int>& targets, const num::Tensor2& prototypes, double temperature,
                              rel::ModelParams& model, const skel::PartitionScheme& scheme,
                              const InstanceTransform* transform = nullptr);

}  // namespace skelproto::spc

#endif  // SKELPROTO_SPC_HPP
