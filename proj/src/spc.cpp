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

#include "skelproto/spc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

namespace skelproto::spc {

int ClusterState::outliers() const {
  return static_cast<int>(std::count(assignment.begin(), assignment.end(), kOutlier));
}

std::vector<int> ClusterState::members(int cluster) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == cluster) out.push_back(static_cast<int>(i));
  }
  return out;
}

void SpcConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (min_samples < 1) throw std::invalid_argument("min_samples must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (max_empty_epochs < 1) throw std::invalid_argument("max_empty_epochs must be >= 1");
}

Whitening parse_whitening(const std::string& text) {
  if (text == "none") return Whitening::kNone;
  if (text == "center") return Whitening::kCenter;
  if (text == "standardize") return Whitening::kStandardize;
  throw std::invalid_argument("unknown whitening '" + text + "' (expected none, center or standardize)");
}

std::string to_string(Whitening w) {
  switch (w) {
    case Whitening::kNone:
      return "none";
    case Whitening::kCenter:
      return "center";
    case Whitening::kStandardize:
      return "standardize";
  }
  return "none";
}

InstanceTransform InstanceTransform::fit(const num::Tensor2& raw, Whitening mode) {
  InstanceTransform t;
  t.mode = mode;
  t.offset = Eigen::RowVectorXd::Zero(raw.cols());
  t.inv_scale = Eigen::RowVectorXd::Ones(raw.cols());
  if (mode == Whitening::kNone || raw.rows() == 0) return t;
  t.offset = raw.colwise().mean();
  if (mode == Whitening::kStandardize) {
    const num::Tensor2 centered = raw.rowwise() - t.offset;
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      const double sd = std::sqrt(centered.col(c).squaredNorm() / static_cast<double>(raw.rows()));
      // Constant dimensions carry no information; leave them unscaled.
      t.inv_scale(c) = sd > 0.0 ? 1.0 / sd : 1.0;
    }
  }
  return t;
}

num::Tensor2 InstanceTransform::apply(const num::Tensor2& raw) const {
  if (raw.cols() != offset.cols()) throw std::invalid_argument("InstanceTransform: dimension mismatch");
  return (raw.rowwise() - offset).array().rowwise() * inv_scale.array();
}

ClusterState dbscan(const num::Tensor2& points, double eps, int min_samples) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_samples < 1) throw std::invalid_argument("dbscan: min_samples must be >= 1");
  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;

  std::vector<std::vector<int>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).squaredNorm();
      if (d2 <= eps2) neighbours[i].push_back(static_cast<int>(j));
    }
  }
  const auto is_core = [&](std::size_t i) { return neighbours[i].size() >= static_cast<std::size_t>(min_samples); };

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (!is_core(i)) {
      label[i] = kOutlier;
      continue;
    }
    label[i] = cluster;
    std::deque<int> frontier(neighbours[i].begin(), neighbours[i].end());
    while (!frontier.empty()) {
      const auto q = static_cast<std::size_t>(frontier.front());
      frontier.pop_front();
      if (label[q] == kOutlier) label[q] = cluster;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = cluster;
      if (is_core(q)) frontier.insert(frontier.end(), neighbours[q].begin(), neighbours[q].end());
    }
    ++cluster;
  }

  ClusterState state;
  state.assignment = std::move(label);
  state.clusters = cluster;
  state.sizes.assign(static_cast<std::size_t>(cluster), 0);
  for (int a : state.assignment) {
    if (a != kOutlier) ++state.sizes[static_cast<std::size_t>(a)];
  }
  return state;
}

ClusterState make_prototypes(ClusterState state, const num::Tensor2& points) {
  if (state.clusters == 0) throw NoClustersError("no clusters this epoch");
  if (static_cast<std::size_t>(points.rows()) != state.assignment.size()) {
    throw std::invalid_argument("make_prototypes: point count differs from assignment");
  }
  num::Tensor2 sums = num::Tensor2::Zero(state.clusters, points.cols());
  for (std::size_t i = 0; i < state.assignment.size(); ++i) {
    const int k = state.assignment[i];
    if (k != kOutlier) sums.row(k) += points.row(static_cast<Eigen::Index>(i));
  }
  for (int k = 0; k < state.clusters; ++k) sums.row(k) /= static_cast<double>(state.sizes[static_cast<std::size_t>(k)]);
  state.prototypes = num::normalize_rows(sums);
  return state;
}

double spc_loss_normalized(const num::Tensor2& instances, const std::vector<int>& targets,
                           const num::Tensor2& prototypes, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("spc_loss: temperature must be > 0");
  if (instances.rows() == 0 || targets.empty()) throw std::invalid_argument("spc_loss: empty batch");
  const num::Tensor2 logits = instances * prototypes.transpose() / temperature;
  return num::cross_entropy_rows(logits, targets)(0, 0);
}

double accumulate_batch_gradient(const std::vector<const skel::SkeletonSequence*>& batch,
                                 const std::vector<int>& targets, const num::Tensor2& prototypes,
                                 double temperature, rel::ModelParams& model, const skel::PartitionScheme& scheme,
                                 const InstanceTransform* transform) {
  num::Tape tape(&model.tensors());
  const rel::TapeContext ctx(tape);
  std::vector<num::Var> rows;
  rows.reserve(batch.size());
  for (const auto* seq : batch) rows.push_back(rel::encode_sequence(ctx, *seq, model, scheme));
  const num::Var loss = spc_loss(ctx, num::vstack(rows), targets, prototypes, temperature, transform);
  tape.backward(loss);
  return loss.value()(0, 0);
}

double batch_loss(const std::vector<const skel::SkeletonSequence*>& batch, const std::vector<int>& targets,
                  const num::Tensor2& prototypes, double temperature, const rel::ModelParams& model,
                  const skel::PartitionScheme& scheme, const InstanceTransform* transform) {
  const rel::PlainContext<double> ctx(model);
  std::vector<num::Tensor2> rows;
  rows.reserve(batch.size());
  for (const auto* seq : batch) rows.push_back(rel::encode_sequence(ctx, *seq, model, scheme));
  return spc_loss(ctx, num::vstack(rows), targets, prototypes, temperature, transform)(0, 0);
}

num::Objective loss_objective(const std::vector<const skel::SkeletonSequence*>& batch,
                              const std::vector<int>& targets, const num::Tensor2& prototypes, double temperature,
                              rel::ModelParams& model, const skel::PartitionScheme& scheme,
                              const InstanceTransform* transform) {
  num::Objective objective;
  objective.value = [&, batch, targets, temperature, transform](const num::ParamTape&) {
    return batch_loss(batch, targets, prototypes, temperature, model, scheme, transform);
  };
  objective.gradient = [&, batch, targets, temperature, transform](num::ParamTape&) {
    accumulate_batch_gradient(batch, targets, prototypes, temperature, model, scheme, transform);
  };
  return objective;
}

std::vector<EpochLog> train(const std::vector<skel::SkeletonSequence>& train_set, rel::ModelParams& model,
                            const skel::PartitionScheme& scheme, const SpcConfig& config, num::AdamState& adam,
                            const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (config.whitening != Whitening::kNone && train_set.size() < 2) {
    throw std::invalid_argument("train: whitening needs at least two training sequences");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<EpochLog> logs;
  int empty_run = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochLog log;
    log.epoch = epoch;

    const num::Tensor2 raw = rel::embed_all(train_set, model, scheme, hooks.threads);
    const InstanceTransform transform = InstanceTransform::fit(raw, config.whitening);
    const num::Tensor2 instances = num::normalize_rows(transform.apply(raw));
    ClusterState clusters = dbscan(instances, config.eps, config.min_samples);
    log.clusters = clusters.clusters;
    log.outliers = clusters.outliers();

    if (clusters.clusters == 0) {
      log.skipped = true;
      log.mean_loss = std::numeric_limits<double>::quiet_NaN();
      std::clog << "warning: epoch " << epoch << " produced no clusters (all " << log.outliers
                << " instances are outliers); skipping update\n";
      if (++empty_run >= config.max_empty_epochs) {
        log.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        logs.push_back(log);
        if (hooks.on_epoch) hooks.on_epoch(log);
        throw TrainingAborted("training aborted: no clusters for " + std::to_string(empty_run) +
                              " consecutive epochs");
      }
    } else {
      empty_run = 0;
      clusters = make_prototypes(std::move(clusters), instances);
      const num::Tensor2 prototypes = clusters.prototypes;

      std::vector<int> order;
      for (std::size_t i = 0; i < clusters.assignment.size(); ++i) {
        if (clusters.assignment[i] != kOutlier) order.push_back(static_cast<int>(i));
      }
      std::shuffle(order.begin(), order.end(), rng);

      double weighted = 0.0;
      const auto bs = static_cast<std::size_t>(config.batch_size);
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t stop = std::min(order.size(), start + bs);
        std::vector<const skel::SkeletonSequence*> batch;
        std::vector<int> targets;
        for (std::size_t i = start; i < stop; ++i) {
          batch.push_back(&train_set[static_cast<std::size_t>(order[i])]);
          targets.push_back(clusters.assignment[static_cast<std::size_t>(order[i])]);
        }
        model.tensors().zero_grad();
        const double loss = accumulate_batch_gradient(batch, targets, prototypes, config.temperature, model, scheme,
                                                      &transform);
        num::adam_step(model.tensors(), adam);
        weighted += loss * static_cast<double>(batch.size());
      }
      log.mean_loss = weighted / static_cast<double>(order.size());
    }
    log.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    logs.push_back(log);
    if (hooks.on_epoch) hooks.on_epoch(log);
  }
  return logs;
}

}  // namespace skelproto::spc
