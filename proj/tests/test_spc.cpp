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


#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "skelproto/spc.hpp"
#include "skelproto/synthgait.hpp"
#include "support.hpp"

using namespace skelproto;
using num::Tensor2;

namespace {

Tensor2 blobs(std::mt19937_64& rng, const std::vector<Eigen::RowVectorXd>& centers, int per, double radius) {
  Tensor2 pts(static_cast<Eigen::Index>(centers.size()) * per, centers.front().size());
  std::uniform_real_distribution<double> u(-radius, radius);
  Eigen::Index r = 0;
  for (const auto& c : centers) {
    for (int k = 0; k < per; ++k, ++r) {
      pts.row(r) = c;
      for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(r, j) += u(rng);
    }
  }
  return pts;
}

std::vector<skel::SkeletonSequence> small_gait_set(int identities, int per_identity, std::uint64_t seed) {
  synth::PopulationOptions po;
  po.identities = identities;
  po.seed = seed;
  synth::GenerateOptions go;
  go.sequences_per_identity = per_identity;
  go.seed = seed;
  return skel::center_sequences(synth::generate(synth::make_population(po), go), skel::builtin20());
}

}  // namespace

TEST_CASE("dbscan: two tight blobs far apart give two clusters") {
  std::mt19937_64 rng(1);
  Eigen::RowVectorXd a(3), b(3);
  a << 0, 0, 0;
  b << 10, 0, 0;
  const Tensor2 pts = blobs(rng, {a, b}, 10, 0.01);
  const auto state = spc::dbscan(pts, 0.5, 2);
  CHECK(state.clusters == 2);
  CHECK(state.outliers() == 0);
  CHECK(state.sizes == std::vector<int>{10, 10});
  CHECK(state.members(0).size() == 10);
  CHECK(state.assignment == oracle::dbscan(support::to_mat(pts), 0.5, 2));
}

TEST_CASE("dbscan: identical points form one cluster and an isolated point is an outlier") {
  const Tensor2 same = Tensor2::Constant(5, 4, 0.3);
  CHECK(spc::dbscan(same, 0.1, 5).clusters == 1);
  Tensor2 pts = Tensor2::Zero(4, 2);
  pts.row(3) << 9, 9;
  const auto state = spc::dbscan(pts, 1.0, 2);
  CHECK(state.clusters == 1);
  CHECK(state.assignment[3] == spc::kOutlier);
  CHECK(state.outliers() == 1);
  CHECK_THROWS_AS(spc::dbscan(pts, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(spc::dbscan(pts, 1.0, 0), std::invalid_argument);
}

TEST_CASE("dbscan: boundary distance counts as a neighbour") {
  Tensor2 pts(2, 1);
  pts << 0.0, 0.5;
  CHECK(spc::dbscan(pts, 0.5, 2).clusters == 1);
  CHECK(spc::dbscan(pts, 0.4999, 2).clusters == 0);
}

TEST_CASE("dbscan: a border point between two clusters joins the one found first") {
  // Point 4 has three neighbours (itself included), below a_min = 4, and
  // touches a core point of each cluster.
  Tensor2 pts(9, 1);
  pts << 0.0, 0.3, 0.6, 0.9, 1.8, 2.7, 3.0, 3.3, 3.6;
  const auto state = spc::dbscan(pts, 1.0, 4);
  CHECK(state.clusters == 2);
  CHECK(state.outliers() == 0);
  CHECK(state.assignment == oracle::dbscan(support::to_mat(pts), 1.0, 4));
  CHECK(state.assignment[4] == state.assignment[0]);
  CHECK(state.assignment[5] != state.assignment[0]);
  // Reversing the order makes the other cluster the first discovered.
  const Tensor2 flipped = pts.colwise().reverse();
  const auto back = spc::dbscan(flipped, 1.0, 4);
  CHECK(back.assignment[4] == back.assignment[0]);
}

TEST_CASE("dbscan matches the union-find oracle on random sets") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> n_dist(1, 200), dim_dist(1, 6), a_dist(1, 6);
  std::uniform_real_distribution<double> eps_dist(0.05, 1.2);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = n_dist(rng);
    const Tensor2 pts = support::random_matrix(rng, n, dim_dist(rng), 0.0, 2.0);
    const double eps = eps_dist(rng);
    const int a_min = a_dist(rng);
    const auto got = spc::dbscan(pts, eps, a_min);
    const auto want = oracle::dbscan(support::to_mat(pts), eps, a_min);
    CAPTURE(trial);
    CHECK(oracle::canonical(got.assignment) == oracle::canonical(want));
    // Cluster ids are contiguous and sizes consistent.
    int counted = 0;
    for (int c = 0; c < got.clusters; ++c) {
      CHECK(got.sizes[c] > 0);
      counted += got.sizes[c];
    }
    CHECK(counted + got.outliers() == n);
  }
}

TEST_CASE("dbscan: every cluster holds at least one core point") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor2 pts = support::random_matrix(rng, 80, 2);
    const int a_min = 1 + trial % 5;
    const auto state = spc::dbscan(pts, 0.2, a_min);
    for (int c = 0; c < state.clusters; ++c) {
      bool has_core = false;
      for (int i : state.members(c)) {
        int nb = 0;
        for (Eigen::Index j = 0; j < pts.rows(); ++j) nb += (pts.row(i) - pts.row(j)).squaredNorm() <= 0.04 ? 1 : 0;
        has_core = has_core || nb >= a_min;
      }
      CHECK(has_core);
    }
  }
}

TEST_CASE("make_prototypes: singleton, pair and random clusters") {
  Tensor2 pts(3, 2);
  pts << 3, 4, 1, 0, 0, 1;
  spc::ClusterState st;
  st.assignment = {0, 1, 1};
  st.clusters = 2;
  st.sizes = {1, 2};
  const auto out = spc::make_prototypes(st, pts);
  CHECK(out.prototypes.row(0).isApprox(Eigen::RowVector2d(0.6, 0.8), 1e-15));
  CHECK(out.prototypes.row(1).isApprox(Eigen::RowVector2d(1, 1) / std::sqrt(2.0), 1e-15));

  std::mt19937_64 rng(4);
  const Tensor2 many = support::random_matrix(rng, 40, 6);
  auto state = spc::dbscan(many, 1.5, 2);
  REQUIRE(state.clusters > 0);
  state = spc::make_prototypes(state, many);
  for (int c = 0; c < state.clusters; ++c) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(6);
    for (int i : state.members(c)) mean += many.row(i);
    mean /= static_cast<double>(state.members(c).size());
    CHECK((state.prototypes.row(c) - mean.normalized()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("make_prototypes: no clusters is its own error") {
  spc::ClusterState empty;
  empty.assignment = {spc::kOutlier, spc::kOutlier};
  CHECK_THROWS_AS(spc::make_prototypes(empty, Tensor2::Ones(2, 2)), spc::NoClustersError);
}

TEST_CASE("loss: equal similarity to z prototypes gives ln z") {
  for (int z = 1; z <= 6; ++z) {
    Tensor2 protos = Tensor2::Zero(z, z + 1);
    for (int c = 0; c < z; ++c) protos(c, c) = 1.0;
    Tensor2 inst = Tensor2::Zero(3, z + 1);
    inst.col(z).setOnes();  // orthogonal to every prototype
    const double loss = spc::spc_loss_normalized(inst, {0, z - 1, 0}, protos, 0.08);
    CHECK(std::abs(loss - std::log(static_cast<double>(z))) <= 1e-6);
  }
}

TEST_CASE("loss: a single prototype gives exactly zero") {
  std::mt19937_64 rng(5);
  const Tensor2 inst = num::normalize_rows(Tensor2(support::random_matrix(rng, 7, 5)));
  const Tensor2 proto = num::normalize_rows(Tensor2(support::random_matrix(rng, 1, 5)));
  CHECK(spc::spc_loss_normalized(inst, std::vector<int>(7, 0), proto, 0.08) == 0.0);
  const Tensor2 through =
      spc::spc_loss(rel::PlainContext<double>(rel::ModelParams{}), inst, std::vector<int>(7, 0), proto, 0.08);
  CHECK(through(0, 0) == 0.0);
}

TEST_CASE("loss: similarities (1, 0, 0) at tau 0.08 match the closed form") {
  Tensor2 protos = Tensor2::Identity(3, 3);
  Tensor2 inst(1, 3);
  inst << 1, 0, 0;
  const double want = -std::log(std::exp(12.5) / (std::exp(12.5) + 2.0));
  const double got = spc::spc_loss_normalized(inst, {0}, protos, 0.08);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got == doctest::Approx(7.45e-6).epsilon(1e-2));
}

TEST_CASE("loss: relabelling clusters consistently leaves the loss unchanged") {
  std::mt19937_64 rng(6);
  const Tensor2 inst = num::normalize_rows(Tensor2(support::random_matrix(rng, 9, 4)));
  const Tensor2 protos = num::normalize_rows(Tensor2(support::random_matrix(rng, 3, 4)));
  const std::vector<int> targets = {0, 1, 2, 2, 1, 0, 0, 1, 2};
  const std::vector<int> perm = {2, 0, 1};
  Tensor2 moved(3, 4);
  std::vector<int> relabelled;
  for (int c = 0; c < 3; ++c) moved.row(perm[c]) = protos.row(c);
  for (int t : targets) relabelled.push_back(perm[t]);
  CHECK(spc::spc_loss_normalized(inst, targets, protos, 0.08) ==
        doctest::Approx(spc::spc_loss_normalized(inst, relabelled, moved, 0.08)).epsilon(1e-14));
}

TEST_CASE("loss: errors") {
  const Tensor2 p = Tensor2::Identity(2, 2);
  CHECK_THROWS_AS(spc::spc_loss_normalized(p, {0, 1}, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(spc::spc_loss_normalized(Tensor2(0, 2), {}, p, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(spc::spc_loss_normalized(p, {0, 5}, p, 0.1), std::out_of_range);
}

TEST_CASE("instance transform statistics") {
  std::mt19937_64 rng(7);
  Tensor2 raw = support::random_matrix(rng, 30, 5, -2, 3);
  raw.col(4).setConstant(1.5);
  const auto none = spc::InstanceTransform::fit(raw, spc::Whitening::kNone);
  CHECK(none.apply(raw) == raw);
  const auto center = spc::InstanceTransform::fit(raw, spc::Whitening::kCenter);
  CHECK(center.apply(raw).colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  const auto std_t = spc::InstanceTransform::fit(raw, spc::Whitening::kStandardize);
  const Tensor2 z = std_t.apply(raw);
  for (int c = 0; c < 4; ++c) {
    CHECK(std::sqrt(z.col(c).squaredNorm() / 30.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(z.col(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std_t.inv_scale(4) == 1.0);
  CHECK_THROWS_AS(std_t.apply(Tensor2::Zero(2, 3)), std::invalid_argument);
  CHECK(spc::parse_whitening("center") == spc::Whitening::kCenter);
  CHECK(spc::to_string(spc::Whitening::kStandardize) == "standardize");
  CHECK_THROWS_AS(spc::parse_whitening("pca"), std::invalid_argument);
}

TEST_CASE("loss with a transform ignores a shared shift of the batch") {
  std::mt19937_64 rng(8);
  const Tensor2 emb = support::random_matrix(rng, 6, 5);
  const Tensor2 protos = num::normalize_rows(Tensor2(support::random_matrix(rng, 2, 5)));
  const auto t = spc::InstanceTransform::fit(emb, spc::Whitening::kStandardize);
  const std::vector<int> targets = {0, 1, 0, 1, 1, 0};
  const rel::PlainContext<double> ctx{rel::ModelParams{}};
  const double base = spc::spc_loss(ctx, emb, targets, protos, 0.08, &t)(0, 0);
  const Tensor2 shifted = emb.rowwise() + Eigen::RowVectorXd(support::random_matrix(rng, 1, 5, -3, 3));
  CHECK(spc::spc_loss(ctx, shifted, targets, protos, 0.08, &t)(0, 0) == doctest::Approx(base).epsilon(1e-10));
  // The loss on the full batch equals the plain loss on the transformed, normalised instances.
  CHECK(base == doctest::Approx(spc::spc_loss_normalized(num::normalize_rows(t.apply(emb)), targets, protos, 0.08))
                    .epsilon(1e-12));
}

TEST_CASE("loss gradient through the encoder matches finite differences") {
  rel::ModelConfig cfg;
  cfg.hidden_dim = 4;
  cfg.heads = 2;
  auto model = rel::ModelParams::initialize(cfg, 21);
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(9);
  std::vector<skel::SkeletonSequence> seqs;
  for (int i = 0; i < 3; ++i) seqs.push_back(skel::center_sequence(support::random_sequence(rng, 2), s));
  std::vector<const skel::SkeletonSequence*> batch;
  for (const auto& q : seqs) batch.push_back(&q);
  const Tensor2 protos = num::normalize_rows(Tensor2(support::random_matrix(rng, 2, 72)));
  const std::vector<int> targets = {0, 1, 1};
  for (auto mode : {spc::Whitening::kNone, spc::Whitening::kStandardize}) {
    const auto t = spc::InstanceTransform::fit(rel::embed_all(seqs, model, s), mode);
    const auto obj = spc::loss_objective(batch, targets, protos, 0.08, model, s, &t);
    num::GradCheckOptions opt;
    opt.samples_per_param = 8;
    const auto report = num::grad_check(obj, model.tensors(), opt);
    CHECK(report.pass);
    CHECK(report.max_rel_error <= 1e-4);
    CHECK(obj.value(model.tensors()) == doctest::Approx(spc::batch_loss(batch, targets, protos, 0.08, model, s, &t)));
  }
}

TEST_CASE("train: fixed seed gives identical logs and parameters") {
  const auto data = small_gait_set(3, 4, 1);
  spc::SpcConfig cfg;
  cfg.epochs = 2;
  auto run = [&] {
    auto model = rel::ModelParams::initialize({}, 3);
    num::AdamState adam;
    auto logs = spc::train(data, model, skel::builtin20(), cfg, adam);
    return std::make_pair(logs, model.tensors()[7].value);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.first.size() == 2);
  for (std::size_t e = 0; e < 2; ++e) {
    CHECK(a.first[e].clusters == b.first[e].clusters);
    CHECK(a.first[e].outliers == b.first[e].outliers);
    CHECK(std::memcmp(&a.first[e].mean_loss, &b.first[e].mean_loss, sizeof(double)) == 0);
  }
  CHECK(a.second == b.second);
}

TEST_CASE("train: tiny eps skips epochs, warns and aborts after the limit") {
  const auto data = small_gait_set(2, 3, 2);
  spc::SpcConfig cfg;
  cfg.eps = 1e-9;
  cfg.epochs = 3;
  cfg.max_empty_epochs = 5;
  auto model = rel::ModelParams::initialize({}, 4);
  const auto before = model.tensors()[0].value;
  num::AdamState adam;
  std::vector<spc::EpochLog> seen;
  spc::TrainHooks hooks;
  hooks.on_epoch = [&](const spc::EpochLog& log) { seen.push_back(log); };
  const auto logs = spc::train(data, model, skel::builtin20(), cfg, adam, hooks);
  REQUIRE(logs.size() == 3);
  for (const auto& log : logs) {
    CHECK(log.skipped);
    CHECK(log.clusters == 0);
    CHECK(log.outliers == 6);
    CHECK(std::isnan(log.mean_loss));
  }
  CHECK(seen.size() == 3);
  CHECK(model.tensors()[0].value == before);
  CHECK(adam.step() == 0);

  cfg.epochs = 10;
  cfg.max_empty_epochs = 2;
  seen.clear();
  CHECK_THROWS_AS(spc::train(data, model, skel::builtin20(), cfg, adam, hooks), spc::TrainingAborted);
  CHECK(seen.size() == 2);
}

TEST_CASE("train: argument checks") {
  auto model = rel::ModelParams::initialize({}, 5);
  num::AdamState adam;
  spc::SpcConfig cfg;
  CHECK_THROWS_AS(spc::train({}, model, skel::builtin20(), cfg, adam), std::invalid_argument);
  const auto one = small_gait_set(1, 1, 3);
  CHECK_THROWS_AS(spc::train(one, model, skel::builtin20(), cfg, adam), std::invalid_argument);
  cfg.temperature = 0.0;
  CHECK_THROWS_AS(spc::train(small_gait_set(2, 2, 3), model, skel::builtin20(), cfg, adam), std::invalid_argument);
}

TEST_CASE("loss is never negative") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int z = 1 + trial % 6;
    const Tensor2 inst = num::normalize_rows(Tensor2(support::random_matrix(rng, 5, 4)));
    const Tensor2 protos = num::normalize_rows(Tensor2(support::random_matrix(rng, z, 4)));
    std::vector<int> targets;
    for (int i = 0; i < 5; ++i) targets.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(z)));
    CHECK(spc::spc_loss_normalized(inst, targets, protos, 0.05 + 0.1 * (trial % 3)) >= 0.0);
  }
}
