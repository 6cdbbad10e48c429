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


#include <algorithm>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "skelproto/encoder.hpp"
#include "support.hpp"

using namespace skelproto;
using num::Tensor2;

namespace {

double max_diff(const Tensor2& a, const oracle::Mat& b) {
  REQUIRE(a.rows() == static_cast<Eigen::Index>(b.size()));
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    REQUIRE(a.cols() == static_cast<Eigen::Index>(b[i].size()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b[i][j]));
  }
  return d;
}

rel::ModelParams model_with(int dh, int heads, double lambda, std::uint64_t seed,
                            rel::Activation act = rel::Activation::kTanh) {
  rel::ModelConfig cfg;
  cfg.hidden_dim = dh;
  cfg.heads = heads;
  cfg.fusion_weight = lambda;
  cfg.activation = act;
  return rel::ModelParams::initialize(cfg, seed);
}

// A scheme with a single node per level, every node averaging all joints.
skel::PartitionScheme one_node_scheme() {
  skel::PartitionScheme s;
  s.name = "one";
  s.joint_count = 20;
  for (auto& level : s.levels) {
    skel::Partition p;
    for (int j = 0; j < 20; ++j) p.push_back({j, 1.0 / 20.0});
    level.partitions = {p};
  }
  return s;
}

}  // namespace

TEST_CASE("default model has 1344 parameters with the expected names") {
  const auto model = rel::ModelParams::initialize({}, 0);
  CHECK(model.tensors().scalar_count() == 1344);
  CHECK(model.tensors().size() == 3 * 8 * 2 + 6);
  CHECK(model.tensors().at("msrl.l1.h0.Wv").value.rows() == 3);
  CHECK(model.tensors().at("msrl.l3.h7.Wr").value.rows() == 16);
  CHECK(model.tensors().at("fcrl.2-3.Wc").value.cols() == 8);
  CHECK(model.embedding_dim(skel::builtin20()) == 144);
}

TEST_CASE("initialisation is seeded and bounded by the fan-in") {
  const auto a = rel::ModelParams::initialize({}, 5);
  const auto b = rel::ModelParams::initialize({}, 5);
  const auto c = rel::ModelParams::initialize({}, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.tensors().size(); ++i) {
    CHECK(a.tensors()[i].value == b.tensors()[i].value);
    differs = differs || a.tensors()[i].value != c.tensors()[i].value;
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.tensors()[i].value.rows()));
    CHECK(a.tensors()[i].value.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(differs);
}

TEST_CASE("model config validation") {
  rel::ModelConfig cfg;
  cfg.hidden_dim = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.heads = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_THROWS(rel::parse_activation("relu"));
  CHECK(rel::parse_activation("sigmoid") == rel::Activation::kSigmoid);
}

TEST_CASE("encode_frame: default model gives an 18 x 8 representation") {
  const auto model = rel::ModelParams::initialize({}, 1);
  std::mt19937_64 rng(1);
  const auto g = skel::build_graphs(support::random_frame(rng), skel::builtin20());
  const Tensor2 rep = rel::encode_frame(rel::PlainContext<double>(model), g, model);
  CHECK(rep.rows() == 18);
  CHECK(rep.cols() == 8);
}

TEST_CASE("structural heads: identical node positions give uniform attention") {
  const auto model = rel::ModelParams::initialize({}, 2);
  const auto& s = skel::builtin20();
  const skel::SkeletonFrame frame = skel::SkeletonFrame::Constant(20, 3, 0.4);
  const auto g = skel::build_graphs(frame, s);
  for (int l = 0; l < 3; ++l) {
    const num::Mask mask = s.neighbor_mask(l);
    for (const auto& h : rel::structural_heads(rel::PlainContext<double>(model), g, l, model)) {
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        const double share = 1.0 / static_cast<double>(mask.row(i).count());
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
          CHECK(h.attention(i, j) == doctest::Approx(mask(i, j) ? share : 0.0).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("structural heads: an isolated node attends only to itself") {
  skel::PartitionScheme s = skel::builtin20();
  auto& edges = s.levels[0].edges;
  edges.erase(std::remove_if(edges.begin(), edges.end(), [](auto e) { return e.first == 9 || e.second == 9; }),
              edges.end());
  const auto model = rel::ModelParams::initialize({}, 3);
  std::mt19937_64 rng(3);
  const auto g = skel::build_graphs(support::random_frame(rng), s);
  for (const auto& h : rel::structural_heads(rel::PlainContext<double>(model), g, 0, model)) {
    CHECK(h.attention(9, 9) == 1.0);
    CHECK(h.attention.row(9).sum() == 1.0);
  }
}

TEST_CASE("encoder matches the straight-line oracle on random frames") {
  std::mt19937_64 rng(4);
  const auto& s = skel::builtin20();
  struct Setup {
    int dh, heads;
    double lambda;
    rel::Activation act;
  };
  for (const Setup& setup : {Setup{8, 8, 1.0, rel::Activation::kTanh}, Setup{8, 1, 1.0, rel::Activation::kTanh},
                             Setup{4, 3, 0.5, rel::Activation::kSigmoid}, Setup{5, 2, 0.0, rel::Activation::kTanh}}) {
    const auto model = model_with(setup.dh, setup.heads, setup.lambda, rng(), setup.act);
    for (int trial = 0; trial < 5; ++trial) {
      const auto frame = support::random_frame(rng);
      rel::FrameTrace<Tensor2> trace;
      const Tensor2 rep =
          rel::encode_frame(rel::PlainContext<double>(model), skel::build_graphs(frame, s), model, &trace);
      const auto ref = oracle::encode_frame(support::to_mat(frame), s, model);
      CHECK(max_diff(rep, ref.rep) <= 1e-10);
      for (int l = 0; l < 3; ++l) {
        for (int h = 0; h < setup.heads; ++h) CHECK(max_diff(trace.attention[l][h], ref.attention[l][h]) <= 1e-10);
        CHECK(max_diff(trace.structural[l], ref.structural[l]) <= 1e-10);
        CHECK(max_diff(trace.fused[l], ref.fused[l]) <= 1e-10);
      }
      for (int p = 0; p < 6; ++p) CHECK(max_diff(trace.relations[p], ref.relations[p]) <= 1e-10);
    }
  }
}

TEST_CASE("msrl: one head equals its output and copies of a head average to it") {
  std::mt19937_64 rng(5);
  const auto& s = skel::builtin20();
  const auto g = skel::build_graphs(support::random_frame(rng), s);
  const auto single = model_with(8, 1, 1.0, 9);
  const rel::PlainContext<double> ctx1(single);
  const auto feats = rel::msrl(ctx1, g, single);
  for (int l = 0; l < 3; ++l) {
    CHECK(feats[l] == rel::structural_heads(ctx1, g, l, single).front().output);
  }
  auto many = model_with(8, 4, 1.0, 10);
  for (int l = 0; l < 3; ++l) {
    for (int h = 0; h < 4; ++h) {
      many.tensors()[many.feature_map(l, h)].value = single.tensors()[single.feature_map(l, 0)].value;
      many.tensors()[many.relation_vector(l, h)].value = single.tensors()[single.relation_vector(l, 0)].value;
    }
  }
  const auto copies = rel::msrl(rel::PlainContext<double>(many), g, many);
  for (int l = 0; l < 3; ++l) CHECK((copies[l] - feats[l]).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("msrl: eight random heads average to the external mean") {
  std::mt19937_64 rng(6);
  const auto model = model_with(8, 8, 1.0, 11);
  const rel::PlainContext<double> ctx(model);
  const auto g = skel::build_graphs(support::random_frame(rng), skel::builtin20());
  const auto feats = rel::msrl(ctx, g, model);
  for (int l = 0; l < 3; ++l) {
    Tensor2 mean = Tensor2::Zero(feats[l].rows(), feats[l].cols());
    for (const auto& h : rel::structural_heads(ctx, g, l, model)) mean += h.output;
    mean /= 8.0;
    CHECK((mean - feats[l]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("fcrl: identical features give 1/n_b and single-node levels give ones") {
  std::array<Tensor2, 3> feats = {Tensor2::Constant(10, 8, 0.3), Tensor2::Constant(5, 8, 0.3),
                                  Tensor2::Constant(3, 8, 0.3)};
  const auto rel = rel::fcrl(feats);
  for (int p = 0; p < 6; ++p) {
    const auto [a, b] = rel::level_pairs()[p];
    CHECK(rel[p].rows() == feats[a].rows());
    CHECK((rel[p].array() - 1.0 / static_cast<double>(feats[b].rows())).abs().maxCoeff() <= 1e-15);
  }
  std::mt19937_64 rng(7);
  std::array<Tensor2, 3> single = {support::random_matrix(rng, 4, 8), support::random_matrix(rng, 2, 8),
                                   support::random_matrix(rng, 1, 8)};
  const auto r = rel::fcrl(single);
  CHECK(r[rel::pair_index(0, 2)] == Tensor2::Ones(4, 1));
  CHECK(r[rel::pair_index(2, 2)] == Tensor2::Ones(1, 1));
}

TEST_CASE("fcrl: random features match a direct softmax of inner products") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Tensor2, 3> feats = {support::random_matrix(rng, 10, 8, -2, 2), support::random_matrix(rng, 5, 8, -2, 2),
                                    support::random_matrix(rng, 3, 8, -2, 2)};
    const auto r = rel::fcrl(feats);
    for (int p = 0; p < 6; ++p) {
      const auto [a, b] = rel::level_pairs()[p];
      for (Eigen::Index i = 0; i < feats[a].rows(); ++i) {
        double denom = 0.0;
        for (Eigen::Index j = 0; j < feats[b].rows(); ++j) denom += std::exp(feats[a].row(i).dot(feats[b].row(j)));
        for (Eigen::Index j = 0; j < feats[b].rows(); ++j) {
          CHECK(r[p](i, j) == doctest::Approx(std::exp(feats[a].row(i).dot(feats[b].row(j))) / denom).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("fuse: zero fusion weight returns the input exactly") {
  std::mt19937_64 rng(9);
  const auto model = model_with(8, 2, 0.0, 12);
  std::array<Tensor2, 3> feats = {support::random_matrix(rng, 10, 8), support::random_matrix(rng, 5, 8),
                                  support::random_matrix(rng, 3, 8)};
  const auto out = rel::fuse(rel::PlainContext<double>(model), feats, rel::fcrl(feats), model);
  for (int l = 0; l < 3; ++l) {
    CHECK(std::memcmp(out[l].data(), feats[l].data(), sizeof(double) * static_cast<std::size_t>(out[l].size())) == 0);
  }
}

TEST_CASE("fuse: one node per level reduces to residual sums of W_C v") {
  const auto s = one_node_scheme();
  const auto model = model_with(8, 2, 1.0, 13);
  std::mt19937_64 rng(10);
  const auto g = skel::build_graphs(support::random_frame(rng), s);
  const rel::PlainContext<double> ctx(model);
  const auto feats = rel::msrl(ctx, g, model);
  const auto rel = rel::fcrl(feats);
  for (const auto& r : rel) CHECK(r == Tensor2::Ones(1, 1));
  const auto out = rel::fuse(ctx, feats, rel, model);
  auto wc = [&](int a, int b) { return model.tensors()[model.fusion_map(a, b)].value; };
  // Level 3 pairs only with itself, so its update is v3 + W_C^{3,3} v3.
  const Eigen::VectorXd v3 = feats[2].transpose();
  CHECK(((out[2].transpose() - (v3 + wc(2, 2) * v3))).cwiseAbs().maxCoeff() <= 1e-14);
  const Eigen::VectorXd v1 = feats[0].transpose(), v2 = feats[1].transpose();
  const Eigen::VectorXd expect1 = v1 + wc(0, 0) * v1 + wc(0, 1) * v2 + wc(0, 2) * v3;
  CHECK((out[0].transpose() - expect1).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("encode_frame: identical frames give identical representations") {
  const auto model = rel::ModelParams::initialize({}, 14);
  std::mt19937_64 rng(11);
  const auto frame = support::random_frame(rng);
  const auto& s = skel::builtin20();
  const rel::PlainContext<double> ctx(model);
  rel::FrameTrace<Tensor2> trace;
  const Tensor2 a = rel::encode_frame(ctx, skel::build_graphs(frame, s), model, &trace);
  const Tensor2 b = rel::encode_frame(ctx, skel::build_graphs(frame, s), model);
  CHECK(a == b);
  CHECK(a.topRows(10) == trace.fused[0]);
  CHECK(a.middleRows(10, 5) == trace.fused[1]);
  CHECK(a.bottomRows(3) == trace.fused[2]);
}

TEST_CASE("encode_sequence: one frame, two frames and errors") {
  const auto model = rel::ModelParams::initialize({}, 15);
  const auto& s = skel::builtin20();
  const rel::PlainContext<double> ctx(model);
  std::mt19937_64 rng(12);
  const auto seq = support::random_sequence(rng, 2);
  const Tensor2 r0 = rel::encode_frame(ctx, skel::build_graphs(seq.frames[0], s), model);
  const Tensor2 r1 = rel::encode_frame(ctx, skel::build_graphs(seq.frames[1], s), model);
  skel::SkeletonSequence one;
  one.frames = {seq.frames[0]};
  CHECK(rel::encode_sequence(ctx, one, model, s) == num::flatten_rows(r0));
  const Tensor2 two = rel::encode_sequence(ctx, seq, model, s);
  CHECK((two - num::flatten_rows(Tensor2((r0 + r1) / 2.0))).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(rel::encode_sequence(ctx, skel::SkeletonSequence{}, model, s), std::invalid_argument);
}

TEST_CASE("encode_sequence: frame order never changes the embedding") {
  const auto model = rel::ModelParams::initialize({}, 16);
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    auto seq = support::random_sequence(rng, 6);
    const auto base = rel::embed(seq, model, s).values;
    std::shuffle(seq.frames.begin(), seq.frames.end(), rng);
    const auto shuffled = rel::embed(seq, model, s).values;
    CHECK(std::memcmp(base.data(), shuffled.data(), sizeof(double) * 144) == 0);
  }
}

TEST_CASE("encode_sequence: matches the oracle frame mean") {
  const auto model = rel::ModelParams::initialize({}, 17);
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(14);
  const auto seq = support::random_sequence(rng, 6);
  std::vector<oracle::Mat> frames;
  for (const auto& f : seq.frames) frames.push_back(support::to_mat(f));
  const auto ref = oracle::encode_sequence(frames, s, model);
  const auto got = rel::embed(seq, model, s).values;
  for (int k = 0; k < 144; ++k) CHECK(std::abs(got(k) - ref[k]) <= 1e-10);
}

TEST_CASE("tape and plain evaluation agree") {
  auto model = rel::ModelParams::initialize({}, 18);
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(15);
  const auto seq = support::random_sequence(rng, 3);
  num::Tape tape(&model.tensors());
  const num::Var v = rel::encode_sequence(rel::TapeContext(tape), seq, model, s);
  const Tensor2 plain = rel::encode_sequence(rel::PlainContext<double>(model), seq, model, s);
  CHECK(v.value() == plain);
}

TEST_CASE("embed_all is independent of the thread count") {
  const auto model = rel::ModelParams::initialize({}, 19);
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(16);
  std::vector<skel::SkeletonSequence> seqs;
  for (int i = 0; i < 13; ++i) seqs.push_back(support::random_sequence(rng, 3));
  const Tensor2 one = rel::embed_all(seqs, model, s, 1);
  const Tensor2 four = rel::embed_all(seqs, model, s, 4);
  CHECK(one.rows() == 13);
  CHECK(one == four);
}

TEST_CASE("attention and relation rows sum to one on random frames") {
  const auto& s = skel::builtin20();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const auto model = model_with(8, 8, 1.0, rng());
    const auto frame = support::random_matrix(rng, 20, 3, -3, 3);
    rel::FrameTrace<Tensor2> trace;
    (void)rel::encode_frame(rel::PlainContext<double>(model), skel::build_graphs(frame, s), model, &trace);
    for (const auto& level : trace.attention) {
      for (const auto& a : level) CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
    }
    for (const auto& r : trace.relations) CHECK((r.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
    const auto exported = rel::frame_relations(frame, model, s);
    for (int p = 0; p < 6; ++p) CHECK(exported[p] == trace.relations[p]);
  }
}
