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

#include "skelproto/skeleton.hpp"

#include <cmath>
#include <initializer_list>
#include <set>
#include <stdexcept>

namespace skelproto::skel {

namespace {

Partition uniform(std::initializer_list<int> joints) {
  Partition p;
  const double w = 1.0 / static_cast<double>(joints.size());
  for (int j : joints) p.push_back({j, w});
  return p;
}

PartitionScheme make_builtin20() {
  using namespace joint20;
  PartitionScheme s;
  s.name = "builtin20";
  s.joint_count = kCount;

  // Part level: 0 head+neck, 1 torso, 2/3 left upper arm / forearm+hand,
  // 4/5 right arm, 6/7 left thigh / shin+foot, 8/9 right leg.
  s.levels[0].partitions = {
      uniform({kHead, kShoulderCenter}),   uniform({kSpine, kHipCenter}),
      uniform({kShoulderLeft, kElbowLeft}), uniform({kWristLeft, kHandLeft}),
      uniform({kShoulderRight, kElbowRight}), uniform({kWristRight, kHandRight}),
      uniform({kHipLeft, kKneeLeft}),       uniform({kAnkleLeft, kFootLeft}),
      uniform({kHipRight, kKneeRight}),     uniform({kAnkleRight, kFootRight}),
  };
  s.levels[0].edges = {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5}, {1, 6}, {6, 7}, {1, 8}, {8, 9}};

  // Body level: head+torso, left arm, right arm, left leg, right leg.
  s.levels[1].partitions = {
      uniform({kHipCenter, kSpine, kShoulderCenter, kHead}),
      uniform({kShoulderLeft, kElbowLeft, kWristLeft, kHandLeft}),
      uniform({kShoulderRight, kElbowRight, kWristRight, kHandRight}),
      uniform({kHipLeft, kKneeLeft, kAnkleLeft, kFootLeft}),
      uniform({kHipRight, kKneeRight, kAnkleRight, kFootRight}),
  };
  s.levels[1].edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};

  // Hyper-body level: head+torso, both arms, both legs.
  s.levels[2].partitions = {
      uniform({kHipCenter, kSpine, kShoulderCenter, kHead}),
      uniform({kShoulderLeft, kElbowLeft, kWristLeft, kHandLeft, kShoulderRight, kElbowRight, kWristRight,
               kHandRight}),
      uniform({kHipLeft, kKneeLeft, kAnkleLeft, kFootLeft, kHipRight, kKneeRight, kAnkleRight, kFootRight}),
  };
  s.levels[2].edges = {{1, 0}, {0, 2}};

  s.center_level = 0;
  s.center_node = 1;
  s.validate();
  return s;
}

}  // namespace

void PartitionScheme::validate() const {
  if (joint_count <= 0) throw std::invalid_argument("scheme: joint count must be positive");
  for (int l = 0; l < kLevels; ++l) {
    const GraphLevel& level = levels[static_cast<std::size_t>(l)];
    const std::string where = "scheme level " + std::to_string(l + 1);
    if (level.partitions.empty()) throw std::invalid_argument(where + ": no partitions");
    for (std::size_t p = 0; p < level.partitions.size(); ++p) {
      const Partition& part = level.partitions[p];
      if (part.empty()) throw std::invalid_argument(where + ": partition " + std::to_string(p) + " is empty");
      double total = 0.0;
      for (const auto& m : part) {
        if (m.joint < 0 || m.joint >= joint_count) {
          throw std::invalid_argument(where + ": partition " + std::to_string(p) + " references joint " +
                                      std::to_string(m.joint) + " outside [0, " + std::to_string(joint_count) +
                                      ")");
        }
        if (!(m.weight >= 0.0) || !std::isfinite(m.weight)) {
          throw std::invalid_argument(where + ": partition " + std::to_string(p) + " has a negative weight");
        }
        total += m.weight;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument(where + ": weights of partition " + std::to_string(p) + " sum to " +
                                    std::to_string(total));
      }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& [a, b] : level.edges) {
      if (a < 0 || b < 0 || a >= level.node_count() || b >= level.node_count()) {
        throw std::invalid_argument(where + ": edge endpoint out of range");
      }
      if (a == b) throw std::invalid_argument(where + ": self-loop edge on node " + std::to_string(a));
      if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
        throw std::invalid_argument(where + ": duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
      }
    }
  }
  if (center_level < 0 || center_level >= kLevels ||
      center_node < 0 || center_node >= levels[static_cast<std::size_t>(center_level)].node_count()) {
    throw std::invalid_argument("scheme: center node out of range");
  }
}

num::Mask PartitionScheme::neighbor_mask(int level) const {
  const GraphLevel& g = levels.at(static_cast<std::size_t>(level));
  const int n = g.node_count();
  num::Mask mask = num::Mask::Constant(n, n, false);
  for (int i = 0; i < n; ++i) mask(i, i) = true;
  for (const auto& [a, b] : g.edges) {
    mask(a, b) = true;
    mask(b, a) = true;
  }
  return mask;
}

int PartitionScheme::total_nodes() const {
  int n = 0;
  for (const auto& l : levels) n += l.node_count();
  return n;
}

const PartitionScheme& builtin20() {
  static const PartitionScheme scheme = make_builtin20();
  return scheme;
}

MultiLevelGraph build_graphs(const SkeletonFrame& frame, const PartitionScheme& scheme) {
  if (frame.cols() != 3) throw std::invalid_argument("build_graphs: frame must have 3 columns");
  if (frame.rows() != scheme.joint_count) {
    throw std::invalid_argument("build_graphs: frame has " + std::to_string(frame.rows()) +
                                " joints, scheme expects " + std::to_string(scheme.joint_count));
  }
  MultiLevelGraph g;
  g.scheme = &scheme;
  for (int l = 0; l < kLevels; ++l) {
    const GraphLevel& level = scheme.levels[static_cast<std::size_t>(l)];
    num::Tensor2 nodes = num::Tensor2::Zero(level.node_count(), 3);
    for (int i = 0; i < level.node_count(); ++i) {
      for (const auto& m : level.partitions[static_cast<std::size_t>(i)]) {
        if (m.joint < 0 || m.joint >= frame.rows()) {
          throw std::out_of_range("build_graphs: partition references joint " + std::to_string(m.joint));
        }
        nodes.row(i) += m.weight * frame.row(m.joint);
      }
    }
    g.nodes[static_cast<std::size_t>(l)] = std::move(nodes);
  }
  return g;
}

std::vector<SkeletonSequence> split_sequences(const std::vector<SkeletonSequence>& recordings, int window,
                                              int stride) {
  if (window < 1) throw std::invalid_argument("split_sequences: window must be >= 1");
  if (stride < 1) throw std::invalid_argument("split_sequences: stride must be >= 1");
  std::vector<SkeletonSequence> out;
  const auto w = static_cast<std::size_t>(window);
  const auto s = static_cast<std::size_t>(stride);
  for (const auto& rec : recordings) {
    if (rec.length() < w) continue;
    for (std::size_t start = 0; start + w <= rec.length(); start += s) {
      SkeletonSequence piece;
      piece.identity = rec.identity;
      piece.view = rec.view;
      piece.frames.assign(rec.frames.begin() + static_cast<std::ptrdiff_t>(start),
                          rec.frames.begin() + static_cast<std::ptrdiff_t>(start + w));
      out.push_back(std::move(piece));
    }
  }
  return out;
}

SkeletonSequence center_sequence(const SkeletonSequence& sequence, const PartitionScheme& scheme) {
  const Partition& center =
      scheme.levels[static_cast<std::size_t>(scheme.center_level)].partitions[static_cast<std::size_t>(
          scheme.center_node)];
  SkeletonSequence out = sequence;
  for (auto& frame : out.frames) {
    Eigen::RowVector3d origin = Eigen::RowVector3d::Zero();
    for (const auto& m : center) origin += m.weight * frame.row(m.joint);
    frame.rowwise() -= origin;
  }
  return out;
}

std::vector<SkeletonSequence> center_sequences(const std::vector<SkeletonSequence>& sequences,
                                               const PartitionScheme& scheme) {
  std::vector<SkeletonSequence> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(center_sequence(s, scheme));
  return out;
}

}  // namespace skelproto::skel
