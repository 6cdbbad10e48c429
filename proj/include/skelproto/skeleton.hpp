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

#ifndef SKELPROTO_SKELETON_HPP
#define SKELPROTO_SKELETON_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skelproto/tensor.hpp"

namespace skelproto::skel {

inline constexpr int kLevels = 3;

/// One skeleton: J rows of (x, y, z) joint coordinates.
using SkeletonFrame = num::Tensor2;

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  std::optional<std::string> identity;
  std::optional<std::string> view;

  int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
  std::size_t length() const { return frames.size(); }
};

struct PartitionMember {
  int joint = 0;
  double weight = 0.0;
};

using Partition = std::vector<PartitionMember>;

struct GraphLevel {
  std::vector<Partition> partitions;
  std::vector<std::pair<int, int>> edges;  // undirected, each pair listed once

  int node_count() const { return static_cast<int>(partitions.size()); }
};

/// Maps a joint layout onto the part / body / hyper-body graph levels.
struct PartitionScheme {
  std::string name;
  int joint_count = 0;
  std::array<GraphLevel, kLevels> levels;
  // Node whose position is subtracted when centering frames.
  int center_level = 0;
  int center_node = 0;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  /// Edge adjacency plus self-loops, n_l x n_l.
  num::Mask neighbor_mask(int level) const;

  int total_nodes() const;
};

/// Canonical 20-joint layout (hip-center rooted, Kinect-v1 ordering).
namespace joint20 {
enum Joint : int {
  kHipCenter = 0,
  kSpine,
  kShoulderCenter,
  kHead,
  kShoulderLeft,
  kElbowLeft,
  kWristLeft,
  kHandLeft,
  kShoulderRight,
  kElbowRight,
  kWristRight,
  kHandRight,
  kHipLeft,
  kKneeLeft,
  kAnkleLeft,
  kFootLeft,
  kHipRight,
  kKneeRight,
  kAnkleRight,
  kFootRight,
  kCount
};
}  // namespace joint20

/// Built-in 10/5/3 scheme for the 20-joint layout.
const PartitionScheme& builtin20();

/// Per-level node positions of one frame.
struct MultiLevelGraph {
  std::array<num::Tensor2, kLevels> nodes;  // n_l x 3
  const PartitionScheme* scheme = nullptr;
};

/// Node i of level l is the weighted average of its partition's joints.
MultiLevelGraph build_graphs(const SkeletonFrame& frame, const PartitionScheme& scheme);

/// Cuts each recording into windows of `window` frames every `stride` frames.
/// Recordings shorter than the window contribute nothing.
std::vector<SkeletonSequence> split_sequences(const std::vector<SkeletonSequence>& recordings, int window,
                                              int stride);

/// Translates every frame so the scheme's center node sits at the origin.
SkeletonSequence center_sequence(const SkeletonSequence& sequence, const PartitionScheme& scheme);
std::vector<SkeletonSequence> center_sequences(const std::vector<SkeletonSequence>& sequences,
                                               const PartitionScheme& scheme);

}  // namespace skelproto::skel

#endif  // SKELPROTO_SKELETON_HPP
