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

#ifndef SKELPROTO_SYNTHGAIT_HPP
#define SKELPROTO_SYNTHGAIT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "skelproto/skeleton.hpp"

namespace skelproto::synth {

inline constexpr int kBones = 19;
inline constexpr int kSwingAngles = 8;

struct Bone {
  int parent;
  int child;
  const char* name;
};

/// Bones of the 20-joint layout, parents listed before children.
const std::array<Bone, kBones>& bones();

/// Swing angles, two per limb (upper segment, lower segment):
/// left arm, right arm, left leg, right leg.
enum SwingAngle : int {
  kLeftUpperArm = 0,
  kLeftForearm,
  kRightUpperArm,
  kRightForearm,
  kLeftThigh,
  kLeftShin,
  kRightThigh,
  kRightShin,
};

struct WalkerSpec {
  std::string identity;
  std::array<double, kBones> bone_lengths{};   // metres, indexed like bones()
  double frequency = 1.0;                      // Hz
  std::array<double, kSwingAngles> phases{};   // radians
  std::array<double, kSwingAngles> amplitudes{};  // radians
  double noise = 0.0;                          // metres, per coordinate

  void validate() const;
};

WalkerSpec default_walker(std::string identity = "id00");

struct GenerateOptions {
  int sequences_per_identity = 1;
  int frames = 6;
  double frame_rate = 4.0;  // 6 frames then span more than one gait cycle
  int views = 1;  // > 1 rotates sequence s by (s mod views) * 30 degrees about the vertical axis
  std::uint64_t seed = 0;
};

/// Stick-figure forward kinematics. Limb segment angles follow
/// amplitude * sin(2 pi f t + phase) in the sagittal plane; each sequence
/// starts at a seeded random point of the gait cycle and receives Gaussian
/// noise of the walker's sigma. Output order: identity-major.
std::vector<skel::SkeletonSequence> generate(const std::vector<WalkerSpec>& specs, const GenerateOptions& options);

/// Pose of one walker at time t (no noise, no view rotation).
skel::SkeletonFrame pose(const WalkerSpec& spec, double t);

struct PopulationOptions {
  int identities = 10;
  double length_spread = 0.2;     // each bone scaled by a uniform factor in [1 - s, 1 + s]
  double frequency_spread = 0.3;  // frequencies evenly span [1 - s, 1 + s] Hz
  double amplitude_spread = 0.15;
  double phase_spread = 0.3;      // radians
  double noise = 0.01;
  std::uint64_t seed = 0;
};

/// Walkers with independently drawn per-bone lengths, distinct evenly spaced
/// gait frequencies (assigned in a seeded random order) and seeded swing jitter.
std::vector<WalkerSpec> make_population(const PopulationOptions& options);

std::string walkers_to_text(const std::vector<WalkerSpec>& specs);
std::vector<WalkerSpec> walkers_from_text(const std::string& text);

}  // namespace skelproto::synth

#endif  // SKELPROTO_SYNTHGAIT_HPP
