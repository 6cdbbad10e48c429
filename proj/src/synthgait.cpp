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

#include "skelproto/synthgait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace skelproto::synth {

using namespace skel::joint20;

namespace {

constexpr double kPi = std::numbers::pi;

// Fixed direction for trunk and girdle bones; limbs are swung instead.
Eigen::RowVector3d rest_direction(int child) {
  switch (child) {
    case kSpine:
    case kShoulderCenter:
    case kHead:
      return {0.0, 1.0, 0.0};
    case kShoulderLeft:
    case kHipLeft:
      return {0.0, 0.0, 1.0};
    case kShoulderRight:
    case kHipRight:
      return {0.0, 0.0, -1.0};
    default:
      return {0.0, -1.0, 0.0};
  }
}

Eigen::RowVector3d sagittal(double angle) { return {std::sin(angle), -std::cos(angle), 0.0}; }

}  // namespace

const std::array<Bone, kBones>& bones() {
  static const std::array<Bone, kBones> table = {{
      {kHipCenter, kSpine, "lower_spine"},
      {kSpine, kShoulderCenter, "upper_spine"},
      {kShoulderCenter, kHead, "neck"},
      {kShoulderCenter, kShoulderLeft, "left_clavicle"},
      {kShoulderLeft, kElbowLeft, "left_upper_arm"},
      {kElbowLeft, kWristLeft, "left_forearm"},
      {kWristLeft, kHandLeft, "left_hand"},
      {kShoulderCenter, kShoulderRight, "right_clavicle"},
      {kShoulderRight, kElbowRight, "right_upper_arm"},
      {kElbowRight, kWristRight, "right_forearm"},
      {kWristRight, kHandRight, "right_hand"},
      {kHipCenter, kHipLeft, "left_pelvis"},
      {kHipLeft, kKneeLeft, "left_thigh"},
      {kKneeLeft, kAnkleLeft, "left_shin"},
      {kAnkleLeft, kFootLeft, "left_foot"},
      {kHipCenter, kHipRight, "right_pelvis"},
      {kHipRight, kKneeRight, "right_thigh"},
      {kKneeRight, kAnkleRight, "right_shin"},
      {kAnkleRight, kFootRight, "right_foot"},
  }};
  return table;
}

void WalkerSpec::validate() const {
  for (std::size_t b = 0; b < bone_lengths.size(); ++b) {
    if (!(bone_lengths[b] > 0.0)) {
      throw std::invalid_argument("walker " + identity + ": bone " + bones()[b].name + " must have positive length");
    }
  }
  if (!(frequency > 0.0)) throw std::invalid_argument("walker " + identity + ": frequency must be > 0");
  if (!(noise >= 0.0)) throw std::invalid_argument("walker " + identity + ": noise must be >= 0");
}

WalkerSpec default_walker(std::string identity) {
  WalkerSpec w;
  w.identity = std::move(identity);
  w.bone_lengths = {0.25, 0.25, 0.20,              // spine, spine, neck
                    0.18, 0.30, 0.25, 0.08,        // left arm
                    0.18, 0.30, 0.25, 0.08,        // right arm
                    0.10, 0.45, 0.42, 0.15,        // left leg
                    0.10, 0.45, 0.42, 0.15};       // right leg
  w.frequency = 1.0;
  w.amplitudes = {0.35, 0.20, 0.35, 0.20, 0.45, 0.35, 0.45, 0.35};
  // Arms swing against the same-side leg; lower segments lag a quarter cycle.
  w.phases = {kPi, kPi + kPi / 2, 0.0, kPi / 2, 0.0, kPi / 2, kPi, kPi + kPi / 2};
  return w;
}

skel::SkeletonFrame pose(const WalkerSpec& spec, double t) {
  std::array<double, kSwingAngles> angle{};
  for (int a = 0; a < kSwingAngles; ++a) {
    angle[static_cast<std::size_t>(a)] =
        spec.amplitudes[static_cast<std::size_t>(a)] *
        std::sin(2.0 * kPi * spec.frequency * t + spec.phases[static_cast<std::size_t>(a)]);
  }
  // Direction of each child joint's bone.
  auto direction = [&](int child) -> Eigen::RowVector3d {
    switch (child) {
      case kElbowLeft: return sagittal(angle[kLeftUpperArm]);
      case kWristLeft:
      case kHandLeft: return sagittal(angle[kLeftUpperArm] + angle[kLeftForearm]);
      case kElbowRight: return sagittal(angle[kRightUpperArm]);
      case kWristRight:
      case kHandRight: return sagittal(angle[kRightUpperArm] + angle[kRightForearm]);
      case kKneeLeft: return sagittal(angle[kLeftThigh]);
      case kAnkleLeft: return sagittal(angle[kLeftThigh] + angle[kLeftShin]);
      case kFootLeft: return sagittal(angle[kLeftThigh] + angle[kLeftShin] + kPi / 2);
      case kKneeRight: return sagittal(angle[kRightThigh]);
      case kAnkleRight: return sagittal(angle[kRightThigh] + angle[kRightShin]);
      case kFootRight: return sagittal(angle[kRightThigh] + angle[kRightShin] + kPi / 2);
      default: return rest_direction(child);
    }
  };
  skel::SkeletonFrame frame = skel::SkeletonFrame::Zero(kCount, 3);
  // Pelvis height keeps the feet near the ground at rest.
  frame.row(kHipCenter) << 0.0, spec.bone_lengths[16] + spec.bone_lengths[17], 0.0;
  for (std::size_t b = 0; b < bones().size(); ++b) {
    const Bone& bone = bones()[b];
    frame.row(bone.child) = frame.row(bone.parent) + spec.bone_lengths[b] * direction(bone.child);
  }
  return frame;
}

std::vector<skel::SkeletonSequence> generate(const std::vector<WalkerSpec>& specs, const GenerateOptions& options) {
  if (specs.empty()) throw std::invalid_argument("generate: no walker specs");
  if (options.frames < 1) throw std::invalid_argument("generate: frames must be >= 1");
  if (options.sequences_per_identity < 1) throw std::invalid_argument("generate: sequences per identity must be >= 1");
  if (!(options.frame_rate > 0.0)) throw std::invalid_argument("generate: frame rate must be > 0");
  for (const auto& s : specs) s.validate();

  std::vector<skel::SkeletonSequence> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const WalkerSpec& spec = specs[i];
    for (int s = 0; s < options.sequences_per_identity; ++s) {
      std::seed_seq seq_seed{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                             static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(s)};
      std::mt19937_64 rng(seq_seed);
      std::uniform_real_distribution<double> start(0.0, 1.0 / spec.frequency);
      std::normal_distribution<double> jitter(0.0, 1.0);
      const double t0 = start(rng);

      const int view = options.views > 1 ? s % options.views : 0;
      const double yaw = view * kPi / 6.0;
      Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();

      skel::SkeletonSequence seq;
      seq.identity = spec.identity;
      if (options.views > 1) seq.view = "v" + std::to_string(view);
      for (int k = 0; k < options.frames; ++k) {
        skel::SkeletonFrame frame = pose(spec, t0 + k / options.frame_rate);
        if (view != 0) frame = frame * rot.transpose();
        if (spec.noise > 0.0) {
          for (Eigen::Index r = 0; r < frame.rows(); ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) frame(r, c) += spec.noise * jitter(rng);
          }
        }
        seq.frames.push_back(std::move(frame));
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

std::vector<WalkerSpec> make_population(const PopulationOptions& options) {
  if (options.identities < 1) throw std::invalid_argument("make_population: need at least one identity");
  for (double s : {options.length_spread, options.frequency_spread, options.amplitude_spread}) {
    if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("make_population: spreads must lie in [0, 1)");
  }
  if (!(options.phase_spread >= 0.0)) throw std::invalid_argument("make_population: phase spread must be >= 0");
  const int n = options.identities;
  std::mt19937_64 rng(options.seed);
  std::vector<int> freq_rank(static_cast<std::size_t>(n));
  std::iota(freq_rank.begin(), freq_rank.end(), 0);
  std::shuffle(freq_rank.begin(), freq_rank.end(), rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto spread = [n](int i, double s) { return n == 1 ? 1.0 : 1.0 - s + 2.0 * s * i / (n - 1); };

  std::vector<WalkerSpec> out;
  for (int i = 0; i < n; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "id%02d", i);
    WalkerSpec w = default_walker(name);
    for (auto& len : w.bone_lengths) len *= 1.0 + options.length_spread * unit(rng);
    w.frequency = spread(freq_rank[static_cast<std::size_t>(i)], options.frequency_spread);
    for (auto& a : w.amplitudes) a *= 1.0 + options.amplitude_spread * unit(rng);
    for (auto& p : w.phases) p += options.phase_spread * unit(rng);
    w.noise = options.noise;
    out.push_back(std::move(w));
  }
  return out;
}

std::string walkers_to_text(const std::vector<WalkerSpec>& specs) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& w : specs) {
    doc.push_back({{"id", w.identity},
                   {"bone_lengths", w.bone_lengths},
                   {"frequency", w.frequency},
                   {"phases", w.phases},
                   {"amplitudes", w.amplitudes},
                   {"noise", w.noise}});
  }
  return doc.dump(2);
}

std::vector<WalkerSpec> walkers_from_text(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  std::vector<WalkerSpec> out;
  for (const auto& item : doc) {
    WalkerSpec w;
    w.identity = item.at("id").get<std::string>();
    w.bone_lengths = item.at("bone_lengths").get<std::array<double, kBones>>();
    w.frequency = item.at("frequency").get<double>();
    w.phases = item.at("phases").get<std::array<double, kSwingAngles>>();
    w.amplitudes = item.at("amplitudes").get<std::array<double, kSwingAngles>>();
    w.noise = item.value("noise", 0.0);
    w.validate();
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace skelproto::synth
