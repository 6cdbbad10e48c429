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


// Shared fixtures for the unit tests.

#ifndef SKELPROTO_TESTS_SUPPORT_HPP
#define SKELPROTO_TESTS_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skelproto/skeleton.hpp"

namespace support {

inline std::filesystem::path temp_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(SKELPROTO_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline skelproto::num::Tensor2 random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                             double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  skelproto::num::Tensor2 m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline skelproto::skel::SkeletonFrame random_frame(std::mt19937_64& rng, int joints = 20) {
  return random_matrix(rng, joints, 3);
}

inline skelproto::skel::SkeletonSequence random_sequence(std::mt19937_64& rng, int frames, int joints = 20) {
  skelproto::skel::SkeletonSequence s;
  for (int t = 0; t < frames; ++t) s.frames.push_back(random_frame(rng, joints));
  return s;
}

inline oracle::Mat to_mat(const skelproto::num::Tensor2& m) { return oracle::from_eigen(m); }

}  // namespace support

#endif  // SKELPROTO_TESTS_SUPPORT_HPP
