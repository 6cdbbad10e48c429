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

#ifndef SKELPROTO_GRADCHECK_HPP
#define SKELPROTO_GRADCHECK_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skelproto/params.hpp"

namespace skelproto::num {

/// A scalar objective with two routes: plain evaluation, and a routine
/// that fills the analytic gradient into ParamTape::grad.
struct Objective {
  std::function<double(const ParamTape&)> value;
  std::function<void(ParamTape&)> gradient;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  std::size_t samples_per_param = 32;  // every coordinate when the tensor is smaller
  // Denominator floor for the relative error; keeps near-zero gradients from
  // amplifying finite-difference round-off.
  double magnitude_floor = 1e-8;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string name;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  bool pass = true;

  std::vector<std::string> failing() const;
};

double relative_error(double analytic, double numeric, double floor);

/// Compares the analytic gradient of `objective` against central differences
/// on a seeded subsample of coordinates of every parameter. `params` values
/// are restored afterwards; its gradients hold the analytic result.
GradCheckReport grad_check(const Objective& objective, ParamTape& params, const GradCheckOptions& options = {});

}  // namespace skelproto::num

#endif  // SKELPROTO_GRADCHECK_HPP
