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

#include "skelproto/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace skelproto::num {

std::vector<std::string> GradCheckReport::failing() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (!e.pass) out.push_back(e.name);
  }
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const Objective& objective, ParamTape& params, const GradCheckOptions& options) {
  params.zero_grad();
  objective.gradient(params);

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params[pi];
    const auto total = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords(total);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (total > options.samples_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.samples_per_param);
      std::sort(coords.begin(), coords.end());
    }

    GradCheckEntry entry;
    entry.name = p.name;
    entry.coordinates = coords.size();
    for (std::size_t flat : coords) {
      const auto r = static_cast<Eigen::Index>(flat) / p.value.cols();
      const auto c = static_cast<Eigen::Index>(flat) % p.value.cols();
      const double original = p.value(r, c);
      p.value(r, c) = original + options.step;
      const double up = objective.value(params);
      p.value(r, c) = original - options.step;
      const double down = objective.value(params);
      p.value(r, c) = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = p.grad(r, c);
      const double rel = relative_error(analytic, numeric, options.magnitude_floor);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      entry.max_abs_error = std::max(entry.max_abs_error, std::abs(analytic - numeric));
    }
    entry.pass = entry.max_rel_error <= options.tolerance;
    if (entry.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = entry.max_rel_error;
      report.worst_parameter = entry.name;
    }
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace skelproto::num
