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

#include "skelproto/params.hpp"

#include <stdexcept>

namespace skelproto::num {

std::size_t ParamTape::add(std::string name, Tensor2 value) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  if (value.size() == 0) throw std::invalid_argument("empty parameter: " + name);
  Tensor2 grad = Tensor2::Zero(value.rows(), value.cols());
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
  return params_.size() - 1;
}

std::optional<std::size_t> ParamTape::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

const Parameter& ParamTape::at(const std::string& name) const {
  const auto i = find(name);
  if (!i) throw std::out_of_range("unknown parameter: " + name);
  return params_[*i];
}

Parameter& ParamTape::at(const std::string& name) {
  const auto i = find(name);
  if (!i) throw std::out_of_range("unknown parameter: " + name);
  return params_[*i];
}

void ParamTape::zero_grad() {
  for (auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

std::size_t ParamTape::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

}  // namespace skelproto::num
