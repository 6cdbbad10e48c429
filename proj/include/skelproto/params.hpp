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

#ifndef SKELPROTO_PARAMS_HPP
#define SKELPROTO_PARAMS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skelproto/tensor.hpp"

namespace skelproto::num {

struct Parameter {
  std::string name;
  Tensor2 value;
  Tensor2 grad;
};

/// Named learnable tensors with one gradient accumulator each.
class ParamTape {
 public:
  std::size_t add(std::string name, Tensor2 value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }

  std::optional<std::size_t> find(const std::string& name) const;
  const Parameter& at(const std::string& name) const;
  Parameter& at(const std::string& name);

  void zero_grad();
  std::size_t scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

}  // namespace skelproto::num

#endif  // SKELPROTO_PARAMS_HPP
