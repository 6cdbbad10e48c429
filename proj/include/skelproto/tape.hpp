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

#ifndef SKELPROTO_TAPE_HPP
#define SKELPROTO_TAPE_HPP

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "skelproto/params.hpp"
#include "skelproto/tensor.hpp"

namespace skelproto::num {

class Tape;

/// Handle to a matrix-valued node recorded on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  const Tensor2& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Matrix-level reverse-mode recorder. Each node keeps its forward value and
// a closure that scatters its output gradient into its parents. Parameter
// leaves are bound to a ParamTape; backward() adds their gradients there.
class Tape {
 public:
  using Pullback = std::function<void(Tape&, const Tensor2&)>;

  explicit Tape(ParamTape* params = nullptr) : params_(params) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2 value);

  /// Leaf for parameter `index`; repeated calls return the same node.
  Var parameter(std::size_t index);

  /// Records an op output. `pullback` is dropped when no parent needs a gradient.
  Var record(Tensor2 value, std::initializer_list<Var> parents, Pullback pullback);
  Var record(Tensor2 value, const std::vector<Var>& parents, Pullback pullback);

  /// Propagates d(loss)/d(node) for a 1x1 loss and accumulates into the ParamTape.
  void backward(const Var& loss);

  /// Gradient of the last backward() target with respect to `v` (zeros if unreached).
  Tensor2 grad(const Var& v) const;

  /// Adds `delta` into the gradient slot of `v` if it takes part in differentiation.
  void accumulate(const Var& v, const Tensor2& delta);

  const Tensor2& value(int id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
  bool requires_grad(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }
  ParamTape* params() const { return params_; }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    Pullback pullback;
    bool requires_grad = false;
    bool has_grad = false;
  };

  Var push(Node node);
  void check_owned(const Var& v, const char* what) const;

  ParamTape* params_;
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, int> param_nodes_;
  bool consumed_ = false;
};

// Recording counterparts of the plain kernels in tensor.hpp.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var leaky_relu(const Var& x, double slope = kLeakySlope);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var softmax_rows(const Var& logits, const Mask* mask = nullptr);
Var softmax_rows(const Var& logits, const Mask& mask);
Var outer_sum(const Var& a, const Var& b);
Var block(const Var& a, Eigen::Index row, Eigen::Index col, Eigen::Index rows, Eigen::Index cols);
Var vstack(const std::vector<Var>& parts);
Var flatten_rows(const Var& a);
Var normalize_rows(const Var& a);
Var cross_entropy_rows(const Var& logits, const std::vector<int>& targets);
Var sum_squares(const Var& a);
Var sum(const Var& a);

}  // namespace skelproto::num

#endif  // SKELPROTO_TAPE_HPP
