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

#include "skelproto/tape.hpp"

#include <stdexcept>
#include <string>

namespace skelproto::num {

const Tensor2& Var::value() const {
  if (!valid()) throw std::logic_error("Var: not bound to a tape");
  return tape_->value(id_);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::check_owned(const Var& v, const char* what) const {
  if (!v.valid() || v.tape() != this) {
    throw std::logic_error(std::string(what) + ": variable does not belong to this tape");
  }
}

Var Tape::constant(Tensor2 value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(std::size_t index) {
  if (params_ == nullptr) throw std::logic_error("Tape::parameter: no ParamTape bound");
  if (index >= params_->size()) throw std::out_of_range("Tape::parameter: index out of range");
  if (auto it = param_nodes_.find(index); it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.value = (*params_)[index].value;
  n.requires_grad = true;
  Var v = push(std::move(n));
  param_nodes_.emplace(index, v.id());
  return v;
}

Var Tape::record(Tensor2 value, std::initializer_list<Var> parents, Pullback pullback) {
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    check_owned(p, "record");
    n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(p.id())].requires_grad;
  }
  if (n.requires_grad) n.pullback = std::move(pullback);
  return push(std::move(n));
}

Var Tape::record(Tensor2 value, const std::vector<Var>& parents, Pullback pullback) {
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    check_owned(p, "record");
    n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(p.id())].requires_grad;
  }
  if (n.requires_grad) n.pullback = std::move(pullback);
  return push(std::move(n));
}

bool Tape::requires_grad(const Var& v) const {
  check_owned(v, "requires_grad");
  return nodes_[static_cast<std::size_t>(v.id())].requires_grad;
}

void Tape::accumulate(const Var& v, const Tensor2& delta) {
  Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = delta;
    n.has_grad = true;
  } else {
    n.grad += delta;
  }
}

void Tape::backward(const Var& loss) {
  if (nodes_.empty() || !loss.valid()) {
    throw std::logic_error("backward: nothing has been recorded (run the forward pass first)");
  }
  check_owned(loss, "backward");
  if (consumed_) throw std::logic_error("backward: tape already differentiated");
  const Tensor2& out = loss.value();
  if (out.rows() != 1 || out.cols() != 1) throw std::invalid_argument("backward: loss must be 1x1");
  consumed_ = true;

  Node& root = nodes_[static_cast<std::size_t>(loss.id())];
  if (root.requires_grad) {
    root.grad = Tensor2::Ones(1, 1);
    root.has_grad = true;
  }
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.has_grad || !n.pullback) continue;
    // The pullback may grow nodes_ only in pathological use; copy the gradient
    // so the reference stays valid.
    const Tensor2 g = n.grad;
    n.pullback(*this, g);
  }
  if (params_ != nullptr) {
    for (const auto& [index, id] : param_nodes_) {
      const Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.has_grad) (*params_)[index].grad += n.grad;
    }
  }
}

Tensor2 Tape::grad(const Var& v) const {
  check_owned(v, "grad");
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.has_grad) return Tensor2::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

namespace {

Tape& tape_of(const Var& v) {
  if (!v.valid()) throw std::logic_error("operation on an unbound Var");
  return *v.tape();
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  return t.record(matmul(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value().transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(a.value().transpose(), {a},
                  [a](Tape& tp, const Tensor2& g) { tp.accumulate(a, g.transpose()); });
}

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  return t.record(add(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var scale(const Var& a, double factor) {
  Tape& t = tape_of(a);
  return t.record(a.value() * factor, {a},
                  [a, factor](Tape& tp, const Tensor2& g) { tp.accumulate(a, g * factor); });
}

Var leaky_relu(const Var& x, double slope) {
  Tape& t = tape_of(x);
  return t.record(leaky_relu(x.value(), slope), {x}, [x, slope](Tape& tp, const Tensor2& g) {
    // Subgradient at exactly zero is the negative-side slope.
    const Tensor2 d = x.value().unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    tp.accumulate(x, g.cwiseProduct(d));
  });
}

Var tanh(const Var& x) {
  Tape& t = tape_of(x);
  Tensor2 y = tanh(x.value());
  Tensor2 slope = (1.0 - y.array().square()).matrix();
  return t.record(std::move(y), {x}, [x, slope = std::move(slope)](Tape& tp, const Tensor2& g) {
    tp.accumulate(x, g.cwiseProduct(slope));
  });
}

Var sigmoid(const Var& x) {
  Tape& t = tape_of(x);
  Tensor2 y = sigmoid(x.value());
  Tensor2 slope = (y.array() * (1.0 - y.array())).matrix();
  return t.record(std::move(y), {x}, [x, slope = std::move(slope)](Tape& tp, const Tensor2& g) {
    tp.accumulate(x, g.cwiseProduct(slope));
  });
}

Var softmax_rows(const Var& logits, const Mask* mask) {
  Tape& t = tape_of(logits);
  Tensor2 y = softmax_rows(logits.value(), mask);
  Tensor2 saved = y;
  return t.record(std::move(y), {logits}, [logits, y = std::move(saved)](Tape& tp, const Tensor2& g) {
    // dL/dx_ij = y_ij (g_ij - sum_k g_ik y_ik); masked entries have y = 0.
    const Eigen::VectorXd inner = g.cwiseProduct(y).rowwise().sum();
    Tensor2 d = y.cwiseProduct(g - inner * Eigen::RowVectorXd::Ones(g.cols()));
    tp.accumulate(logits, d);
  });
}

Var softmax_rows(const Var& logits, const Mask& mask) { return softmax_rows(logits, &mask); }

Var outer_sum(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  return t.record(outer_sum(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.rowwise().sum());
    if (tp.requires_grad(b)) tp.accumulate(b, g.colwise().sum().transpose());
  });
}

Var block(const Var& a, Eigen::Index row, Eigen::Index col, Eigen::Index rows, Eigen::Index cols) {
  Tape& t = tape_of(a);
  if (row < 0 || col < 0 || row + rows > a.rows() || col + cols > a.cols()) {
    throw std::out_of_range("block: window exceeds matrix");
  }
  return t.record(a.value().block(row, col, rows, cols), {a},
                  [a, row, col, rows, cols](Tape& tp, const Tensor2& g) {
                    Tensor2 d = Tensor2::Zero(a.rows(), a.cols());
                    d.block(row, col, rows, cols) = g;
                    tp.accumulate(a, d);
                  });
}

Var vstack(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("vstack: no inputs");
  Tape& t = tape_of(parts.front());
  std::vector<Tensor2> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  return t.record(vstack(values), parts, [parts](Tape& tp, const Tensor2& g) {
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      if (tp.requires_grad(p)) tp.accumulate(p, g.middleRows(at, p.rows()));
      at += p.rows();
    }
  });
}

Var flatten_rows(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(flatten_rows(a.value()), {a}, [a](Tape& tp, const Tensor2& g) {
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    Tensor2 d(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) d(i, j) = g(0, i * cols + j);
    }
    tp.accumulate(a, d);
  });
}

Var normalize_rows(const Var& a) {
  Tape& t = tape_of(a);
  Tensor2 y = normalize_rows(a.value());
  Eigen::VectorXd norms = a.value().rowwise().norm();
  Tensor2 saved = y;
  return t.record(std::move(y), {a},
                  [a, y = std::move(saved), norms = std::move(norms)](Tape& tp, const Tensor2& g) {
                    // d = (g - y (y . g)) / |x| per row.
                    const Eigen::VectorXd proj = g.cwiseProduct(y).rowwise().sum();
                    Tensor2 d = g - proj.asDiagonal() * y;
                    d = norms.cwiseInverse().asDiagonal() * d;
                    tp.accumulate(a, d);
                  });
}

Var cross_entropy_rows(const Var& logits, const std::vector<int>& targets) {
  Tape& t = tape_of(logits);
  Tensor2 loss = cross_entropy_rows(logits.value(), targets);
  return t.record(std::move(loss), {logits}, [logits, targets](Tape& tp, const Tensor2& g) {
    Tensor2 p = softmax_rows(logits.value());
    for (std::size_t i = 0; i < targets.size(); ++i) p(static_cast<Eigen::Index>(i), targets[i]) -= 1.0;
    p *= g(0, 0) / static_cast<double>(targets.size());
    tp.accumulate(logits, p);
  });
}

Var sum_squares(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(sum_squares(a.value()), {a},
                  [a](Tape& tp, const Tensor2& g) { tp.accumulate(a, 2.0 * g(0, 0) * a.value()); });
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(sum(a.value()), {a}, [a](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, Tensor2::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

}  // namespace skelproto::num
