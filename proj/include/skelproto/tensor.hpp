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

#ifndef SKELPROTO_TENSOR_HPP
#define SKELPROTO_TENSOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace skelproto::num {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense 64-bit matrix used for every weight and feature block.
using Tensor2 = Matrix<double>;

/// Boolean support pattern for masked softmax; `true` marks a live entry.
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kLeakySlope = 0.2;

// Plain (non-recording) kernels. The same names are overloaded for tape
// variables in tape.hpp so that model code can be written once.

template <typename Scalar>
Matrix<Scalar> matmul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ");
  }
  return a * b;
}

template <typename Scalar>
Matrix<Scalar> transpose(const Matrix<Scalar>& a) {
  return a.transpose();
}

template <typename Scalar>
Matrix<Scalar> add(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: shape mismatch");
  }
  return a + b;
}

template <typename Scalar>
Matrix<Scalar> scale(const Matrix<Scalar>& a, double factor) {
  return a * static_cast<Scalar>(factor);
}

template <typename Scalar>
Matrix<Scalar> leaky_relu(const Matrix<Scalar>& x, double slope = kLeakySlope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw std::invalid_argument("leaky_relu: slope must lie in (0, 1)");
  }
  const auto s = static_cast<Scalar>(slope);
  return x.unaryExpr([s](Scalar v) { return v >= Scalar(0) ? v : s * v; });
}

template <typename Scalar>
Matrix<Scalar> tanh(const Matrix<Scalar>& x) {
  return x.array().tanh().matrix();
}

template <typename Scalar>
Matrix<Scalar> sigmoid(const Matrix<Scalar>& x) {
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

/// Row-wise softmax restricted to the entries where `mask` is true.
/// Masked entries come out as exact zeros.
template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits, const Mask* mask = nullptr) {
  if (mask != nullptr && (mask->rows() != logits.rows() || mask->cols() != logits.cols())) {
    throw std::invalid_argument("softmax_rows: mask shape differs from logits");
  }
  Matrix<Scalar> out = Matrix<Scalar>::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    bool any = false;
    Scalar peak = Scalar(0);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (mask != nullptr && !(*mask)(i, j)) continue;
      if (!any || logits(i, j) > peak) peak = logits(i, j);
      any = true;
    }
    if (!any) {
      throw std::invalid_argument("softmax_rows: row " + std::to_string(i) + " is fully masked");
    }
    Scalar total = Scalar(0);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (mask != nullptr && !(*mask)(i, j)) continue;
      out(i, j) = std::exp(logits(i, j) - peak);
      total += out(i, j);
    }
    out.row(i) /= total;
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits, const Mask& mask) {
  return softmax_rows(logits, &mask);
}

/// out(i, j) = a(i) + b(j) for column vectors a (n x 1) and b (m x 1).
template <typename Scalar>
Matrix<Scalar> outer_sum(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != 1 || b.cols() != 1) {
    throw std::invalid_argument("outer_sum: expects column vectors");
  }
  return a * Matrix<Scalar>::Ones(1, b.rows()) + Matrix<Scalar>::Ones(a.rows(), 1) * b.transpose();
}

template <typename Scalar>
Matrix<Scalar> block(const Matrix<Scalar>& a, Eigen::Index row, Eigen::Index col, Eigen::Index rows,
                     Eigen::Index cols) {
  return a.block(row, col, rows, cols);
}

template <typename Scalar>
Matrix<Scalar> vstack(const std::vector<Matrix<Scalar>>& parts) {
  if (parts.empty()) throw std::invalid_argument("vstack: no inputs");
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) throw std::invalid_argument("vstack: column mismatch");
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

/// Flattens row-major into a 1 x (rows*cols) row vector.
template <typename Scalar>
Matrix<Scalar> flatten_rows(const Matrix<Scalar>& a) {
  Matrix<Scalar> out(1, a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(0, i * a.cols() + j) = a(i, j);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> normalize_rows(const Matrix<Scalar>& a) {
  Matrix<Scalar> out = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Scalar n = a.row(i).norm();
    if (!(n > Scalar(0))) {
      throw std::domain_error("normalize_rows: row " + std::to_string(i) + " has zero norm");
    }
    out.row(i) /= n;
  }
  return out;
}

/// Mean over rows of (logsumexp(row) - row[target]); returns a 1 x 1 matrix.
template <typename Scalar>
Matrix<Scalar> cross_entropy_rows(const Matrix<Scalar>& logits, const std::vector<int>& targets) {
  if (logits.rows() == 0) throw std::invalid_argument("cross_entropy_rows: empty batch");
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("cross_entropy_rows: one target per row required");
  }
  Scalar total = Scalar(0);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= logits.cols()) throw std::out_of_range("cross_entropy_rows: target out of range");
    const Scalar peak = logits.row(i).maxCoeff();
    const Scalar lse = peak + std::log((logits.row(i).array() - peak).exp().sum());
    total += lse - logits(i, t);
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = total / static_cast<Scalar>(logits.rows());
  return out;
}

template <typename Scalar>
Matrix<Scalar> sum_squares(const Matrix<Scalar>& a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.squaredNorm();
  return out;
}

template <typename Scalar>
Matrix<Scalar> sum(const Matrix<Scalar>& a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.sum();
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

}  // namespace skelproto::num

#endif  // SKELPROTO_TENSOR_HPP
