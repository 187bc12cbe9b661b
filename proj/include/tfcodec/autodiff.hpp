// Copyright 2026 The TFCodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TFCODEC_AUTODIFF_HPP_
#define TFCODEC_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "tfcodec/tensor.hpp"

namespace tfcodec {
namespace ad {

// Define-by-run reverse-mode tape. Nodes whose inputs carry no gradient are
// created without parents or a backward closure, so pure inference builds no
// graph at all.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Tensor& ensure_grad() {
    if (grad.empty()) grad = Tensor(value.shape());
    return grad;
  }
  void accumulate(const Tensor& g) {
    ensure_grad().flat() += g.flat();
  }
};

using NodePtr = std::shared_ptr<Node>;

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr n) : node_(std::move(n)) {}

  static Var constant(Tensor t);
  static Var leaf(Tensor t);  // trainable parameter

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.set_zero();
  }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::vector<long>& shape() const { return node_->value.shape(); }
  long dim(int i) const { return node_->value.dim(i); }
  long size() const { return node_->value.size(); }
  double item() const { return node_->value.item(); }
  NodePtr node() const { return node_; }

 private:
  NodePtr node_;
};

// Builds an op node: keeps parents and closure only if some parent needs
// gradients.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> back);

// Reverse pass from a scalar root (seeded with 1).
void backward(const Var& root);

Var detach(const Var& x);

// Elementwise (strict same-shape).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var neg(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var log1p_(const Var& a);
Var sqrt_(const Var& a);
Var tanh_(const Var& a);
Var sigmoid_(const Var& a);
Var abs_(const Var& a);
Var square(const Var& a);
Var clamp_min(const Var& a, double c);

// Multiply by a scalar-shaped Var, broadcast over all of a.
Var scale_by(const Var& a, const Var& s);

// [m,k] x [k,n]
Var matmul(const Var& a, const Var& b);

// Batched multiply by a constant matrix: A (S,F) x x (B,F,T) -> (B,S,T).
Var matmul_left_const(const Tensor& A, const Var& x);

Var sum_all(const Var& a);
Var mean_all(const Var& a);

Var reshape(const Var& a, std::vector<long> shape);

// Concatenate / slice along axis 1 (channel axis of (B,C,...) tensors).
Var concat_channels(const Var& a, const Var& b);
Var slice_channels(const Var& a, long start, long len);

// Shift along the last (time) axis: y[...,t] = x[...,t-n], zero-filled head.
Var shift_last_right(const Var& x, long n);
// Slice along the last axis.
Var slice_last(const Var& x, long start, long len);

// Softmax over the last axis.
Var softmax_lastdim(const Var& a);

// (B,C,T) <-> (B*T, C) transposition; row r = b*T + t.
Var seq_to_rows(const Var& x);
Var rows_to_seq(const Var& rows, long batch, long time);

// Row-wise bias add: x (..., C, L) + b (C) broadcast over all but axis 1 of a
// rank-3/4 tensor, or x (R, C) + b (C) for rank-2.
Var add_channel_bias(const Var& x, const Var& b);

}  // namespace ad
}  // namespace tfcodec

#endif  // TFCODEC_AUTODIFF_HPP_
