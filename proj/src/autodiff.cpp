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

#include "tfcodec/autodiff.hpp"

#include <unordered_set>

#include "tfcodec/detmath.hpp"

namespace tfcodec {
namespace ad {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw TensorError(std::string(op) + ": shape mismatch " + a.value().shape_str() + " vs " +
                      b.value().shape_str());
}

// Channel-axis geometry for (B, C, ...) tensors: returns outer (B), channel
// (C) and inner (product of trailing dims) extents.
struct Axis1Geom {
  long outer, ch, inner;
};
Axis1Geom axis1_geom(const Tensor& t) {
  if (t.rank() < 2) throw TensorError("axis-1 op needs rank >= 2");
  Axis1Geom g;
  if (t.rank() == 2) {
    // (R, C): channels last for row-matrices.
    g.outer = t.dim(0);
    g.ch = t.dim(1);
    g.inner = 1;
    return g;
  }
  g.outer = t.dim(0);
  g.ch = t.dim(1);
  g.inner = 1;
  for (int i = 2; i < t.rank(); ++i) g.inner *= t.dim(i);
  return g;
}

}  // namespace

Var Var::constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  n->requires_grad = false;
  return Var(std::move(n));
}

Var Var::leaf(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> back) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool need = false;
  for (const auto& p : parents) need = need || p.requires_grad();
  n->requires_grad = need;
  if (need) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(back);
  }
  return Var(std::move(n));
}

void backward(const Var& root) {
  if (!root.requires_grad()) return;
  if (root.size() != 1) throw TensorError("backward: root must be scalar");

  // Iterative post-order topological sort.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad().flat().setConstant(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

Var detach(const Var& x) { return Var::constant(x.value()); }

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape());
  out.flat() = a.value().flat() + b.value().flat();
  return make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.requires_grad()) a.node()->accumulate(n.grad);
    if (b.requires_grad()) b.node()->accumulate(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.shape());
  out.flat() = a.value().flat() - b.value().flat();
  return make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.requires_grad()) a.node()->accumulate(n.grad);
    if (b.requires_grad()) b.node()->ensure_grad().flat() -= n.grad.flat();
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.shape());
  out.flat() = a.value().flat() * b.value().flat();
  return make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.requires_grad()) a.node()->ensure_grad().flat() += n.grad.flat() * b.value().flat();
    if (b.requires_grad()) b.node()->ensure_grad().flat() += n.grad.flat() * a.value().flat();
  });
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b, "div");
  Tensor out(a.shape());
  out.flat() = a.value().flat() / b.value().flat();
  return make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.requires_grad()) a.node()->ensure_grad().flat() += n.grad.flat() / b.value().flat();
    if (b.requires_grad())
      b.node()->ensure_grad().flat() -=
          n.grad.flat() * a.value().flat() / (b.value().flat() * b.value().flat());
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out(a.shape());
  out.flat() = a.value().flat() + s;
  return make_op(std::move(out), {a},
                 [a](Node& n) mutable { a.node()->accumulate(n.grad); });
}

Var mul_scalar(const Var& a, double s) {
  Tensor out(a.shape());
  out.flat() = a.value().flat() * s;
  return make_op(std::move(out), {a}, [a, s](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * s;
  });
}

Var neg(const Var& a) { return mul_scalar(a, -1.0); }

Var exp_(const Var& a) {
  Tensor out(a.shape());
  const long n = a.size();
  for (long i = 0; i < n; ++i) out[i] = detmath::exp(a.value()[i]);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * n.value.flat();
  });
}

Var log_(const Var& a) {
  Tensor out(a.shape());
  const long n = a.size();
  for (long i = 0; i < n; ++i) out[i] = detmath::log(a.value()[i]);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() / a.value().flat();
  });
}

Var log1p_(const Var& a) {
  Tensor out(a.shape());
  const long n = a.size();
  for (long i = 0; i < n; ++i) out[i] = detmath::log1p(a.value()[i]);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() / (1.0 + a.value().flat());
  });
}

Var sqrt_(const Var& a) {
  Tensor out(a.shape());
  out.flat() = a.value().flat().sqrt();
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * 0.5 / n.value.flat();
  });
}

Var tanh_(const Var& a) {
  Tensor out(a.shape());
  const long n = a.size();
  for (long i = 0; i < n; ++i) out[i] = detmath::tanh(a.value()[i]);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * (1.0 - n.value.flat() * n.value.flat());
  });
}

Var sigmoid_(const Var& a) {
  Tensor out(a.shape());
  const long n = a.size();
  for (long i = 0; i < n; ++i) out[i] = detmath::sigmoid(a.value()[i]);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * n.value.flat() * (1.0 - n.value.flat());
  });
}

Var abs_(const Var& a) {
  Tensor out(a.shape());
  out.flat() = a.value().flat().abs();
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * a.value().flat().sign();
  });
}

Var square(const Var& a) {
  Tensor out(a.shape());
  out.flat() = a.value().flat() * a.value().flat();
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat() * 2.0 * a.value().flat();
  });
}

Var clamp_min(const Var& a, double c) {
  Tensor out(a.shape());
  out.flat() = a.value().flat().max(c);
  return make_op(std::move(out), {a}, [a, c](Node& n) mutable {
    auto g = a.node()->ensure_grad().flat();
    const long cnt = a.size();
    for (long i = 0; i < cnt; ++i)
      if (a.value()[i] > c) g[i] += n.grad[i];
  });
}

Var scale_by(const Var& a, const Var& s) {
  if (s.size() != 1) throw TensorError("scale_by: scale must be scalar");
  Tensor out(a.shape());
  out.flat() = a.value().flat() * s.value()[0];
  return make_op(std::move(out), {a, s}, [a, s](Node& n) mutable {
    if (a.requires_grad()) a.node()->ensure_grad().flat() += n.grad.flat() * s.value()[0];
    if (s.requires_grad())
      s.node()->ensure_grad()[0] += (n.grad.flat() * a.value().flat()).sum();
  });
}

Var matmul(const Var& a, const Var& b) {
  if (a.value().rank() != 2 || b.value().rank() != 2 || a.dim(1) != b.dim(0))
    throw TensorError("matmul: incompatible shapes " + a.value().shape_str() + " x " +
                      b.value().shape_str());
  const long m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  out.mat(m, n).noalias() = a.value().mat(m, k) * b.value().mat(k, n);
  return make_op(std::move(out), {a, b}, [a, b, m, k, n](Node& nd) mutable {
    if (a.requires_grad())
      a.node()->ensure_grad().mat(m, k).noalias() +=
          nd.grad.mat(m, n) * b.value().mat(k, n).transpose();
    if (b.requires_grad())
      b.node()->ensure_grad().mat(k, n).noalias() +=
          a.value().mat(m, k).transpose() * nd.grad.mat(m, n);
  });
}

Var matmul_left_const(const Tensor& A, const Var& x) {
  if (A.rank() != 2 || x.value().rank() != 3 || A.dim(1) != x.dim(1))
    throw TensorError("matmul_left_const: shape mismatch");
  const long B = x.dim(0), F = x.dim(1), T = x.dim(2), S = A.dim(0);
  Tensor out({B, S, T});
  for (long b = 0; b < B; ++b)
    MatMap(out.data() + b * S * T, S, T).noalias() =
        A.mat(S, F) * ConstMatMap(x.value().data() + b * F * T, F, T);
  auto Ac = std::make_shared<Tensor>(A);
  return make_op(std::move(out), {x}, [x, Ac, B, F, T, S](Node& n) mutable {
    for (long b = 0; b < B; ++b)
      MatMap(x.node()->ensure_grad().data() + b * F * T, F, T).noalias() +=
          Ac->mat(S, F).transpose() * ConstMatMap(n.grad.data() + b * S * T, S, T);
  });
}

Var sum_all(const Var& a) {
  Tensor out = Tensor::scalar(a.value().flat().sum());
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad[0];
  });
}

Var mean_all(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a.size());
  Tensor out = Tensor::scalar(a.value().flat().sum() * inv);
  return make_op(std::move(out), {a}, [a, inv](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad[0] * inv;
  });
}

Var reshape(const Var& a, std::vector<long> shape) {
  Tensor out = a.value().reshaped(shape);
  return make_op(std::move(out), {a}, [a](Node& n) mutable {
    a.node()->ensure_grad().flat() += n.grad.flat();
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Axis1Geom ga = axis1_geom(a.value());
  const Axis1Geom gb = axis1_geom(b.value());
  if (ga.outer != gb.outer || ga.inner != gb.inner)
    throw TensorError("concat_channels: geometry mismatch");
  std::vector<long> shape = a.shape();
  const int ch_axis = a.value().rank() == 2 ? 1 : 1;
  shape[ch_axis] = ga.ch + gb.ch;
  if (a.value().rank() == 2 && b.value().rank() == 2) shape = {ga.outer, ga.ch + gb.ch};
  Tensor out(shape);
  const long strideA = ga.ch * ga.inner, strideB = gb.ch * gb.inner;
  for (long o = 0; o < ga.outer; ++o) {
    std::copy(a.value().data() + o * strideA, a.value().data() + (o + 1) * strideA,
              out.data() + o * (strideA + strideB));
    std::copy(b.value().data() + o * strideB, b.value().data() + (o + 1) * strideB,
              out.data() + o * (strideA + strideB) + strideA);
  }
  return make_op(std::move(out), {a, b}, [a, b, ga, gb, strideA, strideB](Node& n) mutable {
    for (long o = 0; o < ga.outer; ++o) {
      const double* g = n.grad.data() + o * (strideA + strideB);
      if (a.requires_grad()) {
        double* dst = a.node()->ensure_grad().data() + o * strideA;
        for (long i = 0; i < strideA; ++i) dst[i] += g[i];
      }
      if (b.requires_grad()) {
        double* dst = b.node()->ensure_grad().data() + o * strideB;
        for (long i = 0; i < strideB; ++i) dst[i] += g[i + strideA];
      }
    }
  });
}

Var slice_channels(const Var& a, long start, long len) {
  const Axis1Geom g = axis1_geom(a.value());
  if (start < 0 || start + len > g.ch) throw TensorError("slice_channels: out of range");
  std::vector<long> shape = a.shape();
  shape[1] = len;
  if (a.value().rank() == 2) shape = {g.outer, len};
  Tensor out(shape);
  const long in_stride = g.ch * g.inner, out_stride = len * g.inner;
  for (long o = 0; o < g.outer; ++o)
    std::copy(a.value().data() + o * in_stride + start * g.inner,
              a.value().data() + o * in_stride + (start + len) * g.inner,
              out.data() + o * out_stride);
  return make_op(std::move(out), {a}, [a, g, start, len, in_stride, out_stride](Node& n) mutable {
    for (long o = 0; o < g.outer; ++o) {
      double* dst = a.node()->ensure_grad().data() + o * in_stride + start * g.inner;
      const double* src = n.grad.data() + o * out_stride;
      for (long i = 0; i < out_stride; ++i) dst[i] += src[i];
    }
  });
}

Var shift_last_right(const Var& x, long nshift) {
  const Tensor& v = x.value();
  const long T = v.dim(v.rank() - 1);
  const long rows = v.size() / T;
  if (nshift < 0 || nshift > T) throw TensorError("shift_last_right: bad shift");
  Tensor out(v.shape());
  for (long r = 0; r < rows; ++r) {
    const double* src = v.data() + r * T;
    double* dst = out.data() + r * T;
    for (long t = nshift; t < T; ++t) dst[t] = src[t - nshift];
  }
  return make_op(std::move(out), {x}, [x, rows, T, nshift](Node& n) mutable {
    double* g = x.node()->ensure_grad().data();
    for (long r = 0; r < rows; ++r)
      for (long t = nshift; t < T; ++t) g[r * T + t - nshift] += n.grad[r * T + t];
  });
}

Var slice_last(const Var& x, long start, long len) {
  const Tensor& v = x.value();
  const long T = v.dim(v.rank() - 1);
  if (start < 0 || start + len > T) throw TensorError("slice_last: out of range");
  const long rows = v.size() / T;
  std::vector<long> shape = v.shape();
  shape.back() = len;
  Tensor out(shape);
  for (long r = 0; r < rows; ++r)
    std::copy(v.data() + r * T + start, v.data() + r * T + start + len, out.data() + r * len);
  return make_op(std::move(out), {x}, [x, rows, T, start, len](Node& n) mutable {
    double* g = x.node()->ensure_grad().data();
    for (long r = 0; r < rows; ++r)
      for (long t = 0; t < len; ++t) g[r * T + start + t] += n.grad[r * len + t];
  });
}

Var softmax_lastdim(const Var& a) {
  const Tensor& v = a.value();
  const long K = v.dim(v.rank() - 1);
  const long rows = v.size() / K;
  Tensor out(v.shape());
  for (long r = 0; r < rows; ++r) {
    const double* src = v.data() + r * K;
    double* dst = out.data() + r * K;
    double mx = src[0];
    for (long k = 1; k < K; ++k) mx = src[k] > mx ? src[k] : mx;
    double sum = 0.0;
    for (long k = 0; k < K; ++k) {
      dst[k] = detmath::exp(src[k] - mx);
      sum += dst[k];
    }
    const double inv = 1.0 / sum;
    for (long k = 0; k < K; ++k) dst[k] *= inv;
  }
  return make_op(std::move(out), {a}, [a, rows, K](Node& n) mutable {
    double* g = a.node()->ensure_grad().data();
    for (long r = 0; r < rows; ++r) {
      const double* y = n.value.data() + r * K;
      const double* gy = n.grad.data() + r * K;
      double dot = 0.0;
      for (long k = 0; k < K; ++k) dot += y[k] * gy[k];
      for (long k = 0; k < K; ++k) g[r * K + k] += y[k] * (gy[k] - dot);
    }
  });
}

Var seq_to_rows(const Var& x) {
  const Tensor& v = x.value();
  if (v.rank() != 3) throw TensorError("seq_to_rows: input must be (B,C,T)");
  const long B = v.dim(0), C = v.dim(1), T = v.dim(2);
  Tensor out({B * T, C});
  for (long b = 0; b < B; ++b)
    for (long c = 0; c < C; ++c)
      for (long t = 0; t < T; ++t) out.data()[(b * T + t) * C + c] = v.data()[(b * C + c) * T + t];
  return make_op(std::move(out), {x}, [x, B, C, T](Node& n) mutable {
    double* g = x.node()->ensure_grad().data();
    for (long b = 0; b < B; ++b)
      for (long c = 0; c < C; ++c)
        for (long t = 0; t < T; ++t) g[(b * C + c) * T + t] += n.grad[(b * T + t) * C + c];
  });
}

Var rows_to_seq(const Var& rows, long batch, long time) {
  const Tensor& v = rows.value();
  if (v.rank() != 2 || v.dim(0) != batch * time)
    throw TensorError("rows_to_seq: row count mismatch");
  const long C = v.dim(1);
  Tensor out({batch, C, time});
  for (long b = 0; b < batch; ++b)
    for (long c = 0; c < C; ++c)
      for (long t = 0; t < time; ++t)
        out.data()[(b * C + c) * time + t] = v.data()[(b * time + t) * C + c];
  return make_op(std::move(out), {rows}, [rows, batch, time, C](Node& n) mutable {
    double* g = rows.node()->ensure_grad().data();
    for (long b = 0; b < batch; ++b)
      for (long c = 0; c < C; ++c)
        for (long t = 0; t < time; ++t)
          g[(b * time + t) * C + c] += n.grad[(b * C + c) * time + t];
  });
}

Var add_channel_bias(const Var& x, const Var& b) {
  const Tensor& v = x.value();
  if (b.value().rank() != 1) throw TensorError("add_channel_bias: bias must be rank 1");
  const long C = b.size();
  Tensor out(v.shape());
  if (v.rank() == 2) {
    // (R, C): bias over columns.
    if (v.dim(1) != C) throw TensorError("add_channel_bias: dim mismatch");
    const long R = v.dim(0);
    for (long r = 0; r < R; ++r)
      for (long c = 0; c < C; ++c) out.data()[r * C + c] = v.data()[r * C + c] + b.value()[c];
    return make_op(std::move(out), {x, b}, [x, b, R, C](Node& n) mutable {
      if (x.requires_grad()) x.node()->accumulate(n.grad);
      if (b.requires_grad()) {
        double* g = b.node()->ensure_grad().data();
        for (long r = 0; r < R; ++r)
          for (long c = 0; c < C; ++c) g[c] += n.grad[r * C + c];
      }
    });
  }
  const Axis1Geom geo = axis1_geom(v);
  if (geo.ch != C) throw TensorError("add_channel_bias: dim mismatch");
  for (long o = 0; o < geo.outer; ++o)
    for (long c = 0; c < C; ++c) {
      const long base = (o * C + c) * geo.inner;
      for (long i = 0; i < geo.inner; ++i) out.data()[base + i] = v.data()[base + i] + b.value()[c];
    }
  return make_op(std::move(out), {x, b}, [x, b, geo, C](Node& n) mutable {
    if (x.requires_grad()) x.node()->accumulate(n.grad);
    if (b.requires_grad()) {
      double* g = b.node()->ensure_grad().data();
      for (long o = 0; o < geo.outer; ++o)
        for (long c = 0; c < C; ++c) {
          const long base = (o * C + c) * geo.inner;
          double s = 0.0;
          for (long i = 0; i < geo.inner; ++i) s += n.grad[base + i];
          g[c] += s;
        }
    }
  });
}

}  // namespace ad
}  // namespace tfcodec
