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

#include "tfcodec/optim.hpp"

#include <cmath>

namespace tfcodec {

Adam::Adam(std::vector<ad::Var> params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  slots_.reserve(params.size());
  for (auto& p : params) slots_.push_back({p, Tensor(p.shape()), Tensor(p.shape())});
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& s : slots_) {
    if (s.p.grad().empty()) continue;
    const long n = s.p.size();
    double* m = s.m.data();
    double* v = s.v.data();
    double* w = s.p.value().data();
    const double* g = s.p.grad().data();
    for (long i = 0; i < n; ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (auto& s : slots_) s.p.zero_grad();
}

}  // namespace tfcodec
