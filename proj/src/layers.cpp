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

#include "tfcodec/layers.hpp"

#include <cmath>

namespace tfcodec {

Tensor init_uniform_fan(std::vector<long> shape, long fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in < 1 ? 1 : fan_in));
  for (long i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

Conv2dLayer::Conv2dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, long kf,
                         long kt, long stride_f_, long pad_f_, Rng& rng)
    : stride_f(stride_f_), pad_f(pad_f_) {
  const long fan = cin * kf * kt;
  w = reg.add_param(name + ".w", init_uniform_fan({cout, cin, kf, kt}, fan, rng));
  b = reg.add_param(name + ".b", init_uniform_fan({cout}, fan, rng));
}

ConvT2dLayer::ConvT2dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout,
                           long kf, long kt, long stride_f_, long pad_f_, long outpad_f_, Rng& rng)
    : stride_f(stride_f_), pad_f(pad_f_), outpad_f(outpad_f_) {
  const long fan = cin * kf * kt;
  w = reg.add_param(name + ".w", init_uniform_fan({cin, cout, kf, kt}, fan, rng));
  b = reg.add_param(name + ".b", init_uniform_fan({cout}, fan, rng));
}

Conv1dLayer::Conv1dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, long k,
                         long dilation_, long groups_, Rng& rng)
    : dilation(dilation_), groups(groups_) {
  const long fan = (cin / groups) * k;
  w = reg.add_param(name + ".w", init_uniform_fan({cout, cin / groups, k}, fan, rng));
  b = reg.add_param(name + ".b", init_uniform_fan({cout}, fan, rng));
}

GruLayer::GruLayer(ParamRegistry& reg, const std::string& name, long cin, long hidden, Rng& rng) {
  w_ih = reg.add_param(name + ".w_ih", init_uniform_fan({3 * hidden, cin}, hidden, rng));
  w_hh = reg.add_param(name + ".w_hh", init_uniform_fan({3 * hidden, hidden}, hidden, rng));
  b_ih = reg.add_param(name + ".b_ih", init_uniform_fan({3 * hidden}, hidden, rng));
  b_hh = reg.add_param(name + ".b_hh", init_uniform_fan({3 * hidden}, hidden, rng));
}

BatchNormLayer::BatchNormLayer(ParamRegistry& reg, const std::string& name, long channels) {
  gamma = reg.add_param(name + ".gamma", Tensor::full({channels}, 1.0));
  beta = reg.add_param(name + ".beta", Tensor({channels}));
  mean = reg.add_buffer(name + ".running_mean", Tensor({channels}));
  var = reg.add_buffer(name + ".running_var", Tensor::full({channels}, 1.0));
}

InstanceNormLayer::InstanceNormLayer(ParamRegistry& reg, const std::string& name, long channels) {
  gamma = reg.add_param(name + ".gamma", Tensor::full({channels}, 1.0));
  beta = reg.add_param(name + ".beta", Tensor({channels}));
}

PReluLayer::PReluLayer(ParamRegistry& reg, const std::string& name, long channels, double init) {
  alpha = reg.add_param(name + ".alpha", Tensor::full({channels}, init));
}

LinearLayer::LinearLayer(ParamRegistry& reg, const std::string& name, long cin, long cout,
                         Rng& rng) {
  w = reg.add_param(name + ".w", init_uniform_fan({cout, cin}, cin, rng));
  b = reg.add_param(name + ".b", init_uniform_fan({cout}, cin, rng));
}

}  // namespace tfcodec
