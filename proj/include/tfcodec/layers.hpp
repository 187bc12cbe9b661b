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

#ifndef TFCODEC_LAYERS_HPP_
#define TFCODEC_LAYERS_HPP_

#include <string>

#include "tfcodec/nn_ops.hpp"
#include "tfcodec/params.hpp"
#include "tfcodec/rng.hpp"

namespace tfcodec {

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
Tensor init_uniform_fan(std::vector<long> shape, long fan_in, Rng& rng);

struct Conv2dLayer {
  Conv2dLayer() = default;
  Conv2dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, long kf, long kt,
              long stride_f, long pad_f, Rng& rng);
  ad::Var operator()(const ad::Var& x) const { return ad::conv2d(x, w, b, stride_f, pad_f); }
  ad::Var w, b;
  long stride_f = 1, pad_f = 0;
};

struct ConvT2dLayer {
  ConvT2dLayer() = default;
  ConvT2dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, long kf, long kt,
               long stride_f, long pad_f, long outpad_f, Rng& rng);
  ad::Var operator()(const ad::Var& x) const {
    return ad::conv_transpose2d(x, w, b, stride_f, pad_f, outpad_f);
  }
  ad::Var w, b;
  long stride_f = 1, pad_f = 0, outpad_f = 0;
};

struct Conv1dLayer {
  Conv1dLayer() = default;
  Conv1dLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, long k,
              long dilation, long groups, Rng& rng);
  ad::Var operator()(const ad::Var& x) const { return ad::conv1d(x, w, b, dilation, groups); }
  ad::Var w, b;
  long dilation = 1, groups = 1;
};

struct GruLayer {
  GruLayer() = default;
  GruLayer(ParamRegistry& reg, const std::string& name, long cin, long hidden, Rng& rng);
  ad::Var operator()(const ad::Var& x) const { return ad::gru(x, w_ih, w_hh, b_ih, b_hh); }
  ad::Var w_ih, w_hh, b_ih, b_hh;
};

struct BatchNormLayer {
  BatchNormLayer() = default;
  BatchNormLayer(ParamRegistry& reg, const std::string& name, long channels);
  ad::Var operator()(const ad::Var& x, bool training, bool update_running = true) const {
    return ad::batch_norm(x, gamma, beta, mean, var, training, 0.1, 1e-5, update_running);
  }
  ad::Var gamma, beta;
  Tensor* mean = nullptr;
  Tensor* var = nullptr;
};

struct InstanceNormLayer {
  InstanceNormLayer() = default;
  InstanceNormLayer(ParamRegistry& reg, const std::string& name, long channels);
  ad::Var operator()(const ad::Var& x) const { return ad::instance_norm(x, gamma, beta); }
  ad::Var gamma, beta;
};

struct PReluLayer {
  PReluLayer() = default;
  PReluLayer(ParamRegistry& reg, const std::string& name, long channels, double init = 0.25);
  ad::Var operator()(const ad::Var& x) const { return ad::prelu(x, alpha); }
  ad::Var alpha;
};

struct LinearLayer {
  LinearLayer() = default;
  LinearLayer(ParamRegistry& reg, const std::string& name, long cin, long cout, Rng& rng);
  ad::Var operator()(const ad::Var& x) const { return ad::linear(x, w, b); }
  ad::Var w, b;
};

}  // namespace tfcodec

#endif  // TFCODEC_LAYERS_HPP_
