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

#ifndef TFCODEC_NN_OPS_HPP_
#define TFCODEC_NN_OPS_HPP_

#include "tfcodec/autodiff.hpp"

namespace tfcodec {
namespace ad {

// All convolutions are causal along the last (time) axis: the output at
// frame t never reads input frames > t. Frequency padding is symmetric
// zero-padding.

// x (B,Cin,F,T), w (Cout,Cin,KF,KT), b (Cout) -> (B,Cout,Fo,To)
// Defaults give a causal stride-1 time axis (left pad KT-1). Passing
// stride_t/pad_t explicitly (discriminator) trades causality for symmetry.
Var conv2d(const Var& x, const Var& w, const Var& b, long stride_f, long pad_f, long stride_t = 1,
           long pad_t_left = -1, long pad_t_right = 0);

// Frequency-transposed, time-causal convolution.
// x (B,Cin,F,T), w (Cin,Cout,KF,KT), b (Cout) -> (B,Cout,Fo,T)
// Fo = (F-1)*stride_f - 2*pad_f + KF + outpad_f
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, long stride_f, long pad_f,
                     long outpad_f);

// x (B,Cin,T), w (Cout,Cin/groups,K), b (Cout) -> (B,Cout,T)
Var conv1d(const Var& x, const Var& w, const Var& b, long dilation = 1, long groups = 1);

// x (B,Cin,T); weights in PyTorch layout and gate order (r,z,n):
// w_ih (3H,Cin), w_hh (3H,H), b_ih (3H), b_hh (3H) -> (B,H,T)
Var gru(const Var& x, const Var& w_ih, const Var& w_hh, const Var& b_ih, const Var& b_hh);

// Per-channel batch normalization over all non-channel axes. Running
// statistics are external buffers, refreshed when training (update_running
// lets a side path use batch statistics without touching them).
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, Tensor* running_mean,
               Tensor* running_var, bool training, double momentum = 0.1, double eps = 1e-5,
               bool update_running = true);

// Per-(sample,channel) normalization of rank-4 tensors.
Var instance_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// alpha has one slope per channel (axis 1) or a single shared slope.
Var prelu(const Var& x, const Var& alpha);
Var leaky_relu(const Var& x, double slope);

// Non-overlapping/strided average pooling on the last axis, no padding.
Var avg_pool_last(const Var& x, long kernel, long stride);

// x (R,Cin), w (Cout,Cin), b (Cout) -> (R,Cout)
Var linear(const Var& x, const Var& w, const Var& b);

}  // namespace ad
}  // namespace tfcodec

#endif  // TFCODEC_NN_OPS_HPP_
