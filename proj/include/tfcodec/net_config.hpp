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

#ifndef TFCODEC_NET_CONFIG_HPP_
#define TFCODEC_NET_CONFIG_HPP_

#include <cmath>
#include <vector>

#include "tfcodec/stft.hpp"

namespace tfcodec {

// Encoder/decoder geometry. The strided 2D stack halves/quarters the
// frequency axis; the Nyquist bin cannot ride along (320 divides by the
// stride product, 321 does not), so it takes a parallel non-strided path and
// rejoins at the channel fold.
struct NetConfig {
  StftConfig stft;

  std::vector<long> conv_channels{16, 32, 32, 64, 64};
  std::vector<long> freq_strides{1, 2, 4, 4, 2};
  long kernel_f = 5;
  long kernel_t = 2;
  long latent_dim = 72;  // C_d
  std::vector<long> tcm_dilations{1, 2, 4, 8};
  double width_scale = 1.0;

  long num_layers() const { return static_cast<long>(conv_channels.size()); }
  long channels(long i) const {
    const double c = static_cast<double>(conv_channels[static_cast<std::size_t>(i)]) * width_scale;
    return std::max<long>(1, std::lround(c));
  }
  long bins() const { return stft.bins(); }
  long main_bins() const { return bins() - 1; }
  long stride_product() const {
    long p = 1;
    for (long s : freq_strides) p *= s;
    return p;
  }
  long freq_out() const { return main_bins() / stride_product(); }
  // folded feature dim: strided path plus the one Nyquist column
  long fold_dim() const { return channels(num_layers() - 1) * (freq_out() + 1); }

  void validate() const;
};

// Desk-scale defaults: small enough to train on a CPU in minutes.
NetConfig desk_net_config();

}  // namespace tfcodec

#endif  // TFCODEC_NET_CONFIG_HPP_
