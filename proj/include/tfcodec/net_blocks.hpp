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

#ifndef TFCODEC_NET_BLOCKS_HPP_
#define TFCODEC_NET_BLOCKS_HPP_

#include <string>
#include <vector>

#include "tfcodec/layers.hpp"
#include "tfcodec/net_config.hpp"

namespace tfcodec {

// Residual temporal block: pointwise expand, PReLU, causal dilated depthwise
// conv (kernel 3), PReLU, pointwise project, skip connection.
struct TcmBlock {
  TcmBlock() = default;
  TcmBlock(ParamRegistry& reg, const std::string& name, long channels, long hidden, long dilation,
           Rng& rng);
  ad::Var operator()(const ad::Var& x) const;
  Conv1dLayer pw_in, dw, pw_out;
  PReluLayer act1, act2;
};

struct TcmModule {
  TcmModule() = default;
  TcmModule(ParamRegistry& reg, const std::string& name, long channels, long hidden,
            const std::vector<long>& dilations, Rng& rng);
  ad::Var operator()(const ad::Var& x) const;
  std::vector<TcmBlock> blocks;
};

// GRU with a residual connection (hidden size == channel count).
struct GruBlock {
  GruBlock() = default;
  GruBlock(ParamRegistry& reg, const std::string& name, long channels, Rng& rng);
  ad::Var operator()(const ad::Var& x) const { return ad::add(x, gru(x)); }
  GruLayer gru;
};

// Compressed spectrum (B,2,F,T) -> latent sequence (B,C_d,T).
struct Encoder {
  Encoder() = default;
  Encoder(ParamRegistry& reg, const std::string& prefix, const NetConfig& cfg, Rng& rng);
  ad::Var operator()(const ad::Var& cspec, bool training) const;

  NetConfig cfg;
  std::vector<Conv2dLayer> main_convs, nyq_convs;
  std::vector<BatchNormLayer> main_bns, nyq_bns;
  std::vector<PReluLayer> main_acts, nyq_acts;
  TcmModule tcm;
  GruBlock gru;
  Conv1dLayer out_conv;
};

// Latent sequence (B,C_d,T) -> compressed spectrum (B,2,F,T).
struct Decoder {
  Decoder() = default;
  Decoder(ParamRegistry& reg, const std::string& prefix, const NetConfig& cfg, Rng& rng);
  ad::Var operator()(const ad::Var& latent, bool training) const;

  NetConfig cfg;
  Conv1dLayer in_conv;
  TcmModule tcm1, tcm2;
  GruBlock gru;
  std::vector<ConvT2dLayer> main_deconvs;
  std::vector<Conv2dLayer> nyq_convs;
  std::vector<BatchNormLayer> main_bns, nyq_bns;
  std::vector<PReluLayer> main_acts, nyq_acts;
};

// Exact trainable-parameter counts from a throwaway instantiation.
long count_encoder_params(const NetConfig& cfg);
long count_decoder_params(const NetConfig& cfg);

}  // namespace tfcodec

#endif  // TFCODEC_NET_BLOCKS_HPP_
