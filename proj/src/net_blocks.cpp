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

#include "tfcodec/net_blocks.hpp"

#include "tfcodec/errors.hpp"

namespace tfcodec {

namespace {

// Freq-axis slice/concat of (B,C,F,T) tensors via the rank-3 channel ops.
ad::Var slice_freq(const ad::Var& x, long start, long len) {
  const long B = x.dim(0), C = x.dim(1), F = x.dim(2), T = x.dim(3);
  ad::Var flat = ad::reshape(x, {B * C, F, T});
  return ad::reshape(ad::slice_channels(flat, start, len), {B, C, len, T});
}

ad::Var concat_freq(const ad::Var& a, const ad::Var& b) {
  const long B = a.dim(0), C = a.dim(1), Fa = a.dim(2), T = a.dim(3), Fb = b.dim(2);
  ad::Var fa = ad::reshape(a, {B * C, Fa, T});
  ad::Var fb = ad::reshape(b, {B * C, Fb, T});
  return ad::reshape(ad::concat_channels(fa, fb), {B, C, Fa + Fb, T});
}

}  // namespace

void NetConfig::validate() const {
  stft.validate();
  if (conv_channels.size() != freq_strides.size())
    throw usage_error("net config: channels/strides length mismatch");
  if (latent_dim < 1) throw usage_error("net config: latent_dim must be positive");
  if (main_bins() % stride_product() != 0)
    throw usage_error("net config: stride product must divide the non-Nyquist bin count");
  for (long d : tcm_dilations)
    if (d < 1) throw usage_error("net config: dilations must be >= 1");
}

NetConfig desk_net_config() {
  NetConfig cfg;
  cfg.width_scale = 0.25;
  cfg.latent_dim = 32;
  return cfg;
}

TcmBlock::TcmBlock(ParamRegistry& reg, const std::string& name, long channels, long hidden,
                   long dilation, Rng& rng) {
  pw_in = Conv1dLayer(reg, name + ".pw_in", channels, hidden, 1, 1, 1, rng);
  act1 = PReluLayer(reg, name + ".act1", hidden);
  dw = Conv1dLayer(reg, name + ".dw", hidden, hidden, 3, dilation, hidden, rng);
  act2 = PReluLayer(reg, name + ".act2", hidden);
  pw_out = Conv1dLayer(reg, name + ".pw_out", hidden, channels, 1, 1, 1, rng);
}

ad::Var TcmBlock::operator()(const ad::Var& x) const {
  ad::Var h = pw_in(x);
  h = act1(h);
  h = dw(h);
  h = act2(h);
  h = pw_out(h);
  return ad::add(x, h);
}

TcmModule::TcmModule(ParamRegistry& reg, const std::string& name, long channels, long hidden,
                     const std::vector<long>& dilations, Rng& rng) {
  for (std::size_t i = 0; i < dilations.size(); ++i)
    blocks.emplace_back(reg, name + ".block" + std::to_string(i), channels, hidden, dilations[i],
                        rng);
}

ad::Var TcmModule::operator()(const ad::Var& x) const {
  ad::Var h = x;
  for (const auto& blk : blocks) h = blk(h);
  return h;
}

GruBlock::GruBlock(ParamRegistry& reg, const std::string& name, long channels, Rng& rng) {
  gru = GruLayer(reg, name + ".gru", channels, channels, rng);
}

Encoder::Encoder(ParamRegistry& reg, const std::string& prefix, const NetConfig& config, Rng& rng)
    : cfg(config) {
  cfg.validate();
  const long L = cfg.num_layers();
  long cin = 2;
  for (long i = 0; i < L; ++i) {
    const long cout = cfg.channels(i);
    main_convs.emplace_back(reg, prefix + ".conv" + std::to_string(i), cin, cout, cfg.kernel_f,
                            cfg.kernel_t, cfg.freq_strides[i], 2, rng);
    main_bns.emplace_back(reg, prefix + ".bn" + std::to_string(i), cout);
    main_acts.emplace_back(reg, prefix + ".act" + std::to_string(i), cout);
    nyq_convs.emplace_back(reg, prefix + ".nyq_conv" + std::to_string(i), cin, cout, 1,
                           cfg.kernel_t, 1, 0, rng);
    nyq_bns.emplace_back(reg, prefix + ".nyq_bn" + std::to_string(i), cout);
    nyq_acts.emplace_back(reg, prefix + ".nyq_act" + std::to_string(i), cout);
    cin = cout;
  }
  const long C = cfg.fold_dim();
  tcm = TcmModule(reg, prefix + ".tcm", C, C, cfg.tcm_dilations, rng);
  gru = GruBlock(reg, prefix + ".gru", C, rng);
  out_conv = Conv1dLayer(reg, prefix + ".out", C, cfg.latent_dim, 1, 1, 1, rng);
}

ad::Var Encoder::operator()(const ad::Var& cspec, bool training) const {
  if (cspec.value().rank() != 4 || cspec.dim(1) != 2 || cspec.dim(2) != cfg.bins())
    throw data_error("encoder: input must be (B,2,F,T) with F matching the STFT config");
  const long B = cspec.dim(0), T = cspec.dim(3);

  ad::Var main = slice_freq(cspec, 0, cfg.main_bins());
  ad::Var nyq = slice_freq(cspec, cfg.main_bins(), 1);
  for (std::size_t i = 0; i < main_convs.size(); ++i) {
    main = main_acts[i](main_bns[i](main_convs[i](main), training));
    nyq = nyq_acts[i](nyq_bns[i](nyq_convs[i](nyq), training));
  }
  ad::Var folded = ad::reshape(concat_freq(main, nyq), {B, cfg.fold_dim(), T});
  folded = tcm(folded);
  folded = gru(folded);
  return out_conv(folded);
}

Decoder::Decoder(ParamRegistry& reg, const std::string& prefix, const NetConfig& config, Rng& rng)
    : cfg(config) {
  cfg.validate();
  const long C = cfg.fold_dim();
  in_conv = Conv1dLayer(reg, prefix + ".in", cfg.latent_dim, C, 1, 1, 1, rng);
  tcm1 = TcmModule(reg, prefix + ".tcm1", C, C, cfg.tcm_dilations, rng);
  gru = GruBlock(reg, prefix + ".gru", C, rng);
  tcm2 = TcmModule(reg, prefix + ".tcm2", C, C, cfg.tcm_dilations, rng);

  const long L = cfg.num_layers();
  for (long i = 0; i < L; ++i) {
    // layer i inverts encoder layer L-1-i
    const long enc_layer = L - 1 - i;
    const long cin = cfg.channels(enc_layer);
    const long cout = enc_layer == 0 ? 2 : cfg.channels(enc_layer - 1);
    const long s = cfg.freq_strides[enc_layer];
    main_deconvs.emplace_back(reg, prefix + ".deconv" + std::to_string(i), cin, cout, cfg.kernel_f,
                              cfg.kernel_t, s, 2, s - 1, rng);
    nyq_convs.emplace_back(reg, prefix + ".nyq_conv" + std::to_string(i), cin, cout, 1,
                           cfg.kernel_t, 1, 0, rng);
    if (i + 1 < L) {  // final layer stays linear
      main_bns.emplace_back(reg, prefix + ".bn" + std::to_string(i), cout);
      main_acts.emplace_back(reg, prefix + ".act" + std::to_string(i), cout);
      nyq_bns.emplace_back(reg, prefix + ".nyq_bn" + std::to_string(i), cout);
      nyq_acts.emplace_back(reg, prefix + ".nyq_act" + std::to_string(i), cout);
    }
  }
}

ad::Var Decoder::operator()(const ad::Var& latent, bool training) const {
  if (latent.value().rank() != 3 || latent.dim(1) != cfg.latent_dim)
    throw data_error("decoder: input must be (B,C_d,T)");
  const long B = latent.dim(0), T = latent.dim(2);

  ad::Var h = in_conv(latent);
  h = tcm1(h);
  h = gru(h);
  h = tcm2(h);

  const long Cl = cfg.channels(cfg.num_layers() - 1), Fp = cfg.freq_out();
  ad::Var grid = ad::reshape(h, {B, Cl, Fp + 1, T});
  ad::Var main = slice_freq(grid, 0, Fp);
  ad::Var nyq = slice_freq(grid, Fp, 1);
  for (std::size_t i = 0; i < main_deconvs.size(); ++i) {
    main = main_deconvs[i](main);
    nyq = nyq_convs[i](nyq);
    if (i < main_bns.size()) {
      main = main_acts[i](main_bns[i](main, training));
      nyq = nyq_acts[i](nyq_bns[i](nyq, training));
    }
  }
  return concat_freq(main, nyq);
}

long count_encoder_params(const NetConfig& cfg) {
  ParamRegistry reg;
  Rng rng(0);
  Encoder enc(reg, "enc", cfg, rng);
  return reg.count_params("enc");
}

long count_decoder_params(const NetConfig& cfg) {
  ParamRegistry reg;
  Rng rng(0);
  Decoder dec(reg, "dec", cfg, rng);
  return reg.count_params("dec");
}

}  // namespace tfcodec
