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

#ifndef TFCODEC_LOSSES_HPP_
#define TFCODEC_LOSSES_HPP_

#include <vector>

#include "tfcodec/layers.hpp"
#include "tfcodec/stft.hpp"

namespace tfcodec {

struct LossWeights {
  double rate = 0.04;
  double pred = 0.02;
  double adv = 0.001;
  double feat = 0.1;
  double mel = 0.25;
};

// HTK-style triangular mel filterbank (n_mels, n_fft/2+1), 0 Hz..Nyquist.
Tensor mel_filterbank(long n_fft, long sample_rate, long n_mels);

// MSE between power-law compressed spectra of the two waveforms; running the
// estimate through its own STFT is the consistency projection (the estimate
// reached the time domain through the inverse transform).
ad::Var loss_bin(const ad::Var& x, const ad::Var& xhat, const ad::Var& power,
                 const StftConfig& cfg);

// Multi-scale log1p-mel l1 distance, windows 64..2048, hop = window/4,
// 64 mel bins per scale.
ad::Var loss_mel(const ad::Var& x, const ad::Var& xhat, long sample_rate,
                 const std::vector<long>& windows = {64, 128, 256, 512, 1024, 2048},
                 long n_mels = 64);

// Mean squared prediction error with stop-gradient on the target sequence.
ad::Var loss_pred(const ad::Var& prediction, const ad::Var& target);
// Same form; the prediction comes from the decoder-side loop under loss.
ad::Var loss_error_aware(const ad::Var& decoder_prediction, const ad::Var& target);

// Least-squares adversarial objectives.
ad::Var loss_adv_g(const ad::Var& logits_fake);
ad::Var loss_d(const ad::Var& logits_real, const ad::Var& logits_fake);

// Mean over layers of per-element l1 distances between feature maps.
ad::Var loss_feat(const std::vector<ad::Var>& feats_real, const std::vector<ad::Var>& feats_fake);

struct GeneratorLossParts {
  ad::Var bin, mel, rate, pred, adv, feat;  // undefined Vars count as zero
};
ad::Var total_generator_loss(const GeneratorLossParts& parts, const LossWeights& w);

// Frequency-domain discriminator: four strided 2D conv blocks with instance
// norm and LeakyReLU on the 0.3-power compressed spectrum, a linear fold of
// frequency into channels, and temporal average pooling (kernel 10).
struct DiscriminatorConfig {
  std::vector<long> channels{8, 8, 16, 16};
  long kernel_f = 2, kernel_t = 3;
  long stride = 2;
  double input_power = 0.3;
  long pool_kernel = 10;
};

struct Discriminator {
  Discriminator() = default;
  Discriminator(ParamRegistry& reg, const std::string& prefix, const StftConfig& stft_cfg,
                const DiscriminatorConfig& cfg, Rng& rng);

  struct Out {
    ad::Var logits;                 // (B, T_d)
    std::vector<ad::Var> features;  // four post-activation conv maps
  };
  Out operator()(const ad::Var& wave) const;  // (B, L)

  StftConfig stft_cfg;
  DiscriminatorConfig cfg;
  std::vector<Conv2dLayer> convs;
  std::vector<InstanceNormLayer> norms;
  Conv1dLayer fold;
};

}  // namespace tfcodec

#endif  // TFCODEC_LOSSES_HPP_
