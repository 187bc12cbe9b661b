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

#include "tfcodec/losses.hpp"

#include <cmath>

#include "tfcodec/compression.hpp"
#include "tfcodec/errors.hpp"

namespace tfcodec {

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// |spectrum| of (B,2,F,T) -> (B,F,T); tiny floor keeps the sqrt smooth.
ad::Var magnitude(const ad::Var& spec) {
  const long B = spec.dim(0), F = spec.dim(2), T = spec.dim(3);
  ad::Var re = ad::reshape(ad::slice_channels(spec, 0, 1), {B, F, T});
  ad::Var im = ad::reshape(ad::slice_channels(spec, 1, 1), {B, F, T});
  return ad::sqrt_(ad::add_scalar(ad::add(ad::square(re), ad::square(im)), 1e-12));
}

}  // namespace

Tensor mel_filterbank(long n_fft, long sample_rate, long n_mels) {
  const long bins = n_fft / 2 + 1;
  Tensor fb({n_mels, bins});
  const double fmax = static_cast<double>(sample_rate) / 2.0;
  const double mmax = hz_to_mel(fmax);
  std::vector<double> centers(static_cast<std::size_t>(n_mels) + 2);
  for (long m = 0; m < n_mels + 2; ++m)
    centers[static_cast<std::size_t>(m)] =
        mel_to_hz(mmax * static_cast<double>(m) / static_cast<double>(n_mels + 1));
  for (long m = 0; m < n_mels; ++m) {
    const double lo = centers[static_cast<std::size_t>(m)];
    const double mid = centers[static_cast<std::size_t>(m + 1)];
    const double hi = centers[static_cast<std::size_t>(m + 2)];
    for (long k = 0; k < bins; ++k) {
      const double f = fmax * static_cast<double>(k) / static_cast<double>(bins - 1);
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      fb[m * bins + k] = w;
    }
  }
  return fb;
}

ad::Var loss_bin(const ad::Var& x, const ad::Var& xhat, const ad::Var& power,
                 const StftConfig& cfg) {
  if (x.shape() != xhat.shape()) throw data_error("loss_bin: length mismatch");
  ad::Var sx = ad::compress_op(ad::stft_op(x, cfg), power);
  ad::Var sy = ad::compress_op(ad::stft_op(xhat, cfg), power);
  return ad::mean_all(ad::square(ad::sub(sy, sx)));
}

ad::Var loss_mel(const ad::Var& x, const ad::Var& xhat, long sample_rate,
                 const std::vector<long>& windows, long n_mels) {
  if (x.shape() != xhat.shape()) throw data_error("loss_mel: length mismatch");
  ad::Var acc;
  for (long win : windows) {
    StftConfig cfg;
    cfg.window_len = win;
    cfg.hop_len = std::max<long>(1, win / 4);
    Tensor fb = mel_filterbank(win, sample_rate, n_mels);
    ad::Var mx = ad::log1p_(ad::matmul_left_const(fb, magnitude(ad::stft_op(x, cfg))));
    ad::Var my = ad::log1p_(ad::matmul_left_const(fb, magnitude(ad::stft_op(xhat, cfg))));
    ad::Var term = ad::mean_all(ad::abs_(ad::sub(my, mx)));
    acc = acc.defined() ? ad::add(acc, term) : term;
  }
  return ad::mul_scalar(acc, 1.0 / static_cast<double>(windows.size()));
}

ad::Var loss_pred(const ad::Var& prediction, const ad::Var& target) {
  if (prediction.shape() != target.shape()) throw data_error("loss_pred: shape mismatch");
  return ad::mean_all(ad::square(ad::sub(prediction, ad::detach(target))));
}

ad::Var loss_error_aware(const ad::Var& decoder_prediction, const ad::Var& target) {
  return loss_pred(decoder_prediction, target);
}

ad::Var loss_adv_g(const ad::Var& logits_fake) {
  return ad::mean_all(ad::square(ad::add_scalar(logits_fake, -1.0)));
}

ad::Var loss_d(const ad::Var& logits_real, const ad::Var& logits_fake) {
  return ad::add(ad::mean_all(ad::square(ad::add_scalar(logits_real, -1.0))),
                 ad::mean_all(ad::square(logits_fake)));
}

ad::Var loss_feat(const std::vector<ad::Var>& feats_real, const std::vector<ad::Var>& feats_fake) {
  if (feats_real.size() != feats_fake.size() || feats_real.empty())
    throw data_error("loss_feat: layer count mismatch");
  ad::Var acc;
  for (std::size_t l = 0; l < feats_real.size(); ++l) {
    ad::Var term = ad::mean_all(ad::abs_(ad::sub(feats_real[l], feats_fake[l])));
    acc = acc.defined() ? ad::add(acc, term) : term;
  }
  return ad::mul_scalar(acc, 1.0 / static_cast<double>(feats_real.size()));
}

ad::Var total_generator_loss(const GeneratorLossParts& parts, const LossWeights& w) {
  ad::Var total;
  auto accumulate = [&total](const ad::Var& term, double weight) {
    if (!term.defined() || weight == 0.0) return;
    ad::Var scaled = ad::mul_scalar(term, weight);
    total = total.defined() ? ad::add(total, scaled) : scaled;
  };
  accumulate(parts.bin, 1.0);
  accumulate(parts.mel, w.mel);
  accumulate(parts.rate, w.rate);
  accumulate(parts.pred, w.pred);
  accumulate(parts.adv, w.adv);
  accumulate(parts.feat, w.feat);
  if (!total.defined()) throw data_error("total_generator_loss: no components");
  return total;
}

Discriminator::Discriminator(ParamRegistry& reg, const std::string& prefix,
                             const StftConfig& stft_cfg_, const DiscriminatorConfig& cfg_,
                             Rng& rng)
    : stft_cfg(stft_cfg_), cfg(cfg_) {
  long cin = 2;
  long f = stft_cfg.bins();
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const long cout = cfg.channels[i];
    convs.emplace_back(reg, prefix + ".conv" + std::to_string(i), cin, cout, cfg.kernel_f,
                       cfg.kernel_t, cfg.stride, 0, rng);
    norms.emplace_back(reg, prefix + ".in" + std::to_string(i), cout);
    cin = cout;
    f = (f - cfg.kernel_f) / cfg.stride + 1;
  }
  fold = Conv1dLayer(reg, prefix + ".fold", cin * f, 1, 1, 1, 1, rng);
}

Discriminator::Out Discriminator::operator()(const ad::Var& wave) const {
  ad::Var spec = ad::stft_op(wave, stft_cfg);
  ad::Var p = ad::Var::constant(Tensor::scalar(cfg.input_power));
  ad::Var h = ad::compress_op(spec, p);

  Out out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    // symmetric time padding (discriminator only runs in training)
    h = ad::conv2d(h, convs[i].w, convs[i].b, cfg.stride, 0, cfg.stride, 1, 1);
    h = ad::leaky_relu(norms[i](h), 0.2);
    out.features.push_back(h);
  }
  const long B = h.dim(0), C = h.dim(1), F = h.dim(2), T = h.dim(3);
  if (T < cfg.pool_kernel) throw data_error("discriminator: input too short");
  ad::Var flat = ad::reshape(h, {B, C * F, T});
  ad::Var logits = fold(flat);  // (B,1,T)
  logits = ad::avg_pool_last(logits, cfg.pool_kernel, cfg.pool_kernel);
  return {ad::reshape(logits, {B, logits.dim(2)}), out.features};
}

}  // namespace tfcodec
