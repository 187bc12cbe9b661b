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

#include "tfcodec/stft.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "tfcodec/errors.hpp"
#include "tfcodec/fft.hpp"

namespace tfcodec {

void StftConfig::validate() const {
  if (window_len <= 0 || hop_len <= 0) throw usage_error("stft: nonpositive window/hop");
  if (window_len % hop_len != 0) throw usage_error("stft: hop must divide window length");
  if (hop_len >= window_len) throw usage_error("stft: hop must be smaller than window");
}

Tensor hann_window(long n) {
  Tensor w({n});
  for (long i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
  return w;
}

namespace {

// (2,F,T) spectrum of one channel; window applied before the transform.
void stft_kernel(const double* x, long L, const StftConfig& cfg, const Tensor& win, double* out) {
  const long F = cfg.bins(), T = cfg.frames(L), N = cfg.window_len;
  Fft& fft = fft_for_size(N);
  std::vector<double> seg(N);
  std::vector<std::complex<double>> spec(F);
  for (long t = 0; t < T; ++t) {
    const double* s = x + t * cfg.hop_len;
    for (long i = 0; i < N; ++i) seg[i] = s[i] * win[i];
    fft.rfft(seg.data(), spec.data());
    for (long f = 0; f < F; ++f) {
      out[f * T + t] = spec[f].real();
      out[F * T + f * T + t] = spec[f].imag();
    }
  }
}

// Overlap-add synthesis with squared-window normalization.
void istft_kernel(const double* spec, long F, long T, const StftConfig& cfg, const Tensor& win,
                  double* out, long L) {
  const long N = cfg.window_len;
  Fft& fft = fft_for_size(N);
  std::vector<std::complex<double>> col(F);
  std::vector<double> frame(N);
  std::vector<double> den(L, 0.0);
  for (long i = 0; i < L; ++i) out[i] = 0.0;
  for (long t = 0; t < T; ++t) {
    for (long f = 0; f < F; ++f)
      col[f] = std::complex<double>(spec[f * T + t], spec[F * T + f * T + t]);
    fft.irfft(col.data(), frame.data());
    const long off = t * cfg.hop_len;
    for (long i = 0; i < N; ++i) {
      out[off + i] += win[i] * frame[i];
      den[off + i] += win[i] * win[i];
    }
  }
  for (long i = 0; i < L; ++i) out[i] = den[i] > 1e-12 ? out[i] / den[i] : 0.0;
}

}  // namespace

Tensor stft(const Tensor& samples, const StftConfig& cfg) {
  cfg.validate();
  const long L = samples.size();
  if (L < cfg.window_len) throw data_error("input too short");
  Tensor out({2, cfg.bins(), cfg.frames(L)});
  Tensor win = hann_window(cfg.window_len);
  stft_kernel(samples.data(), L, cfg, win, out.data());
  return out;
}

Tensor istft(const Tensor& spec, const StftConfig& cfg) {
  cfg.validate();
  if (spec.rank() != 3 || spec.dim(0) != 2 || spec.dim(1) != cfg.bins())
    throw data_error("istft: spectrum shape does not match config");
  const long T = spec.dim(2);
  const long L = cfg.synthesis_length(T);
  Tensor out({L});
  Tensor win = hann_window(cfg.window_len);
  istft_kernel(spec.data(), cfg.bins(), T, cfg, win, out.data(), L);
  return out;
}

namespace ad {

Var stft_op(const Var& x, const StftConfig& cfg) {
  cfg.validate();
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw TensorError("stft_op: input must be (B,L)");
  const long B = xv.dim(0), L = xv.dim(1);
  if (L < cfg.window_len) throw data_error("input too short");
  const long F = cfg.bins(), T = cfg.frames(L);
  auto win = std::make_shared<Tensor>(hann_window(cfg.window_len));

  Tensor out({B, 2, F, T});
  for (long b = 0; b < B; ++b)
    stft_kernel(xv.data() + b * L, L, cfg, *win, out.data() + b * 2 * F * T);

  return make_op(std::move(out), {x}, [x, cfg, B, L, F, T, win](Node& n) mutable {
    const long N = cfg.window_len;
    Fft& fft = fft_for_size(N);
    std::vector<std::complex<double>> cot(N), adj(N);
    double* gx = x.node()->ensure_grad().data();
    for (long b = 0; b < B; ++b) {
      const double* g = n.grad.data() + b * 2 * F * T;
      for (long t = 0; t < T; ++t) {
        for (long f = 0; f < F; ++f)
          cot[f] = std::complex<double>(g[f * T + t], g[F * T + f * T + t]);
        for (long f = F; f < N; ++f) cot[f] = 0.0;
        // adjoint of (window -> rfft -> keep half): unnormalized inverse DFT
        fft.ifft_unnormalized(cot.data(), adj.data());
        double* dst = gx + b * L + t * cfg.hop_len;
        for (long i = 0; i < N; ++i) dst[i] += (*win)[i] * adj[i].real();
      }
    }
  });
}

Var istft_op(const Var& spec, const StftConfig& cfg) {
  cfg.validate();
  const Tensor& sv = spec.value();
  if (sv.rank() != 4 || sv.dim(1) != 2 || sv.dim(2) != cfg.bins())
    throw TensorError("istft_op: input must be (B,2,F,T) matching config");
  const long B = sv.dim(0), F = sv.dim(2), T = sv.dim(3);
  const long L = cfg.synthesis_length(T);
  auto win = std::make_shared<Tensor>(hann_window(cfg.window_len));

  // Precompute the overlap-add normalizer (shared by forward and adjoint).
  auto den = std::make_shared<Tensor>(Tensor({L}));
  for (long t = 0; t < T; ++t)
    for (long i = 0; i < cfg.window_len; ++i)
      (*den)[t * cfg.hop_len + i] += (*win)[i] * (*win)[i];

  Tensor out({B, L});
  {
    const long N = cfg.window_len;
    Fft& fft = fft_for_size(N);
    std::vector<std::complex<double>> col(F);
    std::vector<double> frame(N);
    for (long b = 0; b < B; ++b) {
      double* y = out.data() + b * L;
      const double* sp = sv.data() + b * 2 * F * T;
      for (long t = 0; t < T; ++t) {
        for (long f = 0; f < F; ++f)
          col[f] = std::complex<double>(sp[f * T + t], sp[F * T + f * T + t]);
        fft.irfft(col.data(), frame.data());
        const long off = t * cfg.hop_len;
        for (long i = 0; i < N; ++i) y[off + i] += (*win)[i] * frame[i];
      }
      for (long i = 0; i < L; ++i) y[i] = (*den)[i] > 1e-12 ? y[i] / (*den)[i] : 0.0;
    }
  }

  return make_op(std::move(out), {spec}, [spec, cfg, B, F, T, L, win, den](Node& n) mutable {
    const long N = cfg.window_len;
    Fft& fft = fft_for_size(N);
    std::vector<double> seg(N);
    std::vector<std::complex<double>> v(F);
    double* gs = spec.node()->ensure_grad().data();
    const double invN = 1.0 / static_cast<double>(N);
    for (long b = 0; b < B; ++b) {
      const double* g = n.grad.data() + b * L;
      for (long t = 0; t < T; ++t) {
        const long off = t * cfg.hop_len;
        for (long i = 0; i < N; ++i) {
          const double d = (*den)[off + i];
          seg[i] = d > 1e-12 ? (*win)[i] * g[off + i] / d : 0.0;
        }
        fft.rfft(seg.data(), v.data());
        double* dst = gs + b * 2 * F * T;
        for (long f = 0; f < F; ++f) {
          const double scale = (f == 0 || f == N / 2) ? invN : 2.0 * invN;
          dst[f * T + t] += scale * v[f].real();
          if (f != 0 && f != N / 2) dst[F * T + f * T + t] += 2.0 * invN * v[f].imag();
        }
      }
    }
  });
}

}  // namespace ad
}  // namespace tfcodec
