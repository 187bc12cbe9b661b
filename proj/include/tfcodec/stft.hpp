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

#ifndef TFCODEC_STFT_HPP_
#define TFCODEC_STFT_HPP_

#include "tfcodec/autodiff.hpp"
#include "tfcodec/tensor.hpp"

namespace tfcodec {

struct StftConfig {
  long window_len = 640;  // 40 ms at 16 kHz
  long hop_len = 160;     // 10 ms

  long bins() const { return window_len / 2 + 1; }
  // Frames are left-aligned: no centering, fully causal.
  long frames(long num_samples) const {
    return num_samples < window_len ? 0 : (num_samples - window_len) / hop_len + 1;
  }
  long synthesis_length(long num_frames) const {
    return num_frames < 1 ? 0 : (num_frames - 1) * hop_len + window_len;
  }
  void validate() const;
};

// Periodic Hann window of the configured length.
Tensor hann_window(long n);

// Analysis: waveform (length L) -> (2,F,T) real/imag spectrum.
// Throws "input too short" when L < window_len.
Tensor stft(const Tensor& samples, const StftConfig& cfg);

// Synthesis: (2,F,T) -> waveform of length (T-1)*hop + window via
// overlap-add with squared-window normalization.
Tensor istft(const Tensor& spec, const StftConfig& cfg);

namespace ad {

// Differentiable batched versions: x (B,L) <-> (B,2,F,T).
Var stft_op(const Var& x, const StftConfig& cfg);
Var istft_op(const Var& spec, const StftConfig& cfg);

}  // namespace ad

}  // namespace tfcodec

#endif  // TFCODEC_STFT_HPP_
