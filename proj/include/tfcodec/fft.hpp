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

#ifndef TFCODEC_FFT_HPP_
#define TFCODEC_FFT_HPP_

#include <complex>
#include <vector>

namespace tfcodec {

// Cached-plan FFT for one transform size. Sizes need not be powers of two
// (the analysis window is 640 = 2^7 * 5).
class Fft {
 public:
  explicit Fft(long n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  long size() const { return n_; }
  long bins() const { return n_ / 2 + 1; }

  // Real input (n) -> first n/2+1 bins of the DFT.
  void rfft(const double* in, std::complex<double>* out_halfspec);

  // Hermitian half-spectrum (n/2+1) -> real output (n).
  void irfft(const std::complex<double>* halfspec, double* out);

  // Unnormalized inverse DFT of a full complex vector (n); the caller gets
  // sum_k in[k] * exp(+i 2 pi k n / N).
  void ifft_unnormalized(const std::complex<double>* in, std::complex<double>* out);

 private:
  struct Impl;
  Impl* impl_;
  long n_;
};

// Per-thread plan cache keyed by size.
Fft& fft_for_size(long n);

}  // namespace tfcodec

#endif  // TFCODEC_FFT_HPP_
