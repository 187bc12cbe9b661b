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

#include "tfcodec/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <map>
#include <memory>

namespace tfcodec {

struct Fft::Impl {
  Eigen::FFT<double> fft;
  std::vector<double> rbuf;
  std::vector<std::complex<double>> cbuf, cbuf2;
};

Fft::Fft(long n) : impl_(new Impl), n_(n) {
  impl_->rbuf.resize(n);
  impl_->cbuf.resize(n);
  impl_->cbuf2.resize(n);
}

Fft::~Fft() { delete impl_; }

void Fft::rfft(const double* in, std::complex<double>* out_halfspec) {
  std::copy(in, in + n_, impl_->rbuf.begin());
  impl_->fft.fwd(impl_->cbuf, impl_->rbuf);
  std::copy(impl_->cbuf.begin(), impl_->cbuf.begin() + bins(), out_halfspec);
}

void Fft::irfft(const std::complex<double>* halfspec, double* out) {
  const long F = bins();
  for (long k = 0; k < F; ++k) impl_->cbuf[k] = halfspec[k];
  for (long k = F; k < n_; ++k) impl_->cbuf[k] = std::conj(halfspec[n_ - k]);
  // Force DC/Nyquist imaginary parts to zero so the inverse stays real.
  impl_->cbuf[0] = std::complex<double>(impl_->cbuf[0].real(), 0.0);
  if (n_ % 2 == 0) impl_->cbuf[n_ / 2] = std::complex<double>(impl_->cbuf[n_ / 2].real(), 0.0);
  impl_->fft.inv(impl_->rbuf, impl_->cbuf);
  std::copy(impl_->rbuf.begin(), impl_->rbuf.end(), out);
}

void Fft::ifft_unnormalized(const std::complex<double>* in, std::complex<double>* out) {
  std::copy(in, in + n_, impl_->cbuf.begin());
  impl_->fft.inv(impl_->cbuf2, impl_->cbuf);
  const double scale = static_cast<double>(n_);
  for (long i = 0; i < n_; ++i) out[i] = impl_->cbuf2[i] * scale;
}

Fft& fft_for_size(long n) {
  thread_local std::map<long, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

}  // namespace tfcodec
