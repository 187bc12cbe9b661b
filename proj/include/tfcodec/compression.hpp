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

#ifndef TFCODEC_COMPRESSION_HPP_
#define TFCODEC_COMPRESSION_HPP_

#include "tfcodec/autodiff.hpp"
#include "tfcodec/tensor.hpp"

namespace tfcodec {

// Magnitudes below this are treated as kMagEps before the power is applied;
// |X|^p has an unbounded derivative at zero for p < 1.
inline constexpr double kMagEps = 1e-5;

// Power-law amplitude compression of a real/imag spectrum (..,2,F,T):
// |X| -> |X|^p with the phase unchanged. p must lie in (0,1].
Tensor compress_spectrum(const Tensor& spec, double p);

// Inverse: |Y| -> |Y|^(1/p).
Tensor decompress_spectrum(const Tensor& cspec, double p);

namespace ad {

// Differentiable in both the spectrum and the scalar power.
// spec (B,2,F,T) or (2,F,T); p is a scalar Var.
Var compress_op(const Var& spec, const Var& p);
Var decompress_op(const Var& cspec, const Var& p);

}  // namespace ad

}  // namespace tfcodec

#endif  // TFCODEC_COMPRESSION_HPP_
