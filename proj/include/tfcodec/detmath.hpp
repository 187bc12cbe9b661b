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

#ifndef TFCODEC_DETMATH_HPP_
#define TFCODEC_DETMATH_HPP_

// Deterministic transcendental functions for the model path.
//
// libm implementations of exp/log/tanh vary between platforms at the last
// ulp, which is enough to break bit-exact artifact portability. Every
// transcendental evaluated inside the codec graph goes through these
// rational-polynomial versions instead, which use only IEEE +,-,*,/ and
// therefore reproduce bit-identically wherever IEEE-754 doubles do.

namespace tfcodec {
namespace detmath {

double exp(double x);
double log(double x);

// tanh/sigmoid built on exp with the usual stable forms.
double tanh(double x);
double sigmoid(double x);

// pow for strictly positive base.
double pow(double base, double exponent);

double log1p(double x);

}  // namespace detmath
}  // namespace tfcodec

#endif  // TFCODEC_DETMATH_HPP_
