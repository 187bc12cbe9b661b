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

#include "tfcodec/detmath.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

namespace tfcodec {
namespace detmath {

namespace {

// Rational minimax coefficients after Cephes (Moshier), accurate to ~1 ulp.
constexpr double kExpP[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                            9.99999999999999999910e-1};
constexpr double kExpQ[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                            2.27265548208155028766e-1, 2.00000000000000000005e0};
constexpr double kLog2E = 1.4426950408889634073599;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;

constexpr double kLogP[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                            4.70579119878881725854e0,  1.44989225341610930846e1,
                            1.79368678507819816313e1,  7.70838733755885391666e0};
constexpr double kLogQ[] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                            8.29875266912776603211e1, 7.11544750618563894466e1,
                            2.31251620126765340583e1};
// ln2 split used by the log reconstruction (hi - lo form).
constexpr double kLogLn2Hi = 0.693359375;
constexpr double kLogLn2Lo = 2.121944400546905827679e-4;
constexpr double kSqrtHalf = 0.70710678118654752440;

inline double polevl(double x, const double* c, int n) {
  double r = c[0];
  for (int i = 1; i <= n; ++i) r = r * x + c[i];
  return r;
}

// Horner evaluation with implicit leading coefficient 1.
inline double p1evl(double x, const double* c, int n) {
  double r = x + c[0];
  for (int i = 1; i < n; ++i) r = r * x + c[i];
  return r;
}

// ldexp via exponent-field arithmetic; |k| is always small here.
inline double load_exponent(double x, int k) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  std::int64_t e = static_cast<std::int64_t>((bits >> 52) & 0x7ff);
  e += k;
  if (e <= 0 || e >= 0x7ff) return std::ldexp(x, k);  // denormal/overflow path
  bits = (bits & ~(0x7ffull << 52)) | (static_cast<std::uint64_t>(e) << 52);
  std::memcpy(&x, &bits, 8);
  return x;
}

// Splits x into mantissa in [sqrt(1/2), sqrt(2)) and exponent.
inline double take_mantissa(double x, int* e) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  int exp = static_cast<int>((bits >> 52) & 0x7ff);
  if (exp == 0) {  // denormal: renormalize
    x *= 1.8014398509481984e16;  // 2^54
    std::memcpy(&bits, &x, 8);
    exp = static_cast<int>((bits >> 52) & 0x7ff) - 54;
  }
  *e = exp - 1022;
  bits = (bits & 0x800fffffffffffffull) | (0x3feull << 52);
  std::memcpy(&x, &bits, 8);
  if (x < kSqrtHalf) {
    x *= 2.0;
    *e -= 1;
  }
  return x;
}

}  // namespace

double exp(double x) {
  if (std::isnan(x)) return x;
  if (x > 709.78) return std::numeric_limits<double>::infinity();
  if (x < -745.13) return 0.0;
  double k = std::floor(kLog2E * x + 0.5);
  x -= k * kLn2Hi;
  x -= k * kLn2Lo;
  const double xx = x * x;
  const double p = x * polevl(xx, kExpP, 2);
  const double q = polevl(xx, kExpQ, 3);
  double r = 1.0 + 2.0 * p / (q - p);
  return load_exponent(r, static_cast<int>(k));
}

double log(double x) {
  if (std::isnan(x) || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;
  int e = 0;
  x = take_mantissa(x, &e);
  x -= 1.0;
  const double z = x * x;
  double y = x * (z * polevl(x, kLogP, 5) / p1evl(x, kLogQ, 5));
  if (e) y -= static_cast<double>(e) * kLogLn2Lo;
  y -= 0.5 * z;
  double r = x + y;
  if (e) r += static_cast<double>(e) * kLogLn2Hi;
  return r;
}

double tanh(double x) {
  if (x != x) return x;
  const double ax = x < 0 ? -x : x;
  if (ax > 20.0) return x < 0 ? -1.0 : 1.0;
  const double t = detmath::exp(2.0 * ax);
  const double r = 1.0 - 2.0 / (t + 1.0);
  return x < 0 ? -r : r;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double t = detmath::exp(-x);
    return 1.0 / (1.0 + t);
  }
  const double t = detmath::exp(x);
  return t / (1.0 + t);
}

double pow(double base, double exponent) { return detmath::exp(exponent * detmath::log(base)); }

double log1p(double x) {
  // For tiny x the direct form loses precision; one Newton-ish correction
  // on u = 1+x recovers it.
  const double u = 1.0 + x;
  if (u == 1.0) return x;
  return detmath::log(u) * (x / (u - 1.0));
}

}  // namespace detmath
}  // namespace tfcodec
