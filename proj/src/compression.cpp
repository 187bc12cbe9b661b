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

#include "tfcodec/compression.hpp"

#include <cmath>

#include "tfcodec/detmath.hpp"
#include "tfcodec/errors.hpp"

namespace tfcodec {

namespace {

void check_power(double p) {
  if (p <= 0.0) throw usage_error("compression power must be positive");
  if (p > 1.0) throw usage_error("compression power must be <= 1");
}

// Geometry of a (..,2,F,T) spectrum: `pairs` complex values per batch item.
struct SpecGeom {
  long batch, pairs;
};
SpecGeom spec_geom(const Tensor& t) {
  if (t.rank() == 3) {
    if (t.dim(0) != 2) throw TensorError("spectrum must have 2 leading channels");
    return {1, t.dim(1) * t.dim(2)};
  }
  if (t.rank() == 4) {
    if (t.dim(1) != 2) throw TensorError("spectrum must have 2 channels at axis 1");
    return {t.dim(0), t.dim(2) * t.dim(3)};
  }
  throw TensorError("spectrum must be rank 3 or 4");
}

// out = x * mc^(e-1), mc = max(|x|, kMagEps); exact |x|^e above the clamp.
void apply_power(const Tensor& in, double e, Tensor& out) {
  const SpecGeom g = spec_geom(in);
  for (long b = 0; b < g.batch; ++b) {
    const double* re = in.data() + b * 2 * g.pairs;
    const double* im = re + g.pairs;
    double* ore = out.data() + b * 2 * g.pairs;
    double* oim = ore + g.pairs;
    for (long i = 0; i < g.pairs; ++i) {
      const double m = std::sqrt(re[i] * re[i] + im[i] * im[i]);
      const double mc = m > kMagEps ? m : kMagEps;
      const double s = detmath::pow(mc, e - 1.0);
      ore[i] = re[i] * s;
      oim[i] = im[i] * s;
    }
  }
}

}  // namespace

Tensor compress_spectrum(const Tensor& spec, double p) {
  check_power(p);
  Tensor out(spec.shape());
  apply_power(spec, p, out);
  return out;
}

Tensor decompress_spectrum(const Tensor& cspec, double p) {
  check_power(p);
  Tensor out(cspec.shape());
  apply_power(cspec, 1.0 / p, out);
  return out;
}

namespace ad {

namespace {

// Shared autodiff kernel for y = x * mc^(e-1) where e = e(p).
// dedp is d(e)/d(p) evaluated at the current p.
Var power_op(const Var& spec, const Var& p, double e, double dedp) {
  const SpecGeom g = spec_geom(spec.value());
  Tensor out(spec.shape());
  apply_power(spec.value(), e, out);
  return make_op(std::move(out), {spec, p}, [spec, p, g, e, dedp](Node& n) mutable {
    double gp_acc = 0.0;
    const bool need_x = spec.requires_grad();
    const bool need_p = p.requires_grad();
    double* gx = need_x ? spec.node()->ensure_grad().data() : nullptr;
    for (long b = 0; b < g.batch; ++b) {
      const long base = b * 2 * g.pairs;
      const double* re = spec.value().data() + base;
      const double* im = re + g.pairs;
      const double* gre = n.grad.data() + base;
      const double* gim = gre + g.pairs;
      for (long i = 0; i < g.pairs; ++i) {
        const double m2 = re[i] * re[i] + im[i] * im[i];
        const double m = std::sqrt(m2);
        const bool clamped = m <= kMagEps;
        const double mc = clamped ? kMagEps : m;
        const double lmc = detmath::log(mc);
        const double s = detmath::exp((e - 1.0) * lmc);
        if (need_p) gp_acc += (gre[i] * re[i] + gim[i] * im[i]) * s * lmc;
        if (need_x) {
          if (clamped) {
            gx[base + i] += gre[i] * s;
            gx[base + g.pairs + i] += gim[i] * s;
          } else {
            const double c = s * (e - 1.0) / m2;
            gx[base + i] += gre[i] * (s + re[i] * re[i] * c) + gim[i] * (im[i] * re[i] * c);
            gx[base + g.pairs + i] +=
                gim[i] * (s + im[i] * im[i] * c) + gre[i] * (re[i] * im[i] * c);
          }
        }
      }
    }
    if (need_p) p.node()->ensure_grad()[0] += gp_acc * dedp;
  });
}

}  // namespace

Var compress_op(const Var& spec, const Var& p) {
  const double pv = p.value().item();
  check_power(pv);
  return power_op(spec, p, pv, 1.0);
}

Var decompress_op(const Var& cspec, const Var& p) {
  const double pv = p.value().item();
  check_power(pv);
  return power_op(cspec, p, 1.0 / pv, -1.0 / (pv * pv));
}

}  // namespace ad
}  // namespace tfcodec
