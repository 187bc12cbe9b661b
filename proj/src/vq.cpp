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

#include "tfcodec/vq.hpp"

#include <algorithm>
#include <cmath>

#include "tfcodec/detmath.hpp"
#include "tfcodec/errors.hpp"

namespace tfcodec {

CodebookShape codebook_config(const std::string& bitrate_mode) {
  if (bitrate_mode == "0.512") return {3, 512};
  if (bitrate_mode == "1") return {6, 1024};
  if (bitrate_mode == "3") return {16, 1024};
  if (bitrate_mode == "6") return {32, 1024};
  throw usage_error("unknown bitrate mode: " + bitrate_mode + " (expected 0.512, 1, 3 or 6)");
}

double bitrate_mode_kbps(const std::string& bitrate_mode) {
  if (bitrate_mode == "0.512") return 0.512;
  if (bitrate_mode == "1") return 1.0;
  if (bitrate_mode == "3") return 3.0;
  if (bitrate_mode == "6") return 6.0;
  throw usage_error("unknown bitrate mode: " + bitrate_mode);
}

double rate_target_bits(const std::string& bitrate_mode) {
  return bitrate_mode_kbps(bitrate_mode) * 40.0;  // bits per 40 ms superframe
}

void VqConfig::validate() const {
  if (groups < 1 || codewords < 2 || dim < 1) throw usage_error("vq config: bad G/K/dim");
  if (alpha <= 0) throw usage_error("vq config: alpha must be positive");
}

namespace {

long merged_frame_count(long T) { return (T + kMergeFactor - 1) / kMergeFactor; }

void merge_kernel(const double* x, long C, long T, long Tm, double* out) {
  // out[(j*C+c)*Tm + tm] = x[c*T + min(4*tm+j, T-1)]
  for (long j = 0; j < kMergeFactor; ++j)
    for (long c = 0; c < C; ++c)
      for (long tm = 0; tm < Tm; ++tm) {
        long t = kMergeFactor * tm + j;
        if (t >= T) t = T - 1;  // pad by repeating the final frame
        out[(j * C + c) * Tm + tm] = x[c * T + t];
      }
}

}  // namespace

MergedFrames merge_frames(const ad::Var& x) {
  const Tensor& v = x.value();
  if (v.rank() != 3) throw TensorError("merge_frames: input must be (B,C,T)");
  const long B = v.dim(0), C = v.dim(1), T = v.dim(2);
  const long Tm = merged_frame_count(T);
  MergedFrames res;
  res.pad_frames = Tm * kMergeFactor - T;
  Tensor out({B, kMergeFactor * C, Tm});
  for (long b = 0; b < B; ++b)
    merge_kernel(v.data() + b * C * T, C, T, Tm, out.data() + b * kMergeFactor * C * Tm);
  res.merged = ad::make_op(std::move(out), {x}, [x, B, C, T, Tm](ad::Node& n) mutable {
    double* gx = x.node()->ensure_grad().data();
    for (long b = 0; b < B; ++b)
      for (long j = 0; j < kMergeFactor; ++j)
        for (long c = 0; c < C; ++c)
          for (long tm = 0; tm < Tm; ++tm) {
            long t = kMergeFactor * tm + j;
            if (t >= T) t = T - 1;
            gx[(b * C + c) * T + t] += n.grad[(b * kMergeFactor * C + j * C + c) * Tm + tm];
          }
  });
  return res;
}

ad::Var split_frames(const ad::Var& merged, long original_t) {
  const Tensor& v = merged.value();
  if (v.rank() != 3 || v.dim(1) % kMergeFactor != 0)
    throw TensorError("split_frames: input must be (B,4C,Tm)");
  const long B = v.dim(0), C = v.dim(1) / kMergeFactor, Tm = v.dim(2);
  if (original_t > Tm * kMergeFactor || original_t <= (Tm - 1) * kMergeFactor)
    throw TensorError("split_frames: original_t inconsistent with merged length");
  Tensor out({B, C, original_t});
  for (long b = 0; b < B; ++b)
    for (long c = 0; c < C; ++c)
      for (long t = 0; t < original_t; ++t) {
        const long tm = t / kMergeFactor, j = t % kMergeFactor;
        out.data()[(b * C + c) * original_t + t] =
            v.data()[(b * kMergeFactor * C + j * C + c) * Tm + tm];
      }
  return ad::make_op(std::move(out), {merged}, [merged, B, C, Tm, original_t](ad::Node& n) mutable {
    double* gm = merged.node()->ensure_grad().data();
    for (long b = 0; b < B; ++b)
      for (long c = 0; c < C; ++c)
        for (long t = 0; t < original_t; ++t) {
          const long tm = t / kMergeFactor, j = t % kMergeFactor;
          gm[(b * kMergeFactor * C + j * C + c) * Tm + tm] +=
              n.grad[(b * C + c) * original_t + t];
        }
  });
}

Tensor merge_frames_plain(const Tensor& x, long* pad_frames) {
  const long B = x.dim(0), C = x.dim(1), T = x.dim(2);
  const long Tm = merged_frame_count(T);
  if (pad_frames) *pad_frames = Tm * kMergeFactor - T;
  Tensor out({B, kMergeFactor * C, Tm});
  for (long b = 0; b < B; ++b)
    merge_kernel(x.data() + b * C * T, C, T, Tm, out.data() + b * kMergeFactor * C * Tm);
  return out;
}

Tensor split_frames_plain(const Tensor& merged, long original_t) {
  return split_frames(ad::Var::constant(merged), original_t).value();
}

Tensor vq_distances(const Tensor& x, const Tensor& group_codebook) {
  if (x.rank() != 1 || group_codebook.rank() != 2 || group_codebook.dim(1) != x.size())
    throw TensorError("vq_distances: dimension mismatch");
  const long K = group_codebook.dim(0), D = x.size();
  Tensor d({K});
  for (long k = 0; k < K; ++k) {
    double acc = 0.0;
    const double* e = group_codebook.data() + k * D;
    for (long i = 0; i < D; ++i) {
      const double diff = x[i] - e[i];
      acc += diff * diff;
    }
    d[k] = std::sqrt(acc < 0 ? 0 : acc);
  }
  return d;
}

namespace {

struct VqShapes {
  long R, G, K, D;
};

VqShapes check_vq_shapes(const Tensor& x, const Tensor& cb, const VqConfig& cfg) {
  cfg.validate();
  if (x.rank() != 2 || x.dim(1) != cfg.merged_dim())
    throw TensorError("vq: rows must have G*D channels, got " + x.shape_str());
  if (cb.rank() != 3 || cb.dim(0) != cfg.groups || cb.dim(1) != cfg.codewords ||
      cb.dim(2) != cfg.dim)
    throw TensorError("vq: codebook must be (G,K,D), got " + cb.shape_str());
  if (x.dim(0) < 1) throw data_error("vq: empty batch");
  return {x.dim(0), cfg.groups, cfg.codewords, cfg.dim};
}

// Copies group g's columns of (R, G*D) into a contiguous (R, D) block.
void gather_group(const Tensor& x, long g, long D, Tensor& out) {
  const long R = x.dim(0), Cm = x.dim(1);
  for (long r = 0; r < R; ++r)
    std::copy(x.data() + r * Cm + g * D, x.data() + r * Cm + (g + 1) * D, out.data() + r * D);
}

// z = -alpha * d for the distance kind. Also leaves d in `dist`.
void distance_logits(const Tensor& xg, const ConstMatMap& eg, double alpha, Tensor& dist,
                     Tensor& z) {
  const long R = xg.dim(0), D = xg.dim(1), K = eg.rows();
  Eigen::VectorXd e2 = eg.rowwise().squaredNorm();
  Eigen::VectorXd x2 = xg.mat(R, D).rowwise().squaredNorm();
  dist.mat(R, K).noalias() = -2.0 * (xg.mat(R, D) * eg.transpose());
  for (long r = 0; r < R; ++r)
    for (long k = 0; k < K; ++k) {
      double d2 = dist.data()[r * K + k] + x2[r] + e2[k];
      dist.data()[r * K + k] = std::sqrt(d2 < 0 ? 0 : d2);
      z.data()[r * K + k] = -alpha * dist.data()[r * K + k];
    }
}

void projection_logits(const Tensor& xg, const ConstMatMap& wg, const double* bg, Tensor& z) {
  const long R = xg.dim(0), D = xg.dim(1), K = wg.rows();
  z.mat(R, K).noalias() = xg.mat(R, D) * wg.transpose();
  for (long r = 0; r < R; ++r)
    for (long k = 0; k < K; ++k) z.data()[r * K + k] += bg[k];
}

void softmax_rows_inplace(Tensor& z) {
  const long R = z.dim(0), K = z.dim(1);
  for (long r = 0; r < R; ++r) {
    double* p = z.data() + r * K;
    double mx = p[0];
    for (long k = 1; k < K; ++k) mx = p[k] > mx ? p[k] : mx;
    double s = 0.0;
    for (long k = 0; k < K; ++k) {
      p[k] = detmath::exp(p[k] - mx);
      s += p[k];
    }
    const double inv = 1.0 / s;
    for (long k = 0; k < K; ++k) p[k] *= inv;
  }
}

// gz[r] = (gmu[r] - <mu[r], gmu[r]>) * mu[r], in place over gmu.
void softmax_backward_rows(const Tensor& mu, Tensor& gmu) {
  const long R = mu.dim(0), K = mu.dim(1);
  for (long r = 0; r < R; ++r) {
    const double* m = mu.data() + r * K;
    double* g = gmu.data() + r * K;
    double dot = 0.0;
    for (long k = 0; k < K; ++k) dot += m[k] * g[k];
    for (long k = 0; k < K; ++k) g[k] = m[k] * (g[k] - dot);
  }
}

// Shared distance-path gradient: given gz (R,K), accumulates into gx rows
// and the group codebook gradient.
void distance_backward(const Tensor& xg, const ConstMatMap& eg, const Tensor& dist, double alpha,
                       Tensor& gz, MatMap gx_rows, double* ge, long g_stride) {
  const long R = xg.dim(0), K = eg.rows(), D = eg.cols();
  // w = (-alpha * gz) / max(d, eps)
  for (long r = 0; r < R; ++r)
    for (long k = 0; k < K; ++k) {
      const double d = dist.data()[r * K + k];
      gz.data()[r * K + k] *= -alpha / (d > 1e-12 ? d : 1e-12);
    }
  // gx_r += x_r * rowsum(w) - (w E)_r
  Eigen::VectorXd rowsum = gz.mat(R, K).rowwise().sum();
  gx_rows.noalias() -= gz.mat(R, K) * eg;
  for (long r = 0; r < R; ++r) gx_rows.row(r) += rowsum[r] * xg.mat(R, D).row(r);
  // ge_k += e_k * colsum(w) - (w^T x)_k
  Eigen::VectorXd colsum = gz.mat(R, K).colwise().sum();
  MatMap ge_map(ge, K, D);
  (void)g_stride;
  ge_map.noalias() -= gz.mat(R, K).transpose() * xg.mat(R, D);
  for (long k = 0; k < K; ++k) ge_map.row(k) += colsum[k] * eg.row(k);
}

}  // namespace

QuantizeResult vq_quantize(const ad::Var& x, const ad::Var& codebook, const VqConfig& cfg,
                           double tau, bool noise_on, Rng* noise_rng, const ad::Var& proj_w,
                           const ad::Var& proj_b, bool straight_through) {
  const VqShapes s = check_vq_shapes(x.value(), codebook.value(), cfg);
  if (tau <= 0) throw usage_error("vq: temperature must be positive");
  const bool plain = cfg.kind == VqConfig::Kind::kPlainGumbel;
  if (plain && (!proj_w.defined() || !proj_b.defined()))
    throw usage_error("vq: plain-gumbel kind needs projection parameters");
  if (noise_on && noise_rng == nullptr) throw usage_error("vq: noise requires an rng");

  const std::uint64_t call_seed = noise_on ? noise_rng->next_u64() : 0;

  QuantizeResult res;
  res.indices.assign(static_cast<std::size_t>(s.R * s.G), 0);
  Tensor quant({s.R, s.G * s.D});
  Tensor msoft({s.G, s.K});

  {
    Tensor xg({s.R, s.D}), z({s.R, s.K}), dist({s.R, s.K});
    Rng noise(call_seed);
    for (long g = 0; g < s.G; ++g) {
      gather_group(x.value(), g, s.D, xg);
      ConstMatMap eg(codebook.value().data() + g * s.K * s.D, s.K, s.D);
      if (plain)
        projection_logits(xg, ConstMatMap(proj_w.value().data() + g * s.K * s.D, s.K, s.D),
                          proj_b.value().data() + g * s.K, z);
      else
        distance_logits(xg, eg, cfg.alpha, dist, z);

      // batch-mean Softmax(z): no noise, no temperature
      Tensor zs = z;
      softmax_rows_inplace(zs);
      for (long k = 0; k < s.K; ++k) {
        double acc = 0.0;
        for (long r = 0; r < s.R; ++r) acc += zs.data()[r * s.K + k];
        msoft.data()[g * s.K + k] = acc / static_cast<double>(s.R);
      }

      // noisy, tempered assignment; argmax is invariant to 1/tau
      for (long r = 0; r < s.R; ++r) {
        double* zr = z.data() + r * s.K;
        if (noise_on)
          for (long k = 0; k < s.K; ++k) zr[k] += noise.gumbel();
        long best = 0;
        for (long k = 1; k < s.K; ++k)
          if (zr[k] > zr[best]) best = k;
        res.indices[static_cast<std::size_t>(r * s.G + g)] = static_cast<std::int32_t>(best);
        if (straight_through)
          std::copy(codebook.value().data() + (g * s.K + best) * s.D,
                    codebook.value().data() + (g * s.K + best + 1) * s.D,
                    quant.data() + r * s.G * s.D + g * s.D);
      }
      if (!straight_through) {
        // soft forward: rows are the tempered mixture
        for (long r = 0; r < s.R; ++r) {
          double* zr = z.data() + r * s.K;
          for (long k = 0; k < s.K; ++k) zr[k] /= tau;
        }
        softmax_rows_inplace(z);
        Tensor mix({s.R, s.D});
        mix.mat(s.R, s.D).noalias() = z.mat(s.R, s.K) * eg;
        for (long r = 0; r < s.R; ++r)
          std::copy(mix.data() + r * s.D, mix.data() + (r + 1) * s.D,
                    quant.data() + r * s.G * s.D + g * s.D);
      }
    }
  }

  auto indices_copy = std::make_shared<std::vector<std::int32_t>>(res.indices);

  // Straight-through node: value is the hard codeword, backward follows the
  // soft (noisy, tempered) mixture.
  std::vector<ad::Var> parents = plain ? std::vector<ad::Var>{x, codebook, proj_w, proj_b}
                                       : std::vector<ad::Var>{x, codebook};
  res.quantized = ad::make_op(
      std::move(quant), parents,
      [x, codebook, proj_w, proj_b, cfg, s, tau, noise_on, call_seed, plain](ad::Node& n) mutable {
        Tensor xg({s.R, s.D}), z({s.R, s.K}), dist({s.R, s.K}), gout({s.R, s.D});
        Rng noise(call_seed);
        const bool need_x = x.requires_grad();
        double* gxp = need_x ? x.node()->ensure_grad().data() : nullptr;
        for (long g = 0; g < s.G; ++g) {
          gather_group(x.value(), g, s.D, xg);
          ConstMatMap eg(codebook.value().data() + g * s.K * s.D, s.K, s.D);
          if (plain)
            projection_logits(xg, ConstMatMap(proj_w.value().data() + g * s.K * s.D, s.K, s.D),
                              proj_b.value().data() + g * s.K, z);
          else
            distance_logits(xg, eg, cfg.alpha, dist, z);
          for (long r = 0; r < s.R; ++r) {
            double* zr = z.data() + r * s.K;
            if (noise_on)
              for (long k = 0; k < s.K; ++k) zr[k] += noise.gumbel();
            for (long k = 0; k < s.K; ++k) zr[k] /= tau;
          }
          softmax_rows_inplace(z);  // z now holds the noisy mu

          // gout rows for this group
          for (long r = 0; r < s.R; ++r)
            std::copy(n.grad.data() + r * s.G * s.D + g * s.D,
                      n.grad.data() + r * s.G * s.D + (g + 1) * s.D, gout.data() + r * s.D);

          if (codebook.requires_grad()) {
            MatMap ge(codebook.node()->ensure_grad().data() + g * s.K * s.D, s.K, s.D);
            ge.noalias() += z.mat(s.R, s.K).transpose() * gout.mat(s.R, s.D);
          }
          // gmu = gout * E^T, then through softmax and temperature
          Tensor gmu({s.R, s.K});
          gmu.mat(s.R, s.K).noalias() = gout.mat(s.R, s.D) * eg.transpose();
          softmax_backward_rows(z, gmu);
          gmu.flat() *= 1.0 / tau;

          if (plain) {
            if (proj_w.requires_grad())
              MatMap(proj_w.node()->ensure_grad().data() + g * s.K * s.D, s.K, s.D).noalias() +=
                  gmu.mat(s.R, s.K).transpose() * xg.mat(s.R, s.D);
            if (proj_b.requires_grad()) {
              double* gb = proj_b.node()->ensure_grad().data() + g * s.K;
              for (long k = 0; k < s.K; ++k)
                for (long r = 0; r < s.R; ++r) gb[k] += gmu.data()[r * s.K + k];
            }
            if (need_x) {
              Tensor gx({s.R, s.D});
              gx.mat(s.R, s.D).noalias() =
                  gmu.mat(s.R, s.K) *
                  ConstMatMap(proj_w.value().data() + g * s.K * s.D, s.K, s.D);
              for (long r = 0; r < s.R; ++r)
                for (long i = 0; i < s.D; ++i)
                  gxp[r * s.G * s.D + g * s.D + i] += gx.data()[r * s.D + i];
            }
          } else {
            Tensor gx({s.R, s.D});
            gx.set_zero();
            Tensor ge_local({s.K, s.D});
            distance_backward(xg, eg, dist, cfg.alpha, gmu, gx.mat(s.R, s.D),
                              ge_local.data(), 0);
            if (codebook.requires_grad())
              MatMap(codebook.node()->ensure_grad().data() + g * s.K * s.D, s.K, s.D) +=
                  ge_local.mat(s.K, s.D);
            if (need_x)
              for (long r = 0; r < s.R; ++r)
                for (long i = 0; i < s.D; ++i)
                  gxp[r * s.G * s.D + g * s.D + i] += gx.data()[r * s.D + i];
          }
        }
      });

  res.mean_soft = ad::make_op(
      std::move(msoft), parents,
      [x, codebook, proj_w, proj_b, cfg, s, plain](ad::Node& n) mutable {
        Tensor xg({s.R, s.D}), z({s.R, s.K}), dist({s.R, s.K});
        const bool need_x = x.requires_grad();
        double* gxp = need_x ? x.node()->ensure_grad().data() : nullptr;
        const double invR = 1.0 / static_cast<double>(s.R);
        for (long g = 0; g < s.G; ++g) {
          gather_group(x.value(), g, s.D, xg);
          ConstMatMap eg(codebook.value().data() + g * s.K * s.D, s.K, s.D);
          if (plain)
            projection_logits(xg, ConstMatMap(proj_w.value().data() + g * s.K * s.D, s.K, s.D),
                              proj_b.value().data() + g * s.K, z);
          else
            distance_logits(xg, eg, cfg.alpha, dist, z);
          softmax_rows_inplace(z);
          Tensor gmu({s.R, s.K});
          for (long r = 0; r < s.R; ++r)
            for (long k = 0; k < s.K; ++k)
              gmu.data()[r * s.K + k] = n.grad[g * s.K + k] * invR;
          softmax_backward_rows(z, gmu);
          if (plain) {
            if (proj_w.requires_grad())
              MatMap(proj_w.node()->ensure_grad().data() + g * s.K * s.D, s.K, s.D).noalias() +=
                  gmu.mat(s.R, s.K).transpose() * xg.mat(s.R, s.D);
            if (proj_b.requires_grad()) {
              double* gb = proj_b.node()->ensure_grad().data() + g * s.K;
              for (long k = 0; k < s.K; ++k)
                for (long r = 0; r < s.R; ++r) gb[k] += gmu.data()[r * s.K + k];
            }
            if (need_x) {
              Tensor gx({s.R, s.D});
              gx.mat(s.R, s.D).noalias() =
                  gmu.mat(s.R, s.K) *
                  ConstMatMap(proj_w.value().data() + g * s.K * s.D, s.K, s.D);
              for (long r = 0; r < s.R; ++r)
                for (long i = 0; i < s.D; ++i)
                  gxp[r * s.G * s.D + g * s.D + i] += gx.data()[r * s.D + i];
            }
          } else {
            Tensor gx({s.R, s.D});
            gx.set_zero();
            Tensor ge_local({s.K, s.D});
            distance_backward(xg, eg, dist, cfg.alpha, gmu, gx.mat(s.R, s.D), ge_local.data(), 0);
            if (codebook.requires_grad())
              MatMap(codebook.node()->ensure_grad().data() + g * s.K * s.D, s.K, s.D) +=
                  ge_local.mat(s.K, s.D);
            if (need_x)
              for (long r = 0; r < s.R; ++r)
                for (long i = 0; i < s.D; ++i)
                  gxp[r * s.G * s.D + g * s.D + i] += gx.data()[r * s.D + i];
          }
        }
      });

  res.indices = *indices_copy;
  return res;
}

Tensor vq_dequantize(const std::vector<std::int32_t>& indices, const Tensor& codebook,
                     const VqConfig& cfg) {
  cfg.validate();
  if (indices.size() % static_cast<std::size_t>(cfg.groups) != 0)
    throw format_error("dequantize: index count not a multiple of the group count");
  const long R = static_cast<long>(indices.size()) / cfg.groups;
  Tensor out({R, cfg.merged_dim()});
  for (long r = 0; r < R; ++r)
    for (long g = 0; g < cfg.groups; ++g) {
      const std::int32_t k = indices[static_cast<std::size_t>(r * cfg.groups + g)];
      if (k < 0 || k >= cfg.codewords) throw format_error("dequantize: index out of range");
      std::copy(codebook.data() + (g * cfg.codewords + k) * cfg.dim,
                codebook.data() + (g * cfg.codewords + k + 1) * cfg.dim,
                out.data() + r * cfg.merged_dim() + g * cfg.dim);
    }
  return out;
}

VqInferenceStats vq_inference_stats(const Tensor& x, const Tensor& codebook, const VqConfig& cfg,
                                    const Tensor* proj_w, const Tensor* proj_b) {
  const VqShapes s = check_vq_shapes(x, codebook, cfg);
  const bool plain = cfg.kind == VqConfig::Kind::kPlainGumbel;
  if (plain && (!proj_w || !proj_b)) throw usage_error("vq stats: missing projection");
  VqInferenceStats st;
  st.indices.assign(static_cast<std::size_t>(s.R * s.G), 0);
  st.confidence.assign(static_cast<std::size_t>(s.R * s.G), 0.0);
  Tensor xg({s.R, s.D}), z({s.R, s.K}), dist({s.R, s.K});
  for (long g = 0; g < s.G; ++g) {
    gather_group(x, g, s.D, xg);
    ConstMatMap eg(codebook.data() + g * s.K * s.D, s.K, s.D);
    if (plain)
      projection_logits(xg, ConstMatMap(proj_w->data() + g * s.K * s.D, s.K, s.D),
                        proj_b->data() + g * s.K, z);
    else
      distance_logits(xg, eg, cfg.alpha, dist, z);
    softmax_rows_inplace(z);
    for (long r = 0; r < s.R; ++r) {
      const double* p = z.data() + r * s.K;
      long best = 0;
      for (long k = 1; k < s.K; ++k)
        if (p[k] > p[best]) best = k;
      st.indices[static_cast<std::size_t>(r * s.G + g)] = static_cast<std::int32_t>(best);
      st.confidence[static_cast<std::size_t>(r * s.G + g)] = p[best];
    }
  }
  return st;
}

ad::Var soft_entropy_total_bits(const ad::Var& mean_soft) {
  if (mean_soft.size() == 0) throw data_error("soft entropy: empty distribution");
  ad::Var safe = ad::clamp_min(mean_soft, 1e-300);
  ad::Var plogp = ad::mul(safe, ad::log_(safe));
  return ad::mul_scalar(ad::sum_all(plogp), -1.0 / std::log(2.0));
}

Tensor soft_entropy_bits_per_group(const Tensor& mean_soft) {
  if (mean_soft.rank() != 2) throw TensorError("per-group entropy expects (G,K)");
  const long G = mean_soft.dim(0), K = mean_soft.dim(1);
  Tensor h({G});
  for (long g = 0; g < G; ++g) {
    double acc = 0.0;
    for (long k = 0; k < K; ++k) {
      const double p = mean_soft[g * K + k];
      if (p > 0) acc -= p * std::log2(p);
    }
    h[g] = acc;
  }
  return h;
}

ad::Var rate_loss(const ad::Var& entropy_total_bits, double target_bits) {
  if (entropy_total_bits.size() != 1) throw TensorError("rate_loss: entropy must be scalar");
  return ad::abs_(ad::add_scalar(entropy_total_bits, -target_bits));
}

double hard_assignment_entropy_bits(const std::vector<std::int32_t>& indices, long groups,
                                    long codewords) {
  if (indices.empty() || indices.size() % static_cast<std::size_t>(groups) != 0)
    throw data_error("hard entropy: bad index stream");
  const long R = static_cast<long>(indices.size()) / groups;
  double total = 0.0;
  std::vector<double> hist(static_cast<std::size_t>(codewords));
  for (long g = 0; g < groups; ++g) {
    std::fill(hist.begin(), hist.end(), 0.0);
    for (long r = 0; r < R; ++r) hist[static_cast<std::size_t>(indices[r * groups + g])] += 1.0;
    for (long k = 0; k < codewords; ++k) {
      if (hist[k] > 0) {
        const double p = hist[k] / R;
        total -= p * std::log2(p);
      }
    }
  }
  return total;
}

Tensor init_codebook_kmeans(const Tensor& samples, const VqConfig& cfg, long lloyd_iters,
                            Rng& rng) {
  const long N = samples.dim(0), G = cfg.groups, K = cfg.codewords, D = cfg.dim;
  if (samples.rank() != 2 || samples.dim(1) != cfg.merged_dim())
    throw TensorError("kmeans init: samples must be (N, G*D)");
  if (N < 1) throw data_error("kmeans init: no samples");
  Tensor cb({G, K, D});
  std::vector<double> best_d2(static_cast<std::size_t>(N));
  for (long g = 0; g < G; ++g) {
    double* e = cb.data() + g * K * D;
    auto sample_at = [&](long r, long i) { return samples[r * cfg.merged_dim() + g * D + i]; };
    // k-means++ seeding
    long first = static_cast<long>(rng.uniform_index(static_cast<std::uint64_t>(N)));
    for (long i = 0; i < D; ++i) e[i] = sample_at(first, i);
    for (long r = 0; r < N; ++r) {
      double acc = 0.0;
      for (long i = 0; i < D; ++i) {
        const double diff = sample_at(r, i) - e[i];
        acc += diff * diff;
      }
      best_d2[static_cast<std::size_t>(r)] = acc;
    }
    for (long k = 1; k < K; ++k) {
      double total = 0.0;
      for (long r = 0; r < N; ++r) total += best_d2[static_cast<std::size_t>(r)];
      long pick;
      if (total <= 1e-30 || N <= k) {
        // duplicates or fewer samples than codewords: jitter a random sample
        pick = static_cast<long>(rng.uniform_index(static_cast<std::uint64_t>(N)));
        for (long i = 0; i < D; ++i)
          e[k * D + i] = sample_at(pick, i) + 1e-3 * rng.normal();
      } else {
        double u = rng.uniform() * total;
        pick = N - 1;
        for (long r = 0; r < N; ++r) {
          u -= best_d2[static_cast<std::size_t>(r)];
          if (u <= 0) {
            pick = r;
            break;
          }
        }
        for (long i = 0; i < D; ++i) e[k * D + i] = sample_at(pick, i);
      }
      for (long r = 0; r < N; ++r) {
        double acc = 0.0;
        for (long i = 0; i < D; ++i) {
          const double diff = sample_at(r, i) - e[k * D + i];
          acc += diff * diff;
        }
        if (acc < best_d2[static_cast<std::size_t>(r)]) best_d2[static_cast<std::size_t>(r)] = acc;
      }
    }
    // Lloyd refinement
    std::vector<long> assign(static_cast<std::size_t>(N));
    std::vector<double> sums(static_cast<std::size_t>(K * D));
    std::vector<long> counts(static_cast<std::size_t>(K));
    for (long it = 0; it < lloyd_iters; ++it) {
      for (long r = 0; r < N; ++r) {
        long best = 0;
        double bd = 1e300;
        for (long k = 0; k < K; ++k) {
          double acc = 0.0;
          for (long i = 0; i < D; ++i) {
            const double diff = sample_at(r, i) - e[k * D + i];
            acc += diff * diff;
          }
          if (acc < bd) {
            bd = acc;
            best = k;
          }
        }
        assign[static_cast<std::size_t>(r)] = best;
      }
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0L);
      for (long r = 0; r < N; ++r) {
        const long k = assign[static_cast<std::size_t>(r)];
        ++counts[static_cast<std::size_t>(k)];
        for (long i = 0; i < D; ++i) sums[static_cast<std::size_t>(k * D + i)] += sample_at(r, i);
      }
      for (long k = 0; k < K; ++k)
        if (counts[static_cast<std::size_t>(k)] > 0)
          for (long i = 0; i < D; ++i)
            e[k * D + i] = sums[static_cast<std::size_t>(k * D + i)] /
                           static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
  }
  return cb;
}

}  // namespace tfcodec
