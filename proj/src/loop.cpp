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

#include "tfcodec/loop.hpp"

#include <cmath>

#include "tfcodec/detmath.hpp"
#include "tfcodec/errors.hpp"

namespace tfcodec {

void PredictorConfig::validate() const {
  if (context_frames < 2) throw usage_error("predictor: context must span at least 2 frames");
}

PredictorConfig::Kind PredictorConfig::kind_from_string(const std::string& s) {
  if (s == "conv") return Kind::kConv;
  if (s == "adaptive") return Kind::kAdaptive;
  if (s == "none") return Kind::kNone;
  throw usage_error("unknown predictor kind: " + s);
}

std::string PredictorConfig::kind_to_string(Kind k) {
  switch (k) {
    case Kind::kConv: return "conv";
    case Kind::kAdaptive: return "adaptive";
    case Kind::kNone: return "none";
  }
  return "conv";
}

void LoopState::push(const double* frame) {
  const long N = history.dim(0), C = history.dim(1);
  for (long i = 0; i < (N - 1) * C; ++i) history[i] = history[i + C];
  std::copy(frame, frame + C, history.data() + (N - 1) * C);
  ++frame_index;
}

PredictiveLoop::PredictiveLoop(ParamRegistry& reg, const std::string& prefix,
                               const PredictorConfig& pc, long merged_dim, Rng& rng)
    : pc_(pc), channels_(merged_dim) {
  pc_.validate();
  if (pc_.kind == PredictorConfig::Kind::kConv) {
    // two causal k=4 layers: receptive field 7 merged frames (280 ms)
    pred_c1_ = Conv1dLayer(reg, prefix + ".pred.c1", merged_dim, merged_dim, 4, 1, 1, rng);
    pred_a1_ = PReluLayer(reg, prefix + ".pred.a1", merged_dim);
    pred_c2_ = Conv1dLayer(reg, prefix + ".pred.c2", merged_dim, merged_dim, 4, 1, 1, rng);
    pred_a2_ = PReluLayer(reg, prefix + ".pred.a2", merged_dim);
  }
  extract_pw_ = Conv1dLayer(reg, prefix + ".extract.pw", 2 * merged_dim, merged_dim, 1, 1, 1, rng);
  extract_bn_ = BatchNormLayer(reg, prefix + ".extract.bn", merged_dim);
  extract_act_ = PReluLayer(reg, prefix + ".extract.act", merged_dim);
  synth_pw_ = Conv1dLayer(reg, prefix + ".synth.pw", 2 * merged_dim, merged_dim, 1, 1, 1, rng);
  synth_bn_ = BatchNormLayer(reg, prefix + ".synth.bn", merged_dim);
  synth_act_ = PReluLayer(reg, prefix + ".synth.act", merged_dim);
}

ad::Var PredictiveLoop::predict_sequence(const Tensor& context) const {
  if (context.rank() != 3 || context.dim(1) != channels_)
    throw TensorError("predict_sequence: context must be (B,C,Tm)");
  const long B = context.dim(0), C = channels_, Tm = context.dim(2);
  switch (pc_.kind) {
    case PredictorConfig::Kind::kNone:
      return ad::Var::constant(Tensor({B, C, Tm}));
    case PredictorConfig::Kind::kConv: {
      // Missing history frames are zero INPUTS, not implicit conv padding:
      // prepend explicit zero frames covering the stack's receptive field so
      // early intermediate activations are computed, not zero-filled.
      const long pad = 6;  // (4-1) + (4-1)
      Tensor padded({B, C, Tm + pad});
      for (long b = 0; b < B; ++b)
        for (long c = 0; c < C; ++c)
          for (long t = 0; t < Tm - 1; ++t)  // shifted by one: frame t-1
            padded[(b * C + c) * (Tm + pad) + pad + 1 + t] = context[(b * C + c) * Tm + t];
      ad::Var h = ad::Var::constant(padded);
      h = pred_a1_(pred_c1_(h));
      h = pred_a2_(pred_c2_(h));
      return ad::slice_last(h, pad, Tm);
    }
    case PredictorConfig::Kind::kAdaptive: {
      Tensor out({B, C, Tm});
      const long N = pc_.context_frames;
      Tensor window({N, C});
      for (long b = 0; b < B; ++b)
        for (long t = 2; t < Tm; ++t) {  // <2 frames of history: zero prediction
          // window rows oldest-first: frames t-N .. t-1 (zeros out of range)
          for (long j = 0; j < N; ++j) {
            const long src = t - N + j;
            for (long c = 0; c < C; ++c)
              window[j * C + c] =
                  src >= 0 ? context[(b * C + c) * Tm + src] : 0.0;
          }
          Tensor p = adaptive_predict_window(window);
          for (long c = 0; c < C; ++c) out[(b * C + c) * Tm + t] = p[c];
        }
      return ad::Var::constant(out);
    }
  }
  throw internal_error("unreachable predictor kind");
}

ad::Var PredictiveLoop::extract(const ad::Var& xr, const ad::Var& xp, bool training) const {
  ad::Var fused = extract_pw_(ad::concat_channels(xr, xp));
  return extract_act_(extract_bn_(fused, training));
}

ad::Var PredictiveLoop::synthesize(const ad::Var& xn_hat, const ad::Var& xp, bool training,
                                   bool update_running) const {
  ad::Var fused = synth_pw_(ad::concat_channels(xn_hat, xp));
  return synth_act_(synth_bn_(fused, training, update_running));
}

Tensor PredictiveLoop::conv_predict_window(const Tensor& window) const {
  const long N = window.dim(0), C = window.dim(1);
  // run the two causal convs over the window, keep the last position
  Tensor seq({1, C, N});
  for (long j = 0; j < N; ++j)
    for (long c = 0; c < C; ++c) seq[c * N + j] = window[j * C + c];
  ad::Var h = ad::Var::constant(seq);
  h = pred_a1_(pred_c1_(h));
  h = pred_a2_(pred_c2_(h));
  Tensor out({C});
  for (long c = 0; c < C; ++c) out[c] = h.value()[c * N + (N - 1)];
  return out;
}

Tensor PredictiveLoop::adaptive_predict_window(const Tensor& window) const {
  const long N = window.dim(0), C = window.dim(1);
  Tensor out({C});
  // rows: window[N-1] = frame t-1, ..., window[0] = frame t-N
  const double* q = window.data() + (N - 1) * C;  // query: frame t-1
  // keys: frames t-2..t-N; values: frames t-1..t-(N-1)
  std::vector<double> logits(static_cast<std::size_t>(N - 1));
  const double scale = 1.0 / std::sqrt(static_cast<double>(C));
  double mx = -1e300;
  for (long j = 0; j < N - 1; ++j) {
    const double* key = window.data() + (N - 2 - j) * C;  // frame t-2-j
    double dot = 0.0;
    for (long c = 0; c < C; ++c) dot += q[c] * key[c];
    logits[static_cast<std::size_t>(j)] = dot * scale;
    mx = std::max(mx, logits[static_cast<std::size_t>(j)]);
  }
  double denom = 0.0;
  for (long j = 0; j < N - 1; ++j) {
    logits[static_cast<std::size_t>(j)] = detmath::exp(logits[static_cast<std::size_t>(j)] - mx);
    denom += logits[static_cast<std::size_t>(j)];
  }
  for (long j = 0; j < N - 1; ++j) {
    const double w = logits[static_cast<std::size_t>(j)] / denom;
    const double* value = window.data() + (N - 1 - j) * C;  // frame t-1-j
    for (long c = 0; c < C; ++c) out[c] += w * value[c];
  }
  return out;
}

Tensor PredictiveLoop::predict_step(const LoopState& state) const {
  if (state.channels() != channels_) throw TensorError("predict_step: channel mismatch");
  switch (pc_.kind) {
    case PredictorConfig::Kind::kNone:
      return Tensor({channels_});
    case PredictorConfig::Kind::kConv:
      return conv_predict_window(state.history);
    case PredictorConfig::Kind::kAdaptive: {
      if (state.frame_index < 2) return Tensor({channels_});  // cold fall-back
      return adaptive_predict_window(state.history);
    }
  }
  throw internal_error("unreachable predictor kind");
}

Tensor PredictiveLoop::fuse_step(const Conv1dLayer& pw, const BatchNormLayer& bn,
                                 const PReluLayer& act, const Tensor& a, const Tensor& b) const {
  const long C = channels_;
  Tensor in({1, 2 * C, 1});
  std::copy(a.data(), a.data() + C, in.data());
  std::copy(b.data(), b.data() + C, in.data() + C);
  ad::Var h = pw(ad::Var::constant(in));
  h = act(ad::batch_norm(h, bn.gamma, bn.beta, bn.mean, bn.var, /*training=*/false));
  Tensor out({C});
  std::copy(h.value().data(), h.value().data() + C, out.data());
  return out;
}

PredictiveLoop::EncodeOut PredictiveLoop::run_encode_loop(const Tensor& xr_merged,
                                                          const QuantizerRefs& q) const {
  if (xr_merged.rank() != 2 || xr_merged.dim(0) != channels_)
    throw TensorError("encode loop: input must be (C,Tm)");
  if (q.cfg.merged_dim() != channels_) throw usage_error("encode loop: quantizer dim mismatch");
  const long C = channels_, Tm = xr_merged.dim(1), G = q.cfg.groups, D = q.cfg.dim;

  EncodeOut out;
  out.indices.reserve(static_cast<std::size_t>(Tm * G));
  out.recon = Tensor({C, Tm});
  LoopState state = make_state();
  Tensor xr_t({C}), xn_hat({C});
  for (long t = 0; t < Tm; ++t) {
    for (long c = 0; c < C; ++c) xr_t[c] = xr_merged[c * Tm + t];
    Tensor xp = predict_step(state);
    Tensor xn = fuse_step(extract_pw_, extract_bn_, extract_act_, xr_t, xp);
    // nearest codeword per group
    for (long g = 0; g < G; ++g) {
      const double* xg = xn.data() + g * D;
      long best = 0;
      double bd = 1e300;
      for (long k = 0; k < q.cfg.codewords; ++k) {
        const double* e = q.codebook->data() + (g * q.cfg.codewords + k) * D;
        double acc = 0.0;
        for (long i = 0; i < D; ++i) acc += (xg[i] - e[i]) * (xg[i] - e[i]);
        if (acc < bd) {
          bd = acc;
          best = k;
        }
      }
      out.indices.push_back(static_cast<std::int32_t>(best));
      std::copy(q.codebook->data() + (g * q.cfg.codewords + best) * D,
                q.codebook->data() + (g * q.cfg.codewords + best + 1) * D, xn_hat.data() + g * D);
    }
    Tensor xr_hat = fuse_step(synth_pw_, synth_bn_, synth_act_, xn_hat, xp);
    for (long c = 0; c < C; ++c) out.recon[c * Tm + t] = xr_hat[c];
    state.push(xr_hat.data());
  }
  return out;
}

Tensor PredictiveLoop::run_decode_loop(const std::vector<std::int32_t>& indices,
                                       const QuantizerRefs& q,
                                       const std::vector<std::uint8_t>* received_groups) const {
  if (q.cfg.merged_dim() != channels_) throw usage_error("decode loop: quantizer dim mismatch");
  const long G = q.cfg.groups, D = q.cfg.dim, C = channels_;
  if (indices.size() % static_cast<std::size_t>(G) != 0)
    throw format_error("decode loop: index count not a multiple of the group count");
  const long Tm = static_cast<long>(indices.size()) / G;
  if (received_groups && received_groups->size() != indices.size())
    throw usage_error("decode loop: arrival mask size mismatch");

  Tensor recon({C, Tm});
  LoopState state = make_state();
  Tensor xn_hat({C});
  for (long t = 0; t < Tm; ++t) {
    Tensor xp = predict_step(state);
    for (long g = 0; g < G; ++g) {
      const std::size_t pos = static_cast<std::size_t>(t * G + g);
      const bool got = !received_groups || (*received_groups)[pos] != 0;
      if (!got) {
        std::fill(xn_hat.data() + g * D, xn_hat.data() + (g + 1) * D, 0.0);
        continue;
      }
      const std::int32_t k = indices[pos];
      if (k < 0 || k >= q.cfg.codewords) throw format_error("decode loop: index out of range");
      std::copy(q.codebook->data() + (g * q.cfg.codewords + k) * D,
                q.codebook->data() + (g * q.cfg.codewords + k + 1) * D, xn_hat.data() + g * D);
    }
    Tensor xr_hat = fuse_step(synth_pw_, synth_bn_, synth_act_, xn_hat, xp);
    for (long c = 0; c < C; ++c) recon[c * Tm + t] = xr_hat[c];
    state.push(xr_hat.data());
  }
  return recon;
}

}  // namespace tfcodec
