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

#ifndef TFCODEC_LOOP_HPP_
#define TFCODEC_LOOP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tfcodec/layers.hpp"
#include "tfcodec/vq.hpp"

namespace tfcodec {

struct PredictorConfig {
  enum class Kind { kConv, kAdaptive, kNone } kind = Kind::kConv;
  long context_frames = 7;  // N merged frames = 280 ms

  void validate() const;
  static Kind kind_from_string(const std::string& s);
  static std::string kind_to_string(Kind k);
};

// Rolling window of the last N reconstructed merged latent frames,
// oldest-first. Missing (cold start) frames are zeros.
struct LoopState {
  Tensor history;  // (N, C)
  long frame_index = 0;

  LoopState(long n, long channels) : history({n, channels}) {}
  long context() const { return history.dim(0); }
  long channels() const { return history.dim(1); }
  void push(const double* frame);
};

// Inference-side quantizer handles (codebook plus plain-Gumbel projection
// when that ablation is active).
struct QuantizerRefs {
  const Tensor* codebook = nullptr;
  VqConfig cfg;
  const Tensor* proj_w = nullptr;
  const Tensor* proj_b = nullptr;
};

// Closed-loop latent machinery: predictor, extractor, synthesizer, and the
// frame-sequential encode/decode drivers. All sequence tensors here are at
// the merged-frame (40 ms) rate.
class PredictiveLoop {
 public:
  PredictiveLoop() = default;
  PredictiveLoop(ParamRegistry& reg, const std::string& prefix, const PredictorConfig& pc,
                 long merged_dim, Rng& rng);

  const PredictorConfig& predictor_config() const { return pc_; }
  long merged_dim() const { return channels_; }

  // --- training-side (parallel over time) ---
  // context: previous-iteration reconstructed frames (B,C,Tm); treated as
  // constants, gradients reach only predictor parameters.
  ad::Var predict_sequence(const Tensor& context) const;
  ad::Var extract(const ad::Var& xr, const ad::Var& xp, bool training) const;
  ad::Var synthesize(const ad::Var& xn_hat, const ad::Var& xp, bool training,
                     bool update_running = true) const;

  // --- inference-side (sequential, frozen statistics) ---
  LoopState make_state() const { return LoopState(pc_.context_frames, channels_); }
  // Prediction from the current history (zero-filled when cold).
  Tensor predict_step(const LoopState& state) const;

  struct EncodeOut {
    std::vector<std::int32_t> indices;  // Tm * G
    Tensor recon;                       // (C, Tm) reconstructed merged latents
  };
  EncodeOut run_encode_loop(const Tensor& xr_merged, const QuantizerRefs& q) const;

  // received_groups: optional per (frame, group) arrival flags (Tm*G);
  // missing groups dequantize to zero. Throws on out-of-range indices.
  Tensor run_decode_loop(const std::vector<std::int32_t>& indices, const QuantizerRefs& q,
                         const std::vector<std::uint8_t>* received_groups = nullptr) const;

 private:
  Tensor conv_predict_window(const Tensor& window) const;      // (N,C) -> (C)
  Tensor adaptive_predict_window(const Tensor& window) const;  // (N,C) -> (C)
  Tensor fuse_step(const Conv1dLayer& pw, const BatchNormLayer& bn, const PReluLayer& act,
                   const Tensor& a, const Tensor& b) const;  // frozen-stats pointwise fuse

  PredictorConfig pc_;
  long channels_ = 0;
  Conv1dLayer pred_c1_, pred_c2_;
  PReluLayer pred_a1_, pred_a2_;
  Conv1dLayer extract_pw_, synth_pw_;
  BatchNormLayer extract_bn_, synth_bn_;
  PReluLayer extract_act_, synth_act_;
};

}  // namespace tfcodec

#endif  // TFCODEC_LOOP_HPP_
