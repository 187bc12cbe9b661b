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

#ifndef TFCODEC_VQ_HPP_
#define TFCODEC_VQ_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tfcodec/autodiff.hpp"
#include "tfcodec/rng.hpp"

namespace tfcodec {

// Codebook shape per bitrate mode. Keys: "0.512", "1", "3", "6" (kbps).
struct CodebookShape {
  long groups;
  long codewords;
};
CodebookShape codebook_config(const std::string& bitrate_mode);
double bitrate_mode_kbps(const std::string& bitrate_mode);
// Entropy target per 40 ms superframe: kbps * 40 bits.
double rate_target_bits(const std::string& bitrate_mode);

struct VqConfig {
  long groups = 16;
  long codewords = 1024;
  long dim = 8;  // per-group codeword dimension = merged_dim / groups
  double alpha = 5.0;
  enum class Kind { kDistanceGumbel, kPlainGumbel } kind = Kind::kDistanceGumbel;

  long merged_dim() const { return groups * dim; }
  void validate() const;
};

// Four consecutive latent frames stacked channel-wise (frame-major: merged
// channel j*C+c holds frame 4t+j, channel c). T not divisible by 4 is padded
// by repeating the final frame; `pad_frames` reports how many were added.
inline constexpr long kMergeFactor = 4;

struct MergedFrames {
  ad::Var merged;  // (B, 4C, ceil(T/4))
  long pad_frames = 0;
};
MergedFrames merge_frames(const ad::Var& x);
ad::Var split_frames(const ad::Var& merged, long original_t);
Tensor merge_frames_plain(const Tensor& x, long* pad_frames = nullptr);
Tensor split_frames_plain(const Tensor& merged, long original_t);

// l2 distances from one vector to every codeword of one group (K,D).
Tensor vq_distances(const Tensor& x, const Tensor& group_codebook);

struct QuantizeResult {
  ad::Var quantized;               // (R, G*D): straight-through codeword rows
  ad::Var mean_soft;               // (G, K): batch-mean Softmax(z), no noise/temperature
  std::vector<std::int32_t> indices;  // R*G hard indices
};

// Distance-Gumbel-Softmax group quantization of row vectors x (R, G*D).
// Forward emits the argmax codeword; backward follows the soft assignment.
// For the plain-Gumbel ablation, logits come from a linear projection
// (proj_w (G,K,D), proj_b (G,K)) instead of distances.
// straight_through=false makes the forward emit the soft mixture itself
// (same backward); that variant is differentiable end to end and exists so
// the shared backward can be checked against finite differences.
QuantizeResult vq_quantize(const ad::Var& x, const ad::Var& codebook, const VqConfig& cfg,
                           double tau, bool noise_on, Rng* noise_rng,
                           const ad::Var& proj_w = {}, const ad::Var& proj_b = {},
                           bool straight_through = true);

// Codeword lookup for received indices (no gradient).
Tensor vq_dequantize(const std::vector<std::int32_t>& indices, const Tensor& codebook,
                     const VqConfig& cfg);

// Noise-free analysis pass: hard indices and the winning Softmax(z)
// probability per (row, group).
struct VqInferenceStats {
  std::vector<std::int32_t> indices;  // R*G
  std::vector<double> confidence;     // R*G, max_k Softmax(z)
};
VqInferenceStats vq_inference_stats(const Tensor& x, const Tensor& codebook, const VqConfig& cfg,
                                    const Tensor* proj_w = nullptr,
                                    const Tensor* proj_b = nullptr);

// Soft entropy in bits: H(mean_soft_g) = -sum_k mu_k log2 mu_k, summed over
// groups. Per-group values available through the Tensor overload.
ad::Var soft_entropy_total_bits(const ad::Var& mean_soft);
Tensor soft_entropy_bits_per_group(const Tensor& mean_soft);

// |target - H| with zero subgradient at equality.
ad::Var rate_loss(const ad::Var& entropy_total_bits, double target_bits);

// Empirical entropy (bits) of hard assignments, summed over groups.
double hard_assignment_entropy_bits(const std::vector<std::int32_t>& indices, long groups,
                                    long codewords);

// k-means++ seeding plus a few Lloyd iterations, per group.
// samples: (N, G*D) rows. Returns (G, K, D).
Tensor init_codebook_kmeans(const Tensor& samples, const VqConfig& cfg, long lloyd_iters,
                            Rng& rng);

}  // namespace tfcodec

#endif  // TFCODEC_VQ_HPP_
