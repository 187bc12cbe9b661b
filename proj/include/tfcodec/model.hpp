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

#ifndef TFCODEC_MODEL_HPP_
#define TFCODEC_MODEL_HPP_

#include <memory>
#include <string>
#include <vector>

#include "tfcodec/channel.hpp"
#include "tfcodec/loop.hpp"
#include "tfcodec/losses.hpp"
#include "tfcodec/net_blocks.hpp"
#include "tfcodec/wav.hpp"

namespace tfcodec {

// Ablation switches (CLI: --predictor/--quantizer/--compression).
struct AblationConfig {
  PredictorConfig::Kind predictor = PredictorConfig::Kind::kConv;
  VqConfig::Kind quantizer = VqConfig::Kind::kDistanceGumbel;
  bool learnable_compression = true;
  double fixed_power = 0.3;
};

struct CodecConfig {
  NetConfig net;
  PredictorConfig predictor;
  AblationConfig ablation;
  std::string bitrate_mode = "3";
  // only consulted when bitrate_mode == "custom"
  long custom_groups = 0;
  long custom_codewords = 0;
  double custom_kbps = 0.0;
  double alpha = 5.0;
  double p_init = 0.5;
  std::uint64_t seed = 1;

  CodebookShape codebook_shape() const;
  double target_bits_per_superframe() const;
  VqConfig vq_config() const;
  long merged_dim() const { return kMergeFactor * net.latent_dim; }
  void validate() const;
};

CodecConfig desk_codec_config();

struct ComponentCounts {
  long encoder = 0, decoder = 0, predictive_loop = 0, quantizer = 0, total = 0;
};

class CodecModel {
 public:
  explicit CodecModel(const CodecConfig& config);

  CodecConfig cfg;
  ParamRegistry reg;
  Encoder encoder;
  Decoder decoder;
  PredictiveLoop loop;
  ad::Var codebook;          // (G,K,D)
  ad::Var proj_w, proj_b;    // plain-Gumbel projection (that ablation only)
  ad::Var p_logit;           // learnable compression: p = sigmoid(p_logit)

  ad::Var power() const;     // scalar Var in (0,1]
  double power_value() const;
  QuantizerRefs quantizer_refs() const;
  std::uint64_t codebook_hash() const;
  ComponentCounts parameter_counts() const;

  void set_codebook(const Tensor& cb);

  // ---- training forward (parallel over frames via replay context) ----
  struct TrainForward {
    ad::Var xhat;             // reconstructed waveform (B,L)
    ad::Var xr_merged;        // encoder latents, merged (B,Cm,Tm)
    ad::Var prediction;       // the prediction used for the pred-loss term
    ad::Var mean_soft;        // (G,K)
    std::vector<std::int32_t> indices;  // B*Tm*G (row-major over b,t)
    Tensor clean_recon;       // detached clean X^R_hat (B,Cm,Tm) for the replay store
    Tensor decoder_recon;     // detached decoder-side recon (differs under loss)
    long frames_t = 0;
  };
  // context/decoder_context: previous-iteration reconstructions (B,Cm,Tm).
  // arrival: optional per (b, t, group) flags for error-aware training; the
  // decoder side then consumes zero-filled groups and its own context.
  TrainForward forward_train(const Tensor& waves, const Tensor& context, double tau, Rng& noise,
                             const std::vector<std::uint8_t>* arrival = nullptr,
                             const Tensor* decoder_context = nullptr);

  // ---- inference ----
  struct Encoded {
    std::vector<std::int32_t> indices;  // Tm*G
    Tensor recon_merged;                // (Cm,Tm) encoder-side reconstruction
    long frames_t = 0;                  // latent frame count before merging
    long pad_frames = 0;
  };
  Encoded encode_wave(const Waveform& w) const;

  // arrival: optional per (frame,group) flags (lost groups are zero-filled).
  Waveform decode_indices(const std::vector<std::int32_t>& indices, long frames_t,
                          const std::vector<std::uint8_t>* arrival = nullptr) const;
  // Convenience: full lossy decode of a received stream.
  Waveform decode_received_stream(const ReceivedStream& rs) const;

  // Latent sequence (Cm,Tm) of the encoder-side reconstruction for a wave;
  // exported for golden-vector tests.
  Tensor encode_recon_latents(const Waveform& w) const { return encode_wave(w).recon_merged; }

 private:
  ad::Var encode_spec(const ad::Var& waves, bool training) const;  // (B,L)->(B,Cd,T)
  Rng init_rng_;
};

// ---- model artifact (.tfcm) ----
// Self-contained container: JSON manifest (config, learned power, variant
// flags, codebook hash) plus named float32 tensors for every parameter and
// buffer, and the per-group Huffman code lengths.
void save_artifact(const std::string& path, CodecModel& model,
                   const std::vector<HuffmanTable>& tables, const std::string& notes = "");

struct LoadedArtifact {
  std::unique_ptr<CodecModel> model;
  std::vector<HuffmanTable> tables;
  std::uint64_t codebook_hash = 0;
  std::string manifest_json;
};
LoadedArtifact load_artifact(const std::string& path);

// Stream header matching this model + tables.
StreamHeader make_stream_header(const CodecModel& model, const std::vector<HuffmanTable>& tables,
                                std::uint32_t num_superframes, std::uint8_t pad_frames);

// Ablation variants: same training harness, flags recorded in the manifest.
CodecConfig build_variant(const CodecConfig& base, const AblationConfig& ab);

}  // namespace tfcodec

#endif  // TFCODEC_MODEL_HPP_
