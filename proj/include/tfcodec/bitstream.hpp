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

#ifndef TFCODEC_BITSTREAM_HPP_
#define TFCODEC_BITSTREAM_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tfcodec/huffman.hpp"

namespace tfcodec {

// .tfc container. Layout documented in docs/bitstream.md; every multi-byte
// field is little-endian, bit packing is MSB-first within bytes. Each 40 ms
// superframe carries two independently byte-aligned packets (group halves),
// so losing one never corrupts its sibling.
struct StreamHeader {
  static constexpr char kMagic[5] = "TFCB";
  static constexpr std::uint16_t kVersion = 1;

  std::string bitrate_mode = "3";  // "0.512","1","3","6" or "custom"
  std::uint32_t sample_rate = 16000;
  std::uint16_t groups = 0;
  std::uint16_t codewords = 0;
  std::uint16_t latent_dim = 0;      // C_d
  std::uint32_t num_superframes = 0;
  std::uint8_t pad_frames = 0;       // repeated tail frames added by merging
  std::uint64_t codebook_hash = 0;
  std::vector<HuffmanTable> tables;  // one per group

  long packet_a_groups() const { return groups / 2; }
  long packet_b_groups() const { return groups - groups / 2; }
};

// indices: num_superframes * groups hard indices, frame-major.
std::vector<std::uint8_t> encode_stream(const std::vector<std::int32_t>& indices,
                                        const StreamHeader& header);

struct PacketizedStream {
  StreamHeader header;
  // two raw packet payloads per superframe
  std::vector<std::array<std::vector<std::uint8_t>, 2>> frames;
  bool truncated = false;
};

// Parses the container without entropy-decoding. Throws on bad magic or
// malformed header; with allow_truncated the complete prefix is returned and
// `truncated` set, otherwise truncation throws naming the last complete
// superframe.
PacketizedStream parse_packets(const std::vector<std::uint8_t>& bytes,
                               bool allow_truncated = false);

// Entropy-decodes one packet payload into its group indices
// (second_half=false: groups [0,G/2), true: [G/2,G)).
std::vector<std::int32_t> decode_packet(const std::vector<std::uint8_t>& payload,
                                        const StreamHeader& header, bool second_half);

struct DecodedStream {
  StreamHeader header;
  std::vector<std::int32_t> indices;
  std::vector<long> bits_per_superframe;  // byte-aligned payload bits (both packets)
  bool truncated = false;
};

DecodedStream decode_stream(const std::vector<std::uint8_t>& bytes, bool allow_truncated = false);

struct BitrateStats {
  double avg_kbps = 0;
  double mean_bits = 0, std_bits = 0;
  long min_bits = 0, max_bits = 0;
};

// kbps = mean bits per superframe / frame_seconds / 1000.
BitrateStats measure_bitrate(const std::vector<long>& bits_per_superframe,
                             double frame_seconds = 0.040);

// Huffman tables from per-group symbol counts (counts[g][k]).
std::vector<HuffmanTable> build_tables(const std::vector<std::vector<std::uint64_t>>& counts);

}  // namespace tfcodec

#endif  // TFCODEC_BITSTREAM_HPP_
