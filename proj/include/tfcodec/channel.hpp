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

#ifndef TFCODEC_CHANNEL_HPP_
#define TFCODEC_CHANNEL_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tfcodec/bitstream.hpp"

namespace tfcodec {

// Three-state Markov channel (good / degraded / burst) with per-state loss
// probabilities. Defaults approximate a WLAN-like pattern with mean dwell
// times of 500 / 50 / 6 packets; all of it is configuration, not constants.
struct Markov3Params {
  std::array<std::array<double, 3>, 3> transition{{{0.998, 0.0015, 0.0005},
                                                   {0.015, 0.98, 0.005},
                                                   {0.05, 7.0 / 60.0, 5.0 / 6.0}}};
  std::array<double, 3> loss_prob{0.01, 0.3, 0.9};

  void validate() const;
  double mean_dwell(int state) const { return 1.0 / (1.0 - transition[state][state]); }
};

struct LossPattern {
  std::vector<std::uint8_t> lost;  // one flag per packet, 1 = lost
  std::string kind = "iid";        // "iid", "markov3" or "file"
  double rate = 0.0;               // iid parameter
  std::uint64_t seed = 0;

  long packets() const { return static_cast<long>(lost.size()); }
  double loss_rate() const;
};

// Packet i is lost iff u_i < rate with u_i drawn once from the seed; the
// same seed therefore yields nested loss sets across rates, which keeps
// degradation comparisons monotone.
LossPattern generate_iid_pattern(double rate, long num_packets, std::uint64_t seed);

LossPattern generate_markov3_pattern(const Markov3Params& params, long num_packets,
                                     std::uint64_t seed, std::vector<int>* states_out = nullptr);

// Text form: one '0' (received) or '1' (lost) per packet; whitespace ignored.
void write_pattern(const std::string& path, const LossPattern& pattern);
LossPattern read_pattern(const std::string& path);

// A bitstream after the lossy channel: per superframe, which of the two
// packets arrived. Payloads of lost packets are dropped.
struct ReceivedStream {
  StreamHeader header;
  std::vector<std::array<std::vector<std::uint8_t>, 2>> frames;
  std::vector<std::array<bool, 2>> present;
};

// Pattern must hold exactly 2 flags per superframe.
ReceivedStream apply_loss(const PacketizedStream& stream, const LossPattern& pattern);

// Entropy-decodes whatever arrived. Missing packets leave their groups
// flagged absent in `arrival` (and zero placeholder indices).
struct ReceivedIndices {
  std::vector<std::int32_t> indices;       // Tm * G, zeros where absent
  std::vector<std::uint8_t> arrival;       // Tm * G, 1 = received
};
ReceivedIndices decode_received(const ReceivedStream& rs);

}  // namespace tfcodec

#endif  // TFCODEC_CHANNEL_HPP_
