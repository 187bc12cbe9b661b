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

#include "tfcodec/channel.hpp"

#include <cmath>
#include <fstream>

#include "tfcodec/errors.hpp"
#include "tfcodec/rng.hpp"

namespace tfcodec {

void Markov3Params::validate() const {
  for (int s = 0; s < 3; ++s) {
    double row = 0.0;
    for (int t = 0; t < 3; ++t) {
      if (transition[s][t] < 0.0 || transition[s][t] > 1.0)
        throw usage_error("markov3: transition probability out of range");
      row += transition[s][t];
    }
    if (std::abs(row - 1.0) > 1e-9) throw usage_error("markov3: transition row must sum to 1");
    if (loss_prob[s] < 0.0 || loss_prob[s] > 1.0)
      throw usage_error("markov3: loss probability out of range");
    if (transition[s][s] >= 1.0) throw usage_error("markov3: absorbing state");
  }
}

double LossPattern::loss_rate() const {
  if (lost.empty()) return 0.0;
  double n = 0.0;
  for (auto v : lost) n += v ? 1.0 : 0.0;
  return n / static_cast<double>(lost.size());
}

LossPattern generate_iid_pattern(double rate, long num_packets, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw usage_error("iid pattern: rate must be in [0,1]");
  if (num_packets < 1) throw usage_error("iid pattern: need at least one packet");
  LossPattern p;
  p.kind = "iid";
  p.rate = rate;
  p.seed = seed;
  p.lost.resize(static_cast<std::size_t>(num_packets));
  Rng rng(seed);
  for (auto& v : p.lost) v = rng.uniform() < rate ? 1 : 0;
  return p;
}

LossPattern generate_markov3_pattern(const Markov3Params& params, long num_packets,
                                     std::uint64_t seed, std::vector<int>* states_out) {
  params.validate();
  if (num_packets < 1) throw usage_error("markov3 pattern: need at least one packet");
  LossPattern p;
  p.kind = "markov3";
  p.seed = seed;
  p.lost.resize(static_cast<std::size_t>(num_packets));
  if (states_out) states_out->resize(static_cast<std::size_t>(num_packets));
  Rng rng(seed);
  int state = 0;  // start in the good state
  for (long i = 0; i < num_packets; ++i) {
    p.lost[static_cast<std::size_t>(i)] = rng.uniform() < params.loss_prob[state] ? 1 : 0;
    if (states_out) (*states_out)[static_cast<std::size_t>(i)] = state;
    const double u = rng.uniform();
    double acc = 0.0;
    int next = 2;
    for (int t = 0; t < 3; ++t) {
      acc += params.transition[state][t];
      if (u < acc) {
        next = t;
        break;
      }
    }
    state = next;
  }
  return p;
}

void write_pattern(const std::string& path, const LossPattern& pattern) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot write pattern: " + path);
  for (std::size_t i = 0; i < pattern.lost.size(); ++i) {
    f << (pattern.lost[i] ? '1' : '0');
    if ((i + 1) % 80 == 0) f << '\n';
  }
  f << '\n';
}

LossPattern read_pattern(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot read pattern: " + path);
  LossPattern p;
  p.kind = "file";
  char c;
  while (f.get(c)) {
    if (c == '0')
      p.lost.push_back(0);
    else if (c == '1')
      p.lost.push_back(1);
    else if (c == '\n' || c == '\r' || c == ' ' || c == '\t')
      continue;
    else
      throw format_error("pattern file: unexpected character");
  }
  if (p.lost.empty()) throw data_error("pattern file: empty");
  return p;
}

ReceivedStream apply_loss(const PacketizedStream& stream, const LossPattern& pattern) {
  const long n = static_cast<long>(stream.frames.size());
  if (pattern.packets() != 2 * n)
    throw usage_error("apply_loss: pattern holds " + std::to_string(pattern.packets()) +
                      " packets but the stream has " + std::to_string(2 * n));
  ReceivedStream rs;
  rs.header = stream.header;
  rs.frames.resize(static_cast<std::size_t>(n));
  rs.present.resize(static_cast<std::size_t>(n));
  for (long s = 0; s < n; ++s) {
    for (int pkt = 0; pkt < 2; ++pkt) {
      const bool lost = pattern.lost[static_cast<std::size_t>(2 * s + pkt)] != 0;
      rs.present[static_cast<std::size_t>(s)][static_cast<std::size_t>(pkt)] = !lost;
      if (!lost)
        rs.frames[static_cast<std::size_t>(s)][static_cast<std::size_t>(pkt)] =
            stream.frames[static_cast<std::size_t>(s)][static_cast<std::size_t>(pkt)];
    }
  }
  return rs;
}

ReceivedIndices decode_received(const ReceivedStream& rs) {
  const long G = rs.header.groups;
  const long n = static_cast<long>(rs.frames.size());
  ReceivedIndices out;
  out.indices.assign(static_cast<std::size_t>(n * G), 0);
  out.arrival.assign(static_cast<std::size_t>(n * G), 0);
  const long ga = rs.header.packet_a_groups();
  for (long s = 0; s < n; ++s) {
    if (rs.present[static_cast<std::size_t>(s)][0]) {
      auto a = decode_packet(rs.frames[static_cast<std::size_t>(s)][0], rs.header, false);
      for (long g = 0; g < ga; ++g) {
        out.indices[static_cast<std::size_t>(s * G + g)] = a[static_cast<std::size_t>(g)];
        out.arrival[static_cast<std::size_t>(s * G + g)] = 1;
      }
    }
    if (rs.present[static_cast<std::size_t>(s)][1]) {
      auto b = decode_packet(rs.frames[static_cast<std::size_t>(s)][1], rs.header, true);
      for (long g = ga; g < G; ++g) {
        out.indices[static_cast<std::size_t>(s * G + g)] = b[static_cast<std::size_t>(g - ga)];
        out.arrival[static_cast<std::size_t>(s * G + g)] = 1;
      }
    }
  }
  return out;
}

}  // namespace tfcodec
