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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tfcodec/channel.hpp"
#include "tfcodec/errors.hpp"
#include "tfcodec/rng.hpp"

using namespace tfcodec;

namespace {

PacketizedStream toy_stream(long frames, long groups = 4, long codewords = 16) {
  Rng rng(5);
  std::vector<std::vector<std::uint64_t>> counts(
      static_cast<std::size_t>(groups),
      std::vector<std::uint64_t>(static_cast<std::size_t>(codewords), 1));
  StreamHeader h;
  h.bitrate_mode = "custom";
  h.groups = static_cast<std::uint16_t>(groups);
  h.codewords = static_cast<std::uint16_t>(codewords);
  h.latent_dim = 8;
  h.num_superframes = static_cast<std::uint32_t>(frames);
  h.tables = build_tables(counts);
  std::vector<std::int32_t> idx(static_cast<std::size_t>(frames * groups));
  for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(codewords));
  return parse_packets(encode_stream(idx, h));
}

}  // namespace

TEST_CASE("iid patterns: extremes and empirical rate") {
  auto none = generate_iid_pattern(0.0, 1000, 7);
  for (auto v : none.lost) CHECK(v == 0);
  auto all = generate_iid_pattern(1.0, 1000, 7);
  for (auto v : all.lost) CHECK(v == 1);

  auto p = generate_iid_pattern(0.3, 100000, 42);
  CHECK(std::abs(p.loss_rate() - 0.3) < 0.01);

  CHECK_THROWS_AS(generate_iid_pattern(1.5, 10, 0), CodecError);
}

TEST_CASE("iid patterns are nested across rates under one seed") {
  auto p10 = generate_iid_pattern(0.10, 5000, 99);
  auto p30 = generate_iid_pattern(0.30, 5000, 99);
  auto p50 = generate_iid_pattern(0.50, 5000, 99);
  for (std::size_t i = 0; i < p10.lost.size(); ++i) {
    if (p10.lost[i]) CHECK(p30.lost[i]);
    if (p30.lost[i]) CHECK(p50.lost[i]);
  }
}

TEST_CASE("patterns are reproducible from the seed") {
  auto a = generate_iid_pattern(0.2, 500, 13);
  auto b = generate_iid_pattern(0.2, 500, 13);
  for (std::size_t i = 0; i < a.lost.size(); ++i) REQUIRE(a.lost[i] == b.lost[i]);
}

TEST_CASE("markov3 dwell times match the analytic expectation within 5%") {
  Markov3Params mp;
  mp.validate();
  std::vector<int> states;
  auto p = generate_markov3_pattern(mp, 200000, 31, &states);
  // measured mean run length per state vs 1/(1 - p_stay)
  for (int s = 0; s < 3; ++s) {
    double runs = 0, total = 0;
    long i = 0;
    const long n = static_cast<long>(states.size());
    while (i < n) {
      if (states[static_cast<std::size_t>(i)] == s) {
        long j = i;
        while (j < n && states[static_cast<std::size_t>(j)] == s) ++j;
        total += static_cast<double>(j - i);
        runs += 1.0;
        i = j;
      } else {
        ++i;
      }
    }
    REQUIRE(runs > 20);
    const double measured = total / runs;
    const double expected = mp.mean_dwell(s);
    // the burst state has thousands of runs and a tight bound; the good
    // state sees only a few hundred, so allow more sampling slack there
    CHECK(std::abs(measured - expected) / expected < (s == 2 ? 0.05 : 0.2));
  }
  // overall loss rate is meaningful (mixture of states)
  CHECK(p.loss_rate() > 0.005);
  CHECK(p.loss_rate() < 0.5);

  Markov3Params bad;
  bad.transition[0][0] = 0.9;  // row no longer sums to 1
  CHECK_THROWS_AS(bad.validate(), CodecError);
}

TEST_CASE("pattern text round trip") {
  auto p = generate_iid_pattern(0.25, 333, 17);
  write_pattern("/tmp/tfcodec_pattern.txt", p);
  auto r = read_pattern("/tmp/tfcodec_pattern.txt");
  REQUIRE(r.packets() == p.packets());
  for (long i = 0; i < p.packets(); ++i) REQUIRE(r.lost[i] == p.lost[i]);
}

TEST_CASE("apply_loss: identity without loss, independent sibling decode, all lost") {
  auto ps = toy_stream(12);
  auto orig = decode_stream(encode_stream([&] {
                              // reconstruct indices from the stream for comparison
                              std::vector<std::int32_t> idx;
                              for (auto& f : ps.frames) {
                                auto a = decode_packet(f[0], ps.header, false);
                                auto b = decode_packet(f[1], ps.header, true);
                                idx.insert(idx.end(), a.begin(), a.end());
                                idx.insert(idx.end(), b.begin(), b.end());
                              }
                              return idx;
                            }(),
                            ps.header));

  SUBCASE("no loss is the identity") {
    auto rs = apply_loss(ps, generate_iid_pattern(0.0, 24, 3));
    auto ri = decode_received(rs);
    for (std::size_t i = 0; i < ri.indices.size(); ++i) {
      CHECK(ri.arrival[i] == 1);
      CHECK(ri.indices[i] == orig.indices[i]);
    }
  }

  SUBCASE("losing packet A keeps packet B decodable") {
    LossPattern p;
    p.lost.assign(24, 0);
    p.lost[2 * 5 + 0] = 1;  // superframe 5, packet A
    auto rs = apply_loss(ps, p);
    auto ri = decode_received(rs);
    const long G = ps.header.groups, ga = ps.header.packet_a_groups();
    for (long g = 0; g < G; ++g) {
      const bool in_a = g < ga;
      CHECK(ri.arrival[5 * G + g] == (in_a ? 0 : 1));
      if (!in_a) CHECK(ri.indices[5 * G + g] == orig.indices[5 * G + g]);
    }
  }

  SUBCASE("all packets lost preserves structure") {
    auto rs = apply_loss(ps, generate_iid_pattern(1.0, 24, 3));
    auto ri = decode_received(rs);
    for (auto a : ri.arrival) CHECK(a == 0);
    CHECK(ri.indices.size() == static_cast<std::size_t>(12 * ps.header.groups));
  }

  SUBCASE("pattern length mismatch is an error") {
    CHECK_THROWS_AS(apply_loss(ps, generate_iid_pattern(0.1, 23, 3)), CodecError);
  }
}
