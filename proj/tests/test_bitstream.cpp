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

#include "tfcodec/bitstream.hpp"
#include "tfcodec/errors.hpp"
#include "tfcodec/rng.hpp"

using namespace tfcodec;

namespace {

StreamHeader make_header(long groups, long codewords, std::uint32_t frames,
                         const std::vector<std::vector<std::uint64_t>>& counts) {
  StreamHeader h;
  h.bitrate_mode = "custom";
  h.groups = static_cast<std::uint16_t>(groups);
  h.codewords = static_cast<std::uint16_t>(codewords);
  h.latent_dim = 8;
  h.num_superframes = frames;
  h.codebook_hash = 0xfeedbeefcafe1234ull;
  h.tables = build_tables(counts);
  return h;
}

std::vector<std::vector<std::uint64_t>> uniform_counts(long groups, long codewords) {
  return std::vector<std::vector<std::uint64_t>>(
      static_cast<std::size_t>(groups),
      std::vector<std::uint64_t>(static_cast<std::size_t>(codewords), 1));
}

}  // namespace

TEST_CASE("balanced counts give uniform code lengths") {
  auto t = HuffmanTable::from_counts({1, 1, 1, 1});
  for (long k = 0; k < 4; ++k) CHECK(t.length_of(k) == 2);
  CHECK(t.kraft_complete());
}

TEST_CASE("textbook skewed counts") {
  auto t = HuffmanTable::from_counts({8, 4, 2, 1, 1});
  CHECK(t.length_of(0) == 1);
  CHECK(t.length_of(1) == 2);
  CHECK(t.length_of(2) == 3);
  CHECK(t.length_of(3) == 4);
  CHECK(t.length_of(4) == 4);
}

TEST_CASE("kraft sum is exactly one on random alphabets") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> counts(64);
    for (auto& c : counts) c = rng.uniform_index(1000);  // zeros get floored
    auto t = HuffmanTable::from_counts(counts);
    CHECK(t.kraft_complete());
    // prefix-free: no code a prefix of another (check pairwise on lengths/codes)
    for (long a = 0; a < 64; ++a)
      for (long b = 0; b < 64; ++b) {
        if (a == b) continue;
        const int la = t.length_of(a), lb = t.length_of(b);
        if (la <= lb) {
          CHECK((t.code_of(b) >> (lb - la)) != t.code_of(a));
        }
      }
  }
}

TEST_CASE("average length within one bit of the empirical entropy") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> counts(32);
    for (auto& c : counts) c = 1 + rng.uniform_index(5000);
    auto t = HuffmanTable::from_counts(counts);
    double total = 0, h = 0;
    for (auto c : counts) total += static_cast<double>(c);
    for (auto c : counts) {
      const double p = static_cast<double>(c) / total;
      h -= p * std::log2(p);
    }
    const double avg = t.average_length(counts);
    CHECK(avg >= h - 1e-9);
    CHECK(avg < h + 1.0);
  }
}

TEST_CASE("degenerate single-symbol table uses zero bits") {
  auto t = HuffmanTable::from_counts({42});
  CHECK(t.symbols() == 1);
  CHECK(t.length_of(0) == 0);
  BitWriter w;
  t.encode(w, 0);
  CHECK(w.bytes().empty());
  BitReader r(nullptr, 0);
  CHECK(t.decode(r) == 0);
}

TEST_CASE("stream round trip over random superframes") {
  Rng rng(7);
  const long G = 6, K = 40;
  // skewed per-group distributions
  std::vector<std::vector<std::uint64_t>> counts(G, std::vector<std::uint64_t>(K));
  for (long g = 0; g < G; ++g)
    for (long k = 0; k < K; ++k) counts[g][k] = 1 + rng.uniform_index(200) * (k % 3 == 0 ? 5 : 1);
  const std::uint32_t frames = 500;
  std::vector<std::int32_t> idx(frames * G);
  for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(K));
  StreamHeader h = make_header(G, K, frames, counts);
  auto bytes = encode_stream(idx, h);
  auto dec = decode_stream(bytes);
  CHECK(!dec.truncated);
  REQUIRE(dec.indices.size() == idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) REQUIRE(dec.indices[i] == idx[i]);
  CHECK(dec.header.codebook_hash == h.codebook_hash);
  CHECK(dec.header.bitrate_mode == "custom");
  CHECK(dec.bits_per_superframe.size() == frames);
}

TEST_CASE("empty stream is header only") {
  StreamHeader h = make_header(4, 8, 0, uniform_counts(4, 8));
  auto bytes = encode_stream({}, h);
  auto dec = decode_stream(bytes);
  CHECK(dec.indices.empty());
  CHECK(dec.bits_per_superframe.empty());
}

TEST_CASE("payload bound with uniform tables at the 3 kbps shape") {
  Rng rng(11);
  const long G = 16, K = 1024;
  StreamHeader h = make_header(G, K, 50, uniform_counts(G, K));
  std::vector<std::int32_t> idx(50 * G);
  for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(K));
  auto bytes = encode_stream(idx, h);
  auto dec = decode_stream(bytes);
  for (long b : dec.bits_per_superframe) {
    CHECK(b <= G * 10 + G);  // G*log2(K) + G padding bound
    CHECK(b >= G * 10);
  }
}

TEST_CASE("truncation: strict mode errors, lenient mode recovers the prefix") {
  Rng rng(13);
  const long G = 4, K = 16;
  StreamHeader h = make_header(G, K, 20, uniform_counts(G, K));
  std::vector<std::int32_t> idx(20 * G);
  for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(K));
  auto bytes = encode_stream(idx, h);
  // chop mid-stream
  std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 7);
  CHECK_THROWS_AS(decode_stream(cut, false), CodecError);
  auto dec = decode_stream(cut, true);
  CHECK(dec.truncated);
  CHECK(dec.indices.size() % G == 0);
  CHECK(dec.indices.size() > 0);
  for (std::size_t i = 0; i < dec.indices.size(); ++i) REQUIRE(dec.indices[i] == idx[i]);
}

TEST_CASE("bad magic and version are rejected") {
  StreamHeader h = make_header(2, 4, 1, uniform_counts(2, 4));
  auto bytes = encode_stream({1, 2}, h);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_stream(bad), CodecError);
  auto badver = bytes;
  badver[4] = 0x7f;
  CHECK_THROWS_AS(decode_stream(badver), CodecError);
}

TEST_CASE("packets decode independently") {
  Rng rng(17);
  const long G = 6, K = 32;
  StreamHeader h = make_header(G, K, 10, uniform_counts(G, K));
  std::vector<std::int32_t> idx(10 * G);
  for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(K));
  auto bytes = encode_stream(idx, h);
  auto ps = parse_packets(bytes);
  REQUIRE(ps.frames.size() == 10);
  for (long s = 0; s < 10; ++s) {
    auto onlyB = decode_packet(ps.frames[static_cast<std::size_t>(s)][1], ps.header, true);
    REQUIRE(onlyB.size() == static_cast<std::size_t>(G - G / 2));
    for (long j = 0; j < G - G / 2; ++j)
      REQUIRE(onlyB[static_cast<std::size_t>(j)] == idx[s * G + G / 2 + j]);
    auto onlyA = decode_packet(ps.frames[static_cast<std::size_t>(s)][0], ps.header, false);
    for (long j = 0; j < G / 2; ++j)
      REQUIRE(onlyA[static_cast<std::size_t>(j)] == idx[s * G + j]);
  }
}

TEST_CASE("bitrate accounting") {
  std::vector<long> bits(100, 120);
  auto st = measure_bitrate(bits);
  CHECK(st.avg_kbps == doctest::Approx(3.0));
  CHECK(st.min_bits == 120);
  CHECK(st.max_bits == 120);
  CHECK(st.std_bits == doctest::Approx(0.0));
  CHECK_THROWS_AS(measure_bitrate({}), CodecError);
}

TEST_CASE("long-tail counts stay within the 31-bit length cap") {
  // Fibonacci-style counts force deep trees; the builder must cap depth.
  std::vector<std::uint64_t> counts(64);
  std::uint64_t a = 1, b = 1;
  for (auto& c : counts) {
    c = a;
    const std::uint64_t n = a + b;
    a = b;
    b = n;
  }
  auto t = HuffmanTable::from_counts(counts);
  for (long k = 0; k < t.symbols(); ++k) CHECK(t.length_of(k) <= HuffmanTable::kMaxLen);
  CHECK(t.kraft_complete());
}
