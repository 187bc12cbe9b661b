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

#include "tfcodec/bitstream.hpp"

#include <cmath>
#include <cstring>

#include "tfcodec/errors.hpp"

namespace tfcodec {

namespace {

void put_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}
void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back((x >> (8 * i)) & 0xff);
}
void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) v.push_back((x >> (8 * i)) & 0xff);
}

class Cursor {
 public:
  Cursor(const std::vector<std::uint8_t>& b) : b_(b) {}
  bool have(std::size_t n) const { return pos_ + n <= b_.size(); }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t x = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
    pos_ += 2;
    return x;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return x;
  }
  std::vector<std::uint8_t> take(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(b_.begin() + static_cast<long>(pos_),
                                  b_.begin() + static_cast<long>(pos_ + n));
    pos_ += n;
    return out;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (!have(n)) throw format_error("bitstream: unexpected end of data");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> serialize_header(const StreamHeader& h) {
  if (h.tables.size() != h.groups) throw usage_error("bitstream: need one table per group");
  std::vector<std::uint8_t> out;
  out.insert(out.end(), StreamHeader::kMagic, StreamHeader::kMagic + 4);
  put_u16(out, StreamHeader::kVersion);
  if (h.bitrate_mode.size() > 15) throw usage_error("bitstream: mode name too long");
  out.push_back(static_cast<std::uint8_t>(h.bitrate_mode.size()));
  out.insert(out.end(), h.bitrate_mode.begin(), h.bitrate_mode.end());
  put_u32(out, h.sample_rate);
  put_u16(out, h.groups);
  put_u16(out, h.codewords);
  put_u16(out, h.latent_dim);
  put_u32(out, h.num_superframes);
  out.push_back(h.pad_frames);
  put_u64(out, h.codebook_hash);
  // Huffman section: per group, K 5-bit length fields, byte-aligned per group.
  for (const auto& t : h.tables) {
    if (t.symbols() != h.codewords) throw usage_error("bitstream: table size mismatch");
    BitWriter w;
    for (long k = 0; k < t.symbols(); ++k)
      w.put(static_cast<std::uint32_t>(t.lengths()[static_cast<std::size_t>(k)]), 5);
    w.align_byte();
    out.insert(out.end(), w.bytes().begin(), w.bytes().end());
  }
  return out;
}

StreamHeader parse_header(Cursor& c) {
  StreamHeader h;
  auto magic = c.take(4);
  if (std::memcmp(magic.data(), StreamHeader::kMagic, 4) != 0)
    throw format_error("bitstream: bad magic");
  const std::uint16_t version = c.u16();
  if (version != StreamHeader::kVersion)
    throw format_error("bitstream: unsupported version " + std::to_string(version));
  const std::uint8_t mode_len = c.u8();
  auto mode = c.take(mode_len);
  h.bitrate_mode.assign(mode.begin(), mode.end());
  h.sample_rate = c.u32();
  h.groups = c.u16();
  h.codewords = c.u16();
  h.latent_dim = c.u16();
  h.num_superframes = c.u32();
  h.pad_frames = c.u8();
  h.codebook_hash = c.u64();
  if (h.groups == 0 || h.codewords == 0) throw format_error("bitstream: empty codebook shape");
  const std::size_t group_bytes = (static_cast<std::size_t>(h.codewords) * 5 + 7) / 8;
  for (long g = 0; g < h.groups; ++g) {
    auto raw = c.take(group_bytes);
    BitReader r(raw.data(), raw.size());
    std::vector<std::uint8_t> lengths(static_cast<std::size_t>(h.codewords));
    for (auto& l : lengths) {
      std::uint32_t v = 0;
      for (int i = 0; i < 5; ++i) {
        const int bit = r.next_bit();
        if (bit < 0) throw format_error("bitstream: truncated table");
        v = (v << 1) | static_cast<std::uint32_t>(bit);
      }
      l = static_cast<std::uint8_t>(v);
    }
    h.tables.push_back(HuffmanTable::from_lengths(std::move(lengths)));
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> encode_stream(const std::vector<std::int32_t>& indices,
                                        const StreamHeader& header) {
  const long G = header.groups;
  if (G == 0) throw usage_error("bitstream: zero groups");
  if (indices.size() != static_cast<std::size_t>(header.num_superframes) * G)
    throw usage_error("bitstream: index count does not match the header");
  std::vector<std::uint8_t> out = serialize_header(header);
  const long ga = header.packet_a_groups();
  for (std::uint32_t s = 0; s < header.num_superframes; ++s) {
    for (int pkt = 0; pkt < 2; ++pkt) {
      const long g0 = pkt == 0 ? 0 : ga;
      const long g1 = pkt == 0 ? ga : G;
      BitWriter w;
      for (long g = g0; g < g1; ++g) {
        const std::int32_t idx = indices[s * G + g];
        if (idx < 0 || idx >= header.codewords)
          throw usage_error("bitstream: index out of range");
        header.tables[static_cast<std::size_t>(g)].encode(w, idx);
      }
      w.align_byte();
      if (w.bytes().size() > 0xffff) throw internal_error("bitstream: packet too large");
      put_u16(out, static_cast<std::uint16_t>(w.bytes().size()));
      out.insert(out.end(), w.bytes().begin(), w.bytes().end());
    }
  }
  return out;
}

PacketizedStream parse_packets(const std::vector<std::uint8_t>& bytes, bool allow_truncated) {
  Cursor c(bytes);
  PacketizedStream ps;
  ps.header = parse_header(c);
  ps.frames.reserve(ps.header.num_superframes);
  for (std::uint32_t s = 0; s < ps.header.num_superframes; ++s) {
    std::array<std::vector<std::uint8_t>, 2> frame;
    bool ok = true;
    const std::size_t rollback = c.pos();
    (void)rollback;
    for (int pkt = 0; pkt < 2 && ok; ++pkt) {
      if (!c.have(2)) {
        ok = false;
        break;
      }
      const std::uint16_t len = c.u16();
      if (!c.have(len)) {
        ok = false;
        break;
      }
      frame[static_cast<std::size_t>(pkt)] = c.take(len);
    }
    if (!ok) {
      if (!allow_truncated)
        throw format_error("bitstream: truncated after superframe " +
                           std::to_string(static_cast<long>(s) - 1));
      ps.truncated = true;
      break;
    }
    ps.frames.push_back(std::move(frame));
  }
  return ps;
}

std::vector<std::int32_t> decode_packet(const std::vector<std::uint8_t>& payload,
                                        const StreamHeader& header, bool second_half) {
  const long g0 = second_half ? header.packet_a_groups() : 0;
  const long g1 = second_half ? header.groups : header.packet_a_groups();
  BitReader r(payload.data(), payload.size());
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(g1 - g0));
  for (long g = g0; g < g1; ++g) {
    const long sym = header.tables[static_cast<std::size_t>(g)].decode(r);
    if (sym < 0) throw format_error("bitstream: packet payload too short");
    out.push_back(static_cast<std::int32_t>(sym));
  }
  return out;
}

DecodedStream decode_stream(const std::vector<std::uint8_t>& bytes, bool allow_truncated) {
  PacketizedStream ps = parse_packets(bytes, allow_truncated);
  DecodedStream ds;
  ds.header = ps.header;
  ds.truncated = ps.truncated;
  const long G = ps.header.groups;
  ds.indices.reserve(ps.frames.size() * static_cast<std::size_t>(G));
  for (const auto& frame : ps.frames) {
    auto a = decode_packet(frame[0], ps.header, false);
    auto b = decode_packet(frame[1], ps.header, true);
    ds.indices.insert(ds.indices.end(), a.begin(), a.end());
    ds.indices.insert(ds.indices.end(), b.begin(), b.end());
    ds.bits_per_superframe.push_back(
        8 * static_cast<long>(frame[0].size() + frame[1].size()));
  }
  return ds;
}

BitrateStats measure_bitrate(const std::vector<long>& bits_per_superframe, double frame_seconds) {
  if (bits_per_superframe.empty()) throw data_error("measure_bitrate: no frames");
  BitrateStats st;
  st.min_bits = bits_per_superframe[0];
  st.max_bits = bits_per_superframe[0];
  double sum = 0.0;
  for (long b : bits_per_superframe) {
    sum += static_cast<double>(b);
    st.min_bits = std::min(st.min_bits, b);
    st.max_bits = std::max(st.max_bits, b);
  }
  st.mean_bits = sum / static_cast<double>(bits_per_superframe.size());
  double var = 0.0;
  for (long b : bits_per_superframe) {
    const double d = static_cast<double>(b) - st.mean_bits;
    var += d * d;
  }
  st.std_bits = std::sqrt(var / static_cast<double>(bits_per_superframe.size()));
  st.avg_kbps = st.mean_bits / frame_seconds / 1000.0;
  return st;
}

std::vector<HuffmanTable> build_tables(const std::vector<std::vector<std::uint64_t>>& counts) {
  std::vector<HuffmanTable> tables;
  tables.reserve(counts.size());
  for (const auto& c : counts) tables.push_back(HuffmanTable::from_counts(c));
  return tables;
}

}  // namespace tfcodec
