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

#ifndef TFCODEC_HUFFMAN_HPP_
#define TFCODEC_HUFFMAN_HPP_

#include <cstdint>
#include <vector>

namespace tfcodec {

// MSB-first bit packing.
class BitWriter {
 public:
  void put(std::uint32_t code, int nbits);
  void align_byte() {
    if (fill_) flush_partial();
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  long bits_written() const { return static_cast<long>(bytes_.size()) * 8 - (fill_ ? 8 - fill_ : 0); }

 private:
  void flush_partial() {
    bytes_.push_back(static_cast<std::uint8_t>(cur_ << (8 - fill_)));
    cur_ = 0;
    fill_ = 0;
  }
  std::vector<std::uint8_t> bytes_;
  std::uint32_t cur_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  // Returns -1 past the end.
  int next_bit();
  bool exhausted() const { return pos_ >= size_ * 8; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

// Canonical Huffman code over K symbols. Code lengths are capped at 31 so
// they fit 5-bit header fields; a degenerate single-symbol alphabet gets a
// 0-bit code (the framing already says how many symbols each packet holds).
class HuffmanTable {
 public:
  static constexpr int kMaxLen = 31;

  // Laplace floor: every count is raised to at least 1.
  static HuffmanTable from_counts(const std::vector<std::uint64_t>& counts);
  static HuffmanTable from_lengths(std::vector<std::uint8_t> lengths);

  long symbols() const { return static_cast<long>(lengths_.size()); }
  const std::vector<std::uint8_t>& lengths() const { return lengths_; }
  std::uint32_t code_of(long symbol) const { return codes_[static_cast<std::size_t>(symbol)]; }
  int length_of(long symbol) const { return lengths_[static_cast<std::size_t>(symbol)]; }

  void encode(BitWriter& w, long symbol) const;
  // Returns the decoded symbol or -1 if the stream ran out.
  long decode(BitReader& r) const;

  // Exact Kraft sum check: sum 2^-len == 1 (always true for K >= 2 tables
  // built here; exposed for tests and stream validation).
  bool kraft_complete() const;

  // Expected code length in bits under the (floored) count distribution.
  double average_length(const std::vector<std::uint64_t>& counts) const;

 private:
  void build_canonical();
  std::vector<std::uint8_t> lengths_;
  std::vector<std::uint32_t> codes_;
  // canonical decode acceleration: per length, first code and symbol offset
  std::vector<std::uint32_t> first_code_;
  std::vector<std::uint32_t> first_index_;
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> sorted_symbols_;
};

}  // namespace tfcodec

#endif  // TFCODEC_HUFFMAN_HPP_
