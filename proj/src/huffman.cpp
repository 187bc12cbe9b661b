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

#include "tfcodec/huffman.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "tfcodec/errors.hpp"

namespace tfcodec {

void BitWriter::put(std::uint32_t code, int nbits) {
  for (int i = nbits - 1; i >= 0; --i) {
    cur_ = (cur_ << 1) | ((code >> i) & 1u);
    if (++fill_ == 8) {
      bytes_.push_back(static_cast<std::uint8_t>(cur_));
      cur_ = 0;
      fill_ = 0;
    }
  }
}

int BitReader::next_bit() {
  if (pos_ >= size_ * 8) return -1;
  const std::uint8_t byte = data_[pos_ >> 3];
  const int bit = (byte >> (7 - (pos_ & 7))) & 1;
  ++pos_;
  return bit;
}

namespace {

// Huffman code lengths by pairwise merging; deterministic tie-breaking by
// (weight, creation order).
std::vector<std::uint8_t> huffman_lengths(const std::vector<std::uint64_t>& counts) {
  const long K = static_cast<long>(counts.size());
  std::vector<std::uint8_t> lengths(static_cast<std::size_t>(K), 0);
  if (K == 1) return lengths;  // 0-bit degenerate code

  struct Item {
    std::uint64_t weight;
    long id;
  };
  auto cmp = [](const Item& a, const Item& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.id > b.id;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  // tree as parent links; leaves are 0..K-1
  std::vector<long> parent(static_cast<std::size_t>(2 * K - 1), -1);
  for (long k = 0; k < K; ++k) heap.push({counts[static_cast<std::size_t>(k)], k});
  long next_id = K;
  while (heap.size() > 1) {
    Item a = heap.top();
    heap.pop();
    Item b = heap.top();
    heap.pop();
    parent[static_cast<std::size_t>(a.id)] = next_id;
    parent[static_cast<std::size_t>(b.id)] = next_id;
    heap.push({a.weight + b.weight, next_id});
    ++next_id;
  }
  for (long k = 0; k < K; ++k) {
    int depth = 0;
    for (long n = k; parent[static_cast<std::size_t>(n)] != -1;
         n = parent[static_cast<std::size_t>(n)])
      ++depth;
    lengths[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(depth);
  }
  return lengths;
}

}  // namespace

HuffmanTable HuffmanTable::from_counts(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) throw usage_error("huffman: empty alphabet");
  std::vector<std::uint64_t> floored(counts);
  for (auto& c : floored)
    if (c == 0) c = 1;
  std::vector<std::uint8_t> lengths = huffman_lengths(floored);
  int maxlen = 0;
  for (auto l : lengths) maxlen = std::max<int>(maxlen, l);
  while (maxlen > kMaxLen) {
    // Flatten heavy tails by halving the dynamic range and rebuilding.
    for (auto& c : floored) c = (c + 1) / 2;
    lengths = huffman_lengths(floored);
    maxlen = 0;
    for (auto l : lengths) maxlen = std::max<int>(maxlen, l);
  }
  return from_lengths(std::move(lengths));
}

HuffmanTable HuffmanTable::from_lengths(std::vector<std::uint8_t> lengths) {
  HuffmanTable t;
  t.lengths_ = std::move(lengths);
  for (auto l : t.lengths_)
    if (l > kMaxLen) throw format_error("huffman: code length exceeds limit");
  t.build_canonical();
  return t;
}

void HuffmanTable::build_canonical() {
  const long K = symbols();
  codes_.assign(static_cast<std::size_t>(K), 0);
  sorted_symbols_.clear();
  first_code_.assign(kMaxLen + 2, 0);
  first_index_.assign(kMaxLen + 2, 0);
  count_.assign(kMaxLen + 2, 0);
  if (K == 1) {
    if (lengths_[0] != 0) throw format_error("huffman: single-symbol table must use 0 bits");
    return;
  }
  for (auto l : lengths_) {
    if (l == 0) throw format_error("huffman: zero-length code in multi-symbol table");
    ++count_[l];
  }
  // canonical order: (length, symbol)
  sorted_symbols_.resize(static_cast<std::size_t>(K));
  std::vector<long> order(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return lengths_[static_cast<std::size_t>(a)] != lengths_[static_cast<std::size_t>(b)]
               ? lengths_[static_cast<std::size_t>(a)] < lengths_[static_cast<std::size_t>(b)]
               : a < b;
  });
  std::uint32_t code = 0;
  std::uint32_t idx = 0;
  int prev_len = 0;
  for (long i = 0; i < K; ++i) {
    const long sym = order[static_cast<std::size_t>(i)];
    const int len = lengths_[static_cast<std::size_t>(sym)];
    code <<= (len - prev_len);
    if (prev_len != len) {
      first_code_[len] = code;
      first_index_[len] = idx;
    }
    codes_[static_cast<std::size_t>(sym)] = code;
    sorted_symbols_[static_cast<std::size_t>(idx)] = static_cast<std::uint32_t>(sym);
    ++code;
    ++idx;
    prev_len = len;
  }
  // completeness: after assigning all codes at max length, the next code
  // must be exactly 2^maxlen
  if (code != (1ull << prev_len))
    throw format_error("huffman: code lengths do not form a complete prefix code");
}

void HuffmanTable::encode(BitWriter& w, long symbol) const {
  if (symbol < 0 || symbol >= symbols()) throw format_error("huffman: symbol out of range");
  const int len = lengths_[static_cast<std::size_t>(symbol)];
  if (len > 0) w.put(codes_[static_cast<std::size_t>(symbol)], len);
}

long HuffmanTable::decode(BitReader& r) const {
  if (symbols() == 1) return 0;  // 0-bit code
  std::uint32_t code = 0;
  for (int len = 1; len <= kMaxLen; ++len) {
    const int bit = r.next_bit();
    if (bit < 0) return -1;
    code = (code << 1) | static_cast<std::uint32_t>(bit);
    if (count_[len] != 0 && code < first_code_[len] + count_[len] && code >= first_code_[len])
      return sorted_symbols_[first_index_[len] + (code - first_code_[len])];
  }
  return -1;
}

bool HuffmanTable::kraft_complete() const {
  if (symbols() == 1) return lengths_[0] == 0;
  // exact arithmetic: sum 2^(kMaxLen - len) must equal 2^kMaxLen
  std::uint64_t acc = 0;
  for (auto l : lengths_) acc += 1ull << (kMaxLen - l);
  return acc == (1ull << kMaxLen);
}

double HuffmanTable::average_length(const std::vector<std::uint64_t>& counts) const {
  if (static_cast<long>(counts.size()) != symbols())
    throw usage_error("huffman: count vector size mismatch");
  double total = 0.0, bits = 0.0;
  for (long k = 0; k < symbols(); ++k) {
    const double c = static_cast<double>(counts[static_cast<std::size_t>(k)]);
    total += c;
    bits += c * lengths_[static_cast<std::size_t>(k)];
  }
  return total > 0 ? bits / total : 0.0;
}

}  // namespace tfcodec
