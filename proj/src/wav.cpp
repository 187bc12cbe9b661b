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

#include "tfcodec/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "tfcodec/errors.hpp"

namespace tfcodec {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void wr_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}
void wr_u16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

void write_wav(const std::string& path, const Waveform& w, bool as_float) {
  const std::uint16_t bits = as_float ? 32 : 16;
  const std::uint16_t fmt = as_float ? 3 : 1;
  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size()) * bytes_per_sample;

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  const char* riff = "RIFF";
  out.insert(out.end(), riff, riff + 4);
  wr_u32(out, 36 + data_size);
  const char* wavefmt = "WAVEfmt ";
  out.insert(out.end(), wavefmt, wavefmt + 8);
  wr_u32(out, 16);
  wr_u16(out, fmt);
  wr_u16(out, 1);  // mono
  wr_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  wr_u32(out, static_cast<std::uint32_t>(w.sample_rate) * bytes_per_sample);
  wr_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  wr_u16(out, bits);
  const char* data = "data";
  out.insert(out.end(), data, data + 4);
  wr_u32(out, data_size);
  for (double s : w.samples) {
    if (as_float) {
      float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      wr_u32(out, u);
    } else {
      double c = s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
      auto i = static_cast<std::int32_t>(c * 32768.0 + (c >= 0 ? 0.5 : -0.5));
      if (i > 32767) i = 32767;
      if (i < -32768) i = -32768;
      wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(i)));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw io_error("short write: " + path);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw format_error("not a RIFF/WAVE file: " + path);

  std::uint16_t fmt = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t chunk_len = rd_u32(buf.data() + pos + 4);
    if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0 && chunk_len >= 16) {
      fmt = rd_u16(buf.data() + pos + 8);
      channels = rd_u16(buf.data() + pos + 10);
      rate = rd_u32(buf.data() + pos + 12);
      bits = rd_u16(buf.data() + pos + 22);
    } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  if (data_off == 0 || rate == 0) throw format_error("missing fmt/data chunk: " + path);
  if (channels != 1) throw format_error("only mono WAV supported: " + path);
  if (data_off + data_len > buf.size()) data_len = buf.size() - data_off;

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (fmt == 1 && bits == 16) {
    const std::size_t n = data_len / 2;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(rd_u16(buf.data() + data_off + 2 * i));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (fmt == 3 && bits == 32) {
    const std::size_t n = data_len / 4;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t u = rd_u32(buf.data() + data_off + 4 * i);
      float fv;
      std::memcpy(&fv, &u, 4);
      w.samples[i] = static_cast<double>(fv);
    }
  } else {
    throw format_error("unsupported WAV encoding (need 16-bit PCM or 32-bit float): " + path);
  }
  return w;
}

void write_wav_pcm16(const std::string& path, const Waveform& w) { write_wav(path, w, false); }
void write_wav_float32(const std::string& path, const Waveform& w) { write_wav(path, w, true); }

}  // namespace tfcodec
