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

#ifndef TFCODEC_WAV_HPP_
#define TFCODEC_WAV_HPP_

#include <string>
#include <vector>

namespace tfcodec {

struct Waveform {
  std::vector<double> samples;  // amplitudes nominally in [-1, 1]
  int sample_rate = 16000;

  long length() const { return static_cast<long>(samples.size()); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Mono WAV, 16-bit PCM or 32-bit IEEE float. Anything else is rejected.
Waveform read_wav(const std::string& path);
void write_wav_pcm16(const std::string& path, const Waveform& w);
void write_wav_float32(const std::string& path, const Waveform& w);

}  // namespace tfcodec

#endif  // TFCODEC_WAV_HPP_
