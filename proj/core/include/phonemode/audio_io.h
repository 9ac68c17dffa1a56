/* Copyright 2026 The Phonemode Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PHONEMODE_AUDIO_IO_H_
#define PHONEMODE_AUDIO_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace phonemode {

// Mono PCM signal. Amplitudes are 16-bit integers divided by 32768, so
// -32768 maps to exactly -1.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

inline constexpr double kPcmScale = 32768.0;

// RIFF/WAVE, PCM, 16-bit little-endian, mono. Throws Error with
// kUnsupportedEncoding, kChannelCount or kTruncatedHeader as appropriate.
Waveform DecodeWav(std::span<const uint8_t> bytes);
Waveform LoadWav(const std::filesystem::path& path);

// Samples are clamped to [-1, 32767/32768] and rounded to the nearest
// integer code.
std::vector<uint8_t> EncodeWav(const Waveform& w);
void SaveWav(const Waveform& w, const std::filesystem::path& path);

struct SilenceOptions {
  double energy_threshold_ratio = 0.06;
  double frame_length_s = 0.025;
  double frame_shift_s = 0.010;
};

// Keeps the samples covered by frames whose energy exceeds
// energy_threshold_ratio times the mean frame energy. Each kept sample is
// emitted once, in order. Throws kEmptyResult when nothing survives.
Waveform RemoveSilence(const Waveform& w, const SilenceOptions& opts = {});

// First duration_s * rate samples. Throws kLength when w is shorter.
Waveform ChopFixed(const Waveform& w, double duration_s = 5.0);

}  // namespace phonemode

#endif  // PHONEMODE_AUDIO_IO_H_
