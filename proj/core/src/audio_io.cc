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

#include "phonemode/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "phonemode/error.h"

namespace phonemode {
namespace {

uint16_t ReadU16(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint16_t>(b[at] | (b[at + 1] << 8));
}

uint32_t ReadU32(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) |
         (static_cast<uint32_t>(b[at + 3]) << 24);
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool TagIs(std::span<const uint8_t> b, size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

// One pass of frame-energy thresholding. Returns the kept samples.
std::vector<double> SilencePass(const std::vector<double>& x, size_t frame_len,
                                size_t shift, double ratio) {
  const size_t n = x.size();
  size_t num_frames = 1;
  if (n > frame_len) num_frames = (n - frame_len + shift - 1) / shift + 1;

  std::vector<double> power(num_frames);
  double mean = 0.0;
  for (size_t f = 0; f < num_frames; ++f) {
    const size_t begin = f * shift;
    const size_t end = std::min(begin + frame_len, n);
    double e = 0.0;
    for (size_t i = begin; i < end; ++i) e += x[i] * x[i];
    power[f] = end > begin ? e / static_cast<double>(end - begin) : 0.0;
    mean += power[f];
  }
  mean /= static_cast<double>(num_frames);
  if (!(mean > 0.0)) {
    throw Error(ErrorCode::kEmptyResult, "every frame is below the energy threshold");
  }

  std::vector<bool> keep(n, false);
  const double threshold = ratio * mean;
  for (size_t f = 0; f < num_frames; ++f) {
    if (power[f] <= threshold) continue;
    const size_t begin = f * shift;
    const size_t end = std::min(begin + frame_len, n);
    std::fill(keep.begin() + begin, keep.begin() + end, true);
  }
  std::vector<double> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(x[i]);
  }
  return out;
}

}  // namespace

Waveform DecodeWav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || !TagIs(bytes, 0, "RIFF") || !TagIs(bytes, 8, "WAVE")) {
    if (bytes.size() < 12) throw Error(ErrorCode::kTruncatedHeader, "missing RIFF header");
    throw Error(ErrorCode::kUnsupportedEncoding, "not a RIFF/WAVE container");
  }
  size_t pos = 12;
  bool have_fmt = false;
  int rate = 0;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_size = ReadU32(bytes, pos + 4);
    const size_t body = pos + 8;
    if (TagIs(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + 16 > bytes.size()) {
        throw Error(ErrorCode::kTruncatedHeader, "fmt chunk shorter than 16 bytes");
      }
      const uint16_t format = ReadU16(bytes, body);
      const uint16_t channels = ReadU16(bytes, body + 2);
      rate = static_cast<int>(ReadU32(bytes, body + 4));
      const uint16_t bits = ReadU16(bytes, body + 14);
      if (format != 1) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "audio format " + std::to_string(format) + " is not linear PCM");
      }
      if (bits != 16) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    std::to_string(bits) + "-bit samples; only 16-bit is supported");
      }
      if (channels != 1) {
        throw Error(ErrorCode::kChannelCount,
                    std::to_string(channels) + " channels; only mono is supported");
      }
      if (rate <= 0) throw Error(ErrorCode::kUnsupportedEncoding, "sample rate is zero");
      have_fmt = true;
    } else if (TagIs(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorCode::kTruncatedHeader, "data chunk before fmt chunk");
      if (body + chunk_size > bytes.size()) {
        throw Error(ErrorCode::kTruncatedHeader, "data chunk extends past end of file");
      }
      Waveform w;
      w.sample_rate_hz = rate;
      const size_t count = chunk_size / 2;
      if (count == 0) throw Error(ErrorCode::kEmptyResult, "data chunk holds no samples");
      w.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        const auto v = static_cast<int16_t>(ReadU16(bytes, body + 2 * i));
        w.samples[i] = static_cast<double>(v) / kPcmScale;
      }
      return w;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw Error(ErrorCode::kTruncatedHeader,
              have_fmt ? "no data chunk" : "no fmt chunk");
}

Waveform LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::vector<uint8_t> EncodeWav(const Waveform& w) {
  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(w.sample_rate_hz));
  PutU32(out, static_cast<uint32_t>(w.sample_rate_hz * 2));
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  for (double s : w.samples) {
    const double code = std::clamp(std::nearbyint(s * kPcmScale), -32768.0, 32767.0);
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(code)));
  }
  return out;
}

void SaveWav(const Waveform& w, const std::filesystem::path& path) {
  const auto bytes = EncodeWav(w);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Waveform RemoveSilence(const Waveform& w, const SilenceOptions& opts) {
  if (!(opts.energy_threshold_ratio > 0.0 && opts.energy_threshold_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "energy_threshold_ratio must lie in (0, 1)");
  }
  if (w.samples.empty()) throw Error(ErrorCode::kEmptyResult, "empty waveform");
  const auto frame_len = static_cast<size_t>(std::lround(opts.frame_length_s * w.sample_rate_hz));
  const auto shift = static_cast<size_t>(std::lround(opts.frame_shift_s * w.sample_rate_hz));
  if (frame_len == 0 || shift == 0 || shift > frame_len) {
    throw Error(ErrorCode::kInvalidArgument, "invalid silence frame grid");
  }
  // Iterate to a fixed point so that the operation is idempotent: removing
  // low-energy frames raises the mean, which can expose new ones.
  std::vector<double> current = w.samples;
  for (;;) {
    auto next = SilencePass(current, frame_len, shift, opts.energy_threshold_ratio);
    if (next.size() == current.size()) break;
    current = std::move(next);
  }
  return Waveform{std::move(current), w.sample_rate_hz};
}

Waveform ChopFixed(const Waveform& w, double duration_s) {
  if (!(duration_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "duration must be positive");
  const auto n = static_cast<size_t>(std::llround(duration_s * w.sample_rate_hz));
  if (w.samples.size() < n) {
    throw Error(ErrorCode::kLength, "waveform lasts " + std::to_string(w.duration_s()) +
                                        " s, need " + std::to_string(duration_s) + " s");
  }
  return Waveform{std::vector<double>(w.samples.begin(), w.samples.begin() + static_cast<std::ptrdiff_t>(n)),
                  w.sample_rate_hz};
}

}  // namespace phonemode
