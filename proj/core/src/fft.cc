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

#include "phonemode/fft.h"

#include <cmath>
#include <numbers>

#include "phonemode/error.h"

namespace phonemode {

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Fft::Fft(size_t size) : size_(size) {
  if (size < 2 || (size & (size - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "FFT size must be a power of two >= 2");
  }
  int bits = 0;
  while ((size_t{1} << bits) < size) ++bits;
  bit_reverse_.resize(size);
  for (size_t i = 0; i < size; ++i) {
    size_t r = 0;
    for (int b = 0; b < bits; ++b) {
      if (i & (size_t{1} << b)) r |= size_t{1} << (bits - 1 - b);
    }
    bit_reverse_[i] = r;
  }
  twiddles_.resize(size / 2);
  for (size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::Forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != size_) throw Error(ErrorCode::kDimensionMismatch, "FFT input size");
  for (size_t i = 0; i < size_; ++i) {
    if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
  }
  for (size_t len = 2; len <= size_; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = size_ / len;
    for (size_t start = 0; start < size_; start += len) {
      for (size_t k = 0; k < half; ++k) {
        const auto t = twiddles_[k * stride] * data[start + k + half];
        data[start + k + half] = data[start + k] - t;
        data[start + k] += t;
      }
    }
  }
}

std::vector<double> Fft::PowerSpectrum(std::span<const double> frame) const {
  if (frame.size() > size_) throw Error(ErrorCode::kDimensionMismatch, "frame longer than FFT");
  std::vector<std::complex<double>> buf(size_);
  for (size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  Forward(buf);
  std::vector<double> power(size_ / 2 + 1);
  for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

}  // namespace phonemode
