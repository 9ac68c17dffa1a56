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

#ifndef PHONEMODE_SPECTRAL_H_
#define PHONEMODE_SPECTRAL_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "phonemode/audio_io.h"
#include "phonemode/fft.h"

namespace phonemode {

enum class WindowType { kHamming, kRectangular };

struct FrameGrid {
  size_t frame_len_samples = 400;
  size_t frame_shift_samples = 160;
  WindowType window = WindowType::kHamming;

  // 25 ms frames with a 10 ms shift at the given rate.
  static FrameGrid ForRate(int sample_rate_hz, WindowType window = WindowType::kHamming);
  void Validate() const;
  size_t NumFrames(size_t num_samples) const;
};

// Wire tags of the PHFE container; values are part of the file format.
enum class FeatureKind : uint16_t {
  kMfcc13 = 1,
  kMfcc39 = 2,
  kRmfcc39 = 3,
  kMpdss25 = 4,
  kTandem = 5,
  kConcat = 6,
  kPitchContour = 7,
  kEpochStrengthContour = 8,
};

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);
// Fixed column count of a kind, or 0 when the kind has a variable width.
size_t FeatureKindDim(FeatureKind kind);

// Row-major frames x dim matrix. Construction checks the dimension against
// the kind and rejects non-finite entries.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(FeatureKind kind, size_t rows, size_t cols, std::vector<double> data,
                double frame_shift_s = 0.01);

  FeatureKind kind() const { return kind_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  double frame_shift_s() const { return frame_shift_s_; }
  const std::vector<double>& data() const { return data_; }

  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  // Concatenates per-frame columns of equally long matrices.
  static FeatureMatrix Concat(std::span<const FeatureMatrix> parts);

 private:
  FeatureKind kind_ = FeatureKind::kConcat;
  size_t rows_ = 0;
  size_t cols_ = 0;
  double frame_shift_s_ = 0.01;
  std::vector<double> data_;
};

std::vector<double> MakeWindow(size_t length, WindowType type);

// floor((N - L) / shift) + 1 windowed frames. Throws kLength when the
// signal is shorter than one frame.
std::vector<std::vector<double>> FrameSignal(std::span<const double> samples, const FrameGrid& g);

// Triangular filters equally spaced on the HTK Mel scale, evaluated on the
// bins of a power spectrum of size n_fft / 2 + 1.
class MelFilterbank {
 public:
  MelFilterbank(size_t n_fft, int sample_rate_hz, size_t n_filters, double low_hz,
                double high_hz);

  size_t num_filters() const { return filters_.size(); }
  std::vector<double> Apply(std::span<const double> power) const;

  // Bin range [first, last] with non-zero weight for filter m.
  size_t first_bin(size_t m) const { return filters_[m].first; }
  size_t last_bin(size_t m) const { return filters_[m].first + filters_[m].weights.size() - 1; }

 private:
  struct Filter {
    size_t first = 0;
    std::vector<double> weights;
  };
  std::vector<Filter> filters_;
};

struct MfccOptions {
  size_t n_coeffs = 13;
  size_t n_mels = 26;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist
  double log_floor = 1e-10;
  double preemphasis = 0.0;  // 0 disables
};

// Orthonormal DCT-II of `input`, first n_out coefficients.
std::vector<double> DctII(std::span<const double> input, size_t n_out);

FeatureMatrix Mfcc(const Waveform& w, const FrameGrid& g, const MfccOptions& opts = {});

// Regression deltas over +/-2 frames with replicated edges. Columns come
// out ordered [static, delta, delta-delta].
FeatureMatrix AddDeltas(const FeatureMatrix& f);
std::vector<double> RegressionDeltas(std::span<const double> data, size_t rows, size_t cols);

// HTK Mel scale.
inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace phonemode

#endif  // PHONEMODE_SPECTRAL_H_
