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

#include "phonemode/spectral.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phonemode/error.h"

namespace phonemode {

FrameGrid FrameGrid::ForRate(int sample_rate_hz, WindowType window) {
  FrameGrid g;
  g.frame_len_samples = static_cast<size_t>(std::lround(0.025 * sample_rate_hz));
  g.frame_shift_samples = static_cast<size_t>(std::lround(0.010 * sample_rate_hz));
  g.window = window;
  return g;
}

void FrameGrid::Validate() const {
  if (frame_len_samples == 0 || frame_shift_samples == 0 ||
      frame_shift_samples > frame_len_samples) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame grid needs 0 < shift <= length, got length " +
                    std::to_string(frame_len_samples) + " shift " +
                    std::to_string(frame_shift_samples));
  }
}

size_t FrameGrid::NumFrames(size_t num_samples) const {
  if (num_samples < frame_len_samples) return 0;
  return (num_samples - frame_len_samples) / frame_shift_samples + 1;
}

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc13: return "mfcc13";
    case FeatureKind::kMfcc39: return "mfcc39";
    case FeatureKind::kRmfcc39: return "rmfcc39";
    case FeatureKind::kMpdss25: return "mpdss25";
    case FeatureKind::kTandem: return "tandem";
    case FeatureKind::kConcat: return "concat";
    case FeatureKind::kPitchContour: return "pc";
    case FeatureKind::kEpochStrengthContour: return "esc";
  }
  return "concat";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  for (auto k : {FeatureKind::kMfcc13, FeatureKind::kMfcc39, FeatureKind::kRmfcc39,
                 FeatureKind::kMpdss25, FeatureKind::kTandem, FeatureKind::kConcat,
                 FeatureKind::kPitchContour, FeatureKind::kEpochStrengthContour}) {
    if (FeatureKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kUnknownToken, "unknown feature kind '" + std::string(name) + "'");
}

size_t FeatureKindDim(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc13: return 13;
    case FeatureKind::kMfcc39: return 39;
    case FeatureKind::kRmfcc39: return 39;
    case FeatureKind::kMpdss25: return 25;
    default: return 0;
  }
}

FeatureMatrix::FeatureMatrix(FeatureKind kind, size_t rows, size_t cols,
                             std::vector<double> data, double frame_shift_s)
    : kind_(kind), rows_(rows), cols_(cols), frame_shift_s_(frame_shift_s),
      data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "feature data size does not match rows*cols");
  }
  const size_t want = FeatureKindDim(kind);
  if (want != 0 && cols_ != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(FeatureKindName(kind)) + " needs " + std::to_string(want) +
                    " columns, got " + std::to_string(cols_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite feature value");
  }
}

FeatureMatrix FeatureMatrix::Concat(std::span<const FeatureMatrix> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to concatenate");
  const size_t rows = parts[0].rows();
  size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw Error(ErrorCode::kDimensionMismatch, "concatenated features differ in frame count");
    }
    cols += p.cols();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (size_t r = 0; r < rows; ++r) {
    for (const auto& p : parts) {
      const auto row = p.row(r);
      data.insert(data.end(), row.begin(), row.end());
    }
  }
  return FeatureMatrix(FeatureKind::kConcat, rows, cols, std::move(data),
                       parts[0].frame_shift_s());
}

std::vector<double> MakeWindow(size_t length, WindowType type) {
  std::vector<double> w(length, 1.0);
  if (type == WindowType::kHamming && length > 1) {
    for (size_t n = 0; n < length; ++n) {
      w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                    static_cast<double>(length - 1));
    }
  }
  return w;
}

std::vector<std::vector<double>> FrameSignal(std::span<const double> samples, const FrameGrid& g) {
  g.Validate();
  if (samples.size() < g.frame_len_samples) {
    throw Error(ErrorCode::kLength, "signal of " + std::to_string(samples.size()) +
                                        " samples is shorter than one frame");
  }
  const auto window = MakeWindow(g.frame_len_samples, g.window);
  const size_t count = g.NumFrames(samples.size());
  std::vector<std::vector<double>> frames(count, std::vector<double>(g.frame_len_samples));
  for (size_t f = 0; f < count; ++f) {
    const size_t start = f * g.frame_shift_samples;
    for (size_t n = 0; n < g.frame_len_samples; ++n) {
      frames[f][n] = samples[start + n] * window[n];
    }
  }
  return frames;
}

MelFilterbank::MelFilterbank(size_t n_fft, int sample_rate_hz, size_t n_filters, double low_hz,
                             double high_hz) {
  if (n_filters == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one Mel filter");
  if (!(high_hz > low_hz) || low_hz < 0.0 || high_hz > sample_rate_hz / 2.0 + 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "Mel band edges out of range");
  }
  const double mel_low = HzToMel(low_hz);
  const double mel_high = HzToMel(high_hz);
  const double step = (mel_high - mel_low) / static_cast<double>(n_filters + 1);
  const size_t num_bins = n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(n_fft);
  filters_.resize(n_filters);
  for (size_t m = 0; m < n_filters; ++m) {
    const double left = mel_low + step * static_cast<double>(m);
    const double center = left + step;
    const double right = center + step;
    Filter& filt = filters_[m];
    bool started = false;
    for (size_t k = 0; k < num_bins; ++k) {
      const double mel = HzToMel(bin_hz * static_cast<double>(k));
      double weight = 0.0;
      if (mel > left && mel <= center) {
        weight = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        weight = (right - mel) / (right - center);
      }
      if (weight > 0.0) {
        if (!started) {
          filt.first = k;
          started = true;
        }
        filt.weights.resize(k - filt.first + 1, 0.0);
        filt.weights.back() = weight;
      }
    }
    if (!started) {
      throw Error(ErrorCode::kConfig, "Mel filter " + std::to_string(m) +
                                          " covers no FFT bins; use fewer filters or a larger FFT");
    }
  }
}

std::vector<double> MelFilterbank::Apply(std::span<const double> power) const {
  std::vector<double> out(filters_.size(), 0.0);
  for (size_t m = 0; m < filters_.size(); ++m) {
    const Filter& f = filters_[m];
    double acc = 0.0;
    for (size_t i = 0; i < f.weights.size(); ++i) acc += f.weights[i] * power[f.first + i];
    out[m] = acc;
  }
  return out;
}

std::vector<double> DctII(std::span<const double> input, size_t n_out) {
  const size_t n = input.size();
  std::vector<double> out(n_out, 0.0);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (size_t j = 0; j < n_out; ++j) {
    double acc = 0.0;
    for (size_t m = 0; m < n; ++m) {
      acc += input[m] * std::cos(std::numbers::pi * static_cast<double>(j) *
                                 (static_cast<double>(m) + 0.5) / static_cast<double>(n));
    }
    out[j] = acc * (j == 0 ? scale0 : scale);
  }
  return out;
}

FeatureMatrix Mfcc(const Waveform& w, const FrameGrid& g, const MfccOptions& opts) {
  if (opts.n_mels < opts.n_coeffs) {
    throw Error(ErrorCode::kInvalidArgument, "n_mels must be >= n_coeffs");
  }
  if (opts.n_coeffs != 13) {
    throw Error(ErrorCode::kInvalidArgument, "MFCC13 output requires n_coeffs = 13");
  }
  std::vector<double> signal = w.samples;
  if (opts.preemphasis > 0.0) {
    for (size_t i = signal.size(); i-- > 1;) signal[i] -= opts.preemphasis * signal[i - 1];
  }
  const auto frames = FrameSignal(signal, g);
  const Fft fft(NextPowerOfTwo(g.frame_len_samples));
  const double high = opts.high_hz > 0.0 ? opts.high_hz : w.sample_rate_hz / 2.0;
  const MelFilterbank bank(fft.size(), w.sample_rate_hz, opts.n_mels, opts.low_hz, high);

  std::vector<double> data;
  data.reserve(frames.size() * opts.n_coeffs);
  std::vector<double> log_energy(opts.n_mels);
  for (const auto& frame : frames) {
    const auto power = fft.PowerSpectrum(frame);
    const auto energies = bank.Apply(power);
    for (size_t m = 0; m < energies.size(); ++m) {
      log_energy[m] = std::log(std::max(energies[m], opts.log_floor));
    }
    const auto cep = DctII(log_energy, opts.n_coeffs);
    data.insert(data.end(), cep.begin(), cep.end());
  }
  return FeatureMatrix(FeatureKind::kMfcc13, frames.size(), opts.n_coeffs, std::move(data),
                       static_cast<double>(g.frame_shift_samples) / w.sample_rate_hz);
}

std::vector<double> RegressionDeltas(std::span<const double> data, size_t rows, size_t cols) {
  constexpr int kWindow = 2;
  constexpr double kDenominator = 2.0 * (1 * 1 + 2 * 2);
  std::vector<double> out(rows * cols, 0.0);
  const auto clamp_row = [rows](long r) {
    return static_cast<size_t>(std::clamp<long>(r, 0, static_cast<long>(rows) - 1));
  };
  for (size_t t = 0; t < rows; ++t) {
    for (int k = 1; k <= kWindow; ++k) {
      const size_t ahead = clamp_row(static_cast<long>(t) + k);
      const size_t behind = clamp_row(static_cast<long>(t) - k);
      for (size_t c = 0; c < cols; ++c) {
        out[t * cols + c] += k * (data[ahead * cols + c] - data[behind * cols + c]);
      }
    }
    for (size_t c = 0; c < cols; ++c) out[t * cols + c] /= kDenominator;
  }
  return out;
}

FeatureMatrix AddDeltas(const FeatureMatrix& f) {
  if (f.rows() == 0) throw Error(ErrorCode::kLength, "deltas need at least one frame");
  const size_t rows = f.rows();
  const size_t cols = f.cols();
  const auto delta = RegressionDeltas(f.data(), rows, cols);
  const auto delta2 = RegressionDeltas(delta, rows, cols);
  std::vector<double> data;
  data.reserve(rows * cols * 3);
  for (size_t t = 0; t < rows; ++t) {
    const auto row = f.row(t);
    data.insert(data.end(), row.begin(), row.end());
    data.insert(data.end(), delta.begin() + static_cast<std::ptrdiff_t>(t * cols),
                delta.begin() + static_cast<std::ptrdiff_t>((t + 1) * cols));
    data.insert(data.end(), delta2.begin() + static_cast<std::ptrdiff_t>(t * cols),
                delta2.begin() + static_cast<std::ptrdiff_t>((t + 1) * cols));
  }
  const FeatureKind kind =
      f.kind() == FeatureKind::kMfcc13 ? FeatureKind::kMfcc39 : FeatureKind::kConcat;
  return FeatureMatrix(kind, rows, cols * 3, std::move(data), f.frame_shift_s());
}

}  // namespace phonemode
