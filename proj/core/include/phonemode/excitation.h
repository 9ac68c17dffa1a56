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

#ifndef PHONEMODE_EXCITATION_H_
#define PHONEMODE_EXCITATION_H_

#include <span>
#include <vector>

#include "phonemode/audio_io.h"
#include "phonemode/spectral.h"

namespace phonemode {

// ---------------------------------------------------------------------------
// Zero-frequency filtering and epochs.

struct ZffOptions {
  // Trend-removal window, in multiples of the average pitch period.
  double window_periods = 1.5;
  int trend_passes = 3;
  // Lag band searched for the average pitch period.
  double min_f0_hz = 50.0;
  double max_f0_hz = 500.0;
  // Short-time autocorrelation frames for the period estimate. Frames with
  // mean power below period_min_energy, or whose in-band peak is below
  // period_min_peak * r[0], are ignored.
  double period_frame_s = 0.040;
  double period_shift_s = 0.010;
  double period_min_energy = 1e-8;
  double period_min_peak = 0.3;
  // Period used when no frame qualifies (e.g. silence).
  double fallback_period_s = 0.010;
};

// Average pitch period in samples: the median, over the frames of the whole
// signal, of the short-time autocorrelation peak lag in
// rate/max_f0 .. rate/min_f0.
double EstimateAveragePitchPeriod(const Waveform& w, const ZffOptions& opts = {});

// Differences the signal, runs it twice through a 0 Hz resonator
// (y[n] = 2y[n-1] - y[n-2] + x[n]), then subtracts the local mean over a
// window of window_periods average pitch periods, trend_passes times.
// Each resonator's response (n+1) leads a sampled ramp by one sample, so the
// output is delayed by two samples to keep crossings on the excitation.
// Throws kLength when the window exceeds the signal.
std::vector<double> ZeroFrequencyFilter(const Waveform& w, const ZffOptions& opts = {});

// Removes the local mean over 2*half_width+1 samples (truncated at the
// edges) from x.
std::vector<double> RemoveLocalMean(std::span<const double> x, size_t half_width);

struct EpochSet {
  std::vector<size_t> locations;  // strictly increasing sample indices
  std::vector<double> strengths;  // > 0, one per location

  size_t size() const { return locations.size(); }
  void Validate() const;
};

// Epochs at negative-to-positive zero crossings of a ZFF signal; strength is
// z[i+1] - z[i] across the crossing. The location is whichever of the two
// samples is closer to zero.
EpochSet ExtractEpochs(std::span<const double> zff);

// ---------------------------------------------------------------------------
// Sentence-level contours.

enum class ContourKind { kPitch, kEpochStrength };

struct Contour {
  ContourKind kind = ContourKind::kPitch;
  std::vector<double> values;

  FeatureMatrix ToFeatures() const;
};

struct ContourOptions {
  double hop_s = 0.010;        // one point per 10 ms
  double span_s = 0.100;       // analysis span around each point
  size_t num_points = 500;     // 5 s utterances
  double min_f0_hz = 50.0;
  double max_f0_hz = 500.0;
};

// Point k covers samples [k*hop, (k+1)*hop). Its value is the mean of the
// instantaneous pitch rate/t0 over consecutive epoch pairs whose interval
// overlaps the analysis span centred on the point; pairs outside the
// plausible F0 band are ignored and points without a pair are 0.
// Throws kLength when num_samples does not yield num_points points.
Contour PitchContour(const EpochSet& e, size_t num_samples, int sample_rate_hz,
                     const ContourOptions& opts = {});

// Mean epoch strength per point, 0 where the pitch contour is unvoiced,
// max-normalized to [0, 1]. Voiced points without an epoch inside their
// 10 ms bin take the nearest epoch's strength.
Contour EpochStrengthContour(const EpochSet& e, size_t num_samples, int sample_rate_hz,
                             const ContourOptions& opts = {});

// ---------------------------------------------------------------------------
// Linear prediction.

// Predictor convention: x[n] ~ sum_k coefficients[k-1] * x[n-k].
struct LpModel {
  int order = 0;
  std::vector<double> coefficients;
  std::vector<double> reflection;
  double gain = 0.0;  // final prediction-error energy
  bool zero_energy = false;
};

// Autocorrelation method solved by Levinson-Durbin. A zero-energy frame
// yields an all-zero model with zero_energy set.
LpModel LpAnalysis(std::span<const double> frame, int order = 10);

// Per-frame inverse filtering of the signal with a Hamming-windowed LP fit,
// recombined by window-weighted overlap-add.
Waveform LpResidual(const Waveform& w, int order, const FrameGrid& g);

// ---------------------------------------------------------------------------
// Residual features.

// Per Mel band: 1 - geometric mean / arithmetic mean of the power spectrum
// bins inside the band. Construction throws kConfig when a band holds fewer
// than two bins.
class MpdssExtractor {
 public:
  MpdssExtractor(int sample_rate_hz, const FrameGrid& g, size_t n_bands = 25);

  FeatureMatrix Compute(const Waveform& residual) const;
  std::vector<double> ComputeFrame(std::span<const double> windowed_frame) const;

 private:
  FrameGrid grid_;
  int sample_rate_hz_;
  Fft fft_;
  std::vector<std::pair<size_t, size_t>> bands_;  // inclusive bin ranges
};

FeatureMatrix Mpdss(const Waveform& residual, const FrameGrid& g, size_t n_bands = 25);

// MFCC + deltas of the residual, labelled RMFCC39.
FeatureMatrix Rmfcc(const Waveform& residual, const FrameGrid& g, const MfccOptions& opts = {});

}  // namespace phonemode

#endif  // PHONEMODE_EXCITATION_H_
