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

#include "phonemode/excitation.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "phonemode/error.h"
#include "phonemode/fft.h"

namespace phonemode {

double EstimateAveragePitchPeriod(const Waveform& w, const ZffOptions& opts) {
  const auto& x = w.samples;
  const size_t n = x.size();
  const auto min_lag =
      std::max<size_t>(1, static_cast<size_t>(std::floor(w.sample_rate_hz / opts.max_f0_hz)));
  const auto max_lag = static_cast<size_t>(std::ceil(w.sample_rate_hz / opts.min_f0_hz));
  const double fallback = opts.fallback_period_s * w.sample_rate_hz;
  const auto len = static_cast<size_t>(std::round(opts.period_frame_s * w.sample_rate_hz));
  const auto shift = std::max<size_t>(
      1, static_cast<size_t>(std::round(opts.period_shift_s * w.sample_rate_hz)));
  if (len <= max_lag + 1 || n < len) return fallback;

  size_t fft_size = 1;
  while (fft_size < 2 * len) fft_size *= 2;
  const Fft fft(fft_size);
  std::vector<double> frame(len);
  std::vector<std::complex<double>> buf(fft_size);
  std::vector<double> lags;
  for (size_t start = 0; start + len <= n; start += shift) {
    double mean = 0.0;
    for (size_t i = 0; i < len; ++i) mean += x[start + i];
    mean /= static_cast<double>(len);
    for (size_t i = 0; i < len; ++i) frame[i] = x[start + i] - mean;
    // Wiener-Khinchin: the power spectrum is real and even, so a forward
    // transform of it gives the (scaled) autocorrelation.
    const auto power = fft.PowerSpectrum(frame);
    for (size_t k = 0; k < fft_size; ++k) buf[k] = power[k <= fft_size / 2 ? k : fft_size - k];
    fft.Forward(buf);
    const double r0 = buf[0].real();
    if (!(r0 > opts.period_min_energy * static_cast<double>(fft_size) * static_cast<double>(len))) {
      continue;
    }
    size_t best_lag = min_lag;
    for (size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (buf[lag].real() > buf[best_lag].real()) best_lag = lag;
    }
    if (buf[best_lag].real() > opts.period_min_peak * r0) {
      lags.push_back(static_cast<double>(best_lag));
    }
  }
  if (lags.empty()) return fallback;
  auto mid = lags.begin() + static_cast<std::ptrdiff_t>(lags.size() / 2);
  std::nth_element(lags.begin(), mid, lags.end());
  return *mid;
}

std::vector<double> RemoveLocalMean(std::span<const double> x, size_t half_width) {
  const size_t n = x.size();
  std::vector<double> out(n);
  // Sliding sum, re-anchored periodically to bound cancellation error on the
  // large polynomial trend that the resonators leave behind.
  constexpr size_t kReanchor = 512;
  double sum = 0.0;
  size_t lo = 0, hi = 0;  // current window [lo, hi)
  for (size_t i = 0; i < n; ++i) {
    const size_t want_lo = i >= half_width ? i - half_width : 0;
    const size_t want_hi = std::min(n, i + half_width + 1);
    if (i % kReanchor == 0) {
      sum = 0.0;
      for (size_t j = want_lo; j < want_hi; ++j) sum += x[j];
    } else {
      for (; hi < want_hi; ++hi) sum += x[hi];
      for (; lo < want_lo; ++lo) sum -= x[lo];
    }
    lo = want_lo;
    hi = want_hi;
    out[i] = x[i] - sum / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> ZeroFrequencyFilter(const Waveform& w, const ZffOptions& opts) {
  constexpr size_t kResonatorLead = 2;
  const auto& x = w.samples;
  const size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::kLength, "zero-frequency filtering needs >= 3 samples");

  const double period = EstimateAveragePitchPeriod(w, opts);
  const double window = opts.window_periods * period;
  const auto half_width = static_cast<size_t>(std::max(1.0, std::round((window - 1.0) / 2.0)));
  if (2 * half_width + 1 > n) {
    throw Error(ErrorCode::kLength, "trend-removal window of " +
                                        std::to_string(2 * half_width + 1) +
                                        " samples exceeds the signal length");
  }

  // Edge-replicate padding keeps the truncated trend-removal windows of the
  // boundaries away from the real samples; d[n] is zero inside the padding.
  const size_t pad = static_cast<size_t>(opts.trend_passes + 1) * half_width + 1;
  const size_t total = n + 2 * pad;
  auto sample = [&](size_t i) { return x[std::clamp(i, pad, pad + n - 1) - pad]; };
  std::vector<double> y(total);
  double y1_prev = 0.0, y1_prev2 = 0.0, y2_prev = 0.0, y2_prev2 = 0.0;
  for (size_t i = 0; i < total; ++i) {
    const double d = i == 0 ? 0.0 : sample(i) - sample(i - 1);
    const double y1 = 2.0 * y1_prev - y1_prev2 + d;
    const double y2 = 2.0 * y2_prev - y2_prev2 + y1;
    y1_prev2 = y1_prev;
    y1_prev = y1;
    y2_prev2 = y2_prev;
    y2_prev = y2;
    y[i] = y2;
  }
  for (int pass = 0; pass < opts.trend_passes; ++pass) y = RemoveLocalMean(y, half_width);
  const size_t from = pad - kResonatorLead;
  return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(from),
                             y.begin() + static_cast<std::ptrdiff_t>(from + n));
}

void EpochSet::Validate() const {
  if (locations.size() != strengths.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "epoch locations and strengths differ in length");
  }
  for (size_t i = 0; i < locations.size(); ++i) {
    if (i > 0 && locations[i] <= locations[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "epoch locations must increase strictly");
    }
    if (!(strengths[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "epoch strengths must be positive");
    }
  }
}

EpochSet ExtractEpochs(std::span<const double> zff) {
  EpochSet e;
  for (size_t i = 0; i + 1 < zff.size(); ++i) {
    if (zff[i] < 0.0 && zff[i + 1] >= 0.0) {
      const size_t at = std::abs(zff[i]) < std::abs(zff[i + 1]) ? i : i + 1;
      if (!e.locations.empty() && at <= e.locations.back()) continue;
      e.locations.push_back(at);
      e.strengths.push_back(zff[i + 1] - zff[i]);
    }
  }
  return e;
}

FeatureMatrix Contour::ToFeatures() const {
  return FeatureMatrix(kind == ContourKind::kPitch ? FeatureKind::kPitchContour
                                                   : FeatureKind::kEpochStrengthContour,
                       1, values.size(), values);
}

namespace {

struct ContourGeometry {
  double hop = 0.0;   // samples
  double half_span = 0.0;
  size_t points = 0;
};

ContourGeometry CheckGeometry(size_t num_samples, int rate, const ContourOptions& opts) {
  ContourGeometry g;
  g.hop = opts.hop_s * rate;
  g.half_span = 0.5 * opts.span_s * rate;
  const auto points = static_cast<size_t>(std::floor(num_samples / g.hop + 1e-9));
  if (points != opts.num_points) {
    throw Error(ErrorCode::kLength, "a " + std::to_string(num_samples) + "-sample signal gives " +
                                        std::to_string(points) + " contour points, expected " +
                                        std::to_string(opts.num_points));
  }
  g.points = points;
  return g;
}

}  // namespace

Contour PitchContour(const EpochSet& e, size_t num_samples, int sample_rate_hz,
                     const ContourOptions& opts) {
  e.Validate();
  const auto geo = CheckGeometry(num_samples, sample_rate_hz, opts);
  Contour c{ContourKind::kPitch, std::vector<double>(geo.points, 0.0)};
  const auto& loc = e.locations;
  if (loc.size() < 2) return c;

  for (size_t k = 0; k < geo.points; ++k) {
    const double center = (static_cast<double>(k) + 0.5) * geo.hop;
    const double lo = center - geo.half_span;
    const double hi = center + geo.half_span;
    // First pair whose right epoch reaches the span.
    auto it = std::lower_bound(loc.begin() + 1, loc.end(), lo,
                               [](size_t v, double t) { return static_cast<double>(v) < t; });
    double sum = 0.0;
    int count = 0;
    for (auto j = static_cast<size_t>(it - loc.begin()); j < loc.size(); ++j) {
      if (static_cast<double>(loc[j - 1]) > hi) break;
      const double f0 = sample_rate_hz / static_cast<double>(loc[j] - loc[j - 1]);
      if (f0 < opts.min_f0_hz || f0 > opts.max_f0_hz) continue;
      sum += f0;
      ++count;
    }
    if (count == 0) continue;
    const double f0 = sum / count;
    if (f0 >= opts.min_f0_hz && f0 <= opts.max_f0_hz) c.values[k] = f0;
  }
  return c;
}

Contour EpochStrengthContour(const EpochSet& e, size_t num_samples, int sample_rate_hz,
                             const ContourOptions& opts) {
  const Contour pitch = PitchContour(e, num_samples, sample_rate_hz, opts);
  const auto geo = CheckGeometry(num_samples, sample_rate_hz, opts);
  Contour c{ContourKind::kEpochStrength, std::vector<double>(geo.points, 0.0)};
  const auto& loc = e.locations;
  if (loc.empty()) return c;

  for (size_t k = 0; k < geo.points; ++k) {
    if (pitch.values[k] <= 0.0) continue;
    const double begin = static_cast<double>(k) * geo.hop;
    const double end = begin + geo.hop;
    auto it = std::lower_bound(loc.begin(), loc.end(), begin,
                               [](size_t v, double t) { return static_cast<double>(v) < t; });
    double sum = 0.0;
    int count = 0;
    for (auto j = static_cast<size_t>(it - loc.begin());
         j < loc.size() && static_cast<double>(loc[j]) < end; ++j) {
      sum += e.strengths[j];
      ++count;
    }
    if (count > 0) {
      c.values[k] = sum / count;
      continue;
    }
    const double center = begin + 0.5 * geo.hop;
    size_t nearest = loc.size();
    double best = std::numeric_limits<double>::infinity();
    const auto idx = static_cast<size_t>(it - loc.begin());
    for (size_t j : {idx == 0 ? loc.size() : idx - 1, idx}) {
      if (j >= loc.size()) continue;
      const double d = std::abs(static_cast<double>(loc[j]) - center);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    if (nearest < loc.size() && best <= geo.half_span) c.values[k] = e.strengths[nearest];
  }
  const double peak = *std::max_element(c.values.begin(), c.values.end());
  if (peak > 0.0) {
    for (double& v : c.values) v /= peak;
  }
  return c;
}

LpModel LpAnalysis(std::span<const double> frame, int order) {
  if (order < 0) throw Error(ErrorCode::kInvalidArgument, "LP order must be >= 0");
  if (frame.size() <= static_cast<size_t>(order)) {
    throw Error(ErrorCode::kLength, "LP frame must be longer than the order");
  }
  std::vector<double> r(static_cast<size_t>(order) + 1, 0.0);
  for (size_t lag = 0; lag < r.size(); ++lag) {
    double acc = 0.0;
    for (size_t i = lag; i < frame.size(); ++i) acc += frame[i] * frame[i - lag];
    r[lag] = acc;
  }

  LpModel m;
  m.order = order;
  m.coefficients.assign(static_cast<size_t>(order), 0.0);
  m.reflection.assign(static_cast<size_t>(order), 0.0);
  if (!(r[0] > 0.0)) {
    m.zero_energy = true;
    return m;
  }

  std::vector<double> a(static_cast<size_t>(order) + 1, 0.0);
  std::vector<double> prev(a.size(), 0.0);
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[static_cast<size_t>(i)];
    for (int j = 1; j < i; ++j) acc -= a[static_cast<size_t>(j)] * r[static_cast<size_t>(i - j)];
    const double k = acc / err;
    if (!(std::abs(k) < 1.0)) break;  // numerically singular; keep lower-order fit
    prev = a;
    a[static_cast<size_t>(i)] = k;
    for (int j = 1; j < i; ++j) {
      a[static_cast<size_t>(j)] = prev[static_cast<size_t>(j)] - k * prev[static_cast<size_t>(i - j)];
    }
    m.reflection[static_cast<size_t>(i - 1)] = k;
    err *= (1.0 - k * k);
  }
  for (int j = 1; j <= order; ++j) m.coefficients[static_cast<size_t>(j - 1)] = a[static_cast<size_t>(j)];
  m.gain = err;
  return m;
}

Waveform LpResidual(const Waveform& w, int order, const FrameGrid& g) {
  g.Validate();
  const auto& x = w.samples;
  const size_t n = x.size();
  Waveform out{std::vector<double>(n, 0.0), w.sample_rate_hz};
  if (n == 0) return out;

  const size_t len = std::min(g.frame_len_samples, n);
  std::vector<size_t> starts;
  for (size_t s = 0; s + len <= n; s += g.frame_shift_samples) starts.push_back(s);
  if (starts.back() + len < n) starts.push_back(n - len);

  const auto window = MakeWindow(len, WindowType::kHamming);
  std::vector<double> weight(n, 0.0);
  std::vector<double> frame(len);
  for (size_t start : starts) {
    for (size_t i = 0; i < len; ++i) frame[i] = x[start + i] * window[i];
    const LpModel m = LpAnalysis(frame, std::min<int>(order, static_cast<int>(len) - 1));
    for (size_t i = 0; i < len; ++i) {
      const size_t t = start + i;
      double pred = 0.0;
      for (size_t k = 1; k <= m.coefficients.size() && k <= t; ++k) {
        pred += m.coefficients[k - 1] * x[t - k];
      }
      out.samples[t] += window[i] * (x[t] - pred);
      weight[t] += window[i];
    }
  }
  for (size_t t = 0; t < n; ++t) {
    if (weight[t] > 0.0) out.samples[t] /= weight[t];
  }
  return out;
}

MpdssExtractor::MpdssExtractor(int sample_rate_hz, const FrameGrid& g, size_t n_bands)
    : grid_(g), sample_rate_hz_(sample_rate_hz), fft_(NextPowerOfTwo(g.frame_len_samples)) {
  g.Validate();
  const MelFilterbank bank(fft_.size(), sample_rate_hz, n_bands, 0.0, sample_rate_hz / 2.0);
  for (size_t m = 0; m < bank.num_filters(); ++m) {
    const size_t first = bank.first_bin(m);
    const size_t last = bank.last_bin(m);
    if (last < first + 1) {
      throw Error(ErrorCode::kConfig, "MPDSS band " + std::to_string(m) +
                                          " spans fewer than two spectrum bins");
    }
    bands_.emplace_back(first, last);
  }
}

std::vector<double> MpdssExtractor::ComputeFrame(std::span<const double> windowed_frame) const {
  const auto power = fft_.PowerSpectrum(windowed_frame);
  std::vector<double> out(bands_.size(), 0.0);
  for (size_t b = 0; b < bands_.size(); ++b) {
    const auto [first, last] = bands_[b];
    const double count = static_cast<double>(last - first + 1);
    double arith = 0.0;
    double log_sum = 0.0;
    bool has_zero = false;
    for (size_t k = first; k <= last; ++k) {
      arith += power[k];
      if (power[k] > 0.0) {
        log_sum += std::log(power[k]);
      } else {
        has_zero = true;
      }
    }
    arith /= count;
    if (!(arith > 0.0)) continue;  // silent band counts as flat
    const double geo = has_zero ? 0.0 : std::exp(log_sum / count);
    out[b] = std::clamp(1.0 - geo / arith, 0.0, 1.0);
  }
  return out;
}

FeatureMatrix MpdssExtractor::Compute(const Waveform& residual) const {
  if (residual.sample_rate_hz != sample_rate_hz_) {
    throw Error(ErrorCode::kInvalidArgument, "MPDSS extractor built for another sample rate");
  }
  const auto frames = FrameSignal(residual.samples, grid_);
  std::vector<double> data;
  data.reserve(frames.size() * bands_.size());
  for (const auto& f : frames) {
    const auto row = ComputeFrame(f);
    data.insert(data.end(), row.begin(), row.end());
  }
  const FeatureKind kind = bands_.size() == 25 ? FeatureKind::kMpdss25 : FeatureKind::kConcat;
  return FeatureMatrix(kind, frames.size(), bands_.size(), std::move(data),
                       static_cast<double>(grid_.frame_shift_samples) / sample_rate_hz_);
}

FeatureMatrix Mpdss(const Waveform& residual, const FrameGrid& g, size_t n_bands) {
  return MpdssExtractor(residual.sample_rate_hz, g, n_bands).Compute(residual);
}

FeatureMatrix Rmfcc(const Waveform& residual, const FrameGrid& g, const MfccOptions& opts) {
  const FeatureMatrix full = AddDeltas(Mfcc(residual, g, opts));
  return FeatureMatrix(FeatureKind::kRmfcc39, full.rows(), full.cols(), full.data(),
                       full.frame_shift_s());
}

}  // namespace phonemode
