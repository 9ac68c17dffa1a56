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
#include <numeric>

#include <gtest/gtest.h>

#include "phonemode/random.h"
#include "test_util.h"

namespace phonemode {
namespace {

using testing::LpVowel;

Waveform ImpulseTrain(size_t period, size_t n, std::vector<size_t>* where, double amp = 1.0) {
  Waveform w{std::vector<double>(n, 0.0), 16000};
  for (size_t i = period / 2; i < n; i += period) {
    w.samples[i] = amp;
    where->push_back(i);
  }
  return w;
}

double Median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

TEST(ZffTest, ZeroCrossingsSitOnImpulses) {
  // Negative impulses, the polarity of the glottal flow derivative at closure.
  // The first and last impulses lack a neighbour on one side of the
  // trend-removal window and are not checked.
  std::vector<size_t> truth;
  const Waveform w = ImpulseTrain(100, 16000, &truth, -1.0);
  const auto z = ZeroFrequencyFilter(w);
  const EpochSet e = ExtractEpochs(z);
  e.Validate();
  EXPECT_LE(std::abs(static_cast<long>(e.size()) - static_cast<long>(truth.size())), 1);
  size_t matched = 0;
  truth = std::vector<size_t>(truth.begin() + 1, truth.end() - 1);
  for (size_t t : truth) {
    for (size_t l : e.locations) {
      if (std::abs(static_cast<long>(l) - static_cast<long>(t)) <= 2) {
        ++matched;
        break;
      }
    }
  }
  EXPECT_EQ(matched, truth.size());
}

TEST(ZffTest, AveragePeriodOfVowels) {
  for (double f0 : {80.0, 120.0, 200.0, 300.0}) {
    const Waveform w = LpVowel(f0, 1.0);
    EXPECT_NEAR(EstimateAveragePitchPeriod(w), 16000.0 / f0, 0.03 * 16000.0 / f0) << f0;
  }
  EXPECT_DOUBLE_EQ(EstimateAveragePitchPeriod(Waveform{std::vector<double>(8000, 0.0), 16000}),
                   160.0);
}

TEST(ZffTest, DcAndSilence) {
  const Waveform dc{std::vector<double>(8000, 0.7), 16000};
  for (double v : ZeroFrequencyFilter(dc)) EXPECT_LE(std::abs(v), 1e-6 * 0.7);
  const Waveform silence{std::vector<double>(8000, 0.0), 16000};
  EXPECT_EQ(ExtractEpochs(ZeroFrequencyFilter(silence)).size(), 0u);
}

TEST(ZffTest, IsLinearAndEpochsAreScaleInvariant) {
  Rng rng(12);
  const Waveform w = LpVowel(140.0, 0.5);
  const auto base = ZeroFrequencyFilter(w);
  const EpochSet e0 = ExtractEpochs(base);
  double peak = 0.0;
  for (double v : base) peak = std::max(peak, std::abs(v));
  for (int trial = 0; trial < 5; ++trial) {
    const double a = std::exp(rng.Uniform(-3.0, 3.0));
    Waveform s = w;
    for (double& v : s.samples) v *= a;
    const auto z = ZeroFrequencyFilter(s);
    for (size_t i = 0; i < z.size(); ++i) ASSERT_NEAR(z[i], a * base[i], 1e-6 * a * peak);
    const EpochSet e = ExtractEpochs(z);
    EXPECT_EQ(e.locations, e0.locations);
    for (size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(e.strengths[i], a * e0.strengths[i], 1e-6 * a * peak);
  }
}

TEST(ZffTest, RejectsShortSignals) {
  EXPECT_PM_ERROR(ZeroFrequencyFilter(Waveform{{1.0, 2.0}, 16000}), ErrorCode::kLength);
  ZffOptions o;
  o.fallback_period_s = 0.1;
  EXPECT_PM_ERROR(ZeroFrequencyFilter(Waveform{std::vector<double>(100, 0.0), 16000}, o),
                  ErrorCode::kLength);
}

TEST(EpochTest, ExtractionRules) {
  EXPECT_EQ(ExtractEpochs(std::vector<double>{5, 4, 3, 2, 1}).size(), 0u);
  const EpochSet e = ExtractEpochs(std::vector<double>{-1.0, 0.2, 1.0, -2.0, -0.1, 3.0});
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e.locations[0], 1u);  // 0.2 is closer to zero than -1
  EXPECT_DOUBLE_EQ(e.strengths[0], 1.2);
  EXPECT_EQ(e.locations[1], 4u);
  EXPECT_DOUBLE_EQ(e.strengths[1], 3.1);
  EpochSet bad{{3, 2}, {1.0, 1.0}};
  EXPECT_PM_ERROR(bad.Validate(), ErrorCode::kInvalidArgument);
  bad = {{1, 2}, {1.0}};
  EXPECT_PM_ERROR(bad.Validate(), ErrorCode::kDimensionMismatch);
  bad = {{1, 2}, {1.0, 0.0}};
  EXPECT_PM_ERROR(bad.Validate(), ErrorCode::kInvalidArgument);
}

TEST(ContourTest, PitchFromRegularEpochs) {
  EpochSet e;
  for (size_t i = 40; i < 80000; i += 80) {
    e.locations.push_back(i);
    e.strengths.push_back(1.0);
  }
  const Contour c = PitchContour(e, 80000, 16000);
  ASSERT_EQ(c.values.size(), 500u);
  for (double v : c.values) EXPECT_NEAR(v, 200.0, 1e-9);
  for (double v : PitchContour(EpochSet{}, 80000, 16000).values) EXPECT_EQ(v, 0.0);
  EXPECT_PM_ERROR(PitchContour(e, 79000, 16000), ErrorCode::kLength);
}

TEST(ContourTest, PitchValuesAreZeroOrInBand) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    EpochSet e;
    size_t pos = rng.Index(200);
    while (pos < 80000) {
      e.locations.push_back(pos);
      e.strengths.push_back(rng.Uniform(0.1, 2.0));
      pos += 1 + rng.Index(rng.Uniform() < 0.05 ? 4000 : 400);
    }
    for (double v : PitchContour(e, 80000, 16000).values) {
      EXPECT_TRUE(v == 0.0 || (v >= 50.0 && v <= 500.0)) << v;
    }
    const Contour s = EpochStrengthContour(e, 80000, 16000);
    for (double v : s.values) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(ContourTest, UnvoicedGapGivesZeros) {
  EpochSet e;
  for (size_t i = 0; i < 80000; i += 100) {
    if (i > 30000 && i < 50000) continue;
    e.locations.push_back(i);
    e.strengths.push_back(1.0);
  }
  const Contour c = PitchContour(e, 80000, 16000);
  EXPECT_EQ(c.values[250], 0.0);
  EXPECT_NEAR(c.values[100], 160.0, 1e-9);
  EXPECT_EQ(EpochStrengthContour(e, 80000, 16000).values[250], 0.0);
}

TEST(ContourTest, SawtoothVowelPitch) {
  // Sawtooth excitation at 120 Hz through one resonance.
  Waveform w{std::vector<double>(80000), 16000};
  double y1 = 0.0, y2 = 0.0;
  const double r = 0.97, a1 = 2.0 * r * std::cos(2.0 * M_PI * 600.0 / 16000.0), a2 = -r * r;
  for (size_t i = 0; i < w.size(); ++i) {
    const double saw = std::fmod(static_cast<double>(i) * 120.0 / 16000.0, 1.0) - 0.5;
    const double y = saw + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    w.samples[i] = y;
  }
  const Contour c = PitchContour(ExtractEpochs(ZeroFrequencyFilter(w)), w.size(), 16000);
  std::vector<double> voiced;
  for (double v : c.values)
    if (v > 0.0) voiced.push_back(v);
  ASSERT_GT(voiced.size(), 450u);
  EXPECT_NEAR(Median(voiced), 120.0, 2.0);
}

TEST(ContourTest, StrengthAlternatesWithImpulseAmplitude) {
  EpochSet e;
  for (size_t k = 0; k < 500; ++k) {
    e.locations.push_back(k * 160 + 80);
    e.strengths.push_back(k % 2 ? 0.5 : 1.0);
  }
  const Contour c = EpochStrengthContour(e, 80000, 16000);
  for (size_t k = 0; k < 500; ++k) EXPECT_DOUBLE_EQ(c.values[k], k % 2 ? 0.5 : 1.0);

  // The same construction through the filter chain.
  Waveform w{std::vector<double>(80000, 0.0), 16000};
  for (size_t k = 0; k < 500; ++k) w.samples[k * 160 + 80] = k % 2 ? -0.5 : -1.0;
  const Contour z = EpochStrengthContour(ExtractEpochs(ZeroFrequencyFilter(w)), 80000, 16000);
  for (size_t k = 10; k < 490; ++k) EXPECT_NEAR(z.values[k], k % 2 ? 0.5 : 1.0, 0.1) << k;
}

TEST(ContourTest, StrengthIsGainInvariant) {
  const Waveform w = LpVowel(150.0, 5.0);
  Waveform loud = w;
  for (double& v : loud.samples) v *= 2.0;
  const auto a = EpochStrengthContour(ExtractEpochs(ZeroFrequencyFilter(w)), w.size(), 16000);
  const auto b = EpochStrengthContour(ExtractEpochs(ZeroFrequencyFilter(loud)), w.size(), 16000);
  for (size_t k = 0; k < 500; ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-9);
  EXPECT_EQ(a.ToFeatures().kind(), FeatureKind::kEpochStrengthContour);
  EXPECT_EQ(a.ToFeatures().cols(), 500u);
}

TEST(PitchOracleTest, LpVowelsAcrossF0) {
  for (double f0 : {80.0, 120.0, 200.0, 300.0}) {
    const Waveform w = LpVowel(f0, 5.0);
    const Contour c = PitchContour(ExtractEpochs(ZeroFrequencyFilter(w)), w.size(), 16000);
    std::vector<double> err;
    for (double v : c.values)
      if (v > 0.0) err.push_back(std::abs(v - f0));
    EXPECT_GE(err.size(), 450u) << f0;
    EXPECT_LT(Median(err), 2.0) << f0;
  }
}

TEST(LpTest, WhiteNoiseGivesSmallCoefficients) {
  Rng rng(14);
  double mean_abs = 0.0;
  for (int f = 0; f < 100; ++f) {
    const auto x = testing::Noise(rng, 400);
    const LpModel m = LpAnalysis(x, 10);
    double energy = 0.0;
    for (double v : x) energy += v * v;
    EXPECT_NEAR(m.gain / energy, 1.0, 0.15);
    for (double a : m.coefficients) mean_abs += std::abs(a);
  }
  EXPECT_LT(mean_abs / 1000.0, 0.1);
}

TEST(LpTest, RecoversAr10Process) {
  // Stable AR(10) from two resonances and six real poles.
  const std::vector<double> a = {0.9, -0.5, 0.3, -0.2, 0.1, 0.05, -0.05, 0.02, -0.01, 0.01};
  Rng rng(15);
  std::vector<double> x(160000, 0.0);
  for (size_t n = 0; n < x.size(); ++n) {
    double v = rng.Gaussian();
    for (size_t k = 1; k <= 10 && k <= n; ++k) v += a[k - 1] * x[n - k];
    x[n] = v;
  }
  const LpModel m = LpAnalysis(x, 10);
  for (size_t k = 0; k < 10; ++k) EXPECT_NEAR(m.coefficients[k], a[k], 0.05) << k;
}

TEST(LpTest, ReflectionBoundsAndMonotoneError) {
  Rng rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> x(50 + rng.Index(400));
    double phase = rng.Uniform(0, 6.28);
    for (double& v : x) {
      phase += rng.Uniform(0.05, 0.5);
      v = std::sin(phase) + 0.1 * rng.Gaussian();
    }
    double prev = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    const LpModel full = LpAnalysis(x, 12);
    for (double k : full.reflection) EXPECT_LT(std::abs(k), 1.0);
    for (int p = 1; p <= 12; ++p) {
      const double g = LpAnalysis(x, p).gain;
      EXPECT_LE(g, prev * (1 + 1e-12));
      prev = g;
    }
  }
  const LpModel z = LpAnalysis(std::vector<double>(50, 0.0), 10);
  EXPECT_TRUE(z.zero_energy);
  EXPECT_PM_ERROR(LpAnalysis(std::vector<double>(5, 1.0), 10), ErrorCode::kLength);
}

double FrameFlatness(const std::vector<double>& x) {
  // Mean spectral flatness over 512-point frames.
  const Fft fft(512);
  double sum = 0.0;
  int frames = 0;
  for (size_t s = 0; s + 512 <= x.size(); s += 512) {
    const auto p = fft.PowerSpectrum(std::span<const double>(x.data() + s, 512));
    double lg = 0.0, ar = 0.0;
    for (size_t k = 1; k < p.size(); ++k) {
      lg += std::log(p[k] + 1e-300);
      ar += p[k];
    }
    const double n = static_cast<double>(p.size() - 1);
    sum += std::exp(lg / n) / (ar / n);
    ++frames;
  }
  return sum / frames;
}

TEST(ResidualTest, NoiseAndVowel) {
  Rng rng(17);
  const Waveform noise{testing::Noise(rng, 16000, 0.1), 16000};
  const Waveform rn = LpResidual(noise, 10, FrameGrid::ForRate(16000));
  double ein = 0.0, eout = 0.0;
  for (size_t i = 0; i < noise.size(); ++i) {
    ein += noise.samples[i] * noise.samples[i];
    eout += rn.samples[i] * rn.samples[i];
  }
  EXPECT_GE(eout / ein, 0.8);
  EXPECT_LE(eout / ein, 1.0);

  const Waveform vowel = LpVowel(130.0, 1.0);
  const Waveform rv = LpResidual(vowel, 10, FrameGrid::ForRate(16000));
  EXPECT_GT(FrameFlatness(rv.samples), FrameFlatness(vowel.samples));

  const Waveform silent{std::vector<double>(2000, 0.0), 16000};
  for (double v : LpResidual(silent, 10, FrameGrid::ForRate(16000)).samples) EXPECT_EQ(v, 0.0);
}

TEST(MpdssTest, RangeAndFlatness) {
  const FrameGrid g = FrameGrid::ForRate(16000);
  const MpdssExtractor ex(16000, g);
  // A frame whose spectrum is flat (a lone impulse) scores 0 everywhere.
  std::vector<double> impulse(400, 0.0);
  impulse[0] = 1.0;
  for (double v : ex.ComputeFrame(impulse)) EXPECT_NEAR(v, 0.0, 1e-12);

  Rng rng(18);
  const Waveform noise{testing::Noise(rng, 16000, 0.1), 16000};
  const auto fn = Mpdss(noise, g);
  EXPECT_EQ(fn.kind(), FeatureKind::kMpdss25);
  std::vector<double> noise_mean(25, 0.0);
  for (size_t t = 0; t < fn.rows(); ++t)
    for (size_t b = 0; b < 25; ++b) {
      EXPECT_GE(fn(t, b), 0.0);
      EXPECT_LE(fn(t, b), 1.0);
      noise_mean[b] += fn(t, b) / fn.rows();
    }
  for (double m : noise_mean) EXPECT_LT(m, 0.5);

  // A pure tone concentrates its band's power in a few bins.
  Waveform tone{std::vector<double>(8000), 16000};
  for (size_t i = 0; i < tone.size(); ++i) tone.samples[i] = std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
  const auto ft = Mpdss(tone, g);
  double tone_peak = 0.0;
  size_t tone_band = 0;
  for (size_t b = 0; b < 25; ++b) {
    double m = 0.0;
    for (size_t t = 0; t < ft.rows(); ++t) m += ft(t, b) / ft.rows();
    if (m > tone_peak) {
      tone_peak = m;
      tone_band = b;
    }
  }
  EXPECT_GT(tone_peak, 0.8);
  EXPECT_GT(tone_peak, noise_mean[tone_band]);
  EXPECT_PM_ERROR(MpdssExtractor(16000, g, 200), ErrorCode::kConfig);
}

TEST(ResidualTest, RmfccShape) {
  const Waveform w = LpVowel(120.0, 0.5);
  const auto r = Rmfcc(LpResidual(w, 10, FrameGrid::ForRate(16000)), FrameGrid::ForRate(16000));
  EXPECT_EQ(r.kind(), FeatureKind::kRmfcc39);
  EXPECT_EQ(r.cols(), 39u);
  EXPECT_EQ(r.rows(), FrameGrid::ForRate(16000).NumFrames(w.size()));
}

}  // namespace
}  // namespace phonemode
