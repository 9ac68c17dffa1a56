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

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "phonemode/feature_io.h"
#include "phonemode/fft.h"
#include "phonemode/random.h"
#include "test_util.h"

namespace phonemode {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(FftTest, MatchesNaiveDft) {
  Rng rng(1);
  for (size_t size : {2u, 8u, 64u, 512u}) {
    std::vector<std::complex<double>> x(size);
    for (auto& v : x) v = {rng.Gaussian(), rng.Gaussian()};
    auto y = x;
    Fft(size).Forward(y);
    for (size_t k = 0; k < size; ++k) {
      std::complex<double> acc = 0.0;
      for (size_t n = 0; n < size; ++n) {
        acc += x[n] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * n) / size);
      }
      EXPECT_NEAR(std::abs(acc - y[k]), 0.0, 1e-9) << "size " << size << " bin " << k;
    }
  }
}

TEST(FftTest, PowerSpectrumZeroPads) {
  const std::vector<double> frame = {1.0, 2.0, 3.0};
  const auto p = Fft(8).PowerSpectrum(frame);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_NEAR(p[0], 36.0, 1e-12);
  EXPECT_NEAR(p[4], 4.0, 1e-12);  // 1 - 2 + 3
  EXPECT_PM_ERROR(Fft(2).PowerSpectrum(frame), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(NextPowerOfTwo(400), 512u);
  EXPECT_EQ(NextPowerOfTwo(512), 512u);
  EXPECT_EQ(NextPowerOfTwo(1), 1u);
  EXPECT_PM_ERROR(Fft(1), ErrorCode::kInvalidArgument);
  EXPECT_PM_ERROR(Fft(12), ErrorCode::kInvalidArgument);
}

TEST(FramingTest, OneSecondGivesNinetyEightFrames) {
  const FrameGrid g = FrameGrid::ForRate(16000);
  EXPECT_EQ(g.frame_len_samples, 400u);
  EXPECT_EQ(g.frame_shift_samples, 160u);
  EXPECT_EQ(g.NumFrames(16000), 98u);
  EXPECT_EQ(FrameSignal(std::vector<double>(16000, 1.0), g).size(), 98u);
}

TEST(FramingTest, FrameCountFormulaOnRandomLengths) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    FrameGrid g;
    g.frame_len_samples = 1 + rng.Index(600);
    g.frame_shift_samples = 1 + rng.Index(g.frame_len_samples);
    const size_t n = g.frame_len_samples + rng.Index(5000);
    const size_t want = (n - g.frame_len_samples) / g.frame_shift_samples + 1;
    ASSERT_EQ(g.NumFrames(n), want);
    if (trial % 20 == 0) {
      ASSERT_EQ(FrameSignal(std::vector<double>(n, 0.0), g).size(), want);
    }
  }
}

TEST(FramingTest, RejectsBadGridsAndShortSignals) {
  FrameGrid g;
  g.frame_shift_samples = 500;
  EXPECT_PM_ERROR(g.Validate(), ErrorCode::kInvalidArgument);
  g.frame_shift_samples = 0;
  EXPECT_PM_ERROR(g.Validate(), ErrorCode::kInvalidArgument);
  EXPECT_PM_ERROR(FrameSignal(std::vector<double>(100, 0.0), FrameGrid{}), ErrorCode::kLength);
}

TEST(WindowTest, HammingShape) {
  const auto w = MakeWindow(5, WindowType::kHamming);
  EXPECT_NEAR(w[0], 0.08, 1e-12);
  EXPECT_NEAR(w[2], 1.0, 1e-12);
  EXPECT_NEAR(w[4], 0.08, 1e-12);
  const auto r = MakeWindow(4, WindowType::kRectangular);
  for (double v : r) EXPECT_EQ(v, 1.0);
}

TEST(MelTest, TrianglesOnTheHtkScale) {
  EXPECT_NEAR(HzToMel(1000.0), 1000.0, 0.05);
  EXPECT_NEAR(MelToHz(HzToMel(3210.0)), 3210.0, 1e-9);
  const MelFilterbank bank(512, 16000, 26, 0.0, 8000.0);
  ASSERT_EQ(bank.num_filters(), 26u);
  for (size_t m = 1; m < 26; ++m) {
    EXPECT_GE(bank.first_bin(m), bank.first_bin(m - 1));
    EXPECT_LE(bank.first_bin(m), bank.last_bin(m - 1) + 1);
  }
  EXPECT_LE(bank.last_bin(25), 256u);
  // A single unit bin excites at most two adjacent filters, with weights
  // summing to one between the first and last centre.
  const double step = 2595.0 * std::log10(1.0 + 8000.0 / 700.0) / 27.0;
  for (size_t k = 1; k < 257; ++k) {
    const double mel = 2595.0 * std::log10(1.0 + k * 31.25 / 700.0);
    if (mel < step || mel > 26.0 * step) continue;
    std::vector<double> power(257, 0.0);
    power[k] = 1.0;
    const auto e = bank.Apply(power);
    double sum = 0.0;
    int active = 0;
    for (double v : e) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
      sum += v;
      active += v > 0.0;
    }
    EXPECT_LE(active, 2);
    EXPECT_NEAR(sum, 1.0, 1e-9) << "bin " << k;
  }
  EXPECT_PM_ERROR(MelFilterbank(512, 16000, 26, 0.0, 9000.0), ErrorCode::kInvalidArgument);
  EXPECT_PM_ERROR(MelFilterbank(16, 16000, 40, 0.0, 8000.0), ErrorCode::kConfig);
}

TEST(DctTest, OrthonormalBasis) {
  const size_t n = 26;
  std::vector<std::vector<double>> basis;
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    basis.push_back(DctII(e, n));
  }
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      double dot = 0.0;
      for (size_t i = 0; i < n; ++i) dot += basis[i][a] * basis[i][b];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(MfccTest, ScalingMovesOnlyC0) {
  Rng rng(4);
  const Waveform w{testing::Noise(rng, 8000, 0.1), 16000};
  const auto base = Mfcc(w, FrameGrid::ForRate(16000));
  for (double k : {0.25, 3.0}) {
    Waveform s = w;
    for (double& v : s.samples) v *= k;
    const auto scaled = Mfcc(s, FrameGrid::ForRate(16000));
    const double shift = std::sqrt(1.0 / 26.0) * 26.0 * std::log(k * k);
    for (size_t t = 0; t < base.rows(); ++t) {
      EXPECT_NEAR(scaled(t, 0) - base(t, 0), shift, 1e-8);
      for (size_t c = 1; c < 13; ++c) {
        EXPECT_NEAR(scaled(t, c), base(t, c), 1e-8 * std::max(1.0, std::abs(base(t, c))));
      }
    }
  }
}

TEST(MfccTest, FiniteOnSilenceAndRandomInput) {
  const FrameGrid g = FrameGrid::ForRate(16000);
  const auto silent = Mfcc(Waveform{std::vector<double>(4000, 0.0), 16000}, g);
  for (double v : silent.data()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(silent(0, 0), std::sqrt(26.0) * std::log(1e-10), 1e-9);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(400 + rng.Index(3000));
    for (double& v : x) v = rng.Uniform() < 0.1 ? 0.0 : rng.Uniform(-1.0, 1.0) * std::pow(10.0, -rng.Uniform(0, 8));
    const auto f = AddDeltas(Mfcc(Waveform{x, 16000}, g));
    EXPECT_EQ(f.cols(), 39u);
    EXPECT_EQ(f.kind(), FeatureKind::kMfcc39);
    for (double v : f.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(MfccTest, RejectsUnsupportedOptions) {
  const Waveform w = testing::Sine(440.0, 0.1);
  MfccOptions o;
  o.n_coeffs = 12;
  EXPECT_PM_ERROR(Mfcc(w, FrameGrid::ForRate(16000), o), ErrorCode::kInvalidArgument);
  o = {};
  o.n_mels = 10;
  EXPECT_PM_ERROR(Mfcc(w, FrameGrid::ForRate(16000), o), ErrorCode::kInvalidArgument);
}

// 440 Hz tone quantized to 16 bits, as stored in the fixture WAV.
Waveform GoldenFixture() {
  Waveform w;
  w.samples.resize(16000);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = std::nearbyint(16384.0 * std::sin(2.0 * kPi * 440.0 * static_cast<double>(i) / 16000.0)) /
                   kPcmScale;
  }
  return w;
}

TEST(MfccTest, MatchesGoldenFile) {
  const auto mfcc = Mfcc(GoldenFixture(), FrameGrid::ForRate(16000));
  const std::string path = std::string(PHONEMODE_GOLDEN_DIR) + "/mfcc_440hz.txt";
  if (std::getenv("PHONEMODE_REGENERATE_GOLDEN")) {
    std::ofstream out(path);
    out << mfcc.rows() << " " << mfcc.cols() << "\n";
    out.precision(17);
    for (size_t t = 0; t < mfcc.rows(); ++t) {
      for (size_t c = 0; c < mfcc.cols(); ++c) out << (c ? " " : "") << mfcc(t, c);
      out << "\n";
    }
    GTEST_SKIP() << "regenerated " << path;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << "missing " << path;
  size_t rows = 0, cols = 0;
  in >> rows >> cols;
  ASSERT_EQ(rows, mfcc.rows());
  ASSERT_EQ(cols, mfcc.cols());
  for (size_t t = 0; t < rows; ++t) {
    for (size_t c = 0; c < cols; ++c) {
      double want = 0.0;
      in >> want;
      ASSERT_NEAR(mfcc(t, c), want, 1e-9 * std::max(1.0, std::abs(want))) << t << "," << c;
    }
  }
}

TEST(DeltaTest, RampHasUnitInteriorSlope) {
  const size_t rows = 20;
  std::vector<double> ramp(rows);
  for (size_t t = 0; t < rows; ++t) ramp[t] = static_cast<double>(t);
  const auto d = RegressionDeltas(ramp, rows, 1);
  for (size_t t = 2; t + 2 < rows; ++t) EXPECT_DOUBLE_EQ(d[t], 1.0);
  EXPECT_LT(d[0], 1.0);  // boundary replication flattens the ends
}

TEST(DeltaTest, ConstantGivesZeroAndOperatorIsLinear) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t rows = 1 + rng.Index(40), cols = 1 + rng.Index(5);
    std::vector<double> c(rows * cols), f(rows * cols), g(rows * cols);
    for (size_t col = 0; col < cols; ++col) {
      const double v = rng.Gaussian();
      for (size_t t = 0; t < rows; ++t) c[t * cols + col] = v;
    }
    for (auto& v : f) v = rng.Gaussian();
    for (auto& v : g) v = rng.Gaussian();
    for (double v : RegressionDeltas(c, rows, cols)) EXPECT_EQ(v, 0.0);
    const double a = rng.Uniform(-3, 3), b = rng.Uniform(-3, 3);
    std::vector<double> mix(rows * cols);
    for (size_t i = 0; i < mix.size(); ++i) mix[i] = a * f[i] + b * g[i];
    const auto dm = RegressionDeltas(mix, rows, cols);
    const auto df = RegressionDeltas(f, rows, cols);
    const auto dg = RegressionDeltas(g, rows, cols);
    for (size_t i = 0; i < mix.size(); ++i) EXPECT_NEAR(dm[i], a * df[i] + b * dg[i], 1e-12);
  }
}

TEST(FeatureMatrixTest, ConstructionChecks) {
  EXPECT_PM_ERROR(FeatureMatrix(FeatureKind::kMfcc13, 2, 13, std::vector<double>(25)),
                  ErrorCode::kDimensionMismatch);
  EXPECT_PM_ERROR(FeatureMatrix(FeatureKind::kMfcc39, 1, 13, std::vector<double>(13)),
                  ErrorCode::kDimensionMismatch);
  EXPECT_PM_ERROR(FeatureMatrix(FeatureKind::kConcat, 1, 1, {std::nan("")}),
                  ErrorCode::kInvalidArgument);
  const FeatureMatrix a(FeatureKind::kConcat, 2, 1, {1, 2});
  const FeatureMatrix b(FeatureKind::kConcat, 2, 2, {3, 4, 5, 6});
  const std::vector<FeatureMatrix> parts{a, b};
  const auto c = FeatureMatrix::Concat(parts);
  EXPECT_EQ(c.data(), (std::vector<double>{1, 3, 4, 2, 5, 6}));
  const std::vector<FeatureMatrix> bad{a, FeatureMatrix(FeatureKind::kConcat, 3, 1, {1, 2, 3})};
  EXPECT_PM_ERROR(FeatureMatrix::Concat(bad), ErrorCode::kDimensionMismatch);
  for (auto k : {FeatureKind::kMfcc13, FeatureKind::kRmfcc39, FeatureKind::kEpochStrengthContour}) {
    EXPECT_EQ(ParseFeatureKind(FeatureKindName(k)), k);
  }
  EXPECT_PM_ERROR(ParseFeatureKind("mfcc40"), ErrorCode::kUnknownToken);
}

TEST(FeatureIoTest, RoundTripAndCorruption) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t rows = rng.Index(30);
    std::vector<double> d(rows * 13);
    for (auto& v : d) v = rng.Gaussian() * 1e3;
    const FeatureMatrix f(FeatureKind::kMfcc13, rows, 13, d);
    const FeatureMatrix back = DecodeFeatures(EncodeFeatures(f));
    EXPECT_EQ(back.kind(), f.kind());
    EXPECT_EQ(back.rows(), rows);
    EXPECT_EQ(back.data(), f.data());
  }
  const auto bytes = EncodeFeatures(FeatureMatrix(FeatureKind::kConcat, 1, 2, {1.0, 2.0}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_PM_ERROR(DecodeFeatures(bad_magic), ErrorCode::kParse);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_PM_ERROR(DecodeFeatures(truncated), ErrorCode::kTruncatedHeader);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_PM_ERROR(DecodeFeatures(trailing), ErrorCode::kParse);
  auto bad_kind = bytes;
  bad_kind[6] = 99;
  EXPECT_PM_ERROR(DecodeFeatures(bad_kind), ErrorCode::kParse);

  const auto dir = testing::ScratchDir();
  const FeatureMatrix f(FeatureKind::kConcat, 1, 2, {1.0, 2.0});
  SaveFeatures(f, dir / "f.phfe");
  EXPECT_EQ(LoadFeatures(dir / "f.phfe").data(), f.data());
  EXPECT_PM_ERROR(LoadFeatures(dir / "none.phfe"), ErrorCode::kIo);
}

}  // namespace
}  // namespace phonemode
