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


#ifndef PHONEMODE_TESTS_TEST_UTIL_H_
#define PHONEMODE_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "phonemode/audio_io.h"
#include "phonemode/error.h"
#include "phonemode/random.h"

namespace phonemode::testing {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "phonemode_tests" /
             (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Waveform Sine(double hz, double seconds, double amplitude = 0.5, int rate = 16000) {
  Waveform w;
  w.sample_rate_hz = rate;
  const auto n = static_cast<size_t>(std::llround(seconds * rate));
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return w;
}

inline std::vector<double> Noise(Rng& rng, size_t n, double sigma = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = sigma * rng.Gaussian();
  return v;
}

// Impulse train through a fixed two-formant all-pole filter; returns the
// impulse positions in *epochs.
inline Waveform LpVowel(double f0_hz, double seconds, std::vector<size_t>* epochs = nullptr,
                        int rate = 16000) {
  const auto n = static_cast<size_t>(std::llround(seconds * rate));
  std::vector<double> src(n, 0.0);
  const double period = rate / f0_hz;
  for (double pos = 0.0; pos < static_cast<double>(n); pos += period) {
    const auto i = static_cast<size_t>(std::llround(pos));
    if (i >= n) break;
    src[i] = 1.0;
    if (epochs) epochs->push_back(i);
  }
  // Resonators at 700 Hz and 1200 Hz, cascaded.
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples = src;
  for (double f : {700.0, 1200.0}) {
    const double r = std::exp(-std::numbers::pi * 90.0 / rate);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * f / rate);
    const double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (double& v : w.samples) {
      const double y = (1.0 - a1 - a2) * v + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
  return w;
}

}  // namespace phonemode::testing

#define EXPECT_PM_ERROR(stmt, expected_code)                                 \
  do {                                                                       \
    try {                                                                    \
      stmt;                                                                  \
      ADD_FAILURE() << "expected phonemode::Error from " #stmt;              \
    } catch (const ::phonemode::Error& pm_err_) {                            \
      EXPECT_EQ(pm_err_.code(), expected_code) << pm_err_.what();            \
    }                                                                        \
  } while (0)

#endif  // PHONEMODE_TESTS_TEST_UTIL_H_
