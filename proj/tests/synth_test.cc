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


#include "phonemode/synth.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "phonemode/config.h"
#include "test_util.h"

namespace phonemode {
namespace {

Speaker TestSpeaker() { return Speaker{"spk", 150.0, 1.0}; }

TEST(SynthTest, PhonotacticTablesAreStochasticWithoutSelfLoops) {
  const SynthSpec spec = SynthSpec::Default();
  for (size_t l = 0; l < spec.languages.size(); ++l)
    for (Mode m : {Mode::kConversation, Mode::kRead}) {
      const auto t = PhonotacticTable(spec, l, m);
      ASSERT_EQ(t.size(), DefaultPhoneSet().size());
      for (size_t i = 0; i < t.size(); ++i) {
        double sum = 0.0;
        for (double v : t[i]) {
          EXPECT_GE(v, 0.0);
          sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_EQ(t[i][i], 0.0);
      }
    }
}

TEST(SynthTest, UtteranceIsConsistent) {
  const SynthSpec spec = SynthSpec::Default();
  for (Mode m : {Mode::kConversation, Mode::kRead}) {
    Rng rng(30);
    const SynthUtterance u = SynthesizeUtterance(spec, 0, m, TestSpeaker(), rng);
    const double expected = (spec.content_s + 2 * spec.edge_silence_s) * spec.sample_rate_hz;
    EXPECT_NEAR(static_cast<double>(u.wave.size()), expected, 0.2 * spec.sample_rate_hz);
    ASSERT_FALSE(u.alignment.empty());
    EXPECT_EQ(u.alignment.size(), u.transcript.size());
    for (size_t i = 1; i < u.alignment.size(); ++i)
      EXPECT_EQ(u.alignment[i].begin, u.alignment[i - 1].end);
    for (size_t i = 0; i < u.transcript.size(); ++i)
      EXPECT_EQ(DefaultPhoneSet()[static_cast<size_t>(u.alignment[i].phone)].label, u.transcript[i]);
    // Epochs are increasing, inside voiced phones, and at plausible spacing.
    ASSERT_GT(u.epochs.size(), 100u);
    for (size_t i = 1; i < u.epochs.size(); ++i) EXPECT_GT(u.epochs[i], u.epochs[i - 1]);
    for (size_t e : u.epochs) {
      bool voiced = false;
      for (const auto& s : u.alignment)
        if (e >= s.begin && e < s.end) voiced = DefaultPhoneSet()[static_cast<size_t>(s.phone)].voiced;
      EXPECT_TRUE(voiced) << e;
    }
    for (double v : u.f0_track) EXPECT_TRUE(v == 0.0 || (v >= 50.0 && v <= 500.0));
    for (double v : u.wave.samples) ASSERT_LE(std::abs(v), 1.0);
  }
}

TEST(SynthTest, SameSeedSameAudio) {
  const SynthSpec spec = SynthSpec::Default();
  Rng a(31), b(31), c(32);
  const auto ua = SynthesizeUtterance(spec, 1, Mode::kRead, TestSpeaker(), a);
  const auto ub = SynthesizeUtterance(spec, 1, Mode::kRead, TestSpeaker(), b);
  const auto uc = SynthesizeUtterance(spec, 1, Mode::kRead, TestSpeaker(), c);
  EXPECT_EQ(ua.wave.samples, ub.wave.samples);
  EXPECT_NE(ua.wave.samples, uc.wave.samples);
}

TEST(SynthTest, ReadModeDeclines) {
  // Average the voiced f0 over many read utterances: first fifth above last.
  const SynthSpec spec = SynthSpec::Default();
  Rng rng(33);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto u = SynthesizeUtterance(spec, 0, Mode::kRead, TestSpeaker(), rng);
    const size_t n = u.f0_track.size(), fifth = n / 5;
    double a = 0.0, b = 0.0;
    size_t na = 0, nb = 0;
    for (size_t k = 0; k < fifth; ++k) {
      if (u.f0_track[k] > 0) a += u.f0_track[k], ++na;
      if (u.f0_track[n - 1 - k] > 0) b += u.f0_track[n - 1 - k], ++nb;
    }
    first += a / std::max<size_t>(na, 1);
    last += b / std::max<size_t>(nb, 1);
  }
  EXPECT_GT(first, last);
}

TEST(SynthTest, CorpusLayoutAndTruth) {
  SynthSpec spec = SynthSpec::Default();
  spec.languages = {"other:alpha"};
  spec.train_speakers = 1;
  spec.dev_speakers = 1;
  spec.test_speakers = 1;
  spec.train_utterances = 1;
  spec.eval_utterances = 1;
  spec.content_s = 1.0;
  const auto dir = testing::ScratchDir();
  const SynthCorpusResult r = SynthCorpus(spec, dir / "corpus");
  EXPECT_EQ(r.utterances, 6u);
  const Manifest m = LoadManifest(r.manifest_path);
  ASSERT_EQ(m.entries.size(), 6u);
  for (const auto& e : m.entries) {
    const Waveform w = LoadWav(e.audio_path);
    const SynthTruth t = LoadSynthTruth(e.audio_path);
    ASSERT_FALSE(t.alignment.empty());
    EXPECT_EQ(t.alignment.back().end + static_cast<size_t>(spec.edge_silence_s * 16000), w.size());
    ASSERT_TRUE(e.transcript.has_value());
    EXPECT_EQ(e.transcript->size(), t.alignment.size());
    ASSERT_FALSE(t.epochs.empty());
    EXPECT_LT(t.epochs.back(), w.size());
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "corpus" / "spec.txt"));

  // A second run with the same spec writes identical bytes.
  SynthCorpus(spec, dir / "again");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
  };
  for (const auto& e : m.entries) {
    const auto again = dir / "again" / "wav" / e.audio_path.filename();
    EXPECT_EQ(slurp(e.audio_path), slurp(again));
  }
}

TEST(SynthTest, SpecValidation) {
  SynthSpec s = SynthSpec::Default();
  EXPECT_NO_THROW(s.Validate());
  s.speaker_f0_lo_hz = 30.0;
  EXPECT_PM_ERROR(s.Validate(), ErrorCode::kConfig);
  s = SynthSpec::Default();
  s.read.jitter = 0.5;
  EXPECT_PM_ERROR(s.Validate(), ErrorCode::kConfig);
  s = SynthSpec::Default();
  s.conversation.phone_max_s = 0.01;
  EXPECT_PM_ERROR(s.Validate(), ErrorCode::kConfig);
  s = SynthSpec::Default();
  s.languages.clear();
  EXPECT_PM_ERROR(s.Validate(), ErrorCode::kConfig);
}

}  // namespace
}  // namespace phonemode
