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

#ifndef PHONEMODE_SYNTH_H_
#define PHONEMODE_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "phonemode/audio_io.h"
#include "phonemode/manifest.h"
#include "phonemode/random.h"

namespace phonemode {

// Prosody and articulation knobs for one speaking mode.
struct ModeProsody {
  double f0_depth = 0.0;        // relative modulation depth
  double f0_rate_lo_hz = 0.3;   // modulation component rates
  double f0_rate_hi_hz = 0.6;
  bool f0_random = false;       // random components per utterance vs one fixed shape
  double f0_declination = 0.0;  // relative fall from start to end
  double jitter = 0.0;          // relative per-period perturbation
  double amp_depth = 0.0;
  double amp_declination = 0.0;
  double phone_min_s = 0.07;
  double phone_max_s = 0.13;
  double f1_scale = 1.0;
  double f2_scale = 1.0;
};

struct PhonePrototype {
  std::string label;
  bool voiced = true;
  double f1 = 0, f2 = 0, f3 = 0;  // Hz
  double bandwidth_scale = 1.0;
  double gain = 1.0;
};

const std::vector<PhonePrototype>& DefaultPhoneSet();

struct SynthSpec {
  uint64_t seed = 2026;
  int sample_rate_hz = 16000;
  std::vector<std::string> languages{"other:alpha", "other:beta"};
  size_t train_speakers = 4;  // per language and mode
  size_t dev_speakers = 2;
  size_t test_speakers = 2;
  size_t train_utterances = 8;  // per speaker
  size_t eval_utterances = 6;
  double content_s = 5.6;
  double edge_silence_s = 0.2;
  double noise_floor = 0.0005;
  double frication_level = 0.5;  // noise rms relative to voiced rms
  double speaker_f0_lo_hz = 100.0;
  double speaker_f0_hi_hz = 220.0;
  double speaker_formant_spread = 0.05;
  ModeProsody read;
  ModeProsody conversation;

  static SynthSpec Default();
  void Validate() const;
};

struct Speaker {
  std::string id;
  double base_f0_hz = 140.0;
  double formant_scale = 1.0;
};

struct PhoneSegment {
  size_t begin = 0;  // samples, [begin, end)
  size_t end = 0;
  int phone = 0;     // index into DefaultPhoneSet()
};

struct SynthUtterance {
  Waveform wave;
  std::vector<double> f0_track;  // Hz per 10 ms, 0 outside voiced phones
  std::vector<size_t> epochs;    // excitation impulse positions
  std::vector<PhoneSegment> alignment;
  std::vector<std::string> transcript;
};

// Phonotactic table for one (language, mode): row-stochastic, no self loops.
std::vector<std::vector<double>> PhonotacticTable(const SynthSpec& spec, size_t language,
                                                  Mode mode);

SynthUtterance SynthesizeUtterance(const SynthSpec& spec, size_t language, Mode mode,
                                   const Speaker& speaker, Rng& rng);

struct SynthCorpusResult {
  std::filesystem::path manifest_path;
  size_t utterances = 0;
};

// Writes wav/, truth/, manifest.tsv and spec.txt under out_dir.
SynthCorpusResult SynthCorpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

struct SynthTruth {
  std::vector<double> f0_track;
  std::vector<size_t> epochs;
  std::vector<PhoneSegment> alignment;
};
SynthTruth LoadSynthTruth(const std::filesystem::path& wav_path);

}  // namespace phonemode

#endif  // PHONEMODE_SYNTH_H_
