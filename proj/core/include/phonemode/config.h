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

#ifndef PHONEMODE_CONFIG_H_
#define PHONEMODE_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phonemode/audio_io.h"
#include "phonemode/mprs.h"
#include "phonemode/smc.h"
#include "phonemode/synth.h"

namespace phonemode {

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

// Versioned "key value" text. The first non-comment line is
// "format <name> <version>"; values run to the end of the line.
struct KeyValueFile {
  std::string format;
  int version = 1;
  std::vector<std::pair<std::string, std::string>> entries;

  void Set(const std::string& key, const std::string& value);
  const std::string* Find(const std::string& key) const;
  const std::string& Get(const std::string& key) const;  // kConfig if missing
  std::string Format() const;
  static KeyValueFile Parse(std::string_view text, std::string_view expect_format,
                            int expect_version);
};

struct PipelineConfig {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  SilenceOptions silence;
  double chop_seconds = 5.0;

  SmcTrainConfig smc;
  bool smc_search_weights = true;
  FusionWeights smc_stage2 = kDefaultStage2Weights;
  FusionWeights smc_stage3 = kDefaultStage3Weights;

  MprsTrainConfig mprs;
  DecodeOptions decode;

  SynthSpec synth = SynthSpec::Default();
  std::string corpus_manifest;  // empty: synthesize into the run directory

  static PipelineConfig Default();
  void Validate() const;
  FrameGrid Grid(int sample_rate_hz) const;

  std::string Format() const;
  static PipelineConfig Parse(std::string_view text);
  static PipelineConfig Load(const std::filesystem::path& path);
  // "key=value" override; unknown keys rejected.
  void Override(std::string_view assignment);
};

std::string FormatSynthSpec(const SynthSpec& spec);

}  // namespace phonemode

#endif  // PHONEMODE_CONFIG_H_
