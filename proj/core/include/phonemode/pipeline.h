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

#ifndef PHONEMODE_PIPELINE_H_
#define PHONEMODE_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "phonemode/config.h"
#include "phonemode/manifest.h"
#include "phonemode/mprs.h"
#include "phonemode/scoring.h"
#include "phonemode/smc.h"

namespace phonemode {

using LogFn = std::function<void(const std::string&)>;

SmcFeatureOptions SmcOptionsFor(const PipelineConfig& cfg, int sample_rate_hz);
MprsFeatureOptions MprsOptionsFor(const PipelineConfig& cfg, int sample_rate_hz);

// Loads, trims and chops one manifest entry for the SMC stages.
SmcSample MakeSmcSample(const ManifestEntry& e, const PipelineConfig& cfg);
// Loads and trims one entry (no chop) for recognition. The transcript is
// encoded when present and empty otherwise.
MprsSample MakeMprsSample(const ManifestEntry& e, const PhoneInventory& inv,
                          const PipelineConfig& cfg);

std::string UtteranceId(const ManifestEntry& e);

// Inventory over every transcript in the manifest.
PhoneInventory InventoryFromManifest(const Manifest& m);

std::vector<ContourRecord> ContourRecords(const std::vector<SmcSample>& samples,
                                          const std::vector<const ManifestEntry*>& entries,
                                          ContourKind kind);

struct ModePer {
  AlignmentCounts counts;
  double rate() const { return ErrorRate(counts); }
};

struct EndToEndReport {
  double smc_test_accuracy = 0.0;
  // per[recognizer][test mode], mode index 0 = conversation, 1 = read
  ModePer per[kNumModes][kNumModes];
  ModePer single[kNumModes];  // each recognizer on the mixed test set
  ModePer comb;
  ModePer ideal;
  ModePer inverted;
  double wm_pc = 0.0, bm_pc = 0.0, wm_esc = 0.0, bm_esc = 0.0;
  bool smc_searched = false;
  StageAccuracies smc_dev;  // only set when searched
  size_t stage2_candidates = 0, stage3_candidates = 0;
  std::string summary;  // also written to summary.txt
};

// Synthesize (if configured) -> extract -> train SMC -> train per-mode
// recognizers -> COMB decode the test split -> reports under run_dir.
EndToEndReport RunEndToEnd(const PipelineConfig& cfg, const std::filesystem::path& run_dir,
                           const LogFn& log = {});

}  // namespace phonemode

#endif  // PHONEMODE_PIPELINE_H_
