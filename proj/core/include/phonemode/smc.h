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

#ifndef PHONEMODE_SMC_H_
#define PHONEMODE_SMC_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "phonemode/audio_io.h"
#include "phonemode/excitation.h"
#include "phonemode/manifest.h"
#include "phonemode/neural.h"
#include "phonemode/spectral.h"

namespace phonemode {

// Per-class scores of one utterance. Index 0 = conversation, 1 = read.
struct ScoreVector {
  std::vector<double> scores;
  std::string source;

  void Validate() const;
  int Argmax() const;  // lowest index on ties
};

struct FusionWeights {
  std::vector<double> w;

  void Validate() const;  // w >= 0, sum 1 within 1e-9
};

inline const FusionWeights kDefaultStage2Weights{{0.45, 0.55}};
inline const FusionWeights kDefaultStage3Weights{{0.35, 0.65}};

ScoreVector FuseScores(std::span<const ScoreVector> scores, const FusionWeights& w);

struct WeightCandidate {
  double w1 = 0.0;
  double accuracy = 0.0;
};

struct WeightSearchResult {
  FusionWeights weights;
  double accuracy = 0.0;
  std::vector<WeightCandidate> candidates;
};

// Two-model grid over w1 = step, 2*step, ..., 1 - 2*step (98 points at
// step 0.01). Ties go to the smallest w1, i.e. more weight on model b.
WeightSearchResult SearchWeights(const std::vector<ScoreVector>& a,
                                 const std::vector<ScoreVector>& b, std::span<const int> labels,
                                 double step = 0.01);

double ScoreAccuracy(const std::vector<ScoreVector>& scores, std::span<const int> labels);

struct SmcFeatureOptions {
  FrameGrid grid;
  ZffOptions zff;
  ContourOptions contour;
  MfccOptions mfcc;
};

struct SmcFeatures {
  Contour pitch;
  Contour strength;
  FeatureMatrix mfcc39;
};

// Input must already be silence-trimmed and chopped.
SmcFeatures ExtractSmcFeatures(const Waveform& utt, const SmcFeatureOptions& opts = {});

// Silence removal followed by the fixed-length chop.
Waveform PreprocessForSmc(const Waveform& w, const SilenceOptions& silence = {},
                          double duration_s = 5.0);

struct SmcTrace {
  ScoreVector pc;
  ScoreVector esc;
  ScoreVector vt;
  ScoreVector src;     // fused pc + esc
  ScoreVector src_vt;  // fused src + vt
  Mode decision = Mode::kRead;
};

struct SmcSystem {
  MlpModel pc_model;   // 500 -> 56 -> 2
  MlpModel esc_model;  // 500 -> 56 -> 2
  MlpModel vt_model;   // 39 -> 21 -> 2
  FusionWeights stage2 = kDefaultStage2Weights;
  FusionWeights stage3 = kDefaultStage3Weights;
  std::string weights_source = "default";

  void Validate() const;
  SmcTrace Classify(const SmcFeatures& f) const;
  void Save(const std::filesystem::path& dir) const;
  static SmcSystem Load(const std::filesystem::path& dir);
};

struct SmcTrainConfig {
  size_t contour_dim = 500;
  size_t contour_hidden = 56;
  size_t vt_hidden = 21;
  int contour_epochs = 200;
  int vt_epochs = 600;
  size_t vt_frame_stride = 8;
  TrainConfig base;  // learning rate, loss
  uint64_t seed = 1;
  double search_step = 0.01;

  void Validate() const;
};

struct SmcSample {
  SmcFeatures features;
  Mode mode = Mode::kRead;
  std::string id;
};

struct StageAccuracies {
  double pc = 0.0, esc = 0.0, vt = 0.0, src = 0.0, src_vt = 0.0;
};

struct SmcTrainResult {
  SmcSystem system;
  std::vector<std::string> warnings;
  bool searched = false;
  WeightSearchResult stage2_search;
  WeightSearchResult stage3_search;
  StageAccuracies dev;  // only meaningful when searched
  bool matches_universal_weights = false;
};

// dev may be empty; the universal weights are used then.
SmcTrainResult TrainSmc(const std::vector<SmcSample>& train, const std::vector<SmcSample>& dev,
                        const SmcTrainConfig& cfg);

// Stage-1 and stage-2 scores for a batch, used by the weight search.
struct SmcScoreSet {
  std::vector<ScoreVector> pc, esc, vt, src, src_vt;
  std::vector<int> labels;
};
SmcScoreSet ScoreSamples(const SmcSystem& sys, const std::vector<SmcSample>& samples);

}  // namespace phonemode

#endif  // PHONEMODE_SMC_H_
