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

#ifndef PHONEMODE_MPRS_H_
#define PHONEMODE_MPRS_H_

#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phonemode/audio_io.h"
#include "phonemode/neural.h"
#include "phonemode/smc.h"
#include "phonemode/spectral.h"

namespace phonemode {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class PhoneInventory {
 public:
  PhoneInventory() = default;
  explicit PhoneInventory(std::vector<std::string> labels);

  // Sorted union of every label in the transcripts.
  static PhoneInventory FromTranscripts(const std::vector<std::vector<std::string>>& transcripts);

  size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int index) const { return labels_.at(static_cast<size_t>(index)); }
  int Index(const std::string& label) const;  // kInventory naming the label
  bool Contains(const std::string& label) const { return index_.count(label) > 0; }

  std::vector<int> Encode(const std::vector<std::string>& labels) const;
  std::vector<std::string> Decode(std::span<const int> indices) const;

  std::string Format() const;  // one label per line
  static PhoneInventory Parse(std::string_view text);

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
};

struct BigramLm {
  std::vector<double> initial;             // log P(first phone)
  std::vector<std::vector<double>> log_prob;  // [prev][next]
  double smoothing = 0.0;

  size_t size() const { return initial.size(); }
  void Validate() const;  // rows of exp() sum to 1 within 1e-9
  std::string Format(const PhoneInventory& inv) const;
  static BigramLm Parse(std::string_view text, const PhoneInventory& inv);
};

// Add-k bigram estimate over index sequences.
BigramLm TrainLm(const std::vector<std::vector<int>>& transcripts, size_t inventory_size,
                 double smoothing_k);

struct DecodeOptions {
  double alpha = 1.0;
  size_t min_duration = 3;  // frames; 1 disables
};

// Viterbi over one state per phone (expanded to min_duration sub-states).
// log_likelihoods is frames x phones. Returns the per-frame state path.
std::vector<int> ViterbiStatePath(const Eigen::MatrixXd& log_likelihoods, const BigramLm& lm,
                                  const DecodeOptions& opts);

// Collapse runs of identical states.
std::vector<int> CollapseRuns(std::span<const int> states);

// Objective of a state path: acoustic log scores + alpha * LM log scores.
double PathScore(const Eigen::MatrixXd& log_likelihoods, const BigramLm& lm, double alpha,
                 std::span<const int> states);

std::vector<int> ViterbiDecode(const Eigen::MatrixXd& log_likelihoods, const BigramLm& lm,
                               const DecodeOptions& opts);

// Forced alignment of a known phone sequence; each phone gets at least
// min_duration frames (shrunk if the utterance is too short).
std::vector<int> ForcedAlign(const Eigen::MatrixXd& log_likelihoods, std::span<const int> phones,
                             size_t min_duration);

std::vector<int> UniformAlign(size_t frames, std::span<const int> phones);

struct MprsFeatureOptions {
  FrameGrid grid;
  MfccOptions mfcc;
  int lp_order = 10;
  size_t mpdss_bands = 25;
};

// Base streams of one utterance, all on the same frame grid.
struct UtteranceStreams {
  FeatureMatrix mfcc39;
  FeatureMatrix rmfcc39;
  FeatureMatrix mpdss25;
};

UtteranceStreams ExtractStreams(const Waveform& w, const MprsFeatureOptions& opts = {});

struct AcousticModel {
  MlpModel mlp;
  std::vector<FeatureKind> feature_spec;
  std::vector<double> log_priors;  // empty unless trained with priors

  void Validate(size_t inventory_size) const;
};

std::vector<FeatureKind> ParseFeatureSpec(std::string_view text);  // "mfcc39,tandem,..."
std::string FormatFeatureSpec(std::span<const FeatureKind> spec);

struct MprsTrainConfig {
  std::vector<FeatureKind> features{FeatureKind::kMfcc39, FeatureKind::kTandem,
                                    FeatureKind::kRmfcc39, FeatureKind::kMpdss25};
  size_t tandem_hidden = 64;
  int tandem_epochs = 12;
  size_t am_hidden = 96;
  int am_epochs = 12;
  double learning_rate = 0.005;
  Loss loss = Loss::kCrossEntropy;
  size_t frame_stride = 2;
  int realign_passes = 1;
  double lm_smoothing = 0.5;
  bool use_priors = false;
  uint64_t seed = 1;

  void Validate() const;
};

struct MprsSample {
  UtteranceStreams streams;
  std::vector<int> transcript;
  std::string id;
};

class PhoneRecognizer {
 public:
  PhoneInventory inventory;
  MlpModel tandem;  // MFCC39 -> phone posteriors
  AcousticModel acoustic;
  BigramLm lm;

  void Validate() const;
  FeatureMatrix TandemFeatures(const FeatureMatrix& mfcc39) const;
  FeatureMatrix AcousticInput(const UtteranceStreams& s) const;
  Eigen::MatrixXd LogLikelihoods(const UtteranceStreams& s) const;
  std::vector<int> Decode(const UtteranceStreams& s, const DecodeOptions& opts) const;

  void Save(const std::filesystem::path& dir) const;
  static PhoneRecognizer Load(const std::filesystem::path& dir);
};

struct MprsTrainReport {
  std::vector<double> tandem_loss;
  std::vector<double> am_loss;
  double train_frame_accuracy = 0.0;
};

PhoneRecognizer TrainMprs(const std::vector<MprsSample>& train, const PhoneInventory& inventory,
                          const MprsTrainConfig& cfg, MprsTrainReport* report = nullptr);

// Tandem extractor alone (used by the tandem-only tests).
MlpModel TrainTandem(const std::vector<MprsSample>& train,
                     const std::vector<std::vector<int>>& frame_labels, size_t inventory_size,
                     const MprsTrainConfig& cfg, std::vector<double>* loss = nullptr);

struct CombResult {
  Mode mode = Mode::kRead;
  SmcTrace smc;
  std::vector<int> phones;
  std::string routed_to;
};

// SMC front-end routing to mode-specific recognizers.
class CombSystem {
 public:
  CombSystem(const SmcSystem* smc, const PhoneRecognizer* read, const PhoneRecognizer* conv)
      : smc_(smc), read_(read), conv_(conv) {}

  CombResult Recognize(const SmcFeatures& smc_features, const UtteranceStreams& streams,
                       const DecodeOptions& opts) const;
  const PhoneRecognizer& ForMode(Mode m) const { return m == Mode::kRead ? *read_ : *conv_; }

 private:
  const SmcSystem* smc_;
  const PhoneRecognizer* read_;
  const PhoneRecognizer* conv_;
};

}  // namespace phonemode

#endif  // PHONEMODE_MPRS_H_
