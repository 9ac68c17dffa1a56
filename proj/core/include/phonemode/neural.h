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

#ifndef PHONEMODE_NEURAL_H_
#define PHONEMODE_NEURAL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phonemode/spectral.h"

namespace phonemode {

// Wire tags stored in PHNN files.
enum class Activation : uint8_t { kTanh = 1, kSoftmax = 2 };
enum class Loss : uint8_t { kMse = 1, kCrossEntropy = 2 };

struct TrainConfig {
  double learning_rate = 0.005;
  int epochs = 200;
  Loss loss = Loss::kMse;
  uint64_t shuffle_seed = 1;

  void Validate() const;
};

// Three-layer perceptron: softmax(W2 * tanh(W1 * x' + b1) + b2), where x'
// is x after the optional per-dimension standardization.
struct MlpModel {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;
  Activation hidden_activation = Activation::kTanh;
  Activation output_activation = Activation::kSoftmax;
  Eigen::VectorXd input_mean;   // empty, or input_dim entries
  Eigen::VectorXd input_scale;  // multiplies (x - mean)
  uint64_t init_seed = 0;
  TrainConfig train_config;  // echo of the last training run

  size_t input_dim() const { return static_cast<size_t>(w1.cols()); }
  size_t hidden_dim() const { return static_cast<size_t>(w1.rows()); }
  size_t output_dim() const { return static_cast<size_t>(w2.rows()); }

  // Weights uniform in +/- 1/sqrt(fan_in), biases zero.
  static MlpModel Create(size_t input_dim, size_t hidden_dim, size_t output_dim, uint64_t seed);

  void Validate() const;
  bool has_standardizer() const { return input_mean.size() > 0; }
  // Standardization from data rows; zero-variance columns keep scale 1.
  void FitStandardizer(const Eigen::MatrixXd& inputs);

  Eigen::VectorXd Standardize(std::span<const double> x) const;
  // Class posteriors. Throws kDimensionMismatch on a wrong-sized input.
  Eigen::VectorXd Forward(std::span<const double> x) const;
  Eigen::VectorXd ForwardStandardized(const Eigen::VectorXd& x) const;
};

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);

// Labelled rows: inputs is samples x input_dim.
struct Dataset {
  Eigen::MatrixXd inputs;
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_trace;  // mean per-sample loss of each epoch
};

// Per-sample SGD in a freshly shuffled order each epoch. Deterministic in
// (model.init_seed, cfg.shuffle_seed). Throws kDivergedTraining on a
// non-finite loss.
TrainResult TrainSgd(MlpModel model, const Dataset& data, const TrainConfig& cfg);

// Creates the model (standardizer fitted on data) and trains it.
TrainResult TrainSgd(const Dataset& data, size_t hidden_dim, size_t num_classes,
                     const TrainConfig& cfg, uint64_t init_seed);

double SampleLoss(const Eigen::VectorXd& output, const Eigen::VectorXd& target, Loss loss);

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// Backpropagated gradient of SampleLoss for one (x, target) pair.
Gradients Backprop(const MlpModel& m, std::span<const double> x, const Eigen::VectorXd& target,
                   Loss loss);

// Max over all parameters of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-12), numeric from central differences with step eps.
double GradientCheck(const MlpModel& m, std::span<const double> x,
                     const Eigen::VectorXd& target, Loss loss, double eps = 1e-5);

struct SentenceDecision {
  int label = 0;
  std::vector<double> vote_fractions;
};

// Per-frame argmax then the modal class; ties go to the lower index.
SentenceDecision ClassifySentenceMajority(const MlpModel& m, const FeatureMatrix& frames);

// PHNN: "PHNN" | u16 version | u32 p, q, r | u8 hidden, output activation |
// W1, b1, W2, b2 (row-major f64) | u8 has_standardizer [p mean, p scale] |
// f64 lr | u32 epochs | u8 loss | u64 shuffle seed | u64 init seed.
inline constexpr uint16_t kModelFileVersion = 1;
std::vector<uint8_t> EncodeModel(const MlpModel& m);
MlpModel DecodeModel(std::span<const uint8_t> bytes);
void SaveModel(const MlpModel& m, const std::filesystem::path& path);
MlpModel LoadModel(const std::filesystem::path& path);

Eigen::VectorXd OneHot(int label, size_t size);

}  // namespace phonemode

#endif  // PHONEMODE_NEURAL_H_
