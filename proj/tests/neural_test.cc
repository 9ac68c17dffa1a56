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


#include "phonemode/neural.h"

#include <cmath>

#include <gtest/gtest.h>

#include "phonemode/random.h"
#include "test_util.h"

namespace phonemode {
namespace {

MlpModel Seeded232() {
  MlpModel m = MlpModel::Create(2, 3, 2, 0);
  m.w1 << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6;
  m.b1 << 0.01, 0.02, -0.03;
  m.w2 << 0.7, -0.8, 0.9, -1.0, 1.1, -1.2;
  m.b2 << 0.05, -0.05;
  return m;
}

TEST(MlpTest, ForwardGolden) {
  // Hand-evaluated for x = (1, 0): hidden pre-activations are the first
  // column of W1 plus b1.
  const double h0 = std::tanh(0.1 + 0.01), h1 = std::tanh(0.3 + 0.02), h2 = std::tanh(-0.5 - 0.03);
  const double z0 = 0.7 * h0 - 0.8 * h1 + 0.9 * h2 + 0.05;
  const double z1 = -1.0 * h0 + 1.1 * h1 - 1.2 * h2 - 0.05;
  const double p0 = 1.0 / (1.0 + std::exp(z1 - z0));
  const std::vector<double> x = {1.0, 0.0};
  const auto y = Seeded232().Forward(x);
  EXPECT_NEAR(y(0), p0, 1e-15);
  EXPECT_NEAR(y(1), 1.0 - p0, 1e-15);
  EXPECT_NEAR(p0, 0.2106330058, 1e-9);
}

TEST(MlpTest, CreateDrawsUniformRowMajor) {
  const MlpModel m = MlpModel::Create(4, 3, 2, 99);
  Rng rng(99);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(m.w1(i, j), rng.Uniform(-0.5, 0.5));
  const double r2 = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(m.w2(i, j), rng.Uniform(-r2, r2));
  EXPECT_TRUE(m.b1.isZero());
  EXPECT_TRUE(m.b2.isZero());
  EXPECT_PM_ERROR(MlpModel::Create(4, 3, 1, 1), ErrorCode::kInvalidArgument);
  EXPECT_PM_ERROR(MlpModel::Create(0, 3, 2, 1), ErrorCode::kInvalidArgument);
}

TEST(MlpTest, SoftmaxIsStableAndNormalized) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd z(2 + rng.Index(10));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.Uniform(-50.0, 50.0) * (trial % 3 ? 1 : 20);
    const Eigen::VectorXd p = Softmax(z);
    EXPECT_TRUE(p.allFinite());
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
  Eigen::VectorXd z(2);
  z << 50.0, -50.0;
  EXPECT_NEAR(Softmax(z)(0), 1.0, 1e-15);
}

TEST(MlpTest, ForwardRejectsWrongWidth) {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  EXPECT_PM_ERROR(Seeded232().Forward(x), ErrorCode::kDimensionMismatch);
  MlpModel bad = Seeded232();
  bad.w1(0, 0) = std::nan("");
  EXPECT_PM_ERROR(bad.Validate(), ErrorCode::kInvalidArgument);
}

TEST(GradientTest, TwentySeededModelsBothLosses) {
  Rng rng(2);
  for (Loss loss : {Loss::kMse, Loss::kCrossEntropy}) {
    for (uint64_t seed = 0; seed < 20; ++seed) {
      const size_t p = 1 + rng.Index(8), q = 1 + rng.Index(8), r = 2 + rng.Index(4);
      MlpModel m = MlpModel::Create(p, q, r, seed);
      for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1(i) = rng.Uniform(-0.5, 0.5);
      for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2(i) = rng.Uniform(-0.5, 0.5);
      std::vector<double> x(p);
      for (double& v : x) v = rng.Gaussian();
      const Eigen::VectorXd t = OneHot(static_cast<int>(rng.Index(r)), r);
      EXPECT_LT(GradientCheck(m, x, t, loss), 1e-4) << "seed " << seed;
    }
  }
  const std::vector<double> x = {1.0, 0.0};
  EXPECT_PM_ERROR(GradientCheck(Seeded232(), x, OneHot(0, 2), Loss::kMse, 0.0),
                  ErrorCode::kInvalidArgument);
}

TEST(LossTest, ValuesOnKnownOutputs) {
  Eigen::VectorXd y(2), t(2);
  y << 0.25, 0.75;
  t << 0.0, 1.0;
  EXPECT_DOUBLE_EQ(SampleLoss(y, t, Loss::kMse), 0.5 * (0.0625 + 0.0625));
  EXPECT_DOUBLE_EQ(SampleLoss(y, t, Loss::kCrossEntropy), -std::log(0.75));
}

Dataset Xor() {
  Dataset d;
  d.inputs.resize(4, 2);
  d.inputs << 0, 0, 0, 1, 1, 0, 1, 1;
  d.labels = {0, 1, 1, 0};
  return d;
}

int Correct(const MlpModel& m, const Dataset& d) {
  int ok = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    const Eigen::VectorXd row = d.inputs.row(static_cast<Eigen::Index>(i)).transpose();
    Eigen::Index best = 0;
    m.Forward(std::span<const double>(row.data(), static_cast<size_t>(row.size()))).maxCoeff(&best);
    ok += best == d.labels[i];
  }
  return ok;
}

TEST(TrainTest, LearnsXor) {
  TrainConfig cfg;
  cfg.learning_rate = 0.005;
  cfg.epochs = 2000;
  cfg.loss = Loss::kMse;
  const TrainResult r = TrainSgd(Xor(), 4, 2, cfg, 7);
  EXPECT_EQ(Correct(r.model, Xor()), 4);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(TrainTest, SeparatesGaussianBlobs) {
  Rng rng(3);
  Dataset d;
  d.inputs.resize(400, 3);
  for (int i = 0; i < 400; ++i) {
    const int label = i % 2;
    d.labels.push_back(label);
    for (int c = 0; c < 3; ++c) d.inputs(i, c) = rng.Gaussian() + (label ? 2.5 : -2.5);
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  const TrainResult r = TrainSgd(d, 5, 2, cfg, 1);
  EXPECT_GE(Correct(r.model, d), 396);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(TrainTest, IsDeterministic) {
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.shuffle_seed = 5;
  const TrainResult a = TrainSgd(Xor(), 4, 2, cfg, 3);
  const TrainResult b = TrainSgd(Xor(), 4, 2, cfg, 3);
  EXPECT_EQ(EncodeModel(a.model), EncodeModel(b.model));
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  cfg.shuffle_seed = 6;
  EXPECT_NE(EncodeModel(TrainSgd(Xor(), 4, 2, cfg, 3).model), EncodeModel(a.model));
}

TEST(TrainTest, RejectsBadInputsAndReportsDivergence) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_PM_ERROR(cfg.Validate(), ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_PM_ERROR(cfg.Validate(), ErrorCode::kInvalidArgument);
  cfg = {};
  Dataset d = Xor();
  d.labels[0] = 2;
  EXPECT_PM_ERROR(TrainSgd(d, 2, 2, cfg, 1), ErrorCode::kInvalidArgument);
  d = Xor();
  d.labels.pop_back();
  EXPECT_PM_ERROR(TrainSgd(MlpModel::Create(2, 2, 2, 1), d, cfg), ErrorCode::kDimensionMismatch);
  d = Xor();
  d.inputs(1, 1) = std::nan("");
  try {
    TrainSgd(MlpModel::Create(2, 2, 2, 1), d, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergedTraining);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(StandardizerTest, FitsPopulationStatistics) {
  MlpModel m = MlpModel::Create(2, 2, 2, 1);
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 3, 5, 5, 5, 7, 5;
  m.FitStandardizer(x);
  EXPECT_DOUBLE_EQ(m.input_mean(0), 4.0);
  EXPECT_DOUBLE_EQ(m.input_scale(0), 1.0 / std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(m.input_scale(1), 1.0);  // constant column
  const std::vector<double> v = {6.0, 5.0};
  const auto s = m.Standardize(v);
  EXPECT_DOUBLE_EQ(s(0), 2.0 / std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(s(1), 0.0);
}

TEST(MajorityTest, VotesAndTies) {
  // Output is class 1 iff the input is positive.
  MlpModel m = MlpModel::Create(1, 1, 2, 1);
  m.w1 << 10.0;
  m.w2 << -10.0, 10.0;
  FeatureMatrix f(FeatureKind::kConcat, 5, 1, {1, 1, -1, 1, -1});
  const auto d = ClassifySentenceMajority(m, f);
  EXPECT_EQ(d.label, 1);
  EXPECT_DOUBLE_EQ(d.vote_fractions[1], 0.6);
  FeatureMatrix tie(FeatureKind::kConcat, 2, 1, {1, -1});
  EXPECT_EQ(ClassifySentenceMajority(m, tie).label, 0);
  EXPECT_PM_ERROR(ClassifySentenceMajority(m, FeatureMatrix(FeatureKind::kConcat, 0, 1, {})),
                  ErrorCode::kLength);
  EXPECT_PM_ERROR(ClassifySentenceMajority(m, FeatureMatrix(FeatureKind::kConcat, 1, 2, {1, 2})),
                  ErrorCode::kDimensionMismatch);
}

TEST(ModelIoTest, RoundTripAndCorruption) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    MlpModel m = MlpModel::Create(1 + rng.Index(6), 1 + rng.Index(6), 2 + rng.Index(3), trial);
    if (trial % 2) {
      Eigen::MatrixXd x(5, static_cast<Eigen::Index>(m.input_dim()));
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Gaussian();
      m.FitStandardizer(x);
    }
    m.train_config.learning_rate = 0.125;
    m.train_config.loss = Loss::kCrossEntropy;
    const auto bytes = EncodeModel(m);
    const MlpModel back = DecodeModel(bytes);
    EXPECT_EQ(EncodeModel(back), bytes);
    EXPECT_EQ(back.w1, m.w1);
    EXPECT_EQ(back.train_config.loss, Loss::kCrossEntropy);
    EXPECT_EQ(back.has_standardizer(), m.has_standardizer());
  }
  const auto bytes = EncodeModel(Seeded232());
  auto trailing = bytes;
  trailing.push_back(1);
  EXPECT_PM_ERROR(DecodeModel(trailing), ErrorCode::kParse);
  auto bad_act = bytes;
  bad_act[18] = 9;  // hidden activation tag
  EXPECT_PM_ERROR(DecodeModel(bad_act), ErrorCode::kParse);
  EXPECT_PM_ERROR(DecodeModel(std::vector<uint8_t>(bytes.begin(), bytes.begin() + 20)),
                  ErrorCode::kTruncatedHeader);

  const auto dir = testing::ScratchDir();
  SaveModel(Seeded232(), dir / "m.phnn");
  EXPECT_EQ(EncodeModel(LoadModel(dir / "m.phnn")), bytes);
}

}  // namespace
}  // namespace phonemode
