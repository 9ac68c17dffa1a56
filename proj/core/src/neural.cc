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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "phonemode/error.h"
#include "phonemode/feature_io.h"
#include "phonemode/random.h"

namespace phonemode {

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
}

MlpModel MlpModel::Create(size_t input_dim, size_t hidden_dim, size_t output_dim, uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
  }
  if (output_dim < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two output classes");
  MlpModel m;
  m.init_seed = seed;
  Rng rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  m.w1.resize(static_cast<Eigen::Index>(hidden_dim), static_cast<Eigen::Index>(input_dim));
  m.w2.resize(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(hidden_dim));
  // Row-major fill order so the draw sequence matches the file layout.
  for (Eigen::Index i = 0; i < m.w1.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w1.cols(); ++j) m.w1(i, j) = rng.Uniform(-r1, r1);
  for (Eigen::Index i = 0; i < m.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w2.cols(); ++j) m.w2(i, j) = rng.Uniform(-r2, r2);
  m.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden_dim));
  m.b2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(output_dim));
  return m;
}

void MlpModel::Validate() const {
  if (w1.rows() == 0 || w1.cols() == 0 || b1.size() != w1.rows() || w2.cols() != w1.rows() ||
      b2.size() != w2.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "inconsistent MLP parameter shapes");
  }
  if (w2.rows() < 2) throw Error(ErrorCode::kInvalidArgument, "MLP needs r >= 2 outputs");
  if (input_mean.size() != input_scale.size() ||
      (input_mean.size() != 0 && input_mean.size() != w1.cols())) {
    throw Error(ErrorCode::kDimensionMismatch, "standardizer does not match input size");
  }
  const bool finite = w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
                      input_mean.allFinite() && input_scale.allFinite();
  if (!finite) throw Error(ErrorCode::kInvalidArgument, "non-finite MLP parameter");
}

void MlpModel::FitStandardizer(const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != w1.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "standardizer data has wrong width");
  }
  const auto n = static_cast<double>(inputs.rows());
  input_mean = inputs.colwise().sum().transpose() / n;
  input_scale.resize(inputs.cols());
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    const double var = (inputs.col(c).array() - input_mean(c)).square().sum() / n;
    input_scale(c) = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
  }
}

Eigen::VectorXd MlpModel::Standardize(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "MLP expects " + std::to_string(input_dim()) +
                                                   " inputs, got " + std::to_string(x.size()));
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (has_standardizer()) v = ((v - input_mean).array() * input_scale.array()).matrix();
  return v;
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd MlpModel::ForwardStandardized(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd h = (w1 * x + b1).array().tanh().matrix();
  return Softmax(w2 * h + b2);
}

Eigen::VectorXd MlpModel::Forward(std::span<const double> x) const {
  return ForwardStandardized(Standardize(x));
}

Eigen::VectorXd OneHot(int label, size_t size) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  t(label) = 1.0;
  return t;
}

double SampleLoss(const Eigen::VectorXd& output, const Eigen::VectorXd& target, Loss loss) {
  if (loss == Loss::kMse) return 0.5 * (output - target).squaredNorm();
  double l = 0.0;
  for (Eigen::Index i = 0; i < output.size(); ++i) {
    if (target(i) > 0.0) l -= target(i) * std::log(std::max(output(i), 1e-300));
  }
  return l;
}

namespace {

// dL/dz for softmax outputs y and logits z.
void OutputDelta(const Eigen::VectorXd& y, const Eigen::VectorXd& target, Loss loss,
                 Eigen::VectorXd& delta) {
  if (loss == Loss::kCrossEntropy) {
    delta = y - target;
    return;
  }
  const Eigen::VectorXd g = y - target;
  const double dot = y.dot(g);
  delta = (y.array() * (g.array() - dot)).matrix();
}

}  // namespace

Gradients Backprop(const MlpModel& m, std::span<const double> x, const Eigen::VectorXd& target,
                   Loss loss) {
  const Eigen::VectorXd xs = m.Standardize(x);
  const Eigen::VectorXd h = (m.w1 * xs + m.b1).array().tanh().matrix();
  const Eigen::VectorXd y = Softmax(m.w2 * h + m.b2);
  Eigen::VectorXd dz;
  OutputDelta(y, target, loss, dz);
  Gradients g;
  g.w2 = dz * h.transpose();
  g.b2 = dz;
  const Eigen::VectorXd da = ((m.w2.transpose() * dz).array() * (1.0 - h.array().square())).matrix();
  g.w1 = da * xs.transpose();
  g.b1 = da;
  return g;
}

double GradientCheck(const MlpModel& m, std::span<const double> x, const Eigen::VectorXd& target,
                     Loss loss, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step must be > 0");
  const Gradients analytic = Backprop(m, x, target, loss);
  MlpModel probe = m;
  double worst = 0.0;
  auto check = [&](double& param, double grad) {
    const double saved = param;
    param = saved + eps;
    const double up = SampleLoss(probe.Forward(x), target, loss);
    param = saved - eps;
    const double down = SampleLoss(probe.Forward(x), target, loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(grad), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(grad - numeric) / denom);
  };
  for (Eigen::Index i = 0; i < probe.w1.size(); ++i) check(probe.w1.data()[i], analytic.w1.data()[i]);
  for (Eigen::Index i = 0; i < probe.b1.size(); ++i) check(probe.b1(i), analytic.b1(i));
  for (Eigen::Index i = 0; i < probe.w2.size(); ++i) check(probe.w2.data()[i], analytic.w2.data()[i]);
  for (Eigen::Index i = 0; i < probe.b2.size(); ++i) check(probe.b2(i), analytic.b2(i));
  return worst;
}

TrainResult TrainSgd(MlpModel model, const Dataset& data, const TrainConfig& cfg) {
  cfg.Validate();
  model.Validate();
  const size_t n = data.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (static_cast<size_t>(data.inputs.rows()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "inputs and labels differ in length");
  }
  if (static_cast<size_t>(data.inputs.cols()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "training inputs do not match model input size");
  }
  const auto classes = static_cast<int>(model.output_dim());
  for (int label : data.labels) {
    if (label < 0 || label >= classes) {
      throw Error(ErrorCode::kInvalidArgument, "label out of range: " + std::to_string(label));
    }
  }

  // Samples as columns, already standardized.
  Eigen::MatrixXd xs = data.inputs.transpose();
  if (model.has_standardizer()) {
    xs = ((xs.colwise() - model.input_mean).array().colwise() * model.input_scale.array()).matrix();
  }

  const Eigen::Index q = static_cast<Eigen::Index>(model.hidden_dim());
  const Eigen::Index r = static_cast<Eigen::Index>(model.output_dim());
  Eigen::VectorXd h(q), z(r), y(r), dz(r), da(q), target(r);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler(cfg.shuffle_seed);
  const double lr = cfg.learning_rate;

  TrainResult result;
  result.loss_trace.reserve(static_cast<size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffler.Shuffle(order);
    double total = 0.0;
    for (size_t idx : order) {
      const auto x = xs.col(static_cast<Eigen::Index>(idx));
      h.noalias() = model.w1 * x;
      h = (h + model.b1).array().tanh().matrix();
      z.noalias() = model.w2 * h;
      z += model.b2;
      y = Softmax(z);
      target.setZero();
      target(data.labels[idx]) = 1.0;
      total += SampleLoss(y, target, cfg.loss);
      OutputDelta(y, target, cfg.loss, dz);
      da.noalias() = model.w2.transpose() * dz;
      da = (da.array() * (1.0 - h.array().square())).matrix();
      model.w2.noalias() -= lr * dz * h.transpose();
      model.b2 -= lr * dz;
      model.w1.noalias() -= lr * da * x.transpose();
      model.b1 -= lr * da;
    }
    const double mean_loss = total / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) {
      throw Error(ErrorCode::kDivergedTraining,
                  "loss became non-finite in epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(mean_loss);
  }
  model.train_config = cfg;
  result.model = std::move(model);
  return result;
}

TrainResult TrainSgd(const Dataset& data, size_t hidden_dim, size_t num_classes,
                     const TrainConfig& cfg, uint64_t init_seed) {
  MlpModel m = MlpModel::Create(static_cast<size_t>(data.inputs.cols()), hidden_dim, num_classes,
                                init_seed);
  if (data.size() > 0) m.FitStandardizer(data.inputs);
  return TrainSgd(std::move(m), data, cfg);
}

SentenceDecision ClassifySentenceMajority(const MlpModel& m, const FeatureMatrix& frames) {
  if (frames.rows() == 0) throw Error(ErrorCode::kLength, "majority vote over zero frames");
  if (frames.cols() != m.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame dimension does not match model input");
  }
  std::vector<size_t> votes(m.output_dim(), 0);
  for (size_t t = 0; t < frames.rows(); ++t) {
    const Eigen::VectorXd y = m.Forward(frames.row(t));
    Eigen::Index best = 0;
    y.maxCoeff(&best);  // first maximum on ties
    ++votes[static_cast<size_t>(best)];
  }
  SentenceDecision d;
  d.label = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  for (size_t v : votes) {
    d.vote_fractions.push_back(static_cast<double>(v) / static_cast<double>(frames.rows()));
  }
  return d;
}

std::vector<uint8_t> EncodeModel(const MlpModel& m) {
  m.Validate();
  std::vector<uint8_t> out;
  out.insert(out.end(), {'P', 'H', 'N', 'N'});
  wire::PutU16(out, kModelFileVersion);
  wire::PutU32(out, static_cast<uint32_t>(m.input_dim()));
  wire::PutU32(out, static_cast<uint32_t>(m.hidden_dim()));
  wire::PutU32(out, static_cast<uint32_t>(m.output_dim()));
  wire::PutU8(out, static_cast<uint8_t>(m.hidden_activation));
  wire::PutU8(out, static_cast<uint8_t>(m.output_activation));
  auto put_matrix = [&out](const Eigen::MatrixXd& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) wire::PutF64(out, a(i, j));
  };
  auto put_vector = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) wire::PutF64(out, v(i));
  };
  put_matrix(m.w1);
  put_vector(m.b1);
  put_matrix(m.w2);
  put_vector(m.b2);
  wire::PutU8(out, m.has_standardizer() ? 1 : 0);
  if (m.has_standardizer()) {
    put_vector(m.input_mean);
    put_vector(m.input_scale);
  }
  wire::PutF64(out, m.train_config.learning_rate);
  wire::PutU32(out, static_cast<uint32_t>(m.train_config.epochs));
  wire::PutU8(out, static_cast<uint8_t>(m.train_config.loss));
  wire::PutU64(out, m.train_config.shuffle_seed);
  wire::PutU64(out, m.init_seed);
  return out;
}

MlpModel DecodeModel(std::span<const uint8_t> bytes) {
  wire::Reader r(bytes);
  r.Expect("PHNN");
  const uint16_t version = r.U16();
  if (version != kModelFileVersion) {
    throw Error(ErrorCode::kParse, "unsupported PHNN version " + std::to_string(version));
  }
  const auto p = static_cast<Eigen::Index>(r.U32());
  const auto q = static_cast<Eigen::Index>(r.U32());
  const auto o = static_cast<Eigen::Index>(r.U32());
  MlpModel m;
  const uint8_t hidden = r.U8();
  const uint8_t output = r.U8();
  if (hidden != static_cast<uint8_t>(Activation::kTanh) ||
      output != static_cast<uint8_t>(Activation::kSoftmax)) {
    throw Error(ErrorCode::kParse, "unsupported activation tags");
  }
  auto get_matrix = [&r](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = r.F64();
    return a;
  };
  auto get_vector = [&r](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = r.F64();
    return v;
  };
  m.w1 = get_matrix(q, p);
  m.b1 = get_vector(q);
  m.w2 = get_matrix(o, q);
  m.b2 = get_vector(o);
  if (r.U8() != 0) {
    m.input_mean = get_vector(p);
    m.input_scale = get_vector(p);
  }
  m.train_config.learning_rate = r.F64();
  m.train_config.epochs = static_cast<int>(r.U32());
  const uint8_t loss = r.U8();
  if (loss != 1 && loss != 2) throw Error(ErrorCode::kParse, "unknown loss tag");
  m.train_config.loss = static_cast<Loss>(loss);
  m.train_config.shuffle_seed = r.U64();
  m.init_seed = r.U64();
  if (!r.done()) throw Error(ErrorCode::kParse, "trailing bytes after PHNN payload");
  m.Validate();
  return m;
}

void SaveModel(const MlpModel& m, const std::filesystem::path& path) {
  wire::WriteFile(path, EncodeModel(m));
}

MlpModel LoadModel(const std::filesystem::path& path) {
  try {
    return DecodeModel(wire::ReadFile(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace phonemode
