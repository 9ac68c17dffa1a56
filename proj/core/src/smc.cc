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

#include "phonemode/smc.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "phonemode/config.h"
#include "phonemode/error.h"

namespace phonemode {

void ScoreVector::Validate() const {
  if (scores.size() < 2) throw Error(ErrorCode::kInvalidArgument, "score vector needs >= 2 classes");
  double s = 0.0;
  for (double v : scores) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "score outside [0, 1]");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6) throw Error(ErrorCode::kInvalidArgument, "scores do not sum to one");
}

int ScoreVector::Argmax() const {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

void FusionWeights::Validate() const {
  if (w.empty()) throw Error(ErrorCode::kInvalidArgument, "no fusion weights");
  double s = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "fusion weights must be >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidArgument, "fusion weights must sum to 1");
}

ScoreVector FuseScores(std::span<const ScoreVector> scores, const FusionWeights& w) {
  w.Validate();
  if (scores.size() != w.w.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "got " + std::to_string(scores.size()) +
                                                   " score vectors for " +
                                                   std::to_string(w.w.size()) + " weights");
  }
  const size_t r = scores.front().scores.size();
  ScoreVector out;
  out.scores.assign(r, 0.0);
  out.source = "fused";
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].scores.size() != r) {
      throw Error(ErrorCode::kDimensionMismatch, "score vectors differ in class count");
    }
    for (size_t c = 0; c < r; ++c) out.scores[c] += w.w[i] * scores[i].scores[c];
  }
  double s = 0.0;
  for (double v : out.scores) s += v;
  if (std::abs(s - 1.0) > 1e-12) {
    for (double& v : out.scores) v /= s;
  }
  return out;
}

double ScoreAccuracy(const std::vector<ScoreVector>& scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ in length");
  }
  if (scores.empty()) return 0.0;
  size_t ok = 0;
  for (size_t i = 0; i < scores.size(); ++i) ok += scores[i].Argmax() == labels[i];
  return static_cast<double>(ok) / static_cast<double>(scores.size());
}

WeightSearchResult SearchWeights(const std::vector<ScoreVector>& a,
                                 const std::vector<ScoreVector>& b, std::span<const int> labels,
                                 double step) {
  if (labels.empty()) throw Error(ErrorCode::kInvalidArgument, "weight search needs a dev set");
  if (a.size() != labels.size() || b.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dev scores and labels differ in length");
  }
  if (!(step > 0.0 && step < 0.5)) throw Error(ErrorCode::kInvalidArgument, "step must be in (0, 0.5)");
  const auto steps = static_cast<long>(std::lround(1.0 / step));
  WeightSearchResult res;
  res.accuracy = -1.0;
  for (long k = 1; k <= steps - 2; ++k) {
    const double w1 = static_cast<double>(k) / static_cast<double>(steps);
    const FusionWeights w{{w1, 1.0 - w1}};
    size_t ok = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
      const std::array<ScoreVector, 2> pair{a[i], b[i]};
      ok += FuseScores(pair, w).Argmax() == labels[i];
    }
    const double acc = static_cast<double>(ok) / static_cast<double>(labels.size());
    res.candidates.push_back({w1, acc});
    if (acc > res.accuracy) {
      res.accuracy = acc;
      res.weights = w;
    }
  }
  return res;
}

Waveform PreprocessForSmc(const Waveform& w, const SilenceOptions& silence, double duration_s) {
  return ChopFixed(RemoveSilence(w, silence), duration_s);
}

SmcFeatures ExtractSmcFeatures(const Waveform& utt, const SmcFeatureOptions& opts) {
  SmcFeatures f;
  const EpochSet epochs = ExtractEpochs(ZeroFrequencyFilter(utt, opts.zff));
  f.pitch = PitchContour(epochs, utt.size(), utt.sample_rate_hz, opts.contour);
  f.strength = EpochStrengthContour(epochs, utt.size(), utt.sample_rate_hz, opts.contour);
  f.mfcc39 = AddDeltas(Mfcc(utt, opts.grid, opts.mfcc));
  return f;
}

namespace {

ScoreVector ToScore(const Eigen::VectorXd& y, const char* source) {
  ScoreVector s;
  s.scores.assign(y.data(), y.data() + y.size());
  s.source = source;
  return s;
}

void CheckTopology(const MlpModel& m, size_t p, size_t q, const char* name) {
  m.Validate();
  if (m.input_dim() != p || m.output_dim() != 2 || (q != 0 && m.hidden_dim() != q)) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(name) + " model has the wrong topology");
  }
}

std::string WeightsText(const FusionWeights& w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g", w.w[0], w.w[1]);
  return buf;
}

FusionWeights ParseWeightLine(const std::string& s) {
  FusionWeights w;
  std::istringstream is(s);
  double v;
  while (is >> v) w.w.push_back(v);
  if (w.w.size() != 2) throw Error(ErrorCode::kParse, "expected two fusion weights");
  w.Validate();
  return w;
}

}  // namespace

void SmcSystem::Validate() const {
  CheckTopology(pc_model, pc_model.input_dim(), 0, "pc");
  CheckTopology(esc_model, pc_model.input_dim(), 0, "esc");
  CheckTopology(vt_model, 39, 0, "vt");
  stage2.Validate();
  stage3.Validate();
  if (stage2.w.size() != 2 || stage3.w.size() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "each fusion stage takes two weights");
  }
}

SmcTrace SmcSystem::Classify(const SmcFeatures& f) const {
  SmcTrace t;
  t.pc = ToScore(pc_model.Forward(f.pitch.values), "pc");
  t.esc = ToScore(esc_model.Forward(f.strength.values), "esc");
  const SentenceDecision vt = ClassifySentenceMajority(vt_model, f.mfcc39);
  t.vt.scores = vt.vote_fractions;
  t.vt.source = "vt";
  const std::array<ScoreVector, 2> s2{t.pc, t.esc};
  t.src = FuseScores(s2, stage2);
  t.src.source = "src";
  const std::array<ScoreVector, 2> s3{t.src, t.vt};
  t.src_vt = FuseScores(s3, stage3);
  t.src_vt.source = "src-vt";
  t.decision = static_cast<Mode>(t.src_vt.Argmax());
  return t;
}

void SmcSystem::Save(const std::filesystem::path& dir) const {
  Validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  SaveModel(pc_model, dir / "pc.phnn");
  SaveModel(esc_model, dir / "esc.phnn");
  SaveModel(vt_model, dir / "vt.phnn");
  KeyValueFile kv;
  kv.format = "phonemode-smc";
  kv.version = 1;
  kv.Set("classes", "conversation read");
  kv.Set("stage2_weights", WeightsText(stage2));
  kv.Set("stage3_weights", WeightsText(stage3));
  kv.Set("weights_source", weights_source);
  WriteTextFile(dir / "weights.txt", kv.Format());
}

SmcSystem SmcSystem::Load(const std::filesystem::path& dir) {
  SmcSystem s;
  s.pc_model = LoadModel(dir / "pc.phnn");
  s.esc_model = LoadModel(dir / "esc.phnn");
  s.vt_model = LoadModel(dir / "vt.phnn");
  const auto kv = KeyValueFile::Parse(ReadTextFile(dir / "weights.txt"), "phonemode-smc", 1);
  if (kv.Get("classes") != "conversation read") {
    throw Error(ErrorCode::kParse, "unexpected class order in " + (dir / "weights.txt").string());
  }
  s.stage2 = ParseWeightLine(kv.Get("stage2_weights"));
  s.stage3 = ParseWeightLine(kv.Get("stage3_weights"));
  s.weights_source = kv.Get("weights_source");
  s.Validate();
  return s;
}

void SmcTrainConfig::Validate() const {
  base.Validate();
  if (contour_dim == 0 || contour_hidden == 0 || vt_hidden == 0) {
    throw Error(ErrorCode::kConfig, "SMC layer sizes must be positive");
  }
  if (contour_epochs < 1 || vt_epochs < 1) throw Error(ErrorCode::kConfig, "SMC epochs must be >= 1");
  if (vt_frame_stride == 0) throw Error(ErrorCode::kConfig, "vt frame stride must be >= 1");
  if (!(search_step > 0.0 && search_step < 0.5)) throw Error(ErrorCode::kConfig, "bad search step");
}

SmcScoreSet ScoreSamples(const SmcSystem& sys, const std::vector<SmcSample>& samples) {
  SmcScoreSet out;
  for (const auto& s : samples) {
    const SmcTrace t = sys.Classify(s.features);
    out.pc.push_back(t.pc);
    out.esc.push_back(t.esc);
    out.vt.push_back(t.vt);
    out.src.push_back(t.src);
    out.src_vt.push_back(t.src_vt);
    out.labels.push_back(static_cast<int>(s.mode));
  }
  return out;
}

SmcTrainResult TrainSmc(const std::vector<SmcSample>& train, const std::vector<SmcSample>& dev,
                        const SmcTrainConfig& cfg) {
  cfg.Validate();
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "no SMC training utterances");
  std::array<size_t, kNumModes> per_mode{};
  for (const auto& s : train) ++per_mode[static_cast<size_t>(s.mode)];
  if (per_mode[0] == 0 || per_mode[1] == 0) {
    throw Error(ErrorCode::kInvalidArgument, "SMC training needs both read and conversation utterances");
  }

  const auto n = static_cast<Eigen::Index>(train.size());
  const auto p = static_cast<Eigen::Index>(cfg.contour_dim);
  Dataset pc_data, esc_data, vt_data;
  pc_data.inputs.resize(n, p);
  esc_data.inputs.resize(n, p);
  size_t vt_rows = 0;
  for (const auto& s : train) {
    if (s.features.pitch.values.size() != cfg.contour_dim ||
        s.features.strength.values.size() != cfg.contour_dim) {
      throw Error(ErrorCode::kDimensionMismatch, s.id + ": contour length differs from " +
                                                     std::to_string(cfg.contour_dim));
    }
    vt_rows += (s.features.mfcc39.rows() + cfg.vt_frame_stride - 1) / cfg.vt_frame_stride;
  }
  vt_data.inputs.resize(static_cast<Eigen::Index>(vt_rows), 39);
  Eigen::Index vr = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = train[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      pc_data.inputs(i, j) = s.features.pitch.values[static_cast<size_t>(j)];
      esc_data.inputs(i, j) = s.features.strength.values[static_cast<size_t>(j)];
    }
    pc_data.labels.push_back(static_cast<int>(s.mode));
    esc_data.labels.push_back(static_cast<int>(s.mode));
    for (size_t t = 0; t < s.features.mfcc39.rows(); t += cfg.vt_frame_stride) {
      const auto row = s.features.mfcc39.row(t);
      for (Eigen::Index c = 0; c < 39; ++c) vt_data.inputs(vr, c) = row[static_cast<size_t>(c)];
      vt_data.labels.push_back(static_cast<int>(s.mode));
      ++vr;
    }
  }

  auto train_one = [&](const Dataset& d, size_t hidden, int epochs, uint64_t salt) {
    TrainConfig tc = cfg.base;
    tc.epochs = epochs;
    tc.shuffle_seed = cfg.seed * 8 + salt;
    return TrainSgd(d, hidden, 2, tc, cfg.seed * 8 + salt + 4).model;
  };

  SmcTrainResult res;
  res.system.pc_model = train_one(pc_data, cfg.contour_hidden, cfg.contour_epochs, 1);
  res.system.esc_model = train_one(esc_data, cfg.contour_hidden, cfg.contour_epochs, 2);
  res.system.vt_model = train_one(vt_data, cfg.vt_hidden, cfg.vt_epochs, 3);

  if (dev.empty()) {
    res.warnings.push_back("no dev split; using the universal weights 0.45/0.55 and 0.35/0.65");
    res.system.weights_source = "default";
  } else {
    // Stage 2 on stage-1 scores, then stage 3 on the re-fused stage-2 scores.
    SmcScoreSet scores = ScoreSamples(res.system, dev);
    res.stage2_search = SearchWeights(scores.pc, scores.esc, scores.labels, cfg.search_step);
    res.system.stage2 = res.stage2_search.weights;
    scores = ScoreSamples(res.system, dev);
    res.stage3_search = SearchWeights(scores.src, scores.vt, scores.labels, cfg.search_step);
    res.system.stage3 = res.stage3_search.weights;
    res.system.weights_source = "searched";
    res.searched = true;
    scores = ScoreSamples(res.system, dev);
    res.dev.pc = ScoreAccuracy(scores.pc, scores.labels);
    res.dev.esc = ScoreAccuracy(scores.esc, scores.labels);
    res.dev.vt = ScoreAccuracy(scores.vt, scores.labels);
    res.dev.src = ScoreAccuracy(scores.src, scores.labels);
    res.dev.src_vt = ScoreAccuracy(scores.src_vt, scores.labels);
    auto near = [](const FusionWeights& a, const FusionWeights& b) {
      return std::abs(a.w[0] - b.w[0]) < 1e-9;
    };
    res.matches_universal_weights = near(res.system.stage2, kDefaultStage2Weights) &&
                                    near(res.system.stage3, kDefaultStage3Weights);
  }
  res.system.Validate();
  return res;
}

}  // namespace phonemode
