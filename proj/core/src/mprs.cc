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

#include "phonemode/mprs.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "phonemode/config.h"
#include "phonemode/error.h"
#include "phonemode/excitation.h"
#include "phonemode/feature_io.h"

namespace phonemode {

PhoneInventory::PhoneInventory(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (size_t i = 0; i < labels_.size(); ++i) {
    const auto& l = labels_[i];
    if (l.empty() || l.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error(ErrorCode::kInventory, "invalid phone label '" + l + "'");
    }
    if (!index_.emplace(l, static_cast<int>(i)).second) {
      throw Error(ErrorCode::kInventory, "duplicate phone label " + l);
    }
  }
}

PhoneInventory PhoneInventory::FromTranscripts(
    const std::vector<std::vector<std::string>>& transcripts) {
  std::vector<std::string> labels;
  for (const auto& t : transcripts) labels.insert(labels.end(), t.begin(), t.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return PhoneInventory(std::move(labels));
}

int PhoneInventory::Index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw Error(ErrorCode::kInventory, "phone '" + label + "' is not in the inventory");
  }
  return it->second;
}

std::vector<int> PhoneInventory::Encode(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(Index(l));
  return out;
}

std::vector<std::string> PhoneInventory::Decode(std::span<const int> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(label(i));
  return out;
}

std::string PhoneInventory::Format() const {
  std::string out;
  for (const auto& l : labels_) out += l + "\n";
  return out;
}

PhoneInventory PhoneInventory::Parse(std::string_view text) {
  std::vector<std::string> labels;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    labels.push_back(line);
  }
  return PhoneInventory(std::move(labels));
}

void BigramLm::Validate() const {
  const size_t k = initial.size();
  if (k == 0 || log_prob.size() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "bigram table does not match the inventory");
  }
  auto check = [](const std::vector<double>& row, const std::string& what) {
    double s = 0.0;
    for (double v : row) {
      if (std::isnan(v) || v > 1e-12) throw Error(ErrorCode::kInvalidArgument, what + " has bad log-prob");
      s += std::exp(v);
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, what + " does not sum to one");
    }
  };
  check(initial, "initial distribution");
  for (size_t i = 0; i < k; ++i) {
    if (log_prob[i].size() != k) throw Error(ErrorCode::kDimensionMismatch, "ragged bigram table");
    check(log_prob[i], "bigram row " + std::to_string(i));
  }
}

namespace {

std::string FormatLogProb(double v) {
  if (std::isinf(v)) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> NormalizeLog(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  std::vector<double> out(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    out[i] = counts[i] > 0.0 ? std::log(counts[i] / total) : kNegInf;
  }
  return out;
}

}  // namespace

std::string BigramLm::Format(const PhoneInventory& inv) const {
  Validate();
  std::string out = "# bigram phone language model\nformat phonemode-lm 1\n";
  out += "smoothing " + FormatLogProb(smoothing) + "\n";
  for (size_t j = 0; j < size(); ++j) {
    out += "<s> " + inv.label(static_cast<int>(j)) + " " + FormatLogProb(initial[j]) + "\n";
  }
  for (size_t i = 0; i < size(); ++i)
    for (size_t j = 0; j < size(); ++j) {
      out += inv.label(static_cast<int>(i)) + " " + inv.label(static_cast<int>(j)) + " " +
             FormatLogProb(log_prob[i][j]) + "\n";
    }
  return out;
}

BigramLm BigramLm::Parse(std::string_view text, const PhoneInventory& inv) {
  const size_t k = inv.size();
  BigramLm lm;
  lm.initial.assign(k, kNegInf);
  lm.log_prob.assign(k, std::vector<double>(k, kNegInf));
  std::istringstream is{std::string(text)};
  std::string line;
  size_t line_no = 0;
  bool saw_format = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, c;
    ls >> a >> b;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::kParse, "lm line " + std::to_string(line_no) + ": " + msg);
    };
    if (a == "format") {
      ls >> c;
      if (b != "phonemode-lm" || c != "1") fail("unsupported format " + b + " " + c);
      saw_format = true;
      continue;
    }
    if (!saw_format) fail("missing format header");
    if (a == "smoothing") {
      lm.smoothing = std::stod(b);
      continue;
    }
    if (!(ls >> c)) fail("expected 'prev next logp'");
    double v;
    try {
      v = c == "-inf" ? kNegInf : std::stod(c);
    } catch (const std::exception&) {
      fail("bad log-prob '" + c + "'");
    }
    const int j = inv.Index(b);
    if (a == "<s>") {
      lm.initial[static_cast<size_t>(j)] = v;
    } else {
      lm.log_prob[static_cast<size_t>(inv.Index(a))][static_cast<size_t>(j)] = v;
    }
  }
  if (!saw_format) throw Error(ErrorCode::kParse, "lm: missing format header");
  lm.Validate();
  return lm;
}

BigramLm TrainLm(const std::vector<std::vector<int>>& transcripts, size_t inventory_size,
                 double smoothing_k) {
  if (transcripts.empty()) throw Error(ErrorCode::kInvalidArgument, "no transcripts for the LM");
  if (smoothing_k < 0.0) throw Error(ErrorCode::kInvalidArgument, "smoothing must be >= 0");
  const size_t k = inventory_size;
  std::vector<double> init(k, smoothing_k);
  std::vector<std::vector<double>> counts(k, std::vector<double>(k, smoothing_k));
  for (const auto& t : transcripts) {
    for (size_t i = 0; i < t.size(); ++i) {
      if (t[i] < 0 || static_cast<size_t>(t[i]) >= k) {
        throw Error(ErrorCode::kInventory, "phone index " + std::to_string(t[i]) + " out of range");
      }
      if (i == 0) init[static_cast<size_t>(t[i])] += 1.0;
      else counts[static_cast<size_t>(t[i - 1])][static_cast<size_t>(t[i])] += 1.0;
    }
  }
  BigramLm lm;
  lm.smoothing = smoothing_k;
  const auto uniform = [k] { return std::vector<double>(k, -std::log(static_cast<double>(k))); };
  const auto has_mass = [](const std::vector<double>& row) {
    return std::any_of(row.begin(), row.end(), [](double c) { return c > 0.0; });
  };
  // Unseen histories under k = 0 fall back to uniform rather than 0/0.
  lm.initial = has_mass(init) ? NormalizeLog(init) : uniform();
  for (const auto& row : counts) lm.log_prob.push_back(has_mass(row) ? NormalizeLog(row) : uniform());
  return lm;
}

namespace {

double LmTerm(double alpha, double logp) { return alpha == 0.0 ? 0.0 : alpha * logp; }

}  // namespace

std::vector<int> ViterbiStatePath(const Eigen::MatrixXd& ll, const BigramLm& lm,
                                  const DecodeOptions& opts) {
  const auto frames = static_cast<size_t>(ll.rows());
  const auto k = static_cast<size_t>(ll.cols());
  if (frames == 0) throw Error(ErrorCode::kLength, "cannot decode a zero-length feature stream");
  if (k != lm.size()) throw Error(ErrorCode::kDimensionMismatch, "LM size differs from model outputs");
  if (!(opts.alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  const size_t d = std::max<size_t>(1, std::min(opts.min_duration, frames));
  const size_t states = k * d;  // state = phone * d + sub

  std::vector<double> score(states, kNegInf), next(states);
  std::vector<int32_t> back(frames * states, -1);
  for (size_t p = 0; p < k; ++p) score[p * d] = ll(0, static_cast<Eigen::Index>(p)) + LmTerm(opts.alpha, lm.initial[p]);

  for (size_t t = 1; t < frames; ++t) {
    int32_t* bp = &back[t * states];
    for (size_t p = 0; p < k; ++p) {
      const double obs = ll(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p));
      // Entry from another phone's final sub-state.
      double best = kNegInf;
      int32_t arg = -1;
      for (size_t q = 0; q < k; ++q) {
        if (q == p) continue;
        const double s = score[q * d + d - 1];
        if (s == kNegInf) continue;
        const double cand = s + LmTerm(opts.alpha, lm.log_prob[q][p]);
        if (cand > best) {
          best = cand;
          arg = static_cast<int32_t>(q * d + d - 1);
        }
      }
      next[p * d] = best + obs;
      bp[p * d] = arg;
      if (d == 1) {
        // Self loop competes with the entry.
        const double stay = score[p];
        if (stay > best) {
          next[p] = stay + obs;
          bp[p] = static_cast<int32_t>(p);
        }
        continue;
      }
      for (size_t s = 1; s < d; ++s) {
        double from = score[p * d + s - 1];
        int32_t a = static_cast<int32_t>(p * d + s - 1);
        if (s == d - 1 && score[p * d + s] > from) {
          from = score[p * d + s];
          a = static_cast<int32_t>(p * d + s);
        }
        next[p * d + s] = from + obs;
        bp[p * d + s] = from == kNegInf ? -1 : a;
      }
    }
    score.swap(next);
  }

  double best = kNegInf;
  size_t arg = states;
  for (size_t p = 0; p < k; ++p) {
    if (score[p * d + d - 1] > best) {
      best = score[p * d + d - 1];
      arg = p * d + d - 1;
    }
  }
  if (arg == states) throw Error(ErrorCode::kEmptyResult, "no path satisfies the LM constraints");
  std::vector<int> path(frames);
  for (size_t t = frames; t-- > 0;) {
    path[t] = static_cast<int>(arg / d);
    if (t > 0) arg = static_cast<size_t>(back[t * states + arg]);
  }
  return path;
}

std::vector<int> CollapseRuns(std::span<const int> states) {
  std::vector<int> out;
  for (int s : states) {
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

double PathScore(const Eigen::MatrixXd& ll, const BigramLm& lm, double alpha,
                 std::span<const int> states) {
  double s = 0.0;
  for (size_t t = 0; t < states.size(); ++t) {
    const auto p = static_cast<size_t>(states[t]);
    s += ll(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p));
    if (t == 0) s += LmTerm(alpha, lm.initial[p]);
    else if (states[t] != states[t - 1]) s += LmTerm(alpha, lm.log_prob[static_cast<size_t>(states[t - 1])][p]);
  }
  return s;
}

std::vector<int> ViterbiDecode(const Eigen::MatrixXd& ll, const BigramLm& lm,
                               const DecodeOptions& opts) {
  return CollapseRuns(ViterbiStatePath(ll, lm, opts));
}

std::vector<int> UniformAlign(size_t frames, std::span<const int> phones) {
  if (phones.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot align an empty transcript");
  std::vector<int> out(frames);
  for (size_t t = 0; t < frames; ++t) out[t] = phones[t * phones.size() / frames];
  return out;
}

std::vector<int> ForcedAlign(const Eigen::MatrixXd& ll, std::span<const int> phones,
                             size_t min_duration) {
  const auto frames = static_cast<size_t>(ll.rows());
  const size_t n = phones.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "cannot align an empty transcript");
  if (frames < n) return UniformAlign(frames, phones);
  const size_t d = std::max<size_t>(1, std::min(min_duration, frames / n));
  const size_t states = n * d;
  std::vector<double> score(states, kNegInf), next(states);
  std::vector<uint8_t> from_prev(frames * states, 0);  // 1 = advanced from state-1
  auto obs = [&](size_t t, size_t st) {
    return ll(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(phones[st / d]));
  };
  score[0] = obs(0, 0);
  for (size_t t = 1; t < frames; ++t) {
    for (size_t st = 0; st < states; ++st) {
      const bool can_stay = st % d == d - 1;
      const double stay = can_stay ? score[st] : kNegInf;
      const double adv = st > 0 ? score[st - 1] : kNegInf;
      if (adv > stay) {
        next[st] = adv + obs(t, st);
        from_prev[t * states + st] = 1;
      } else {
        next[st] = stay == kNegInf ? kNegInf : stay + obs(t, st);
      }
    }
    score.swap(next);
  }
  if (score[states - 1] == kNegInf) return UniformAlign(frames, phones);
  std::vector<int> out(frames);
  size_t st = states - 1;
  for (size_t t = frames; t-- > 0;) {
    out[t] = phones[st / d];
    if (t > 0 && from_prev[t * states + st]) --st;
  }
  return out;
}

UtteranceStreams ExtractStreams(const Waveform& w, const MprsFeatureOptions& opts) {
  UtteranceStreams s;
  s.mfcc39 = AddDeltas(Mfcc(w, opts.grid, opts.mfcc));
  const Waveform residual = LpResidual(w, opts.lp_order, opts.grid);
  s.rmfcc39 = Rmfcc(residual, opts.grid, opts.mfcc);
  s.mpdss25 = Mpdss(residual, opts.grid, opts.mpdss_bands);
  return s;
}

void AcousticModel::Validate(size_t inventory_size) const {
  mlp.Validate();
  size_t dim = 0;
  for (FeatureKind k : feature_spec) {
    dim += k == FeatureKind::kTandem ? inventory_size : FeatureKindDim(k);
  }
  if (dim != mlp.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature spec gives " + std::to_string(dim) + " dims, acoustic model expects " +
                    std::to_string(mlp.input_dim()));
  }
  if (mlp.output_dim() != inventory_size) {
    throw Error(ErrorCode::kDimensionMismatch, "acoustic model outputs differ from inventory size");
  }
  if (!log_priors.empty() && log_priors.size() != inventory_size) {
    throw Error(ErrorCode::kDimensionMismatch, "prior vector differs from inventory size");
  }
}

std::vector<FeatureKind> ParseFeatureSpec(std::string_view text) {
  std::vector<FeatureKind> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto tok = text.substr(start, comma - start);
    const FeatureKind k = ParseFeatureKind(tok);
    if (k != FeatureKind::kMfcc39 && k != FeatureKind::kTandem && k != FeatureKind::kRmfcc39 &&
        k != FeatureKind::kMpdss25) {
      throw Error(ErrorCode::kConfig, "feature '" + std::string(tok) + "' cannot feed the acoustic model");
    }
    if (std::find(out.begin(), out.end(), k) != out.end()) {
      throw Error(ErrorCode::kConfig, "feature '" + std::string(tok) + "' listed twice");
    }
    out.push_back(k);
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, "empty feature spec");
  return out;
}

std::string FormatFeatureSpec(std::span<const FeatureKind> spec) {
  std::string out;
  for (FeatureKind k : spec) {
    if (!out.empty()) out += ",";
    out += FeatureKindName(k);
  }
  return out;
}

void MprsTrainConfig::Validate() const {
  if (features.empty()) throw Error(ErrorCode::kConfig, "no acoustic features selected");
  if (tandem_hidden == 0 || am_hidden == 0) throw Error(ErrorCode::kConfig, "hidden sizes must be > 0");
  if (tandem_epochs < 1 || am_epochs < 1) throw Error(ErrorCode::kConfig, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  if (frame_stride == 0) throw Error(ErrorCode::kConfig, "frame stride must be >= 1");
  if (realign_passes < 0) throw Error(ErrorCode::kConfig, "realign passes must be >= 0");
  if (lm_smoothing < 0.0) throw Error(ErrorCode::kConfig, "LM smoothing must be >= 0");
}

void PhoneRecognizer::Validate() const {
  const size_t k = inventory.size();
  if (k < 2) throw Error(ErrorCode::kInventory, "inventory needs at least two phones");
  tandem.Validate();
  if (tandem.input_dim() != 39 || tandem.output_dim() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "tandem model must map 39 inputs to the inventory");
  }
  acoustic.Validate(k);
  if (lm.size() != k) throw Error(ErrorCode::kDimensionMismatch, "LM size differs from inventory");
  lm.Validate();
}

namespace {

FeatureMatrix PosteriorMatrix(const MlpModel& m, const FeatureMatrix& in, FeatureKind kind) {
  const size_t k = m.output_dim();
  std::vector<double> data(in.rows() * k);
  for (size_t t = 0; t < in.rows(); ++t) {
    const Eigen::VectorXd y = m.Forward(in.row(t));
    for (size_t j = 0; j < k; ++j) data[t * k + j] = y(static_cast<Eigen::Index>(j));
  }
  return FeatureMatrix(kind, in.rows(), k, std::move(data), in.frame_shift_s());
}

FeatureMatrix AssembleInput(const std::vector<FeatureKind>& spec, const UtteranceStreams& s,
                            const FeatureMatrix* tandem) {
  std::vector<FeatureMatrix> parts;
  for (FeatureKind k : spec) {
    switch (k) {
      case FeatureKind::kMfcc39: parts.push_back(s.mfcc39); break;
      case FeatureKind::kRmfcc39: parts.push_back(s.rmfcc39); break;
      case FeatureKind::kMpdss25: parts.push_back(s.mpdss25); break;
      case FeatureKind::kTandem: parts.push_back(*tandem); break;
      default: throw Error(ErrorCode::kConfig, "unsupported acoustic feature");
    }
  }
  if (parts.size() == 1) return parts.front();
  return FeatureMatrix::Concat(parts);
}

bool NeedsTandem(const std::vector<FeatureKind>& spec) {
  return std::find(spec.begin(), spec.end(), FeatureKind::kTandem) != spec.end();
}

// Frame-subsampled training set from per-utterance inputs and labels.
Dataset BuildDataset(const std::vector<FeatureMatrix>& inputs,
                     const std::vector<std::vector<int>>& labels, size_t stride) {
  size_t n = 0;
  const size_t cols = inputs.front().cols();
  for (size_t u = 0; u < inputs.size(); ++u)
    for (size_t t = 0; t < inputs[u].rows(); ++t) n += (t + u) % stride == 0;
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  d.labels.reserve(n);
  Eigen::Index r = 0;
  for (size_t u = 0; u < inputs.size(); ++u) {
    for (size_t t = 0; t < inputs[u].rows(); ++t) {
      if ((t + u) % stride != 0) continue;
      const auto row = inputs[u].row(t);
      for (size_t c = 0; c < cols; ++c) d.inputs(r, static_cast<Eigen::Index>(c)) = row[c];
      d.labels.push_back(labels[u][t]);
      ++r;
    }
  }
  return d;
}

}  // namespace

FeatureMatrix PhoneRecognizer::TandemFeatures(const FeatureMatrix& mfcc39) const {
  return PosteriorMatrix(tandem, mfcc39, FeatureKind::kTandem);
}

FeatureMatrix PhoneRecognizer::AcousticInput(const UtteranceStreams& s) const {
  if (NeedsTandem(acoustic.feature_spec)) {
    const FeatureMatrix t = TandemFeatures(s.mfcc39);
    return AssembleInput(acoustic.feature_spec, s, &t);
  }
  return AssembleInput(acoustic.feature_spec, s, nullptr);
}

Eigen::MatrixXd PhoneRecognizer::LogLikelihoods(const UtteranceStreams& s) const {
  const FeatureMatrix in = AcousticInput(s);
  const auto k = static_cast<Eigen::Index>(inventory.size());
  Eigen::MatrixXd ll(static_cast<Eigen::Index>(in.rows()), k);
  for (size_t t = 0; t < in.rows(); ++t) {
    const Eigen::VectorXd y = acoustic.mlp.Forward(in.row(t));
    for (Eigen::Index j = 0; j < k; ++j) {
      double v = std::log(std::max(y(j), 1e-300));
      if (!acoustic.log_priors.empty()) v -= acoustic.log_priors[static_cast<size_t>(j)];
      ll(static_cast<Eigen::Index>(t), j) = v;
    }
  }
  return ll;
}

std::vector<int> PhoneRecognizer::Decode(const UtteranceStreams& s,
                                         const DecodeOptions& opts) const {
  return ViterbiDecode(LogLikelihoods(s), lm, opts);
}

void PhoneRecognizer::Save(const std::filesystem::path& dir) const {
  Validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  WriteTextFile(dir / "inventory.txt", inventory.Format());
  WriteTextFile(dir / "lm.txt", lm.Format(inventory));
  SaveModel(tandem, dir / "tandem.phnn");
  SaveModel(acoustic.mlp, dir / "am.phnn");
  KeyValueFile meta;
  meta.format = "phonemode-mprs";
  meta.version = 1;
  meta.Set("features", FormatFeatureSpec(acoustic.feature_spec));
  std::string priors;
  for (double p : acoustic.log_priors) priors += (priors.empty() ? "" : " ") + FormatLogProb(p);
  meta.Set("log_priors", priors.empty() ? "none" : priors);
  WriteTextFile(dir / "meta.txt", meta.Format());
}

PhoneRecognizer PhoneRecognizer::Load(const std::filesystem::path& dir) {
  PhoneRecognizer r;
  r.inventory = PhoneInventory::Parse(ReadTextFile(dir / "inventory.txt"));
  r.lm = BigramLm::Parse(ReadTextFile(dir / "lm.txt"), r.inventory);
  r.tandem = LoadModel(dir / "tandem.phnn");
  r.acoustic.mlp = LoadModel(dir / "am.phnn");
  const KeyValueFile meta = KeyValueFile::Parse(ReadTextFile(dir / "meta.txt"), "phonemode-mprs", 1);
  r.acoustic.feature_spec = ParseFeatureSpec(meta.Get("features"));
  const std::string priors = meta.Get("log_priors");
  if (priors != "none") {
    std::istringstream is(priors);
    std::string tok;
    while (is >> tok) r.acoustic.log_priors.push_back(tok == "-inf" ? kNegInf : std::stod(tok));
  }
  r.Validate();
  return r;
}

MlpModel TrainTandem(const std::vector<MprsSample>& train,
                     const std::vector<std::vector<int>>& frame_labels, size_t inventory_size,
                     const MprsTrainConfig& cfg, std::vector<double>* loss) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "no training utterances");
  std::vector<FeatureMatrix> inputs;
  for (const auto& s : train) inputs.push_back(s.streams.mfcc39);
  const Dataset data = BuildDataset(inputs, frame_labels, cfg.frame_stride);
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.epochs = cfg.tandem_epochs;
  tc.loss = cfg.loss;
  tc.shuffle_seed = cfg.seed * 4 + 1;
  TrainResult r = TrainSgd(data, cfg.tandem_hidden, inventory_size, tc, cfg.seed * 4 + 2);
  if (loss) *loss = r.loss_trace;
  return std::move(r.model);
}

PhoneRecognizer TrainMprs(const std::vector<MprsSample>& train, const PhoneInventory& inventory,
                          const MprsTrainConfig& cfg, MprsTrainReport* report) {
  cfg.Validate();
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "no training utterances");
  const size_t k = inventory.size();
  if (k < 2) throw Error(ErrorCode::kInventory, "inventory needs at least two phones");
  std::vector<std::vector<int>> transcripts;
  std::vector<std::vector<int>> labels;
  for (const auto& s : train) {
    if (s.transcript.empty()) throw Error(ErrorCode::kInvalidArgument, s.id + ": empty transcript");
    for (int p : s.transcript) {
      if (p < 0 || static_cast<size_t>(p) >= k) {
        throw Error(ErrorCode::kInventory, s.id + ": phone index out of range");
      }
    }
    transcripts.push_back(s.transcript);
    labels.push_back(UniformAlign(s.streams.mfcc39.rows(), s.transcript));
  }

  PhoneRecognizer rec;
  rec.inventory = inventory;
  rec.lm = TrainLm(transcripts, k, cfg.lm_smoothing);
  rec.acoustic.feature_spec = cfg.features;
  MprsTrainReport local;
  MprsTrainReport& rep = report ? *report : local;

  for (int pass = 0; pass <= cfg.realign_passes; ++pass) {
    rec.tandem = TrainTandem(train, labels, k, cfg, &rep.tandem_loss);
    std::vector<FeatureMatrix> inputs;
    const bool tandem = NeedsTandem(cfg.features);
    for (const auto& s : train) {
      if (tandem) {
        const FeatureMatrix t = rec.TandemFeatures(s.streams.mfcc39);
        inputs.push_back(AssembleInput(cfg.features, s.streams, &t));
      } else {
        inputs.push_back(AssembleInput(cfg.features, s.streams, nullptr));
      }
    }
    const Dataset data = BuildDataset(inputs, labels, cfg.frame_stride);
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.am_epochs;
    tc.loss = cfg.loss;
    tc.shuffle_seed = cfg.seed * 4 + 3;
    TrainResult r = TrainSgd(data, cfg.am_hidden, k, tc, cfg.seed * 4 + 4);
    rep.am_loss = r.loss_trace;
    rec.acoustic.mlp = std::move(r.model);

    std::vector<double> counts(k, 1.0);
    for (int l : data.labels) counts[static_cast<size_t>(l)] += 1.0;
    rec.acoustic.log_priors.clear();
    if (cfg.use_priors) rec.acoustic.log_priors = NormalizeLog(counts);

    size_t correct = 0, total = 0;
    for (size_t u = 0; u < train.size(); ++u) {
      const Eigen::MatrixXd ll = rec.LogLikelihoods(train[u].streams);
      for (Eigen::Index t = 0; t < ll.rows(); ++t) {
        Eigen::Index arg;
        ll.row(t).maxCoeff(&arg);
        correct += static_cast<int>(arg) == labels[u][static_cast<size_t>(t)];
        ++total;
      }
      if (pass < cfg.realign_passes) labels[u] = ForcedAlign(ll, train[u].transcript, 3);
    }
    rep.train_frame_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  }
  rec.Validate();
  return rec;
}

CombResult CombSystem::Recognize(const SmcFeatures& smc_features, const UtteranceStreams& streams,
                                 const DecodeOptions& opts) const {
  CombResult r;
  r.smc = smc_->Classify(smc_features);
  r.mode = r.smc.decision;
  r.routed_to = r.mode == Mode::kRead ? "read" : "conversation";
  r.phones = ForMode(r.mode).Decode(streams, opts);
  return r;
}

}  // namespace phonemode
