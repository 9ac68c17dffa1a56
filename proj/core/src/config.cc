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

#include "phonemode/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "phonemode/error.h"

namespace phonemode {

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void KeyValueFile::Set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

const std::string* KeyValueFile::Find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::string& KeyValueFile::Get(const std::string& key) const {
  const std::string* v = Find(key);
  if (!v) throw Error(ErrorCode::kConfig, format + ": missing key '" + key + "'");
  return *v;
}

std::string KeyValueFile::Format() const {
  std::string out = "format " + format + " " + std::to_string(version) + "\n";
  for (const auto& [k, v] : entries) out += k + " " + v + "\n";
  return out;
}

KeyValueFile KeyValueFile::Parse(std::string_view text, std::string_view expect_format,
                                 int expect_version) {
  KeyValueFile kv;
  std::istringstream is{std::string(text)};
  std::string line;
  size_t line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);
    const size_t sp = line.find_first_of(" \t");
    std::string key = line.substr(0, sp);
    std::string value;
    if (sp != std::string::npos) {
      const size_t vstart = line.find_first_not_of(" \t", sp);
      if (vstart != std::string::npos) value = line.substr(vstart);
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    }
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": " + msg);
    };
    if (!header) {
      std::istringstream hs(value);
      std::string name;
      int version = 0;
      if (key != "format" || !(hs >> name >> version)) fail("expected 'format <name> <version>'");
      if (name != expect_format) fail("expected format " + std::string(expect_format) + ", got " + name);
      if (version != expect_version) fail("unsupported version " + std::to_string(version));
      kv.format = name;
      kv.version = version;
      header = true;
      continue;
    }
    if (value.empty()) fail("key '" + key + "' has no value");
    if (kv.Find(key)) fail("duplicate key '" + key + "'");
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  if (!header) throw Error(ErrorCode::kConfig, "missing format header");
  return kv;
}

namespace {

std::string Num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kConfig, "key '" + key + "': cannot parse '" + s + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCode::kConfig, "key '" + key + "': expected true/false, got '" + s + "'");
}

Loss ParseLoss(const std::string& key, const std::string& s) {
  if (s == "mse") return Loss::kMse;
  if (s == "ce" || s == "cross-entropy") return Loss::kCrossEntropy;
  throw Error(ErrorCode::kConfig, "key '" + key + "': loss must be mse or ce");
}

std::string LossName(Loss l) { return l == Loss::kMse ? "mse" : "ce"; }

FusionWeights ParseWeights(const std::string& key, const std::string& s) {
  std::istringstream is(s);
  std::string tok;
  FusionWeights w;
  while (is >> tok) w.w.push_back(ParseNumber<double>(key, tok));
  if (w.w.size() != 2) throw Error(ErrorCode::kConfig, "key '" + key + "': expected two weights");
  try {
    w.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, "key '" + key + "': " + e.message());
  }
  return w;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T, typename Access>
Field NumField(std::string key, Access access) {
  return {key,
          [access](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return Num(access(const_cast<PipelineConfig&>(c)));
            else return std::to_string(access(const_cast<PipelineConfig&>(c)));
          },
          [access, key](PipelineConfig& c, const std::string& v) {
            access(c) = ParseNumber<T>(key, v);
          }};
}

template <typename Access>
Field BoolField(std::string key, Access access) {
  return {key,
          [access](const PipelineConfig& c) {
            return std::string(access(const_cast<PipelineConfig&>(c)) ? "true" : "false");
          },
          [access, key](PipelineConfig& c, const std::string& v) { access(c) = ParseBool(key, v); }};
}

void AddProsody(std::vector<Field>& f, const std::string& prefix, ModeProsody SynthSpec::*member) {
  auto p = [member](PipelineConfig& c) -> ModeProsody& { return c.synth.*member; };
  f.push_back(NumField<double>(prefix + "f0_depth", [p](PipelineConfig& c) -> double& { return p(c).f0_depth; }));
  f.push_back(NumField<double>(prefix + "f0_rate_lo_hz", [p](PipelineConfig& c) -> double& { return p(c).f0_rate_lo_hz; }));
  f.push_back(NumField<double>(prefix + "f0_rate_hi_hz", [p](PipelineConfig& c) -> double& { return p(c).f0_rate_hi_hz; }));
  f.push_back(BoolField(prefix + "f0_random", [p](PipelineConfig& c) -> bool& { return p(c).f0_random; }));
  f.push_back(NumField<double>(prefix + "f0_declination", [p](PipelineConfig& c) -> double& { return p(c).f0_declination; }));
  f.push_back(NumField<double>(prefix + "jitter", [p](PipelineConfig& c) -> double& { return p(c).jitter; }));
  f.push_back(NumField<double>(prefix + "amp_depth", [p](PipelineConfig& c) -> double& { return p(c).amp_depth; }));
  f.push_back(NumField<double>(prefix + "amp_declination", [p](PipelineConfig& c) -> double& { return p(c).amp_declination; }));
  f.push_back(NumField<double>(prefix + "phone_min_s", [p](PipelineConfig& c) -> double& { return p(c).phone_min_s; }));
  f.push_back(NumField<double>(prefix + "phone_max_s", [p](PipelineConfig& c) -> double& { return p(c).phone_max_s; }));
  f.push_back(NumField<double>(prefix + "f1_scale", [p](PipelineConfig& c) -> double& { return p(c).f1_scale; }));
  f.push_back(NumField<double>(prefix + "f2_scale", [p](PipelineConfig& c) -> double& { return p(c).f2_scale; }));
}

#define PM_NUM(T, key, expr) NumField<T>(key, [](PipelineConfig& c) -> T& { return expr; })
#define PM_BOOL(key, expr) BoolField(key, [](PipelineConfig& c) -> bool& { return expr; })

const std::vector<Field>& Fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back(PM_NUM(double, "frame.length_ms", c.frame_length_ms));
    f.push_back(PM_NUM(double, "frame.shift_ms", c.frame_shift_ms));
    f.push_back(PM_NUM(double, "silence.ratio", c.silence.energy_threshold_ratio));
    f.push_back(PM_NUM(double, "chop.seconds", c.chop_seconds));

    f.push_back(PM_NUM(uint64_t, "smc.seed", c.smc.seed));
    f.push_back(PM_NUM(size_t, "smc.contour_hidden", c.smc.contour_hidden));
    f.push_back(PM_NUM(size_t, "smc.vt_hidden", c.smc.vt_hidden));
    f.push_back(PM_NUM(int, "smc.contour_epochs", c.smc.contour_epochs));
    f.push_back(PM_NUM(int, "smc.vt_epochs", c.smc.vt_epochs));
    f.push_back(PM_NUM(size_t, "smc.vt_frame_stride", c.smc.vt_frame_stride));
    f.push_back(PM_NUM(double, "smc.learning_rate", c.smc.base.learning_rate));
    f.push_back({"smc.loss", [](const PipelineConfig& c) { return LossName(c.smc.base.loss); },
                 [](PipelineConfig& c, const std::string& v) { c.smc.base.loss = ParseLoss("smc.loss", v); }});
    f.push_back(PM_BOOL("smc.search_weights", c.smc_search_weights));
    f.push_back(PM_NUM(double, "smc.search_step", c.smc.search_step));
    f.push_back({"smc.stage2_weights",
                 [](const PipelineConfig& c) { return Num(c.smc_stage2.w[0]) + " " + Num(c.smc_stage2.w[1]); },
                 [](PipelineConfig& c, const std::string& v) { c.smc_stage2 = ParseWeights("smc.stage2_weights", v); }});
    f.push_back({"smc.stage3_weights",
                 [](const PipelineConfig& c) { return Num(c.smc_stage3.w[0]) + " " + Num(c.smc_stage3.w[1]); },
                 [](PipelineConfig& c, const std::string& v) { c.smc_stage3 = ParseWeights("smc.stage3_weights", v); }});

    f.push_back(PM_NUM(uint64_t, "mprs.seed", c.mprs.seed));
    f.push_back({"mprs.features", [](const PipelineConfig& c) { return FormatFeatureSpec(c.mprs.features); },
                 [](PipelineConfig& c, const std::string& v) { c.mprs.features = ParseFeatureSpec(v); }});
    f.push_back(PM_NUM(size_t, "mprs.tandem_hidden", c.mprs.tandem_hidden));
    f.push_back(PM_NUM(int, "mprs.tandem_epochs", c.mprs.tandem_epochs));
    f.push_back(PM_NUM(size_t, "mprs.am_hidden", c.mprs.am_hidden));
    f.push_back(PM_NUM(int, "mprs.am_epochs", c.mprs.am_epochs));
    f.push_back(PM_NUM(double, "mprs.learning_rate", c.mprs.learning_rate));
    f.push_back({"mprs.loss", [](const PipelineConfig& c) { return LossName(c.mprs.loss); },
                 [](PipelineConfig& c, const std::string& v) { c.mprs.loss = ParseLoss("mprs.loss", v); }});
    f.push_back(PM_NUM(size_t, "mprs.frame_stride", c.mprs.frame_stride));
    f.push_back(PM_NUM(int, "mprs.realign_passes", c.mprs.realign_passes));
    f.push_back(PM_NUM(double, "mprs.lm_smoothing", c.mprs.lm_smoothing));
    f.push_back(PM_BOOL("mprs.use_priors", c.mprs.use_priors));
    f.push_back(PM_NUM(double, "mprs.alpha", c.decode.alpha));
    f.push_back(PM_NUM(size_t, "mprs.min_duration", c.decode.min_duration));

    f.push_back({"corpus.manifest",
                 [](const PipelineConfig& c) { return c.corpus_manifest.empty() ? std::string("synth") : c.corpus_manifest; },
                 [](PipelineConfig& c, const std::string& v) { c.corpus_manifest = v == "synth" ? "" : v; }});

    f.push_back(PM_NUM(uint64_t, "synth.seed", c.synth.seed));
    f.push_back(PM_NUM(int, "synth.sample_rate_hz", c.synth.sample_rate_hz));
    f.push_back({"synth.languages",
                 [](const PipelineConfig& c) {
                   std::string s;
                   for (const auto& l : c.synth.languages) s += (s.empty() ? "" : ",") + l;
                   return s;
                 },
                 [](PipelineConfig& c, const std::string& v) {
                   c.synth.languages = SplitList(v);
                   for (const auto& l : c.synth.languages) ParseLanguage(l);
                 }});
    f.push_back(PM_NUM(size_t, "synth.train_speakers", c.synth.train_speakers));
    f.push_back(PM_NUM(size_t, "synth.dev_speakers", c.synth.dev_speakers));
    f.push_back(PM_NUM(size_t, "synth.test_speakers", c.synth.test_speakers));
    f.push_back(PM_NUM(size_t, "synth.train_utterances", c.synth.train_utterances));
    f.push_back(PM_NUM(size_t, "synth.eval_utterances", c.synth.eval_utterances));
    f.push_back(PM_NUM(double, "synth.content_s", c.synth.content_s));
    f.push_back(PM_NUM(double, "synth.edge_silence_s", c.synth.edge_silence_s));
    f.push_back(PM_NUM(double, "synth.noise_floor", c.synth.noise_floor));
    f.push_back(PM_NUM(double, "synth.frication_level", c.synth.frication_level));
    f.push_back(PM_NUM(double, "synth.speaker_f0_lo_hz", c.synth.speaker_f0_lo_hz));
    f.push_back(PM_NUM(double, "synth.speaker_f0_hi_hz", c.synth.speaker_f0_hi_hz));
    f.push_back(PM_NUM(double, "synth.speaker_formant_spread", c.synth.speaker_formant_spread));
    AddProsody(f, "synth.read.", &SynthSpec::read);
    AddProsody(f, "synth.conversation.", &SynthSpec::conversation);
    return f;
  }();
  return kFields;
}

#undef PM_NUM
#undef PM_BOOL

const Field* FindField(std::string_view key) {
  for (const auto& f : Fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

void Apply(PipelineConfig& c, const std::string& key, const std::string& value) {
  const Field* f = FindField(key);
  if (!f) throw Error(ErrorCode::kConfig, "unknown config key '" + key + "'");
  f->set(c, value);
}

}  // namespace

PipelineConfig PipelineConfig::Default() { return PipelineConfig{}; }

FrameGrid PipelineConfig::Grid(int sample_rate_hz) const {
  FrameGrid g;
  g.frame_len_samples = static_cast<size_t>(std::lround(frame_length_ms * 1e-3 * sample_rate_hz));
  g.frame_shift_samples = static_cast<size_t>(std::lround(frame_shift_ms * 1e-3 * sample_rate_hz));
  g.Validate();
  return g;
}

void PipelineConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (!(frame_length_ms > 0.0) || !(frame_shift_ms > 0.0) || frame_shift_ms > frame_length_ms) {
    fail("frame shift must be positive and no longer than the frame");
  }
  if (!(silence.energy_threshold_ratio > 0.0 && silence.energy_threshold_ratio < 1.0)) {
    fail("silence.ratio must be in (0, 1)");
  }
  if (!(chop_seconds > 0.0)) fail("chop.seconds must be > 0");
  if (std::abs(chop_seconds / frame_shift_ms * 1000.0 - static_cast<double>(smc.contour_dim)) > 1e-6) {
    fail("chop.seconds / frame.shift_ms must give " + std::to_string(smc.contour_dim) +
         " contour points");
  }
  try {
    smc.Validate();
    smc_stage2.Validate();
    smc_stage3.Validate();
    mprs.Validate();
    synth.Validate();
  } catch (const Error& e) {
    fail(e.message());
  }
  if (!(decode.alpha >= 0.0)) fail("mprs.alpha must be >= 0");
  if (decode.min_duration < 1) fail("mprs.min_duration must be >= 1");
}

std::string PipelineConfig::Format() const {
  KeyValueFile kv;
  kv.format = "phonemode-config";
  kv.version = 1;
  for (const auto& f : Fields()) kv.Set(f.key, f.get(*this));
  return kv.Format();
}

PipelineConfig PipelineConfig::Parse(std::string_view text) {
  const KeyValueFile kv = KeyValueFile::Parse(text, "phonemode-config", 1);
  PipelineConfig c;
  for (const auto& [k, v] : kv.entries) Apply(c, k, v);
  c.Validate();
  return c;
}

PipelineConfig PipelineConfig::Load(const std::filesystem::path& path) {
  try {
    return Parse(ReadTextFile(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

void PipelineConfig::Override(std::string_view assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "override must look like key=value: " + std::string(assignment));
  }
  Apply(*this, std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

std::string FormatSynthSpec(const SynthSpec& spec) {
  PipelineConfig c;
  c.synth = spec;
  KeyValueFile kv;
  kv.format = "phonemode-synth";
  kv.version = 1;
  for (const auto& f : Fields()) {
    if (f.key.rfind("synth.", 0) == 0) kv.Set(f.key, f.get(c));
  }
  return kv.Format();
}

}  // namespace phonemode
