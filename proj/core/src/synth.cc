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

#include "phonemode/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "phonemode/config.h"
#include "phonemode/error.h"

namespace phonemode {
namespace {

constexpr double kPi = std::numbers::pi;

uint64_t Mix(uint64_t h, uint64_t v) {
  // splitmix64 finalizer over the running hash
  uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Resonator {
  double a1 = 0.0, a2 = 0.0, gain = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void Set(double freq, double bw, int rate) {
    const double r = std::exp(-kPi * bw / rate);
    const double theta = 2.0 * kPi * freq / rate;
    a1 = 2.0 * r * std::cos(theta);
    a2 = -r * r;
    // Unit gain at 0 Hz.
    gain = 1.0 - a1 - a2;
  }
  // New coefficients, filter state kept.
  void Retune(const Resonator& other) {
    a1 = other.a1;
    a2 = other.a2;
    gain = other.gain;
  }
  double Step(double x) {
    const double y = gain * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Smooth modulation in [-1, 1].
struct Modulator {
  std::vector<double> freq, phase, weight;

  double At(double t) const {
    double s = 0.0, norm = 0.0;
    for (size_t k = 0; k < freq.size(); ++k) {
      s += weight[k] * std::sin(2.0 * kPi * freq[k] * t + phase[k]);
      norm += weight[k];
    }
    return norm > 0.0 ? s / norm : 0.0;
  }
};

Modulator MakeModulator(const ModeProsody& p, Rng& rng, double fixed_phase) {
  Modulator m;
  if (p.f0_random) {
    for (int k = 0; k < 3; ++k) {
      m.freq.push_back(rng.Uniform(p.f0_rate_lo_hz, p.f0_rate_hi_hz));
      m.phase.push_back(rng.Uniform(0.0, 2.0 * kPi));
      m.weight.push_back(rng.Uniform(0.5, 1.0));
    }
  } else {
    m.freq.push_back(p.f0_rate_lo_hz);
    m.phase.push_back(fixed_phase);
    m.weight.push_back(1.0);
  }
  return m;
}

bool IsVowel(const PhonePrototype& p) { return p.voiced && p.gain >= 0.9; }

std::string LanguageTag(const std::string& language) {
  const auto colon = language.find(':');
  std::string tag = colon == std::string::npos ? language : language.substr(colon + 1);
  std::transform(tag.begin(), tag.end(), tag.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tag;
}

}  // namespace

const std::vector<PhonePrototype>& DefaultPhoneSet() {
  static const std::vector<PhonePrototype> kSet = {
      {"a", true, 760, 1280, 2600, 1.0, 1.0},  {"e", true, 470, 2100, 2750, 1.0, 1.0},
      {"i", true, 450, 2400, 3050, 1.0, 1.0},  {"o", true, 540, 940, 2500, 1.0, 1.0},
      {"u", true, 450, 720, 2350, 1.0, 1.0},   {"ə", true, 600, 1500, 2500, 1.0, 1.0},
      {"ɛ", true, 630, 1850, 2650, 1.0, 1.0},  {"ɔ", true, 690, 1060, 2550, 1.0, 1.0},
      {"m", true, 470, 1150, 2400, 1.5, 1.0},  {"n", true, 470, 1700, 2700, 1.5, 1.0},
      {"s", false, 5200, 6800, 0, 8.0, 1.0},   {"ʃ", false, 2700, 3900, 0, 4.0, 1.0},
  };
  return kSet;
}

SynthSpec SynthSpec::Default() {
  SynthSpec s;
  s.read.f0_depth = 0.05;
  s.read.f0_rate_lo_hz = 0.35;
  s.read.f0_rate_hi_hz = 0.35;
  s.read.f0_random = false;
  s.read.f0_declination = 0.12;
  s.read.jitter = 0.005;
  s.read.amp_depth = 0.30;
  s.read.amp_declination = 0.55;
  s.read.phone_min_s = 0.07;
  s.read.phone_max_s = 0.13;

  s.conversation.f0_depth = 0.25;
  s.conversation.f0_rate_lo_hz = 0.8;
  s.conversation.f0_rate_hi_hz = 3.0;
  s.conversation.f0_random = true;
  s.conversation.f0_declination = 0.0;
  s.conversation.jitter = 0.01;
  s.conversation.amp_depth = 0.45;
  s.conversation.amp_declination = 0.0;
  s.conversation.phone_min_s = 0.05;
  s.conversation.phone_max_s = 0.10;
  s.conversation.f1_scale = 1.18;
  s.conversation.f2_scale = 0.85;
  return s;
}

void SynthSpec::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (sample_rate_hz < 8000) fail("synth sample rate must be >= 8000");
  if (languages.empty()) fail("synth needs at least one language");
  for (const auto& l : languages) ParseLanguage(l);
  if (train_speakers == 0 || train_utterances == 0) fail("synth needs training speakers");
  if (!(content_s > 0.0) || edge_silence_s < 0.0) fail("bad synth durations");
  if (!(speaker_f0_lo_hz >= 60.0) || speaker_f0_hi_hz < speaker_f0_lo_hz ||
      speaker_f0_hi_hz > 400.0) {
    fail("speaker F0 range must lie in [60, 400] Hz");
  }
  for (const ModeProsody* p : {&read, &conversation}) {
    if (p->f0_depth < 0.0 || p->f0_depth > 0.6) fail("f0 depth must be in [0, 0.6]");
    if (p->phone_min_s <= 0.0 || p->phone_max_s < p->phone_min_s) fail("bad phone durations");
    if (p->f0_rate_lo_hz < 0.0 || p->f0_rate_hi_hz < p->f0_rate_lo_hz) fail("bad f0 rates");
    if (std::abs(p->f0_declination) >= 1.0 || p->amp_declination < 0.0 ||
        p->amp_declination >= 1.0 || p->amp_depth < 0.0 || p->amp_depth >= 1.0) {
      fail("declination and amplitude depth must be in [0, 1)");
    }
    if (p->jitter < 0.0 || p->jitter > 0.1) fail("jitter must be in [0, 0.1]");
    if (p->f1_scale <= 0.0 || p->f2_scale <= 0.0) fail("formant scales must be positive");
  }
}

std::vector<std::vector<double>> PhonotacticTable(const SynthSpec& spec, size_t language,
                                                  Mode mode) {
  const auto& phones = DefaultPhoneSet();
  const size_t k = phones.size();
  Rng rng(Mix(Mix(spec.seed, 0x70687461ULL + language), static_cast<uint64_t>(mode) + 11));
  std::vector<std::vector<double>> t(k, std::vector<double>(k, 0.0));
  for (size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double base;
      if (!IsVowel(phones[i])) {
        base = IsVowel(phones[j]) ? 1.0 : 0.0;
      } else {
        base = IsVowel(phones[j]) ? 0.3 : 0.7;
      }
      t[i][j] = base * std::exp(1.2 * rng.Gaussian());
      sum += t[i][j];
    }
    for (double& v : t[i]) v /= sum;
  }
  return t;
}

SynthUtterance SynthesizeUtterance(const SynthSpec& spec, size_t language, Mode mode,
                                   const Speaker& speaker, Rng& rng) {
  const auto& phones = DefaultPhoneSet();
  const ModeProsody& pros = mode == Mode::kRead ? spec.read : spec.conversation;
  const int fs = spec.sample_rate_hz;
  const auto edge = static_cast<size_t>(std::round(spec.edge_silence_s * fs));
  const auto content = static_cast<size_t>(std::round(spec.content_s * fs));
  const size_t total = content + 2 * edge;

  // Phone string and durations.
  const auto table = PhonotacticTable(spec, language, mode);
  std::vector<int> seq;
  std::vector<double> dur;
  double acc = 0.0;
  int cur = static_cast<int>(rng.Index(phones.size()));
  while (true) {
    const double d = rng.Uniform(pros.phone_min_s, pros.phone_max_s);
    if (acc + d > spec.content_s && !seq.empty()) break;
    seq.push_back(cur);
    dur.push_back(d);
    acc += d;
    const double u = rng.Uniform();
    double c = 0.0;
    int next = 0;
    for (size_t j = 0; j < phones.size(); ++j) {
      c += table[static_cast<size_t>(cur)][j];
      next = static_cast<int>(j);
      if (u < c) break;
    }
    if (next == cur) next = (cur + 1) % static_cast<int>(phones.size());
    cur = next;
  }
  SynthUtterance out;
  {
    const double stretch = spec.content_s / acc;
    double t = 0.0;
    for (size_t i = 0; i < seq.size(); ++i) {
      PhoneSegment s;
      s.phone = seq[i];
      s.begin = edge + static_cast<size_t>(std::round(t * fs));
      t += dur[i] * stretch;
      s.end = i + 1 == seq.size() ? edge + content : edge + static_cast<size_t>(std::round(t * fs));
      out.alignment.push_back(s);
      out.transcript.push_back(phones[static_cast<size_t>(s.phone)].label);
    }
  }
  std::vector<int> phone_at(total, -1);
  for (const auto& s : out.alignment)
    for (size_t i = s.begin; i < s.end; ++i) phone_at[i] = s.phone;

  const Modulator f0_mod = MakeModulator(pros, rng, 0.0);
  const Modulator amp_mod = MakeModulator(pros, rng, kPi / 2.0);
  const double len_s = spec.content_s;
  auto f0_at = [&](double t) {
    const double f = speaker.base_f0_hz * (1.0 + pros.f0_declination * (0.5 - t / len_s)) *
                     (1.0 + pros.f0_depth * f0_mod.At(t));
    return std::clamp(f, 60.0, 450.0);
  };
  auto amp_at = [&](double t) {
    return (1.0 - pros.amp_declination * t / len_s) * (1.0 + pros.amp_depth * amp_mod.At(t));
  };

  // Voiced excitation: one negative impulse per period, the sign of the
  // glottal flow derivative at closure.
  std::vector<double> pulses(total, 0.0);
  {
    double pos = static_cast<double>(edge);
    while (pos < static_cast<double>(edge + content)) {
      const double t = (pos - edge) / fs;
      const auto i = static_cast<size_t>(std::llround(pos));
      if (i < total && phone_at[i] >= 0 && phones[static_cast<size_t>(phone_at[i])].voiced) {
        if (out.epochs.empty() || out.epochs.back() != i) {
          pulses[i] = -amp_at(t) * phones[static_cast<size_t>(phone_at[i])].gain;
          out.epochs.push_back(i);
        }
      }
      double period = fs / f0_at(t);
      period *= 1.0 + pros.jitter * rng.Gaussian();
      pos += std::max(period, fs / 450.0);
    }
  }

  // Frication source with 5 ms ramps at segment edges.
  std::vector<double> noise(total, 0.0);
  const auto ramp = static_cast<size_t>(0.005 * fs);
  for (const auto& s : out.alignment) {
    if (phones[static_cast<size_t>(s.phone)].voiced) continue;
    for (size_t i = s.begin; i < s.end; ++i) {
      const size_t from_edge = std::min(i - s.begin, s.end - 1 - i);
      const double g = from_edge < ramp ? static_cast<double>(from_edge + 1) / (ramp + 1) : 1.0;
      noise[i] = g * amp_at(static_cast<double>(i - edge) / fs) * rng.Gaussian();
    }
  }

  // Cascaded formant resonators with unit gain at 0 Hz, retuned at every
  // phone boundary. Frication is scaled so its filter has unit energy.
  const double vs = speaker.formant_scale;
  auto voiced_bank = [&](const PhonePrototype& proto) {
    std::array<Resonator, 3> r;
    r[0].Set(proto.f1 * vs * pros.f1_scale, 80.0 * proto.bandwidth_scale, fs);
    r[1].Set(proto.f2 * vs * pros.f2_scale, 100.0 * proto.bandwidth_scale, fs);
    r[2].Set(proto.f3 * vs, 140.0 * proto.bandwidth_scale, fs);
    return r;
  };
  auto noise_bank = [&](const PhonePrototype& proto) {
    std::array<Resonator, 2> r;
    r[0].Set(std::min(proto.f1 * vs, 0.45 * fs), 100.0 * proto.bandwidth_scale, fs);
    r[1].Set(std::min(proto.f2 * vs, 0.45 * fs), 120.0 * proto.bandwidth_scale, fs);
    return r;
  };
  auto response_norm = [](auto bank) {
    double e = 0.0;
    for (int i = 0; i < 4096; ++i) {
      double v = i == 0 ? 1.0 : 0.0;
      for (auto& r : bank) v = r.Step(v);
      e += v * v;
    }
    return e > 0.0 ? 1.0 / std::sqrt(e) : 0.0;
  };
  std::vector<double> norm(phones.size());
  for (size_t p = 0; p < phones.size(); ++p) {
    norm[p] = phones[p].voiced ? 1.0 : response_norm(noise_bank(phones[p]));
  }

  // 40 ms formant glides across voiced-to-voiced boundaries; an abrupt
  // retune leaves a transient that moves the nearby ZFF crossings.
  std::vector<double> glide(total, -1.0);
  std::vector<int> glide_from(total, -1), glide_to(total, -1);
  {
    const auto half = static_cast<size_t>(0.040 * fs);
    for (size_t k = 1; k < out.alignment.size(); ++k) {
      const auto& l = out.alignment[k - 1];
      const auto& r = out.alignment[k];
      if (!phones[static_cast<size_t>(l.phone)].voiced ||
          !phones[static_cast<size_t>(r.phone)].voiced || half == 0) {
        continue;
      }
      const size_t from = r.begin - std::min(half, (r.begin - l.begin) / 2);
      const size_t to = r.begin + std::min(half, (r.end - r.begin) / 2);
      for (size_t i = from; i < to; ++i) {
        glide[i] = static_cast<double>(i - from) / static_cast<double>(to - from);
        glide_from[i] = l.phone;
        glide_to[i] = r.phone;
      }
    }
  }
  std::vector<double> voiced_out(total, 0.0), noise_out(total, 0.0);
  std::array<Resonator, 3> vr;
  std::array<Resonator, 2> nr;
  int tuned = -2;
  for (size_t i = 0; i < total; ++i) {
    const int p = phone_at[i];
    if (p >= 0 && glide[i] >= 0.0) {
      const auto& a = phones[static_cast<size_t>(glide_from[i])];
      const auto& b = phones[static_cast<size_t>(glide_to[i])];
      const double w = glide[i];
      PhonePrototype mix = b;
      mix.f1 = (1.0 - w) * a.f1 + w * b.f1;
      mix.f2 = (1.0 - w) * a.f2 + w * b.f2;
      mix.f3 = (1.0 - w) * a.f3 + w * b.f3;
      mix.bandwidth_scale = (1.0 - w) * a.bandwidth_scale + w * b.bandwidth_scale;
      const auto bank = voiced_bank(mix);
      for (size_t k = 0; k < vr.size(); ++k) vr[k].Retune(bank[k]);
      tuned = -3;
    } else if (p >= 0 && p != tuned) {
      const auto& proto = phones[static_cast<size_t>(p)];
      if (proto.voiced) {
        const auto bank = voiced_bank(proto);
        for (size_t k = 0; k < vr.size(); ++k) vr[k].Retune(bank[k]);
      } else {
        const auto bank = noise_bank(proto);
        for (size_t k = 0; k < nr.size(); ++k) nr[k].Retune(bank[k]);
      }
      tuned = p;
    }
    if (tuned == -2) continue;  // leading silence, filters idle
    const double g = p >= 0 ? norm[static_cast<size_t>(p)] : 0.0;
    double v = pulses[i] * g;
    for (auto& r : vr) v = r.Step(v);
    voiced_out[i] = v;
    double n = noise[i] * g;
    for (auto& r : nr) n = r.Step(n);
    noise_out[i] = n;
  }

  double v_energy = 0.0, n_energy = 0.0;
  size_t v_count = 0, n_count = 0;
  for (size_t i = 0; i < total; ++i) {
    if (phone_at[i] < 0) continue;
    if (phones[static_cast<size_t>(phone_at[i])].voiced) {
      v_energy += voiced_out[i] * voiced_out[i];
      ++v_count;
    } else {
      n_energy += noise_out[i] * noise_out[i];
      ++n_count;
    }
  }
  double noise_gain = 0.0;
  if (n_count > 0 && v_count > 0 && n_energy > 0.0) {
    noise_gain = spec.frication_level * std::sqrt((v_energy / v_count) / (n_energy / n_count));
  }
  std::vector<double> x(total);
  double peak = 0.0;
  for (size_t i = 0; i < total; ++i) {
    x[i] = voiced_out[i] + noise_gain * noise_out[i];
    peak = std::max(peak, std::abs(x[i]));
  }
  const double scale = peak > 0.0 ? 0.5 / peak : 1.0;
  for (double& v : x) v = std::clamp(v * scale + spec.noise_floor * rng.Gaussian(), -0.99, 0.99);
  out.wave.samples = std::move(x);
  out.wave.sample_rate_hz = fs;

  const auto hop = static_cast<size_t>(0.01 * fs);
  for (size_t c = hop / 2; c < total; c += hop) {
    const int p = phone_at[c];
    out.f0_track.push_back(p >= 0 && phones[static_cast<size_t>(p)].voiced
                               ? f0_at(static_cast<double>(c - edge) / fs)
                               : 0.0);
  }
  return out;
}

namespace {

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

SynthCorpusResult SynthCorpus(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.Validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  std::filesystem::create_directories(out_dir / "truth", ec);
  if (ec || !std::filesystem::is_directory(out_dir / "wav")) {
    throw Error(ErrorCode::kIo, "cannot create corpus directory " + out_dir.string());
  }
  const auto& phones = DefaultPhoneSet();
  std::vector<ManifestEntry> entries;
  const std::array<Mode, 2> modes{Mode::kRead, Mode::kConversation};
  const std::array<std::pair<Split, size_t>, 3> splits{
      std::pair{Split::kTrain, spec.train_speakers}, std::pair{Split::kDev, spec.dev_speakers},
      std::pair{Split::kTest, spec.test_speakers}};

  for (size_t li = 0; li < spec.languages.size(); ++li) {
    const std::string tag = LanguageTag(spec.languages[li]);
    for (Mode mode : modes) {
      const std::string mode_tag = mode == Mode::kRead ? "read" : "conv";
      for (const auto& [split, n_speakers] : splits) {
        const size_t n_utts = split == Split::kTrain ? spec.train_utterances : spec.eval_utterances;
        for (size_t s = 0; s < n_speakers; ++s) {
          uint64_t key = Mix(Mix(Mix(Mix(spec.seed, li), static_cast<uint64_t>(mode)),
                                 static_cast<uint64_t>(split)),
                             s);
          Rng spk_rng(key);
          Speaker spk;
          spk.id = tag + "-" + mode_tag + "-" + std::string(SplitName(split)) + std::to_string(s);
          spk.base_f0_hz = spk_rng.Uniform(spec.speaker_f0_lo_hz, spec.speaker_f0_hi_hz);
          spk.formant_scale = 1.0 + spec.speaker_formant_spread * spk_rng.Uniform(-1.0, 1.0);
          for (size_t u = 0; u < n_utts; ++u) {
            Rng rng(Mix(key, 1000 + u));
            const SynthUtterance utt = SynthesizeUtterance(spec, li, mode, spk, rng);
            const std::string id = spk.id + "-" + std::to_string(u);
            SaveWav(utt.wave, out_dir / "wav" / (id + ".wav"));

            std::string f0, ep, al;
            for (double v : utt.f0_track) f0 += FormatDouble(v) + "\n";
            for (size_t e : utt.epochs) ep += std::to_string(e) + "\n";
            for (const auto& seg : utt.alignment) {
              al += std::to_string(seg.begin) + " " + std::to_string(seg.end) + " " +
                    phones[static_cast<size_t>(seg.phone)].label + "\n";
            }
            WriteText(out_dir / "truth" / (id + ".f0"), f0);
            WriteText(out_dir / "truth" / (id + ".epochs"), ep);
            WriteText(out_dir / "truth" / (id + ".align"), al);

            ManifestEntry e;
            e.audio_path = out_dir / "wav" / (id + ".wav");
            e.language = ParseLanguage(spec.languages[li]);
            e.mode = mode;
            e.speaker_id = spk.id;
            e.split = split;
            e.transcript = utt.transcript;
            entries.push_back(std::move(e));
          }
        }
      }
    }
  }
  SynthCorpusResult res;
  res.manifest_path = out_dir / "manifest.tsv";
  res.utterances = entries.size();
  WriteText(res.manifest_path,
            "# synthetic two-mode corpus\n" + FormatManifest(entries, out_dir));
  WriteText(out_dir / "spec.txt", FormatSynthSpec(spec));
  return res;
}

SynthTruth LoadSynthTruth(const std::filesystem::path& wav_path) {
  const auto dir = wav_path.parent_path().parent_path() / "truth";
  const std::string stem = wav_path.stem().string();
  SynthTruth t;
  {
    std::istringstream is(ReadText(dir / (stem + ".f0")));
    double v;
    while (is >> v) t.f0_track.push_back(v);
  }
  {
    std::istringstream is(ReadText(dir / (stem + ".epochs")));
    size_t v;
    while (is >> v) t.epochs.push_back(v);
  }
  {
    const auto& phones = DefaultPhoneSet();
    std::istringstream is(ReadText(dir / (stem + ".align")));
    PhoneSegment s;
    std::string label;
    while (is >> s.begin >> s.end >> label) {
      auto it = std::find_if(phones.begin(), phones.end(),
                             [&](const PhonePrototype& p) { return p.label == label; });
      if (it == phones.end()) throw Error(ErrorCode::kInventory, "unknown phone " + label);
      s.phone = static_cast<int>(it - phones.begin());
      t.alignment.push_back(s);
    }
  }
  return t;
}

}  // namespace phonemode
