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

#include "phonemode/pipeline.h"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "phonemode/error.h"
#include "phonemode/synth.h"

namespace phonemode {

SmcFeatureOptions SmcOptionsFor(const PipelineConfig& cfg, int sample_rate_hz) {
  SmcFeatureOptions o;
  o.grid = cfg.Grid(sample_rate_hz);
  o.contour.hop_s = cfg.frame_shift_ms * 1e-3;
  o.contour.num_points = cfg.smc.contour_dim;
  return o;
}

MprsFeatureOptions MprsOptionsFor(const PipelineConfig& cfg, int sample_rate_hz) {
  MprsFeatureOptions o;
  o.grid = cfg.Grid(sample_rate_hz);
  return o;
}

std::string UtteranceId(const ManifestEntry& e) { return e.audio_path.stem().string(); }

SmcSample MakeSmcSample(const ManifestEntry& e, const PipelineConfig& cfg) {
  try {
    const Waveform w = PreprocessForSmc(LoadWav(e.audio_path), cfg.silence, cfg.chop_seconds);
    SmcSample s;
    s.features = ExtractSmcFeatures(w, SmcOptionsFor(cfg, w.sample_rate_hz));
    s.mode = e.mode;
    s.id = UtteranceId(e);
    return s;
  } catch (const Error& err) {
    throw Error(err.code(), e.audio_path.string() + ": " + err.message());
  }
}

MprsSample MakeMprsSample(const ManifestEntry& e, const PhoneInventory& inv,
                          const PipelineConfig& cfg) {
  try {
    const Waveform w = RemoveSilence(LoadWav(e.audio_path), cfg.silence);
    MprsSample s;
    s.streams = ExtractStreams(w, MprsOptionsFor(cfg, w.sample_rate_hz));
    if (e.transcript) s.transcript = inv.Encode(*e.transcript);
    s.id = UtteranceId(e);
    return s;
  } catch (const Error& err) {
    throw Error(err.code(), e.audio_path.string() + ": " + err.message());
  }
}

PhoneInventory InventoryFromManifest(const Manifest& m) {
  std::vector<std::vector<std::string>> all;
  for (const auto& e : m.entries) {
    if (e.transcript) all.push_back(*e.transcript);
  }
  if (all.empty()) throw Error(ErrorCode::kInventory, "manifest has no transcripts");
  return PhoneInventory::FromTranscripts(all);
}

std::vector<ContourRecord> ContourRecords(const std::vector<SmcSample>& samples,
                                          const std::vector<const ManifestEntry*>& entries,
                                          ContourKind kind) {
  std::vector<ContourRecord> out;
  for (size_t i = 0; i < samples.size(); ++i) {
    ContourRecord r;
    r.language = entries[i]->language;
    r.mode = entries[i]->mode;
    r.speaker_id = entries[i]->speaker_id;
    r.values = kind == ContourKind::kPitch ? samples[i].features.pitch.values
                                           : samples[i].features.strength.values;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

template <typename F>
auto Stage(const std::string& name, const LogFn& log, F&& body) {
  if (log) log("stage " + name);
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + " failed: " + e.message());
  }
}

std::string Pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string Join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

}  // namespace

EndToEndReport RunEndToEnd(const PipelineConfig& cfg, const std::filesystem::path& run_dir,
                           const LogFn& log) {
  cfg.Validate();
  std::error_code ec;
  std::filesystem::create_directories(run_dir / "reports", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create run directory " + run_dir.string());
  WriteTextFile(run_dir / "config.txt", cfg.Format());

  const std::filesystem::path manifest_path = Stage("corpus", log, [&] {
    if (!cfg.corpus_manifest.empty()) return std::filesystem::path(cfg.corpus_manifest);
    return SynthCorpus(cfg.synth, run_dir / "corpus").manifest_path;
  });
  const Manifest manifest = Stage("manifest", log, [&] { return LoadManifest(manifest_path); });
  std::vector<std::string> warnings = manifest.warnings;

  const auto train = manifest.Select(Split::kTrain);
  const auto dev = manifest.Select(Split::kDev);
  const auto test = manifest.Select(Split::kTest);
  if (train.empty() || test.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest needs train and test splits");
  }

  // SMC features for every split.
  auto smc_samples = [&](const std::vector<const ManifestEntry*>& entries) {
    std::vector<SmcSample> out;
    for (const auto* e : entries) out.push_back(MakeSmcSample(*e, cfg));
    return out;
  };
  const auto smc_train = Stage("extract-smc", log, [&] { return smc_samples(train); });
  const auto smc_dev = Stage("extract-smc-dev", log, [&] { return smc_samples(dev); });
  const auto smc_test = Stage("extract-smc-test", log, [&] { return smc_samples(test); });

  EndToEndReport rep;
  Stage("correlation", log, [&] {
    std::vector<SmcSample> all = smc_train;
    all.insert(all.end(), smc_dev.begin(), smc_dev.end());
    all.insert(all.end(), smc_test.begin(), smc_test.end());
    std::vector<const ManifestEntry*> entries = train;
    entries.insert(entries.end(), dev.begin(), dev.end());
    entries.insert(entries.end(), test.begin(), test.end());
    for (ContourKind kind : {ContourKind::kPitch, ContourKind::kEpochStrength}) {
      const CorrelationReport cr = ModeCorrelationReport(ContourRecords(all, entries, kind), kind);
      const char* tag = kind == ContourKind::kPitch ? "pc" : "esc";
      WriteTextFile(run_dir / "reports" / (std::string("correlation_") + tag + ".txt"), cr.FormatText());
      WriteTextFile(run_dir / "reports" / (std::string("correlation_") + tag + ".jsonl"),
                    cr.FormatRecords());
      const double wm = cr.MeanWithin().value_or(0.0);
      const double bm = cr.MeanBetween().value_or(0.0);
      if (kind == ContourKind::kPitch) {
        rep.wm_pc = wm;
        rep.bm_pc = bm;
      } else {
        rep.wm_esc = wm;
        rep.bm_esc = bm;
      }
    }
    return 0;
  });

  SmcTrainConfig smc_cfg = cfg.smc;
  const SmcTrainResult smc = Stage("train-smc", log, [&] {
    SmcTrainResult r = TrainSmc(smc_train, cfg.smc_search_weights ? smc_dev : std::vector<SmcSample>{},
                                smc_cfg);
    if (!cfg.smc_search_weights) {
      r.system.stage2 = cfg.smc_stage2;
      r.system.stage3 = cfg.smc_stage3;
      r.system.weights_source = "config";
    }
    r.system.Save(run_dir / "smc");
    return r;
  });
  warnings.insert(warnings.end(), smc.warnings.begin(), smc.warnings.end());
  rep.smc_searched = smc.searched;
  rep.smc_dev = smc.dev;
  rep.stage2_candidates = smc.stage2_search.candidates.size();
  rep.stage3_candidates = smc.stage3_search.candidates.size();

  const PhoneInventory inventory = InventoryFromManifest(manifest);
  std::vector<PhoneRecognizer> recognizers(kNumModes);
  Stage("train-mprs", log, [&] {
    for (int m = 0; m < kNumModes; ++m) {
      std::vector<MprsSample> samples;
      for (const auto* e : train) {
        if (static_cast<int>(e->mode) != m) continue;
        if (!e->transcript) throw Error(ErrorCode::kInvalidArgument, UtteranceId(*e) + " has no transcript");
        samples.push_back(MakeMprsSample(*e, inventory, cfg));
      }
      if (samples.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "no training data for mode " + std::string(ModeName(static_cast<Mode>(m))));
      }
      MprsTrainConfig mc = cfg.mprs;
      recognizers[static_cast<size_t>(m)] = TrainMprs(samples, inventory, mc);
      recognizers[static_cast<size_t>(m)].Save(run_dir / "mprs" / ModeName(static_cast<Mode>(m)));
      if (log) log("  trained " + std::string(ModeName(static_cast<Mode>(m))) + " recognizer on " +
                   std::to_string(samples.size()) + " utterances");
    }
    return 0;
  });

  Stage("comb-decode", log, [&] {
    const CombSystem comb(&smc.system, &recognizers[1], &recognizers[0]);
    std::vector<int> preds, labels;
    std::vector<std::string> groups;
    std::string decode_log = "# utterance\tmode\tsmc\tref\thyp_comb\tper_comb\n";
    std::string diagnostics = "# utterances where fusion and VT disagree\n";
    for (size_t i = 0; i < test.size(); ++i) {
      const ManifestEntry& e = *test[i];
      if (!e.transcript) throw Error(ErrorCode::kInvalidArgument, UtteranceId(e) + " has no transcript");
      const MprsSample ms = MakeMprsSample(e, inventory, cfg);
      const CombResult routed = comb.Recognize(smc_test[i].features, ms.streams, cfg.decode);
      const SmcTrace& trace = routed.smc;
      const int truth = static_cast<int>(e.mode);
      const int decided = static_cast<int>(trace.decision);
      preds.push_back(decided);
      labels.push_back(truth);
      groups.push_back(e.language.name + "/" + std::string(ModeName(e.mode)));

      PerResult by_rec[kNumModes];
      std::vector<int> hyps[kNumModes];
      for (int r = 0; r < kNumModes; ++r) {
        hyps[r] = recognizers[static_cast<size_t>(r)].Decode(ms.streams, cfg.decode);
        by_rec[r] = PhoneErrorRate(ms.transcript, hyps[r]);
        rep.per[r][truth].counts += by_rec[r].counts;
        rep.single[r].counts += by_rec[r].counts;
      }
      rep.comb.counts += PhoneErrorRate(ms.transcript, routed.phones).counts;
      rep.ideal.counts += by_rec[truth].counts;
      rep.inverted.counts += by_rec[1 - decided].counts;

      char per_buf[32];
      std::snprintf(per_buf, sizeof(per_buf), "%.4f", by_rec[decided].error_rate);
      decode_log += UtteranceId(e) + "\t" + std::string(ModeName(e.mode)) + "\t" +
                    std::string(ModeName(trace.decision)) + "\t" + Join(*e.transcript) + "\t" +
                    Join(inventory.Decode(routed.phones)) + "\t" + per_buf + "\n";

      const bool vt_ok = trace.vt.Argmax() == truth;
      const bool src_ok = trace.src.Argmax() == truth;
      const bool fused_ok = trace.src_vt.Argmax() == truth;
      if (vt_ok != src_ok) {
        diagnostics += UtteranceId(e) + " vt=" + (vt_ok ? "right" : "wrong") +
                       " src=" + (src_ok ? "right" : "wrong") +
                       " src-vt=" + (fused_ok ? "right" : "wrong") + "\n";
      }
    }
    const AccuracyReport acc =
        AccuracyTable(preds, labels, groups, {"conversation", "read"});
    rep.smc_test_accuracy = acc.accuracy();
    WriteTextFile(run_dir / "reports" / "smc_accuracy.txt", acc.FormatText());
    WriteTextFile(run_dir / "reports" / "smc_accuracy.jsonl", acc.FormatRecords());
    WriteTextFile(run_dir / "reports" / "comb_decode.tsv", decode_log);
    WriteTextFile(run_dir / "reports" / "fusion_diagnostics.txt", diagnostics);
    return 0;
  });

  std::ostringstream os;
  os << "# phonemode end-to-end report\n";
  os << "smc weights (" << smc.system.weights_source << "): stage2 " << smc.system.stage2.w[0]
     << "/" << smc.system.stage2.w[1] << " stage3 " << smc.system.stage3.w[0] << "/"
     << smc.system.stage3.w[1] << "\n";
  if (smc.searched) {
    os << "smc dev accuracy: pc " << Pct(smc.dev.pc) << " esc " << Pct(smc.dev.esc) << " vt "
       << Pct(smc.dev.vt) << " src " << Pct(smc.dev.src) << " src-vt " << Pct(smc.dev.src_vt)
       << "\n";
    os << "searched weights match universal set: " << (smc.matches_universal_weights ? "yes" : "no")
       << "\n";
  }
  os << "smc test accuracy: " << Pct(rep.smc_test_accuracy) << "\n";
  os << "correlation pc: WM " << rep.wm_pc << " BM " << rep.bm_pc << "\n";
  os << "correlation esc: WM " << rep.wm_esc << " BM " << rep.bm_esc << "\n";
  os << "PER (rows = recognizer, cols = test mode)\n";
  os << "              conversation      read\n";
  for (int r = 0; r < kNumModes; ++r) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-13s %12s%% %8s%%\n",
                  std::string(ModeName(static_cast<Mode>(r))).c_str(),
                  Pct(rep.per[r][0].rate()).c_str(), Pct(rep.per[r][1].rate()).c_str());
    os << line;
  }
  os << "phone accuracy on mixed test set\n";
  os << "  conversation-only " << Pct(1.0 - rep.single[0].rate()) << "\n";
  os << "  read-only         " << Pct(1.0 - rep.single[1].rate()) << "\n";
  os << "  comb              " << Pct(1.0 - rep.comb.rate()) << "\n";
  os << "  ideal routing     " << Pct(1.0 - rep.ideal.rate()) << "\n";
  os << "  inverted routing  " << Pct(1.0 - rep.inverted.rate()) << "\n";
  os << "decode alpha " << cfg.decode.alpha << (cfg.decode.alpha == 0.0 ? " (LM disabled)" : "")
     << " min_duration " << cfg.decode.min_duration << "\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  rep.summary = os.str();
  WriteTextFile(run_dir / "reports" / "summary.txt", rep.summary);
  return rep;
}

}  // namespace phonemode
