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

// phonemode command-line driver.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phonemode/audio_io.h"
#include "phonemode/config.h"
#include "phonemode/error.h"
#include "phonemode/feature_io.h"
#include "phonemode/manifest.h"
#include "phonemode/mprs.h"
#include "phonemode/pipeline.h"
#include "phonemode/scoring.h"
#include "phonemode/smc.h"
#include "phonemode/synth.h"

namespace pm = phonemode;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* app, CommonOpts& o) {
  app->add_option("--config", o.config, "pipeline config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.overrides, "override a config key (key=value), repeatable");
}

pm::PipelineConfig MakeConfig(const CommonOpts& o) {
  pm::PipelineConfig c = o.config.empty() ? pm::PipelineConfig::Default()
                                          : pm::PipelineConfig::Load(o.config);
  for (const auto& s : o.overrides) c.Override(s);
  c.Validate();
  return c;
}

pm::Split SplitOrAll(const std::string& s) { return pm::ParseSplit(s); }

std::vector<const pm::ManifestEntry*> Entries(const pm::Manifest& m, const std::string& split) {
  if (split == "all") {
    std::vector<const pm::ManifestEntry*> out;
    for (const auto& e : m.entries) out.push_back(&e);
    return out;
  }
  return m.Select(SplitOrAll(split));
}

void PrintWarnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

std::string Join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

std::string Scores(const pm::ScoreVector& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f/%.4f", s.scores[0], s.scores[1]);
  return buf;
}

// "<id>\t<phone> <phone> ..." per line.
std::map<std::string, std::vector<std::string>> ReadHypFile(const std::string& path) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream is(pm::ReadTextFile(path));
  std::string line;
  size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw pm::Error(pm::ErrorCode::kParse, path + " line " + std::to_string(n) + ": expected id<TAB>phones");
    }
    std::vector<std::string> phones;
    std::string rest = line.substr(tab + 1);
    if (const auto c = rest.find('#'); c != std::string::npos) rest.resize(c);  // comb-decode notes
    std::istringstream ps(rest);
    std::string p;
    while (ps >> p) phones.push_back(p);
    out[line.substr(0, tab)] = phones;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phonemode: speech-mode classification and multilingual phone recognition"};
  app.require_subcommand(1);

  // synth-corpus
  CommonOpts synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-corpus", "generate the synthetic two-mode corpus");
  AddCommon(synth, synth_opts);
  synth->add_option("--out", synth_out, "output directory")->required();

  // extract
  CommonOpts extract_opts;
  std::string extract_manifest, extract_out, extract_kinds = "mfcc39,rmfcc39,mpdss25,pc,esc",
                                              extract_split = "all";
  auto* extract = app.add_subcommand("extract", "write PHFE feature files per manifest entry");
  AddCommon(extract, extract_opts);
  extract->add_option("--manifest", extract_manifest)->required()->check(CLI::ExistingFile);
  extract->add_option("--out", extract_out)->required();
  extract->add_option("--kinds", extract_kinds, "comma list of mfcc13,mfcc39,rmfcc39,mpdss25,pc,esc");
  extract->add_option("--split", extract_split, "train|dev|test|all");

  // train-smc
  CommonOpts tsmc_opts;
  std::string tsmc_manifest, tsmc_out;
  auto* tsmc = app.add_subcommand("train-smc", "train the three-stage mode classifier");
  AddCommon(tsmc, tsmc_opts);
  tsmc->add_option("--manifest", tsmc_manifest)->required()->check(CLI::ExistingFile);
  tsmc->add_option("--out", tsmc_out, "system directory")->required();

  // search-weights
  CommonOpts sw_opts;
  std::string sw_smc, sw_manifest, sw_split = "dev";
  bool sw_write = false;
  auto* sw = app.add_subcommand("search-weights", "grid-search fusion weights on a split");
  AddCommon(sw, sw_opts);
  sw->add_option("--smc", sw_smc)->required()->check(CLI::ExistingDirectory);
  sw->add_option("--manifest", sw_manifest)->required()->check(CLI::ExistingFile);
  sw->add_option("--split", sw_split);
  sw->add_flag("--write", sw_write, "store the found weights in the system directory");

  // classify-mode
  CommonOpts cm_opts;
  std::string cm_smc, cm_wav, cm_manifest, cm_split = "test";
  auto* cm = app.add_subcommand("classify-mode", "classify utterances as read or conversation");
  AddCommon(cm, cm_opts);
  cm->add_option("--smc", cm_smc)->required()->check(CLI::ExistingDirectory);
  auto* cm_src = cm->add_option("--wav", cm_wav)->check(CLI::ExistingFile);
  cm->add_option("--manifest", cm_manifest)->check(CLI::ExistingFile)->excludes(cm_src);
  cm->add_option("--split", cm_split);

  // train-mprs
  CommonOpts tm_opts;
  std::string tm_manifest, tm_mode, tm_out;
  auto* tm = app.add_subcommand("train-mprs", "train a mode-specific phone recognizer");
  AddCommon(tm, tm_opts);
  tm->add_option("--manifest", tm_manifest)->required()->check(CLI::ExistingFile);
  tm->add_option("--mode", tm_mode, "read|conv")->required();
  tm->add_option("--out", tm_out)->required();

  // decode
  CommonOpts dec_opts;
  std::string dec_mprs, dec_wav, dec_manifest, dec_split = "test";
  double dec_alpha = -1.0;
  auto* dec = app.add_subcommand("decode", "decode phones with one recognizer");
  AddCommon(dec, dec_opts);
  dec->add_option("--mprs", dec_mprs)->required()->check(CLI::ExistingDirectory);
  auto* dec_src = dec->add_option("--wav", dec_wav)->check(CLI::ExistingFile);
  dec->add_option("--manifest", dec_manifest)->check(CLI::ExistingFile)->excludes(dec_src);
  dec->add_option("--split", dec_split);
  dec->add_option("--alpha", dec_alpha, "LM scale (default from config)");

  // comb-decode
  CommonOpts cd_opts;
  std::string cd_smc, cd_read, cd_conv, cd_wav, cd_manifest, cd_split = "test";
  double cd_alpha = -1.0;
  auto* cd = app.add_subcommand("comb-decode", "route through SMC, then decode with that mode's recognizer");
  AddCommon(cd, cd_opts);
  cd->add_option("--smc", cd_smc)->required()->check(CLI::ExistingDirectory);
  cd->add_option("--read", cd_read)->required()->check(CLI::ExistingDirectory);
  cd->add_option("--conv", cd_conv)->required()->check(CLI::ExistingDirectory);
  auto* cd_src = cd->add_option("--wav", cd_wav)->check(CLI::ExistingFile);
  cd->add_option("--manifest", cd_manifest)->check(CLI::ExistingFile)->excludes(cd_src);
  cd->add_option("--split", cd_split);
  cd->add_option("--alpha", cd_alpha);

  // score
  std::string sc_ref, sc_hyp;
  auto* sc = app.add_subcommand("score", "phone error rate of hypotheses against references");
  sc->add_option("--ref", sc_ref, "id<TAB>phones file, or a manifest (.tsv)")->required()->check(CLI::ExistingFile);
  sc->add_option("--hyp", sc_hyp, "id<TAB>phones file")->required()->check(CLI::ExistingFile);

  // run-e2e
  CommonOpts e2e_opts;
  std::string e2e_dir;
  auto* e2e = app.add_subcommand("run-e2e", "full pipeline with reports under a run directory");
  AddCommon(e2e, e2e_opts);
  e2e->add_option("--run-dir", e2e_dir)->required();

  // report-correlation
  CommonOpts rc_opts;
  std::string rc_manifest, rc_kind = "pc", rc_out;
  auto* rc = app.add_subcommand("report-correlation", "within/between-mode contour correlation");
  AddCommon(rc, rc_opts);
  rc->add_option("--manifest", rc_manifest)->required()->check(CLI::ExistingFile);
  rc->add_option("--kind", rc_kind, "pc|esc")->check(CLI::IsMember({"pc", "esc"}));
  rc->add_option("--records", rc_out, "also write line-delimited records here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto cfg = MakeConfig(synth_opts);
      const auto res = pm::SynthCorpus(cfg.synth, synth_out);
      std::cout << "wrote " << res.utterances << " utterances; manifest " << res.manifest_path.string() << "\n";
    } else if (*extract) {
      const auto cfg = MakeConfig(extract_opts);
      const auto m = pm::LoadManifest(extract_manifest);
      PrintWarnings(m.warnings);
      std::vector<std::string> kinds;
      {
        std::istringstream ks(extract_kinds);
        std::string k;
        while (std::getline(ks, k, ',')) kinds.push_back(k);
      }
      fs::create_directories(extract_out);
      size_t written = 0;
      for (const auto* e : Entries(m, extract_split)) {
        const pm::Waveform raw = pm::LoadWav(e->audio_path);
        const pm::Waveform trimmed = pm::RemoveSilence(raw, cfg.silence);
        const std::string id = pm::UtteranceId(*e);
        for (const auto& kname : kinds) {
          const pm::FeatureKind k = pm::ParseFeatureKind(kname);
          pm::FeatureMatrix f;
          const auto grid = cfg.Grid(trimmed.sample_rate_hz);
          switch (k) {
            case pm::FeatureKind::kMfcc13: f = pm::Mfcc(trimmed, grid); break;
            case pm::FeatureKind::kMfcc39: f = pm::AddDeltas(pm::Mfcc(trimmed, grid)); break;
            case pm::FeatureKind::kRmfcc39:
              f = pm::Rmfcc(pm::LpResidual(trimmed, 10, grid), grid);
              break;
            case pm::FeatureKind::kMpdss25:
              f = pm::Mpdss(pm::LpResidual(trimmed, 10, grid), grid);
              break;
            case pm::FeatureKind::kPitchContour:
            case pm::FeatureKind::kEpochStrengthContour: {
              const pm::Waveform chopped = pm::ChopFixed(trimmed, cfg.chop_seconds);
              const auto sf = pm::ExtractSmcFeatures(chopped, pm::SmcOptionsFor(cfg, chopped.sample_rate_hz));
              f = (k == pm::FeatureKind::kPitchContour ? sf.pitch : sf.strength).ToFeatures();
              break;
            }
            default:
              throw pm::Error(pm::ErrorCode::kConfig, "extract cannot produce " + kname);
          }
          pm::SaveFeatures(f, fs::path(extract_out) / (id + "." + kname + ".phfe"));
          ++written;
        }
      }
      std::cout << "wrote " << written << " feature files to " << extract_out << "\n";
    } else if (*tsmc) {
      const auto cfg = MakeConfig(tsmc_opts);
      const auto m = pm::LoadManifest(tsmc_manifest);
      PrintWarnings(m.warnings);
      std::vector<pm::SmcSample> train, dev;
      for (const auto* e : m.Select(pm::Split::kTrain)) train.push_back(pm::MakeSmcSample(*e, cfg));
      if (cfg.smc_search_weights)
        for (const auto* e : m.Select(pm::Split::kDev)) dev.push_back(pm::MakeSmcSample(*e, cfg));
      auto res = pm::TrainSmc(train, dev, cfg.smc);
      if (!cfg.smc_search_weights) {
        res.system.stage2 = cfg.smc_stage2;
        res.system.stage3 = cfg.smc_stage3;
        res.system.weights_source = "config";
      }
      PrintWarnings(res.warnings);
      res.system.Save(tsmc_out);
      std::cout << "stage2 weights " << res.system.stage2.w[0] << " " << res.system.stage2.w[1]
                << "\nstage3 weights " << res.system.stage3.w[0] << " " << res.system.stage3.w[1]
                << "\nweights source " << res.system.weights_source << "\n";
      if (res.searched) {
        std::cout << "dev accuracy pc " << res.dev.pc << " esc " << res.dev.esc << " vt " << res.dev.vt
                  << " src " << res.dev.src << " src-vt " << res.dev.src_vt << "\n"
                  << "matches universal weights: " << (res.matches_universal_weights ? "yes" : "no") << "\n";
      }
    } else if (*sw) {
      const auto cfg = MakeConfig(sw_opts);
      auto sys = pm::SmcSystem::Load(sw_smc);
      const auto m = pm::LoadManifest(sw_manifest);
      std::vector<pm::SmcSample> samples;
      for (const auto* e : Entries(m, sw_split)) samples.push_back(pm::MakeSmcSample(*e, cfg));
      auto scores = pm::ScoreSamples(sys, samples);
      const auto s2 = pm::SearchWeights(scores.pc, scores.esc, scores.labels, cfg.smc.search_step);
      sys.stage2 = s2.weights;
      scores = pm::ScoreSamples(sys, samples);
      const auto s3 = pm::SearchWeights(scores.src, scores.vt, scores.labels, cfg.smc.search_step);
      sys.stage3 = s3.weights;
      std::cout << "# stage\tw1\tw2\taccuracy\n";
      for (const auto& c : s2.candidates) std::printf("2\t%.2f\t%.2f\t%.4f\n", c.w1, 1.0 - c.w1, c.accuracy);
      for (const auto& c : s3.candidates) std::printf("3\t%.2f\t%.2f\t%.4f\n", c.w1, 1.0 - c.w1, c.accuracy);
      std::printf("candidates per stage: %zu\n", s2.candidates.size());
      std::printf("best stage2 %.2f/%.2f acc %.4f\nbest stage3 %.2f/%.2f acc %.4f\n", s2.weights.w[0],
                  s2.weights.w[1], s2.accuracy, s3.weights.w[0], s3.weights.w[1], s3.accuracy);
      if (sw_write) {
        sys.weights_source = "searched";
        sys.Save(sw_smc);
      }
    } else if (*cm) {
      const auto cfg = MakeConfig(cm_opts);
      const auto sys = pm::SmcSystem::Load(cm_smc);
      auto classify = [&](const std::string& id, const pm::Waveform& w, const std::string& truth) {
        const pm::Waveform pre = pm::PreprocessForSmc(w, cfg.silence, cfg.chop_seconds);
        const auto t = sys.Classify(pm::ExtractSmcFeatures(pre, pm::SmcOptionsFor(cfg, pre.sample_rate_hz)));
        std::cout << id << "\t" << pm::ModeName(t.decision) << "\tpc=" << Scores(t.pc) << "\tesc=" << Scores(t.esc)
                  << "\tvt=" << Scores(t.vt) << "\tsrc=" << Scores(t.src) << "\tsrc-vt=" << Scores(t.src_vt)
                  << (truth.empty() ? "" : "\ttruth=" + truth) << "\n";
        return t.decision;
      };
      if (!cm_wav.empty()) {
        classify(fs::path(cm_wav).stem().string(), pm::LoadWav(cm_wav), "");
      } else if (!cm_manifest.empty()) {
        const auto m = pm::LoadManifest(cm_manifest);
        size_t ok = 0, n = 0;
        for (const auto* e : Entries(m, cm_split)) {
          ok += classify(pm::UtteranceId(*e), pm::LoadWav(e->audio_path), std::string(pm::ModeName(e->mode))) == e->mode;
          ++n;
        }
        if (n) std::printf("# accuracy %.4f over %zu utterances\n", static_cast<double>(ok) / n, n);
      } else {
        throw pm::Error(pm::ErrorCode::kInvalidArgument, "give --wav or --manifest");
      }
    } else if (*tm) {
      const auto cfg = MakeConfig(tm_opts);
      const pm::Mode mode = pm::ParseMode(tm_mode);
      const auto m = pm::LoadManifest(tm_manifest);
      PrintWarnings(m.warnings);
      const auto inv = pm::InventoryFromManifest(m);
      std::vector<pm::MprsSample> samples;
      for (const auto* e : m.Select(pm::Split::kTrain)) {
        if (e->mode != mode) continue;
        if (!e->transcript) throw pm::Error(pm::ErrorCode::kInvalidArgument, pm::UtteranceId(*e) + " has no transcript");
        samples.push_back(pm::MakeMprsSample(*e, inv, cfg));
      }
      pm::MprsTrainReport rep;
      const auto rec = pm::TrainMprs(samples, inv, cfg.mprs, &rep);
      rec.Save(tm_out);
      std::printf("trained on %zu utterances, inventory %zu, frame accuracy %.4f\n", samples.size(), inv.size(),
                  rep.train_frame_accuracy);
    } else if (*dec || *cd) {
      const bool comb = cd->parsed();
      const auto cfg = MakeConfig(comb ? cd_opts : dec_opts);
      pm::DecodeOptions dopts = cfg.decode;
      const double alpha = comb ? cd_alpha : dec_alpha;
      if (alpha >= 0.0) dopts.alpha = alpha;
      pm::PhoneRecognizer single, read_rec, conv_rec;
      pm::SmcSystem smc;
      if (comb) {
        smc = pm::SmcSystem::Load(cd_smc);
        read_rec = pm::PhoneRecognizer::Load(cd_read);
        conv_rec = pm::PhoneRecognizer::Load(cd_conv);
      } else {
        single = pm::PhoneRecognizer::Load(dec_mprs);
      }
      const pm::CombSystem system(&smc, &read_rec, &conv_rec);
      const pm::PhoneInventory& inv = comb ? read_rec.inventory : single.inventory;
      auto run = [&](const std::string& id, const pm::Waveform& raw) {
        const pm::Waveform trimmed = pm::RemoveSilence(raw, cfg.silence);
        const auto streams = pm::ExtractStreams(trimmed, pm::MprsOptionsFor(cfg, trimmed.sample_rate_hz));
        if (comb) {
          const pm::Waveform chopped = pm::ChopFixed(trimmed, cfg.chop_seconds);
          const auto r = system.Recognize(pm::ExtractSmcFeatures(chopped, pm::SmcOptionsFor(cfg, chopped.sample_rate_hz)),
                                          streams, dopts);
          std::cout << id << "\t" << Join(inv.Decode(r.phones)) << "\t# routed=" << r.routed_to << "\n";
        } else {
          std::cout << id << "\t" << Join(inv.Decode(single.Decode(streams, dopts))) << "\n";
        }
      };
      const std::string& wav = comb ? cd_wav : dec_wav;
      const std::string& man = comb ? cd_manifest : dec_manifest;
      if (!wav.empty()) {
        run(fs::path(wav).stem().string(), pm::LoadWav(wav));
      } else if (!man.empty()) {
        const auto m = pm::LoadManifest(man);
        for (const auto* e : Entries(m, comb ? cd_split : dec_split)) run(pm::UtteranceId(*e), pm::LoadWav(e->audio_path));
      } else {
        throw pm::Error(pm::ErrorCode::kInvalidArgument, "give --wav or --manifest");
      }
    } else if (*sc) {
      std::map<std::string, std::vector<std::string>> refs;
      if (fs::path(sc_ref).extension() == ".tsv") {
        const auto m = pm::LoadManifest(sc_ref);
        for (const auto& e : m.entries)
          if (e.transcript) refs[pm::UtteranceId(e)] = *e.transcript;
      } else {
        refs = ReadHypFile(sc_ref);
      }
      const auto hyps = ReadHypFile(sc_hyp);
      // Shared label table so both sides map to the same indices.
      std::map<std::string, int> table;
      auto enc = [&](const std::vector<std::string>& v) {
        std::vector<int> out;
        for (const auto& s : v) out.push_back(table.emplace(s, static_cast<int>(table.size())).first->second);
        return out;
      };
      pm::AlignmentCounts total;
      std::cout << "# id\tS\tD\tI\tN\tE\n";
      for (const auto& [id, hyp] : hyps) {
        auto it = refs.find(id);
        if (it == refs.end()) throw pm::Error(pm::ErrorCode::kInvalidArgument, "no reference for " + id);
        const auto r = pm::PhoneErrorRate(enc(it->second), enc(hyp));
        total += r.counts;
        std::printf("%s\t%zu\t%zu\t%zu\t%zu\t%.4f\n", id.c_str(), r.counts.substitutions, r.counts.deletions,
                    r.counts.insertions, r.counts.reference_length, r.error_rate);
      }
      std::printf("TOTAL\t%zu\t%zu\t%zu\t%zu\t%.4f\n", total.substitutions, total.deletions, total.insertions,
                  total.reference_length, pm::ErrorRate(total));
    } else if (*e2e) {
      const auto cfg = MakeConfig(e2e_opts);
      const auto start = std::chrono::steady_clock::now();
      const auto rep = pm::RunEndToEnd(cfg, e2e_dir, [&](const std::string& msg) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "[%7.1fs] %s\n", s, msg.c_str());
      });
      std::cout << rep.summary;
    } else if (*rc) {
      const auto cfg = MakeConfig(rc_opts);
      const auto m = pm::LoadManifest(rc_manifest);
      std::vector<const pm::ManifestEntry*> entries;
      std::vector<pm::SmcSample> samples;
      for (const auto& e : m.entries) {
        entries.push_back(&e);
        samples.push_back(pm::MakeSmcSample(e, cfg));
      }
      const auto kind = rc_kind == "pc" ? pm::ContourKind::kPitch : pm::ContourKind::kEpochStrength;
      const auto report = pm::ModeCorrelationReport(pm::ContourRecords(samples, entries, kind), kind);
      std::cout << report.FormatText();
      if (!rc_out.empty()) pm::WriteTextFile(rc_out, report.FormatRecords());
    }
  } catch (const pm::Error& e) {
    std::cerr << "error [" << pm::ErrorCodeName(e.code()) << "]: " << e.message() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
