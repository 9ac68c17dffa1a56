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


// Microbenchmarks for the hot paths: feature extraction, the MLP forward
// pass, Viterbi decoding and edit-distance scoring.

#include <vector>

#include <benchmark/benchmark.h>

#include "phonemode/excitation.h"
#include "phonemode/mprs.h"
#include "phonemode/neural.h"
#include "phonemode/random.h"
#include "phonemode/scoring.h"
#include "phonemode/spectral.h"

namespace phonemode {
namespace {

Waveform NoiseSeconds(double seconds) {
  Rng rng(1);
  Waveform w{std::vector<double>(static_cast<size_t>(seconds * 16000)), 16000};
  for (double& v : w.samples) v = 0.1 * rng.Gaussian();
  return w;
}

void BM_Mfcc(benchmark::State& state) {
  const Waveform w = NoiseSeconds(static_cast<double>(state.range(0)));
  const FrameGrid g = FrameGrid::ForRate(16000);
  for (auto _ : state) benchmark::DoNotOptimize(AddDeltas(Mfcc(w, g)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.size()));
}
BENCHMARK(BM_Mfcc)->Arg(1)->Arg(5);

void BM_Zff(benchmark::State& state) {
  const Waveform w = NoiseSeconds(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ExtractEpochs(ZeroFrequencyFilter(w)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.size()));
}
BENCHMARK(BM_Zff)->Arg(1)->Arg(5);

void BM_LpResidual(benchmark::State& state) {
  const Waveform w = NoiseSeconds(1.0);
  const FrameGrid g = FrameGrid::ForRate(16000);
  for (auto _ : state) benchmark::DoNotOptimize(LpResidual(w, 10, g));
}
BENCHMARK(BM_LpResidual);

void BM_MlpForward(benchmark::State& state) {
  const auto input = static_cast<size_t>(state.range(0));
  const MlpModel m = MlpModel::Create(input, 2 * input, 48, 3);
  Rng rng(2);
  std::vector<double> x(input);
  for (double& v : x) v = rng.Gaussian();
  for (auto _ : state) benchmark::DoNotOptimize(m.Forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(39)->Arg(500);

void BM_Viterbi(benchmark::State& state) {
  const auto frames = static_cast<Eigen::Index>(state.range(0));
  const size_t phones = 48;
  Rng rng(4);
  Eigen::MatrixXd ll(frames, static_cast<Eigen::Index>(phones));
  for (Eigen::Index t = 0; t < ll.rows(); ++t)
    for (Eigen::Index k = 0; k < ll.cols(); ++k) ll(t, k) = -5.0 * rng.Uniform();
  std::vector<std::vector<int>> text(20);
  for (auto& s : text)
    for (int i = 0; i < 30; ++i) s.push_back(static_cast<int>(rng.Index(phones)));
  const BigramLm lm = TrainLm(text, phones, 1.0);
  DecodeOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(ViterbiDecode(ll, lm, opts));
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_Viterbi)->Arg(100)->Arg(500);

void BM_PhoneErrorRate(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  Rng rng(5);
  std::vector<int> ref(n), hyp(n);
  for (size_t i = 0; i < n; ++i) {
    ref[i] = static_cast<int>(rng.Index(40));
    hyp[i] = rng.Uniform() < 0.7 ? ref[i] : static_cast<int>(rng.Index(40));
  }
  for (auto _ : state) benchmark::DoNotOptimize(PhoneErrorRate(ref, hyp));
}
BENCHMARK(BM_PhoneErrorRate)->Arg(50)->Arg(500);

}  // namespace
}  // namespace phonemode

BENCHMARK_MAIN();
