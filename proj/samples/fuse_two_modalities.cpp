// samples/fuse_two_modalities.cpp

// Copyright 2026  The affuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Library walk-through: synthesize a small corpus, train one acoustic and
// one text regressor, then fuse them with per-dimension SVRs.
//
//   fuse_two_modalities [work_dir]

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "affuse/pipeline/config.hpp"
#include "affuse/pipeline/extraction.hpp"
#include "affuse/pipeline/fusion.hpp"
#include "affuse/pipeline/modality.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/pipeline/stats.hpp"
#include "affuse/pipeline/synth.hpp"

int main(int argc, char **argv) {
  using namespace affuse;
  using namespace affuse::pipeline;
  const std::filesystem::path dir =
      argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::temp_directory_path() / "affuse_sample";
  try {
    SynthConfig synth;
    synth.utterances = 400;
    synth.seed = 7;
    const Manifest manifest = GenerateSynthetic(dir, synth);

    dsp::FrameConfig frame;
    const FeatureTable acoustic = ExtractAcoustic(manifest, {"hsf2"}, frame, 2).at("hsf2");
    const FeatureTable text = ExtractText(manifest, "text");

    const SplitPlan split = MakeSplit(manifest, SplitMode::kSd, {}, synth.seed);
    const GoldMap gold = GoldLabels(manifest);

    stage1::NetConfig net = DefaultAcousticNet();
    net.hidden_layers = {64};
    net.max_epochs = 20;
    const auto a = TrainModality(acoustic, split, gold, net, MtlWeights{}, false);
    stage1::NetConfig text_net = DefaultTextNet();
    text_net.hidden_layers = {64};
    text_net.max_epochs = 20;
    const auto t = TrainModality(text, split, gold, text_net, MtlWeights{}, false);

    const FusionResult fused = Fuse(a.dev, t.dev, a.test, t.test, gold, svr::SvrConfig{});

    const auto show = [&](const char *name, const stage1::PredictionSet &p) {
      const auto c = ScorePredictions(p, gold);
      std::printf("%-9s V %.3f  A %.3f  D %.3f  mean %.3f\n", name, c[0], c[1], c[2], MeanCcc(c));
      return MeanCcc(c);
    };
    const double ma = show("acoustic", a.test);
    const double mt = show("text", t.test);
    const double mf = show("fused", fused.fused);
    if (std::max(ma, mt) > 0.0)
      std::printf("relative improvement %.1f%%\n", RelativeImprovement(mf, std::max(ma, mt)));
  } catch (const Error &e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
