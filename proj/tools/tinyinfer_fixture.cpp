// Copyright 2026 The TinyInfer Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Writes a self-consistent fixture set from seeded random weights: a TIWF
// file with calibration ranges, TIRAW/TIF32 inputs and a fixtures manifest
// whose expectations come from the float engine.
//
//   tinyinfer_fixture --out-dir /tmp/fx --seed 3 --cases 4

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tinyinfer/bench.hpp"
#include "tinyinfer/fixtures.hpp"
#include "tinyinfer/model_io.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/squeezenet.hpp"

namespace {

namespace ti = tinyinfer;

std::vector<std::uint8_t> RandomImage(std::mt19937_64& rng, ti::index_t size) {
  // Blocky colour patches so activations are not pure noise.
  std::uniform_int_distribution<int> colour(0, 255);
  const ti::index_t block = 16;
  const ti::index_t blocks = (size + block - 1) / block;
  std::vector<std::uint8_t> palette(static_cast<std::size_t>(blocks * blocks * 3));
  for (auto& p : palette) p = static_cast<std::uint8_t>(colour(rng));
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size * size * 3));
  for (ti::index_t y = 0; y < size; ++y)
    for (ti::index_t x = 0; x < size; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[static_cast<std::size_t>((y * size + x) * 3 + c)] =
            palette[static_cast<std::size_t>(((y / block) * blocks + x / block) * 3 + c)];
  return rgb;
}

int Main(int argc, char** argv) {
  std::string out_dir;
  std::uint64_t seed = 1;
  int cases = 3;
  ti::index_t classes = 1000;
  ti::index_t size = ti::kInputSize;

  CLI::App app{"TinyInfer fixture generator"};
  app.add_option("--out-dir", out_dir, "Output directory")->required();
  app.add_option("--seed", seed, "Weight and image seed");
  app.add_option("--cases", cases, "Number of random images (a solid-gray case is added)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--classes", classes, "conv10 output classes")->check(CLI::PositiveNumber);
  app.add_option("--size", size, "Input height and width")->check(CLI::Range(63, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(seed);

    ti::WeightStore store = ti::RandomSqueezeNetWeights(seed, classes);
    store.PutText("meta.source", "tinyinfer_fixture seed " + std::to_string(seed));
    const ti::Preprocessing pp = ti::PreprocessingFromStore(store);

    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> images;
    images.emplace_back("gray", std::vector<std::uint8_t>(static_cast<std::size_t>(size * size * 3), 128));
    for (int i = 0; i < cases; ++i) images.emplace_back("case" + std::to_string(i), RandomImage(rng, size));

    std::vector<ti::Tensor> inputs;
    for (const auto& [name, rgb] : images) inputs.push_back(ti::PreprocessRgb(rgb, size, pp));
    ti::Calibrate(store, inputs, size);

    ti::FixtureManifest manifest;
    manifest.dir = dir;
    manifest.weights = "weights.tiwf";
    manifest.input_size = size;
    ti::SaveWeights(store, dir / manifest.weights);

    ti::SqueezeNetOptions opts;
    opts.input_size = size;
    const ti::Graph graph = ti::BuildSqueezeNet(store, opts);
    for (std::size_t i = 0; i < images.size(); ++i) {
      ti::FixtureCase f;
      f.name = images[i].first;
      f.raw = f.name + ".tiraw";
      f.f32 = f.name + ".tif32";
      ti::SaveRawInput(dir / f.raw, images[i].second);
      ti::SaveF32Input(dir / f.f32, inputs[i]);
      const ti::RunResult r = ti::Run(graph, inputs[i]);
      f.top5 = ti::TopK(r.probs, std::min<ti::index_t>(5, classes));
      f.activations = ti::SummarizeActivations(graph, inputs[i]);
      manifest.fixtures.push_back(std::move(f));
    }
    const std::string text = ti::ManifestJson(manifest).dump(2) + "\n";
    ti::internal::WriteFile(dir / "manifest.json",
                            {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    std::cout << "wrote " << manifest.fixtures.size() << " fixtures to " << dir.string() << "\n";
  } catch (const ti::Error& e) {
    std::cerr << "tinyinfer_fixture: " << e.what() << "\n";
    return ti::ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "tinyinfer_fixture: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return Main(argc, argv); }
