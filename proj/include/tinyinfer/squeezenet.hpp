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

// SqueezeNet v1.0:
//
//   conv1 (96, 7x7/2) -> relu -> maxpool1 (3/2)
//   fire2 fire3 fire4 -> maxpool4 (3/2)
//   fire5 fire6 fire7 fire8 -> maxpool8 (3/2)
//   fire9 -> conv10 (classes, 1x1) -> relu -> global avgpool
//   -> attenuation scale -> softmax
//
// Dropout is inference-time identity and is not part of the graph; the
// optional scale node after global pooling stands in for it.

#ifndef TINYINFER_SQUEEZENET_HPP_
#define TINYINFER_SQUEEZENET_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tinyinfer/error.hpp"
#include "tinyinfer/fire.hpp"
#include "tinyinfer/graph.hpp"
#include "tinyinfer/model_io.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/tensor.hpp"

namespace tinyinfer {

inline constexpr std::string_view kSqueezeNetArch = "squeezenet-v1.0";
inline constexpr index_t kConv1Filters = 96;
inline constexpr index_t kConv10Inputs = 512;

struct FireStage {
  const char* name;
  FireConfig config;
  bool pool_after;
};

inline constexpr std::array<FireStage, 8> kSqueezeNetFires = {{
    {"fire2", {16, 64, 64}, false},
    {"fire3", {16, 64, 64}, false},
    {"fire4", {32, 128, 128}, true},
    {"fire5", {32, 128, 128}, false},
    {"fire6", {48, 192, 192}, false},
    {"fire7", {48, 192, 192}, false},
    {"fire8", {64, 256, 256}, true},
    {"fire9", {64, 256, 256}, false},
}};

inline const ConvParams kConv1Params = ConvParams::Square(7, 2, 0);
inline const ConvParams kConv10Params = ConvParams::Square(1, 1, 0);
inline constexpr PoolParams kSqueezeNetPool{3, 2, 0};

struct SqueezeNetOptions {
  bool quantized = false;
  QuantMode quant_mode = QuantMode::kRequantizeBetweenLayers;
  // nullopt leaves the scale node out of the graph entirely.
  std::optional<float> attenuation = 1.0f;
  index_t input_size = 227;
};

// Every conv weight/bias pair of the network, in execution order.
struct ConvSlot {
  std::string name;
  Shape weight_shape;
};

inline std::vector<ConvSlot> SqueezeNetConvSlots(index_t num_classes) {
  std::vector<ConvSlot> slots;
  slots.push_back({"conv1", {kConv1Filters, 3, 7, 7}});
  index_t channels = kConv1Filters;
  for (const FireStage& f : kSqueezeNetFires) {
    const std::string n = f.name;
    slots.push_back({n + "/squeeze1x1", {f.config.squeeze, channels, 1, 1}});
    slots.push_back({n + "/expand1x1", {f.config.expand1, f.config.squeeze, 1, 1}});
    slots.push_back({n + "/expand3x3", {f.config.expand3, f.config.squeeze, 3, 3}});
    channels = f.config.out_channels();
  }
  slots.push_back({"conv10", {num_classes, channels, 1, 1}});
  return slots;
}

// Store names use dots where layer names use slashes:
// "fire2/squeeze1x1" -> "fire2.squeeze1x1.weight".
inline std::string ParamPrefix(std::string conv) {
  std::replace(conv.begin(), conv.end(), '/', '.');
  return conv;
}
inline std::string WeightName(const std::string& conv) { return ParamPrefix(conv) + ".weight"; }
inline std::string BiasName(const std::string& conv) { return ParamPrefix(conv) + ".bias"; }

// Loads one conv's weights, checking the expected shape. U8 entries carrying
// quant params are dequantized.
inline ConvWeights LoadConvWeights(const WeightStore& store, const std::string& conv,
                                   const Shape& expected) {
  const WeightEntry* we = store.Find(WeightName(conv));
  const WeightEntry* be = store.Find(BiasName(conv));
  if (we == nullptr || be == nullptr) {
    Fail(ErrorCode::kBuild, "layer '" + conv + "': missing " +
                                (we == nullptr ? WeightName(conv) : BiasName(conv)));
  }
  const std::vector<std::uint32_t> dims = {
      static_cast<std::uint32_t>(expected.n), static_cast<std::uint32_t>(expected.c),
      static_cast<std::uint32_t>(expected.h), static_cast<std::uint32_t>(expected.w)};
  if (we->dims != dims) {
    std::string got;
    for (auto d : we->dims) got += (got.empty() ? "" : ",") + std::to_string(d);
    Fail(ErrorCode::kBuild, "layer '" + conv + "': weight shape (" + got + "), expected " +
                                expected.ToString());
  }
  ConvWeights w;
  if (we->dtype == DType::kF32) {
    w.weight = store.GetTensor(we->name);
  } else if (we->dtype == DType::kU8 && we->quant) {
    w.weight = DequantizeTensor({store.GetTensor(we->name), *we->quant});
  } else {
    Fail(ErrorCode::kBuild, "layer '" + conv + "': weight must be f32 or quantized u8");
  }
  if (be->dtype != DType::kF32 || be->dims != std::vector<std::uint32_t>{dims[0]}) {
    Fail(ErrorCode::kBuild, "layer '" + conv + "': bias must be f32 [" +
                                std::to_string(expected.n) + "]");
  }
  w.bias = store.GetFloats(be->name);
  return w;
}

inline index_t SqueezeNetClasses(const WeightStore& store) {
  const WeightEntry* e = store.Find(WeightName("conv10"));
  if (e == nullptr || e->dims.size() != 4 || e->dims[0] == 0) {
    Fail(ErrorCode::kBuild, "layer 'conv10': missing or malformed " + WeightName("conv10"));
  }
  return e->dims[0];
}

inline Graph BuildSqueezeNet(const WeightStore& store, const SqueezeNetOptions& opts = {}) {
  const index_t classes = SqueezeNetClasses(store);
  const auto slots = SqueezeNetConvSlots(classes);
  std::map<std::string, ConvWeights> convs;
  for (const ConvSlot& s : slots) convs[s.name] = LoadConvWeights(store, s.name, s.weight_shape);

  GraphOptions gopts;
  gopts.quantized = opts.quantized;
  gopts.quant_mode = opts.quant_mode;
  if (opts.quantized) gopts.calibration = GetCalibration(store);

  GraphBuilder b({1, 3, opts.input_size, opts.input_size}, std::move(gopts));
  b.Conv("conv1", convs.at("conv1"), kConv1Params);
  b.MaxPool("maxpool1", kSqueezeNetPool);
  for (const FireStage& f : kSqueezeNetFires) {
    const std::string n = f.name;
    b.Fire(n, f.config,
           {convs.at(n + "/squeeze1x1"), convs.at(n + "/expand1x1"), convs.at(n + "/expand3x3")});
    if (f.pool_after) b.MaxPool("maxpool" + n.substr(4), kSqueezeNetPool);
  }
  b.Conv("conv10", convs.at("conv10"), kConv10Params, {.relu = true, .float_output = true});
  b.GlobalAvgPool("pool10");
  if (opts.attenuation) b.Scale("attenuation", *opts.attenuation);
  b.Softmax("prob");
  return b.Finish();
}

// He-uniform random weights with small biases. Deterministic for a seed.
inline WeightStore RandomSqueezeNetWeights(std::uint64_t seed, index_t num_classes = 1000) {
  std::mt19937_64 rng(seed);
  WeightStore store;
  store.PutText("meta.arch", kSqueezeNetArch);
  for (const ConvSlot& s : SqueezeNetConvSlots(num_classes)) {
    const double fan_in = static_cast<double>(s.weight_shape.c * s.weight_shape.h * s.weight_shape.w);
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> wdist(-bound, bound);
    std::uniform_real_distribution<double> bdist(-0.05, 0.05);
    Tensor w = Tensor::Create(s.weight_shape, DType::kF32);
    float* p = w.data<float>();
    for (index_t i = 0; i < w.element_count(); ++i) p[i] = static_cast<float>(wdist(rng));
    std::vector<float> bias(static_cast<std::size_t>(s.weight_shape.n));
    for (float& x : bias) x = static_cast<float>(bdist(rng));
    store.PutTensor(WeightName(s.name), w);
    store.PutFloats(BiasName(s.name), bias);
  }
  return store;
}

// Observed activation ranges, keyed like GraphOptions::calibration.
using ActivationRanges = std::map<std::string, std::pair<float, float>>;

// Runs the float network over every input and records, per calibration key,
// the union of observed (min, max). Ranges are widened to include 0 when
// params are derived.
inline ActivationRanges ObserveActivationRanges(const WeightStore& store,
                                                std::span<const Tensor> inputs,
                                                index_t input_size = 227) {
  Check(!inputs.empty(), ErrorCode::kArgument, "calibration needs at least one input");
  SqueezeNetOptions fopts;
  fopts.input_size = input_size;
  const Graph g = BuildSqueezeNet(store, fopts);
  Executor exec(g, 1);
  ActivationRanges ranges;
  auto observe = [&ranges](const std::string& key, const Tensor& t) {
    auto [it, fresh] = ranges.try_emplace(key, std::numeric_limits<float>::infinity(),
                                          -std::numeric_limits<float>::infinity());
    (void)fresh;
    const Shape s = t.shape();
    for (index_t n = 0; n < s.n; ++n) {
      for (index_t c = 0; c < s.c; ++c) {
        for (float x : t.Plane<const float>(n, c)) {
          it->second.first = std::min(it->second.first, x);
          it->second.second = std::max(it->second.second, x);
        }
      }
    }
  };
  exec.set_observer([&](const Step& s, const Tensor& out) {
    if (!s.calib_key.empty()) observe(s.calib_key, out);
  });
  for (const Tensor& input : inputs) {
    observe("input", input);
    exec.Run(input);
  }
  return ranges;
}

// Writes calib.<key> entries for every activation the quantized graph needs.
inline void Calibrate(WeightStore& store, std::span<const Tensor> inputs,
                      index_t input_size = 227) {
  for (const auto& [key, range] : ObserveActivationRanges(store, inputs, input_size)) {
    PutCalibration(store, key, range.first, range.second);
  }
}

}  // namespace tinyinfer

#endif  // TINYINFER_SQUEEZENET_HPP_
