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


// Golden fixtures manifest (JSON), written by the export tooling and by
// tinyinfer_fixture:
//
//   {
//     "version": 1,
//     "weights": "squeezenet.tiwf",          // relative to the manifest
//     "input_size": 227,                     // optional, default 227
//     "checksum": "summary-v1",
//     "tolerance": {"prob_abs": 1e-4, "activation_rel": 1e-3},
//     "fixtures": [{
//       "name": "cat",
//       "raw": "cat.tiraw",                   // optional
//       "f32": "cat.tif32",                   // optional; one of raw/f32 required
//       "top5": [{"class": 281, "prob": 0.61}, ...],
//       "activations": {"conv1": {"count": ..., "sum": ..., "sum_abs": ...,
//                                 "min": ..., "max": ...}, ...}   // optional
//     }]
//   }
//
// "summary-v1" activation summaries are computed in double over the layer
// output (after its ReLU); keys follow the calibration naming.

#ifndef TINYINFER_FIXTURES_HPP_
#define TINYINFER_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinyinfer/error.hpp"
#include "tinyinfer/graph.hpp"
#include "tinyinfer/model_io.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/tensor.hpp"

namespace tinyinfer {

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kSummaryChecksum = "summary-v1";

struct ActivationSummary {
  std::int64_t count = 0;
  double sum = 0.0;
  double sum_abs = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline ActivationSummary Summarize(const Tensor& t) {
  Check(t.dtype() == DType::kF32, ErrorCode::kArgument, "summaries are over f32 tensors");
  ActivationSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  const Shape sh = t.shape();
  for (index_t n = 0; n < sh.n; ++n) {
    for (index_t c = 0; c < sh.c; ++c) {
      for (float x : t.Plane<const float>(n, c)) {
        s.sum += x;
        s.sum_abs += std::fabs(x);
        s.min = std::min<double>(s.min, x);
        s.max = std::max<double>(s.max, x);
        ++s.count;
      }
    }
  }
  return s;
}

// Runs a float graph once and summarizes every calibration-point output.
inline std::map<std::string, ActivationSummary> SummarizeActivations(const Graph& graph,
                                                                     const Tensor& input) {
  std::map<std::string, ActivationSummary> out;
  Executor exec(graph, 1);
  exec.set_observer([&out](const Step& s, const Tensor& t) {
    if (!s.calib_key.empty() && t.dtype() == DType::kF32) out[s.calib_key] = Summarize(t);
  });
  exec.Run(input);
  return out;
}

struct FixtureCase {
  std::string name;
  std::string raw;
  std::string f32;
  std::vector<ClassScore> top5;
  std::map<std::string, ActivationSummary> activations;
};

struct FixtureManifest {
  std::filesystem::path dir;  // manifest location; paths resolve against it
  std::string weights;
  index_t input_size = kInputSize;
  std::string checksum = std::string(kSummaryChecksum);
  double prob_abs = 1e-4;
  double activation_rel = 1e-3;
  std::vector<FixtureCase> fixtures;

  std::filesystem::path Resolve(const std::string& rel) const { return dir / rel; }
};

inline nlohmann::ordered_json ManifestJson(const FixtureManifest& m) {
  nlohmann::ordered_json j;
  j["version"] = kManifestVersion;
  j["weights"] = m.weights;
  j["input_size"] = m.input_size;
  j["checksum"] = m.checksum;
  j["tolerance"] = {{"prob_abs", m.prob_abs}, {"activation_rel", m.activation_rel}};
  auto list = nlohmann::ordered_json::array();
  for (const FixtureCase& f : m.fixtures) {
    nlohmann::ordered_json fj;
    fj["name"] = f.name;
    if (!f.raw.empty()) fj["raw"] = f.raw;
    if (!f.f32.empty()) fj["f32"] = f.f32;
    auto top = nlohmann::ordered_json::array();
    for (const ClassScore& s : f.top5) top.push_back({{"class", s.index}, {"prob", s.prob}});
    fj["top5"] = std::move(top);
    if (!f.activations.empty()) {
      nlohmann::ordered_json acts = nlohmann::ordered_json::object();
      for (const auto& [key, a] : f.activations) {
        acts[key] = {{"count", a.count}, {"sum", a.sum}, {"sum_abs", a.sum_abs},
                     {"min", a.min}, {"max", a.max}};
      }
      fj["activations"] = std::move(acts);
    }
    list.push_back(std::move(fj));
  }
  j["fixtures"] = std::move(list);
  return j;
}

inline FixtureManifest ParseManifest(const std::string& text, const std::filesystem::path& dir) {
  FixtureManifest m;
  m.dir = dir;
  try {
    const auto j = nlohmann::json::parse(text);
    Check(j.at("version").get<int>() == kManifestVersion, ErrorCode::kVersion,
          "unsupported manifest version");
    m.weights = j.at("weights").get<std::string>();
    m.input_size = j.value("input_size", kInputSize);
    Check(m.input_size > 0, ErrorCode::kFormat, "manifest input_size must be positive");
    m.checksum = j.value("checksum", std::string(kSummaryChecksum));
    if (j.contains("tolerance")) {
      m.prob_abs = j["tolerance"].value("prob_abs", m.prob_abs);
      m.activation_rel = j["tolerance"].value("activation_rel", m.activation_rel);
    }
    for (const auto& fj : j.at("fixtures")) {
      FixtureCase f;
      f.name = fj.at("name").get<std::string>();
      f.raw = fj.value("raw", std::string());
      f.f32 = fj.value("f32", std::string());
      Check(!f.raw.empty() || !f.f32.empty(), ErrorCode::kFormat,
            "fixture '" + f.name + "' names no input file");
      float last = std::numeric_limits<float>::infinity();
      for (const auto& t : fj.at("top5")) {
        ClassScore s{t.at("class").get<index_t>(), t.at("prob").get<float>()};
        Check(s.prob <= last, ErrorCode::kFormat,
              "fixture '" + f.name + "' top5 probabilities not descending");
        last = s.prob;
        f.top5.push_back(s);
      }
      if (fj.contains("activations")) {
        for (const auto& [key, a] : fj["activations"].items()) {
          f.activations[key] = {a.at("count").get<std::int64_t>(), a.at("sum").get<double>(),
                                a.at("sum_abs").get<double>(), a.at("min").get<double>(),
                                a.at("max").get<double>()};
        }
      }
      m.fixtures.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("fixtures manifest: ") + e.what());
  }
  return m;
}

inline FixtureManifest LoadManifest(const std::filesystem::path& path) {
  const auto bytes = internal::ReadFile(path);
  return ParseManifest(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

// |a - b| <= rel * max(|a|, |b|, floor). `floor` keeps near-zero sums from
// demanding absolute agreement.
inline bool RelativelyClose(double a, double b, double rel, double floor = 1e-6) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace tinyinfer

#endif  // TINYINFER_FIXTURES_HPP_
