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

#ifndef TINYINFER_TIMING_HPP_
#define TINYINFER_TIMING_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tinyinfer/error.hpp"

namespace tinyinfer {

enum class LayerKind : std::uint8_t {
  kConv,
  kRelu,
  kMaxPool,
  kFire,
  kGlobalAvgPool,
  kScale,
  kSoftmax,
  kQuantize,
  kDequantize,
  kRequantize,
  kConcat,  // fire expand-branch join; zero-copy, so only bookkeeping is timed
};

inline constexpr std::array<std::pair<LayerKind, std::string_view>, 11> kLayerKindNames = {{
    {LayerKind::kConv, "conv"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kMaxPool, "maxpool"},
    {LayerKind::kFire, "fire"},
    {LayerKind::kGlobalAvgPool, "global_avgpool"},
    {LayerKind::kScale, "scale"},
    {LayerKind::kSoftmax, "softmax"},
    {LayerKind::kQuantize, "quantize"},
    {LayerKind::kDequantize, "dequantize"},
    {LayerKind::kRequantize, "requantize"},
    {LayerKind::kConcat, "concat"},
}};

inline std::string_view LayerKindName(LayerKind kind) {
  for (const auto& [k, name] : kLayerKindNames)
    if (k == kind) return name;
  return "unknown";
}

inline LayerKind ParseLayerKind(std::string_view name) {
  for (const auto& [k, n] : kLayerKindNames)
    if (n == name) return k;
  Fail(ErrorCode::kReport, "unknown layer kind '" + std::string(name) + "'");
}

// Monotonic time source. Tests substitute a scripted clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::nanoseconds Now() = 0;
};

class SteadyClock final : public Clock {
 public:
  static SteadyClock& Instance() {
    static SteadyClock clock;
    return clock;
  }
  std::chrono::nanoseconds Now() override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  }
};

struct TimingEntry {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  std::chrono::nanoseconds duration{0};  // summed over `iterations` runs
  int iterations = 0;

  double mean_ms() const {
    return iterations == 0 ? 0.0
                           : std::chrono::duration<double, std::milli>(duration).count() /
                                 iterations;
  }
};

// One entry per executed step. `total` is the wall clock around the whole
// run, measured independently of the entries; zero means "not measured".
struct TimingReport {
  std::vector<TimingEntry> entries;
  std::chrono::nanoseconds total{0};
  int iterations = 0;

  // Adds another run of the same graph.
  void Accumulate(const TimingReport& run) {
    if (entries.empty() && iterations == 0) {
      *this = run;
      return;
    }
    Check(run.entries.size() == entries.size(), ErrorCode::kReport,
          "accumulating reports of different graphs");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Check(entries[i].name == run.entries[i].name, ErrorCode::kReport,
            "entry mismatch at " + entries[i].name);
      entries[i].duration += run.entries[i].duration;
      entries[i].iterations += run.entries[i].iterations;
    }
    total += run.total;
    iterations += run.iterations;
  }
};

}  // namespace tinyinfer

#endif  // TINYINFER_TIMING_HPP_
