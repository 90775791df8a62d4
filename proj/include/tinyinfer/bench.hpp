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

#ifndef TINYINFER_BENCH_HPP_
#define TINYINFER_BENCH_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinyinfer/error.hpp"
#include "tinyinfer/graph.hpp"
#include "tinyinfer/model_io.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/squeezenet.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/timing.hpp"

namespace tinyinfer {

inline constexpr int kBenchSchemaVersion = 1;
inline constexpr int kDefaultWorkers = 4;
inline constexpr index_t kReportTopK = 5;

// Two-group view of a timing report. Group 1 is conv + ReLU + concat, group 2
// is pooling + softmax.
struct GroupReport {
  double group1_ms = 0.0;
  double group2_ms = 0.0;
  double quant_overhead_ms = 0.0;
  double other_ms = 0.0;
  double total_ms = 0.0;

  double sum_ms() const { return group1_ms + group2_ms + quant_overhead_ms + other_ms; }
};

enum class TimingGroup { kGroup1, kGroup2, kQuantOverhead, kOther };

inline TimingGroup GroupOf(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv:
    case LayerKind::kRelu:
    case LayerKind::kConcat:
    case LayerKind::kFire:
      return TimingGroup::kGroup1;
    case LayerKind::kMaxPool:
    case LayerKind::kGlobalAvgPool:
    case LayerKind::kSoftmax:
      return TimingGroup::kGroup2;
    case LayerKind::kQuantize:
    case LayerKind::kRequantize:
    case LayerKind::kDequantize:
      return TimingGroup::kQuantOverhead;
    case LayerKind::kScale:
      return TimingGroup::kOther;
  }
  Fail(ErrorCode::kReport,
       "unknown layer kind " + std::to_string(static_cast<int>(kind)));
}

// Per-iteration means. The total is the report's independently measured wall
// clock when present, else the sum of the entries.
inline GroupReport GroupTimings(const TimingReport& r) {
  Check(!r.entries.empty(), ErrorCode::kReport, "empty timing report");
  GroupReport g;
  for (const TimingEntry& e : r.entries) {
    const double ms = e.mean_ms();
    switch (GroupOf(e.kind)) {
      case TimingGroup::kGroup1: g.group1_ms += ms; break;
      case TimingGroup::kGroup2: g.group2_ms += ms; break;
      case TimingGroup::kQuantOverhead: g.quant_overhead_ms += ms; break;
      case TimingGroup::kOther: g.other_ms += ms; break;
    }
  }
  if (r.total.count() > 0) {
    const int iters = std::max(r.iterations, 1);
    g.total_ms = std::chrono::duration<double, std::milli>(r.total).count() / iters;
  } else {
    g.total_ms = g.sum_ms();
  }
  return g;
}

// Sum of the mean durations of conv entries only (float or integer kernels).
inline double ConvMillis(const TimingReport& r) {
  double ms = 0.0;
  for (const TimingEntry& e : r.entries)
    if (e.kind == LayerKind::kConv) ms += e.mean_ms();
  return ms;
}

enum class ReportFormat { kText, kJson };

struct BenchConfig {
  std::string weights;  // TIWF path
  std::string input;    // TIRAW001 / TIF32001 path
  int iterations = 10;
  int warmup = 2;
  int workers = kDefaultWorkers;
  bool quantized = false;
  QuantMode quant_mode = QuantMode::kRequantizeBetweenLayers;
  float attenuation = 1.0f;
  ReportFormat format = ReportFormat::kText;
  std::string out;  // empty: stdout

  // Random weights and a synthetic input instead of files.
  std::optional<std::uint64_t> random_seed;
  index_t random_classes = 1000;
};

inline void ValidateBenchConfig(const BenchConfig& cfg) {
  Check(cfg.iterations >= 1, ErrorCode::kArgument, "iterations must be >= 1");
  Check(cfg.warmup >= 0, ErrorCode::kArgument, "warmup must be >= 0");
  Check(cfg.workers >= 1, ErrorCode::kArgument, "workers must be >= 1");
  Check(std::isfinite(cfg.attenuation), ErrorCode::kArgument, "attenuation must be finite");
}

// TINYINFER_WORKERS overrides the built-in default; the flag overrides both.
inline int DefaultWorkers() {
  const char* env = std::getenv("TINYINFER_WORKERS");
  if (env == nullptr || *env == '\0') return kDefaultWorkers;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  Check(*end == '\0' && v >= 1 && v <= 1024, ErrorCode::kArgument,
        std::string("TINYINFER_WORKERS must be a positive integer, got '") + env + "'");
  return static_cast<int>(v);
}

struct TimingStats {
  std::vector<double> samples_ms;  // one total per timed iteration
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double min_ms = 0.0;
};

inline TimingStats ComputeStats(std::vector<double> samples) {
  Check(!samples.empty(), ErrorCode::kReport, "no timed iterations");
  TimingStats s;
  s.samples_ms = samples;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean_ms = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  s.median_ms = samples.size() % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  s.min_ms = samples.front();
  return s;
}

struct LayerRow {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  double mean_ms = 0.0;
};

// Timing of one graph flavour over the timed iterations.
struct ModeReport {
  bool quantized = false;
  TimingStats stats;
  std::vector<LayerRow> layers;
  GroupReport groups;
  double conv_ms = 0.0;
  std::vector<ClassScore> top5;
  bool deterministic = true;  // identical probabilities on every iteration
  std::size_t planned_bytes = 0;
};

struct BenchReport {
  BenchConfig config;
  ModeReport primary;              // the mode asked for
  std::optional<ModeReport> float_baseline;  // present for quantized runs
};

// Runs `graph` warmup + iterations times. Only the timed iterations feed the
// statistics.
inline ModeReport BenchmarkGraph(const Graph& graph, const Tensor& input, int iterations,
                                 int warmup, int workers, Clock* clock = nullptr) {
  Executor exec(graph, workers, clock);
  for (int i = 0; i < warmup; ++i) exec.Run(input);

  ModeReport m;
  m.quantized = graph.quantized();
  m.planned_bytes = exec.planned_bytes();
  TimingReport accumulated;
  std::vector<double> totals;
  std::vector<float> first_probs;
  for (int i = 0; i < iterations; ++i) {
    RunResult r = exec.Run(input);
    accumulated.Accumulate(r.report);
    totals.push_back(std::chrono::duration<double, std::milli>(r.report.total).count());
    const float* p = r.probs.data<float>();
    const auto count = static_cast<std::size_t>(r.probs.element_count());
    if (i == 0) {
      first_probs.assign(p, p + count);
      m.top5 = TopK(r.probs, std::min<index_t>(kReportTopK, r.probs.element_count()));
    } else if (std::memcmp(first_probs.data(), p, count * sizeof(float)) != 0) {
      m.deterministic = false;
    }
  }
  m.stats = ComputeStats(std::move(totals));
  for (const TimingEntry& e : accumulated.entries) m.layers.push_back({e.name, e.kind, e.mean_ms()});
  m.groups = GroupTimings(accumulated);
  m.conv_ms = ConvMillis(accumulated);
  return m;
}

// Deterministic stand-in image: a smooth gradient with seeded noise.
inline Tensor SyntheticInput(std::uint64_t seed, index_t size = kInputSize) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-8, 8);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size * size * 3));
  for (index_t y = 0; y < size; ++y) {
    for (index_t x = 0; x < size; ++x) {
      for (index_t c = 0; c < 3; ++c) {
        const int base = static_cast<int>((x * (c + 1) + y * (3 - c)) * 255 / (4 * size));
        rgb[static_cast<std::size_t>((y * size + x) * 3 + c)] =
            static_cast<std::uint8_t>(std::clamp(base + noise(rng), 0, 255));
      }
    }
  }
  return PreprocessRgb(rgb, size, Preprocessing{});
}

inline BenchReport RunBenchmark(const BenchConfig& cfg, const WeightStore& store,
                                const Tensor& input, Clock* clock = nullptr) {
  ValidateBenchConfig(cfg);
  SqueezeNetOptions opts;
  opts.quantized = cfg.quantized;
  opts.quant_mode = cfg.quant_mode;
  opts.attenuation = cfg.attenuation;
  opts.input_size = input.shape().h;
  Check(input.shape().h == input.shape().w, ErrorCode::kShape,
        "input must be square, got " + input.shape().ToString());

  BenchReport report;
  report.config = cfg;
  const Graph graph = BuildSqueezeNet(store, opts);
  report.primary = BenchmarkGraph(graph, input, cfg.iterations, cfg.warmup, cfg.workers, clock);
  if (cfg.quantized) {
    opts.quantized = false;
    const Graph fgraph = BuildSqueezeNet(store, opts);
    report.float_baseline =
        BenchmarkGraph(fgraph, input, cfg.iterations, cfg.warmup, cfg.workers, clock);
  }
  return report;
}

// Loads (or synthesizes) weights and input, then benchmarks.
inline BenchReport RunBenchmark(const BenchConfig& cfg, Clock* clock = nullptr) {
  ValidateBenchConfig(cfg);
  WeightStore store;
  Tensor input;
  if (cfg.random_seed) {
    Check(cfg.weights.empty(), ErrorCode::kArgument, "random weights and a weights file both given");
    store = RandomSqueezeNetWeights(*cfg.random_seed, cfg.random_classes);
    input = cfg.input.empty() ? SyntheticInput(*cfg.random_seed)
                              : LoadInput(cfg.input, PreprocessingFromStore(store));
    if (cfg.quantized) {
      const Tensor calib[] = {input};
      Calibrate(store, calib, input.shape().h);
    }
  } else {
    Check(!cfg.weights.empty(), ErrorCode::kArgument, "no weights file given");
    Check(!cfg.input.empty(), ErrorCode::kArgument, "no input file given");
    store = LoadWeights(cfg.weights);
    input = LoadInput(cfg.input, PreprocessingFromStore(store));
  }
  return RunBenchmark(cfg, store, input, clock);
}

// ---- Output -----------------------------------------------------------------

inline nlohmann::ordered_json GroupsJson(const GroupReport& g) {
  return {{"group1_ms", g.group1_ms},
          {"group2_ms", g.group2_ms},
          {"quant_overhead_ms", g.quant_overhead_ms},
          {"other_ms", g.other_ms},
          {"total_ms", g.total_ms}};
}

inline nlohmann::ordered_json ModeJson(const ModeReport& m) {
  nlohmann::ordered_json j;
  j["mode"] = m.quantized ? "quantized" : "float";
  j["timing"] = {{"iterations", m.stats.samples_ms.size()},
                 {"mean_ms", m.stats.mean_ms},
                 {"median_ms", m.stats.median_ms},
                 {"min_ms", m.stats.min_ms},
                 {"samples_ms", m.stats.samples_ms}};
  auto layers = nlohmann::ordered_json::array();
  for (const LayerRow& l : m.layers) {
    layers.push_back({{"name", l.name}, {"kind", LayerKindName(l.kind)}, {"mean_ms", l.mean_ms}});
  }
  j["layers"] = std::move(layers);
  j["groups"] = GroupsJson(m.groups);
  j["conv_ms"] = m.conv_ms;
  auto top = nlohmann::ordered_json::array();
  for (const ClassScore& s : m.top5) top.push_back({{"class", s.index}, {"prob", s.prob}});
  j["top5"] = std::move(top);
  j["deterministic"] = m.deterministic;
  j["peak_planned_bytes"] = m.planned_bytes;
  return j;
}

inline nlohmann::ordered_json ReportJson(const BenchReport& r) {
  const BenchConfig& c = r.config;
  nlohmann::ordered_json j;
  j["schema_version"] = kBenchSchemaVersion;
  j["config"] = {{"weights", c.random_seed ? "random:" + std::to_string(*c.random_seed) : c.weights},
                 {"input", c.input.empty() ? "synthetic" : c.input},
                 {"iterations", c.iterations},
                 {"warmup", c.warmup},
                 {"workers", c.workers},
                 {"quantized", c.quantized},
                 {"quant_mode", c.quant_mode == QuantMode::kRequantizeBetweenLayers
                                    ? "requantize"
                                    : "float_between"},
                 {"attenuation", c.attenuation}};
  j["result"] = ModeJson(r.primary);
  if (r.float_baseline) {
    const ModeReport& q = r.primary;
    const ModeReport& f = *r.float_baseline;
    j["comparison"] = {
        {"float", ModeJson(f)},
        {"conv_ms", {{"float", f.conv_ms}, {"quantized", q.conv_ms}}},
        {"total_ms", {{"float", f.groups.total_ms}, {"quantized", q.groups.total_ms}}},
        {"quant_overhead_ms", q.groups.quant_overhead_ms},
        {"conv_gain_ms", f.conv_ms - q.conv_ms},
        {"net_delta_ms", q.groups.total_ms - f.groups.total_ms}};
  }
  return j;
}

inline void WriteText(std::ostream& os, const BenchReport& r) {
  auto mode = [&os](const ModeReport& m) {
    os << std::fixed << std::setprecision(3);
    os << "mode: " << (m.quantized ? "quantized" : "float") << "\n";
    os << "time over " << m.stats.samples_ms.size() << " runs: mean " << m.stats.mean_ms
       << " ms, median " << m.stats.median_ms << " ms, min " << m.stats.min_ms << " ms\n";
    os << "\n  " << std::left << std::setw(34) << "layer" << std::setw(16) << "kind"
       << std::right << std::setw(12) << "mean ms" << "\n";
    for (const LayerRow& l : m.layers) {
      os << "  " << std::left << std::setw(34) << l.name << std::setw(16) << LayerKindName(l.kind)
         << std::right << std::setw(12) << l.mean_ms << "\n";
    }
    const GroupReport& g = m.groups;
    os << "\ngroup 1 (conv/relu/concat)  " << std::setw(12) << g.group1_ms << " ms\n"
       << "group 2 (pool/softmax)      " << std::setw(12) << g.group2_ms << " ms\n"
       << "quant overhead              " << std::setw(12) << g.quant_overhead_ms << " ms\n"
       << "other                       " << std::setw(12) << g.other_ms << " ms\n"
       << "total                       " << std::setw(12) << g.total_ms << " ms\n"
       << "conv kernels                " << std::setw(12) << m.conv_ms << " ms\n"
       << "peak planned bytes          " << std::setw(12) << m.planned_bytes << "\n"
       << "deterministic               " << std::setw(12) << (m.deterministic ? "yes" : "no")
       << "\n\ntop-" << m.top5.size() << ":\n";
    os << std::setprecision(6);
    for (const ClassScore& s : m.top5) os << "  class " << std::setw(5) << s.index << "  " << s.prob << "\n";
  };
  mode(r.primary);
  if (r.float_baseline) {
    os << "\n";
    mode(*r.float_baseline);
    const ModeReport& q = r.primary;
    const ModeReport& f = *r.float_baseline;
    os << std::setprecision(3) << "\n                 float    quantized\n"
       << "conv ms   " << std::setw(12) << f.conv_ms << std::setw(12) << q.conv_ms << "\n"
       << "total ms  " << std::setw(12) << f.groups.total_ms << std::setw(12) << q.groups.total_ms
       << "\nquant overhead " << q.groups.quant_overhead_ms << " ms, conv gain "
       << f.conv_ms - q.conv_ms << " ms, net delta " << q.groups.total_ms - f.groups.total_ms
       << " ms\n";
  }
}

inline std::string FormatReport(const BenchReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return ReportJson(r).dump(2) + "\n";
  std::ostringstream os;
  WriteText(os, r);
  return os.str();
}

// Process exit codes of the benchmark CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitConfig = 3;

inline int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kCorruption:
    case ErrorCode::kVersion:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

}  // namespace tinyinfer

#endif  // TINYINFER_BENCH_HPP_
