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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "tinyinfer.hpp"

namespace ti = tinyinfer;
namespace tt = tinyinfer::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Kernel/stride/pad combinations that occur in SqueezeNet, with reduced
// channel counts and extents so the brute-force oracle stays cheap.
ti::ConvParams SqueezeNetLikeParams(std::mt19937_64& rng) {
  switch (tt::RandomInt(rng, 0, 3)) {
    case 0: return ti::ConvParams::Square(7, 2, 0);
    case 1: return ti::ConvParams::Square(1, 1, 0);
    case 2: return ti::ConvParams::Square(3, 1, 1);
    default: {
      const ti::index_t k = tt::RandomInt(rng, 1, 5);
      return {k, tt::RandomInt(rng, 1, 5), tt::RandomInt(rng, 1, 3), tt::RandomInt(rng, 0, k - 1)};
    }
  }
}

// ---- 1 ----------------------------------------------------------------------

Outcome OperatorOracles() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  constexpr int kInstances = 100;
  ti::ThreadPool pool(3);

  double worst_conv = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const ti::ConvParams p = SqueezeNetLikeParams(rng);
    const ti::index_t cin = tt::RandomInt(rng, 1, 12);
    const ti::index_t cout = tt::RandomInt(rng, 1, 10);
    const ti::index_t h = tt::RandomInt(rng, std::max<ti::index_t>(1, p.kernel_h - 2 * p.pad), 17);
    const ti::index_t w = tt::RandomInt(rng, std::max<ti::index_t>(1, p.kernel_w - 2 * p.pad), 17);
    const ti::Tensor in = tt::RandomTensor(rng, {1, cin, h, w});
    ti::ConvWeights cw{tt::RandomTensor(rng, {cout, cin, p.kernel_h, p.kernel_w}),
                       tt::RandomVector(rng, static_cast<std::size_t>(cout))};
    ti::Tensor out = ti::Tensor::Create(ti::ConvOutputShape(in.shape(), cout, p), ti::DType::kF32);
    ti::Conv2d(in, cw, p, out, t % 2 == 0 ? nullptr : &pool);
    const auto ref = tt::NaiveConv(in, cw.weight, cw.bias, p.stride, p.pad);
    const auto got = tt::Flatten(out);
    long double diff2 = 0, ref2 = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      const long double d = std::fabs(got[i] - ref.value[i]);
      diff2 += d * d;
      ref2 += ref.value[i] * ref.value[i];
      const double elem = static_cast<double>(d / std::max<long double>(ref.abs_sum[i], 1e-30L));
      worst_conv = std::max(worst_conv, elem);
    }
    worst_conv = std::max(worst_conv, static_cast<double>(std::sqrt(diff2 / std::max(ref2, 1e-30L))));
  }
  o.Require(worst_conv <= 1e-5, "conv2d rel err " + std::to_string(worst_conv));

  for (int t = 0; t < kInstances; ++t) {
    const ti::index_t k = tt::RandomInt(rng, 1, 4);
    const ti::index_t s = tt::RandomInt(rng, 1, 3);
    const ti::index_t pad = tt::RandomInt(rng, 0, k - 1);
    const ti::Tensor in = tt::RandomTensor(rng, {1, tt::RandomInt(rng, 1, 6),
                                                 tt::RandomInt(rng, k, 15), tt::RandomInt(rng, k, 15)});
    const ti::Tensor out = ti::MaxPool2d(in, k, s, pad);
    o.Require(tt::Flatten(out) == tt::NaiveMaxPool(in, k, s, pad), "maxpool2d mismatch");
  }

  double worst_gap = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const ti::Tensor in = tt::RandomTensor(rng, {1, tt::RandomInt(rng, 1, 64),
                                                 tt::RandomInt(rng, 1, 15), tt::RandomInt(rng, 1, 15)});
    const auto got = tt::Flatten(ti::GlobalAvgPool(in));
    o.Require(got == tt::SequentialGlobalMean(in), "global_avgpool differs from sequential oracle");
    const auto ext = tt::NaiveGlobalMean(in);
    for (std::size_t i = 0; i < got.size(); ++i)
      worst_gap = std::max(worst_gap, static_cast<double>(std::fabs(got[i] - ext[i])));
  }
  o.Require(worst_gap <= 1e-4, "global_avgpool vs extended precision " + std::to_string(worst_gap));

  for (int t = 0; t < kInstances; ++t) {
    ti::Tensor in = tt::RandomTensor(rng, {1, tt::RandomInt(rng, 1, 8), 5, 7});
    const auto before = tt::Flatten(in);
    ti::Tensor out = ti::Relu(in, false);
    std::vector<float> expect;
    for (float x : before) expect.push_back(x > 0.0f ? x : 0.0f);
    o.Require(tt::Flatten(out) == expect, "relu mismatch");
  }

  double worst_softmax = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const ti::index_t c = tt::RandomInt(rng, 1, 1000);
    const ti::Tensor logits = tt::RandomTensor(rng, {1, c, 1, 1}, -20.0f, 20.0f);
    const auto got = tt::Flatten(ti::Softmax(logits));
    const auto ref = tt::NaiveSoftmax(tt::Flatten(logits));
    for (std::size_t i = 0; i < got.size(); ++i)
      worst_softmax = std::max(worst_softmax, static_cast<double>(std::fabs(got[i] - ref[i])));
  }
  o.Require(worst_softmax <= 1e-6, "softmax abs err " + std::to_string(worst_softmax));

  for (int t = 0; t < kInstances; ++t) {
    const ti::index_t c = tt::RandomInt(rng, 1, 1000);
    ti::Tensor probs = tt::RandomTensor(rng, {1, c, 1, 1}, 0.0f, 1.0f);
    // Coarse values force ties.
    for (ti::index_t i = 0; i < c; ++i)
      probs.Set<float>(0, i, 0, 0, std::round(probs.Get<float>(0, i, 0, 0) * 16.0f) / 16.0f);
    const ti::index_t k = tt::RandomInt(rng, 1, std::min<ti::index_t>(c, 10));
    const auto got = ti::TopK(probs, k);
    const auto ref = tt::NaiveTopK(tt::Flatten(probs), k);
    bool same = got.size() == ref.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].index == ref[i].first && got[i].prob == ref[i].second;
    o.Require(same, "top_k mismatch");
  }

  const double secs = Seconds(start);
  o.Require(secs < 60.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "600 instances; conv rel %.2e, avgpool abs %.2e, softmax abs %.2e; %.1f s",
                  worst_conv, worst_gap, worst_softmax, secs);
    o.detail = buf;
  }
  return o;
}

// ---- 2 ----------------------------------------------------------------------

ti::Tensor CopyBasedFire(const ti::Tensor& input, const ti::FireConfig& cfg,
                         const ti::FireWeights& w) {
  ti::Tensor sq = ti::Conv2d(input, w.squeeze, ti::kSqueezeParams);
  ti::ReluInPlace(sq);
  ti::Tensor e1 = ti::Conv2d(sq, w.expand1, ti::kExpand1Params);
  ti::ReluInPlace(e1);
  ti::Tensor e3 = ti::Conv2d(sq, w.expand3, ti::kExpand3Params);
  ti::ReluInPlace(e3);
  const ti::Shape is = input.shape();
  ti::Tensor cat = ti::Tensor::Create({is.n, cfg.out_channels(), is.h, is.w}, ti::DType::kF32);
  for (ti::index_t c = 0; c < cfg.expand1; ++c) {
    const auto src = e1.Plane<const float>(0, c);
    std::copy(src.begin(), src.end(), cat.Plane<float>(0, c).begin());
  }
  for (ti::index_t c = 0; c < cfg.expand3; ++c) {
    const auto src = e3.Plane<const float>(0, c);
    std::copy(src.begin(), src.end(), cat.Plane<float>(0, cfg.expand1 + c).begin());
  }
  return cat;
}

Outcome FireEquivalence() {
  Outcome o;
  std::mt19937_64 rng(202);
  auto& tally = ti::AllocationTally::Default();
  std::int64_t zero_copy_allocs = 0, copy_allocs = 0;
  for (int t = 0; t < 50; ++t) {
    const ti::FireConfig cfg{tt::RandomInt(rng, 1, 16), tt::RandomInt(rng, 1, 24),
                             tt::RandomInt(rng, 1, 24)};
    const ti::index_t cin = tt::RandomInt(rng, 1, 32);
    const ti::index_t hw = tt::RandomInt(rng, 1, 13);
    const ti::Tensor in = tt::RandomTensor(rng, {1, cin, hw, hw});
    auto make = [&](ti::index_t co, ti::index_t ci, ti::index_t k) {
      return ti::ConvWeights{tt::RandomTensor(rng, {co, ci, k, k}, -0.5f, 0.5f),
                             tt::RandomVector(rng, static_cast<std::size_t>(co), -0.1f, 0.1f)};
    };
    const ti::FireWeights w{make(cfg.squeeze, cin, 1), make(cfg.expand1, cfg.squeeze, 1),
                            make(cfg.expand3, cfg.squeeze, 3)};
    std::int64_t before = tally.count();
    const ti::Tensor zero_copy = ti::Fire(in, cfg, w);
    const std::int64_t a = tally.count() - before;
    before = tally.count();
    const ti::Tensor copied = CopyBasedFire(in, cfg, w);
    const std::int64_t b = tally.count() - before;
    zero_copy_allocs += a;
    copy_allocs += b;
    o.Require(tt::BitEqual(zero_copy, copied), "config " + std::to_string(t) + " not bit-exact");
    o.Require(a < b, "config " + std::to_string(t) + " allocations " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
  if (o.pass) {
    o.detail = "50 configs bit-exact; allocations " + std::to_string(zero_copy_allocs) + " vs " +
               std::to_string(copy_allocs) + " (copy-based)";
  }
  return o;
}

// ---- 3 ----------------------------------------------------------------------

std::vector<float> ProbsOf(const ti::RunResult& r) { return tt::Flatten(r.probs); }

Outcome Determinism() {
  Outcome o;
  ti::WeightStore store = ti::RandomSqueezeNetWeights(303);
  const ti::Tensor input = ti::SyntheticInput(303);
  const ti::Tensor calib[] = {input};
  ti::Calibrate(store, calib);
  auto& tally = ti::AllocationTally::Default();
  std::int64_t run_allocs = 0;
  for (bool quantized : {false, true}) {
    ti::SqueezeNetOptions opts;
    opts.quantized = quantized;
    const ti::Graph g = ti::BuildSqueezeNet(store, opts);
    std::vector<float> reference;
    for (int workers : {1, 2, 4}) {
      ti::Executor exec(g, workers);
      for (int rep = 0; rep < 2; ++rep) {
        const std::int64_t before = tally.count();
        const ti::RunResult r = exec.Run(input);
        run_allocs += tally.count() - before;
        const auto probs = ProbsOf(r);
        if (reference.empty()) {
          reference = probs;
          double sum = 0;
          for (float p : probs) sum += p;
          o.Require(std::fabs(sum - 1.0) <= 1e-5, "probabilities sum to " + std::to_string(sum));
        }
        o.Require(std::equal(probs.begin(), probs.end(), reference.begin(), reference.end(),
                             [](float x, float y) {
                               return std::bit_cast<std::uint32_t>(x) ==
                                      std::bit_cast<std::uint32_t>(y);
                             }),
                  std::string(quantized ? "quantized" : "float") + " output differs at workers=" +
                      std::to_string(workers) + " rep=" + std::to_string(rep));
      }
    }
  }
  o.Require(run_allocs == 0, std::to_string(run_allocs) + " tensor allocations during runs");
  if (o.pass) o.detail = "float and quantized graphs bit-identical over workers {1,2,4} x 2 runs; 0 allocations";
  return o;
}

// ---- 4 ----------------------------------------------------------------------

Outcome QuantizationBounds() {
  Outcome o;
  std::mt19937_64 rng(404);
  constexpr int kInstances = 100;

  double worst_round_trip = 0.0;  // error minus its bound
  for (int t = 0; t < kInstances; ++t) {
    const float lo = std::uniform_real_distribution<float>(-1.9f, 0.5f)(rng);
    const float hi = lo + std::uniform_real_distribution<float>(0.01f, 1.9f - std::max(lo, 0.0f))(rng);
    const ti::Tensor x = tt::RandomTensor(rng, {1, 4, 9, 9}, lo, hi);
    const ti::QuantParams p = ti::ChooseQuantParams(x);
    const ti::Tensor back = ti::DequantizeTensor(ti::QuantizeTensor(x, p));
    const double rep_lo = static_cast<double>(p.scale) * (0 - p.zero_point);
    const double rep_hi = static_cast<double>(p.scale) * (255 - p.zero_point);
    const auto xs = tt::Flatten(x);
    const auto bs = tt::Flatten(back);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] < rep_lo || xs[i] > rep_hi) continue;
      const double err = std::fabs(static_cast<double>(bs[i]) - xs[i]);
      worst_round_trip = std::max(worst_round_trip, err - (p.scale / 2.0 + 1e-7));
    }
  }
  o.Require(worst_round_trip <= 0.0, "round trip exceeds scale/2 + 1e-7 by " +
                                         std::to_string(worst_round_trip));

  bool accumulators_exact = true;
  double worst_ratio = 0.0;      // generic inputs, against the analytic bound
  double worst_grid_ratio = 0.0;  // on-grid inputs, against 2*s_in*s_w*C*kh*kw
  for (int t = 0; t < kInstances; ++t) {
    const ti::ConvParams p = SqueezeNetLikeParams(rng);
    const ti::index_t cin = tt::RandomInt(rng, 1, 12);
    const ti::index_t cout = tt::RandomInt(rng, 1, 8);
    const ti::index_t h = tt::RandomInt(rng, std::max<ti::index_t>(1, p.kernel_h - 2 * p.pad), 13);
    const ti::index_t w = tt::RandomInt(rng, std::max<ti::index_t>(1, p.kernel_w - 2 * p.pad), 13);
    const ti::Tensor x = tt::RandomTensor(rng, {1, cin, h, w}, -1.0f, 1.0f);
    const ti::Tensor wt = tt::RandomTensor(rng, {cout, cin, p.kernel_h, p.kernel_w}, -0.5f, 0.5f);
    const std::vector<float> bias = tt::RandomVector(rng, static_cast<std::size_t>(cout), -0.2f, 0.2f);

    const ti::QuantParams in_q = ti::ChooseQuantParams(x);
    const ti::QTensor qx = ti::QuantizeTensor(x, in_q);
    const ti::QTensor qw = ti::QuantizeTensor(wt, ti::ChooseQuantParams(wt));
    const double s_in = in_q.scale, s_w = qw.params.scale, acc_scale = s_in * s_w;
    const auto qbias = ti::QuantizeBias(bias, acc_scale);
    const ti::Shape os = ti::ConvOutputShape(x.shape(), cout, p);
    ti::Tensor acc = ti::Tensor::Create(os, ti::DType::kI32);
    ti::QConv2dAccumulate(qx.tensor, in_q, qw, qbias, p, acc);

    const auto oracle = tt::NaiveQConv(qx.tensor, in_q.zero_point, qw.tensor,
                                       qw.params.zero_point, qbias, p.stride, p.pad);
    std::size_t i = 0;
    for (ti::index_t o_ = 0; o_ < os.c; ++o_)
      for (ti::index_t y = 0; y < os.h; ++y)
        for (ti::index_t xx = 0; xx < os.w; ++xx, ++i)
          accumulators_exact = accumulators_exact && acc.Get<std::int32_t>(0, o_, y, xx) == oracle[i];

    ti::Tensor deq = ti::Tensor::Create(os, ti::DType::kF32);
    ti::DequantizeAccumulatorsInto(acc, acc_scale, deq);
    const auto got = tt::Flatten(deq);

    // Generic inputs. With x^ = x + dx, w^ = w + dw, |dx| <= s_in/2 and
    // |dw| <= s_w/2, each valid tap errs by at most
    //   |x| s_w/2 + |w| s_in/2 + s_in s_w/4,
    // the bias by acc_scale/2. The last term allows for f32 rounding of the
    // scales and of the final product.
    const auto ref = tt::NaiveConv(x, wt, bias, p.stride, p.pad);
    auto abs_of = [](const ti::Tensor& src) {
      ti::Tensor a = src.Clone();
      for (ti::index_t n = 0; n < a.shape().n; ++n)
        for (ti::index_t c = 0; c < a.shape().c; ++c)
          for (float& v : a.Plane<float>(n, c)) v = std::fabs(v);
      return a;
    };
    auto ones_like = [](const ti::Shape& s) {
      ti::Tensor ones = ti::Tensor::Create(s, ti::DType::kF32);
      ones.Fill(1.0f);
      return ones;
    };
    const std::vector<float> zero_bias(static_cast<std::size_t>(cout), 0.0f);
    const auto sum_abs_x = tt::NaiveConv(abs_of(x), ones_like(wt.shape()), zero_bias, p.stride, p.pad);
    const auto sum_abs_w = tt::NaiveConv(ones_like(x.shape()), abs_of(wt), zero_bias, p.stride, p.pad);
    const auto taps = tt::NaiveConv(ones_like(x.shape()), ones_like(wt.shape()), zero_bias, p.stride, p.pad);
    for (std::size_t k = 0; k < got.size(); ++k) {
      const long double bound = sum_abs_x.value[k] * (s_w / 2) + sum_abs_w.value[k] * (s_in / 2) +
                                taps.value[k] * (s_in * s_w / 4) + acc_scale / 2 +
                                1e-6L * (1 + ref.abs_sum[k]);
      worst_ratio = std::max(worst_ratio,
                             static_cast<double>(std::fabs(got[k] - ref.value[k]) / bound));
    }

    // On-grid inputs: the float conv sees exactly the dequantized operands.
    const ti::Tensor x_grid = ti::DequantizeTensor(qx);
    const ti::Tensor w_grid = ti::DequantizeTensor(qw);
    const auto grid_ref = tt::NaiveConv(x_grid, w_grid, bias, p.stride, p.pad);
    const double grid_bound = 2.0 * s_in * static_cast<double>(cin * p.kernel_h * p.kernel_w) * s_w;
    for (std::size_t k = 0; k < got.size(); ++k) {
      worst_grid_ratio = std::max(
          worst_grid_ratio, static_cast<double>(std::fabs(got[k] - grid_ref.value[k])) / grid_bound);
    }
  }
  o.Require(accumulators_exact, "qconv2d accumulators differ from the int64 oracle");
  o.Require(worst_ratio <= 1.0, "dequantized qconv exceeds analytic bound (ratio " +
                                    std::to_string(worst_ratio) + ")");
  o.Require(worst_grid_ratio <= 1.0, "on-grid qconv exceeds 2*s_in*C*kh*kw*s_w (ratio " +
                                         std::to_string(worst_grid_ratio) + ")");
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "round trip within bound; 100 qconv instances exact; worst error/bound %.3f "
                  "(generic), %.3f (on-grid)",
                  worst_ratio, worst_grid_ratio);
    o.detail = buf;
  }
  return o;
}

// ---- 5 and 6 ----------------------------------------------------------------

bool Additive(const ti::GroupReport& g, double tolerance) {
  return std::fabs(g.sum_ms() - g.total_ms) <= tolerance * g.total_ms;
}

Outcome GroupedReport() {
  Outcome o;
  const auto start = Clock::now();
  ti::BenchConfig cfg;
  cfg.random_seed = 505;
  cfg.iterations = 3;
  cfg.warmup = 1;
  cfg.workers = 1;
  const ti::BenchReport r = ti::RunBenchmark(cfg);
  const ti::GroupReport& g = r.primary.groups;
  o.Require(Additive(g, 0.01), "groups sum " + std::to_string(g.sum_ms()) + " ms vs total " +
                                   std::to_string(g.total_ms) + " ms");
  o.Require(g.group1_ms > g.group2_ms, "group1 " + std::to_string(g.group1_ms) +
                                           " ms not above group2 " + std::to_string(g.group2_ms));
  const double secs = Seconds(start);
  o.Require(secs < 120.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "group1 %.1f ms, group2 %.1f ms, other %.3f ms, total %.1f ms (gap %.3f%%); %.1f s",
                  g.group1_ms, g.group2_ms, g.other_ms, g.total_ms,
                  100.0 * std::fabs(g.sum_ms() - g.total_ms) / g.total_ms, secs);
    o.detail = buf;
  }
  return o;
}

Outcome QuantOverhead() {
  Outcome o;
  ti::BenchConfig cfg;
  cfg.random_seed = 606;
  cfg.iterations = 2;
  cfg.warmup = 1;
  cfg.workers = 1;
  cfg.quantized = true;
  const ti::BenchReport r = ti::RunBenchmark(cfg);
  // Work from the serialized report: everything must be recoverable from it.
  const auto j = nlohmann::json::parse(ti::ReportJson(r).dump());
  double quantize = 0, requantize = 0, dequantize = 0, qconv = 0, fconv = 0;
  for (const auto& l : j["result"]["layers"]) {
    const std::string kind = l["kind"];
    const double ms = l["mean_ms"];
    if (kind == "quantize") quantize += ms;
    if (kind == "requantize") requantize += ms;
    if (kind == "dequantize") dequantize += ms;
    if (kind == "conv") qconv += ms;
  }
  for (const auto& l : j["comparison"]["float"]["layers"]) {
    if (l["kind"] == "conv") fconv += l["mean_ms"].get<double>();
    o.Require(l["kind"] != "quantize" && l["kind"] != "requantize" && l["kind"] != "dequantize",
              "float baseline contains conversion steps");
  }
  o.Require(quantize > 0 && requantize > 0 && dequantize > 0,
            "missing nonzero quantize/requantize/dequantize line items");
  const auto& cmp = j["comparison"];
  o.Require(std::fabs(cmp["conv_ms"]["quantized"].get<double>() - qconv) <= 1e-9 * (1 + qconv) &&
                std::fabs(cmp["conv_ms"]["float"].get<double>() - fconv) <= 1e-9 * (1 + fconv),
            "conv times not recoverable from per-layer rows");
  o.Require(cmp["total_ms"]["float"].get<double>() > 0 && cmp["total_ms"]["quantized"].get<double>() > 0,
            "totals missing");
  o.Require(std::fabs(cmp["quant_overhead_ms"].get<double>() - (quantize + requantize + dequantize)) <=
                1e-9 * (1 + quantize + requantize + dequantize),
            "quant overhead is not the sum of its line items");
  o.Require(Additive(r.primary.groups, 0.01) && Additive(r.float_baseline->groups, 0.01),
            "group additivity fails in the comparison run");
  if (o.pass) {
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "quantize %.2f + requantize %.2f + dequantize %.2f ms; conv %.1f (float) vs %.1f "
                  "(quantized) ms; total %.1f vs %.1f ms",
                  quantize, requantize, dequantize, fconv, qconv,
                  cmp["total_ms"]["float"].get<double>(), cmp["total_ms"]["quantized"].get<double>());
    o.detail = buf;
  }
  return o;
}

// ---- 7 ----------------------------------------------------------------------

ti::WeightStore RandomStore(std::mt19937_64& rng) {
  ti::WeightStore store;
  const int entries = static_cast<int>(tt::RandomInt(rng, 0, 6));
  for (int e = 0; e < entries; ++e) {
    ti::WeightEntry w;
    w.name = "entry" + std::to_string(e) + std::string(static_cast<std::size_t>(tt::RandomInt(rng, 0, 5)), 'x');
    w.dtype = static_cast<ti::DType>(tt::RandomInt(rng, 0, 2));
    const auto rank = static_cast<std::size_t>(tt::RandomInt(rng, 1, 4));
    std::uint64_t count = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      w.dims.push_back(static_cast<std::uint32_t>(tt::RandomInt(rng, 0, 5)));
      count *= w.dims.back();
    }
    w.data.resize(count * ti::DTypeSize(w.dtype));
    for (auto& b : w.data) b = static_cast<std::uint8_t>(tt::RandomInt(rng, 0, 255));
    if (w.dtype == ti::DType::kU8 && tt::RandomInt(rng, 0, 1) == 1) {
      w.quant = ti::QuantParams{0.5f + static_cast<float>(tt::RandomInt(rng, 0, 9)),
                                static_cast<std::int32_t>(tt::RandomInt(rng, 0, 255))};
    }
    store.Add(std::move(w));
  }
  return store;
}

Outcome WeightFormat() {
  Outcome o;
  std::mt19937_64 rng(707);
  int stores = 0;
  for (int t = 0; t < 100; ++t, ++stores) {
    const ti::WeightStore store = RandomStore(rng);
    const auto bytes = ti::SerializeWeights(store);
    const ti::WeightStore back = ti::ParseWeights(bytes);
    o.Require(back == store, "random store " + std::to_string(t) + " not equal after load");
    o.Require(ti::SerializeWeights(back) == bytes, "random store " + std::to_string(t) +
                                                       " not byte-identical after re-save");
  }
  ti::WeightStore net = ti::RandomSqueezeNetWeights(708, 10);
  const ti::Tensor calib[] = {ti::SyntheticInput(708)};
  ti::Calibrate(net, calib);
  const auto net_bytes = ti::SerializeWeights(net);
  o.Require(ti::SerializeWeights(ti::ParseWeights(net_bytes)) == net_bytes,
            "SqueezeNet store not byte-identical after round trip");

  int corruptions = 0, rejected = 0;
  for (std::size_t pos = 0; pos < ti::kTiwfHeaderBytes; ++pos) {
    for (int v = 0; v < 256; ++v) {
      if (v == net_bytes[pos]) continue;
      auto bad = net_bytes;
      bad[pos] = static_cast<std::uint8_t>(v);
      ++corruptions;
      try {
        ti::ParseWeights(bad);
      } catch (const ti::Error&) {
        ++rejected;
      }
    }
  }
  o.Require(rejected == corruptions, std::to_string(corruptions - rejected) + " of " +
                                         std::to_string(corruptions) +
                                         " header corruptions accepted");
  if (o.pass) {
    o.detail = std::to_string(stores) + " random stores + SqueezeNet store byte-identical; " +
               std::to_string(rejected) + "/" + std::to_string(corruptions) +
               " header corruptions rejected";
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "operator oracles", OperatorOracles},
      {2, "zero-copy fire", FireEquivalence},
      {3, "determinism and threading", Determinism},
      {4, "quantization bounds", QuantizationBounds},
      {5, "grouped report", GroupedReport},
      {6, "quantization overhead", QuantOverhead},
      {7, "weight file round trip", WeightFormat},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
