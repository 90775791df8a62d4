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

// Layer graph and executor.
//
// GraphBuilder lowers declarative layers (conv, pool, fire, ...) into a flat
// list of steps, each reading one operand and writing another. Operands live
// in a fixed set of planned buffers:
//
//   arena_a / arena_b  ping-pong activations between layers
//   squeeze            fire squeeze output
//   accum              i32 accumulators of integer convolutions
//   qscratch           u8 staging of float activations (float-between mode)
//   output             the probability vector
//
// A fire module's expand branches write disjoint channel slices of one arena
// operand, so concatenation is free. The Executor allocates the buffers once;
// Run() performs no tensor allocation.

#ifndef TINYINFER_GRAPH_HPP_
#define TINYINFER_GRAPH_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tinyinfer/error.hpp"
#include "tinyinfer/fire.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/quant.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/thread_pool.hpp"
#include "tinyinfer/timing.hpp"

namespace tinyinfer {

enum class QuantMode {
  // u8 activations end to end; integer convs are chained through Requantize.
  kRequantizeBetweenLayers,
  // Float activations between layers; every integer conv is wrapped in
  // Quantize ... Dequantize.
  kFloatBetweenLayers,
};

struct GraphOptions {
  bool quantized = false;
  QuantMode quant_mode = QuantMode::kRequantizeBetweenLayers;
  // Activation params keyed by "input", conv names, "<fire>/squeeze1x1" and
  // "<fire>" (the concatenated expand output).
  std::map<std::string, QuantParams> calibration;
};

enum BufferId : int {
  kGraphInput = -1,
  kArenaA = 0,
  kArenaB,
  kSqueezeBuffer,
  kAccumBuffer,
  kQuantScratch,
  kOutputBuffer,
  kBufferCount,
};

inline constexpr std::array<const char*, kBufferCount> kBufferNames = {
    "arena_a", "arena_b", "squeeze", "accum", "qscratch", "output"};

// Where a step reads or writes: a buffer viewed with `shape`, optionally as
// the channel slice [channel_offset, channel_offset + shape.c) of a
// `parent_channels`-channel tensor.
struct Operand {
  int buffer = kGraphInput;
  Shape shape{};
  DType dtype = DType::kF32;
  index_t channel_offset = 0;
  index_t parent_channels = 0;  // 0: the operand is the whole buffer view
};

namespace step {
struct Conv { std::size_t layer; };
struct QConv { std::size_t layer; };
struct Relu {};
struct ReluQuantized { std::int32_t zero_point; };
struct MaxPool { PoolParams params; };
struct GlobalAvgPool {};
struct Scale { float coeff; };
struct Softmax {};
struct Quantize { QuantParams params; };
struct Requantize { double multiplier; QuantParams out_params; };
struct Dequantize { QuantParams params; };
struct DequantizeAccumulators { double acc_scale; };
struct Concat {};
}  // namespace step

using StepOp = std::variant<step::Conv, step::QConv, step::Relu, step::ReluQuantized,
                            step::MaxPool, step::GlobalAvgPool, step::Scale, step::Softmax,
                            step::Quantize, step::Requantize, step::Dequantize,
                            step::DequantizeAccumulators, step::Concat>;

struct Step {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  std::string layer;  // top-level layer this step belongs to
  StepOp op;
  Operand in;
  Operand out;
  std::string calib_key;  // set when `out` is a calibration point
};

using LayerParams =
    std::variant<std::monostate, ConvParams, PoolParams, FireConfig, float, QuantParams>;

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  std::string name;
  LayerParams params;
  bool integer = false;  // integer convolution
  Shape output_shape{};
  DType output_dtype = DType::kF32;
};

struct ConvLayer {
  std::string name;
  ConvWeights weights;
  ConvParams params;
};

struct QConvLayer {
  std::string name;
  QTensor weights;
  std::vector<std::int32_t> bias;
  ConvParams params;
  QuantParams input_params;

  double acc_scale() const { return static_cast<double>(input_params.scale) * weights.params.scale; }
};

// Immutable after GraphBuilder::Finish(); safe to share across threads.
class Graph {
 public:
  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<Step>& steps() const { return steps_; }
  const std::vector<ConvLayer>& conv_layers() const { return convs_; }
  const std::vector<QConvLayer>& qconv_layers() const { return qconvs_; }
  const std::array<std::size_t, kBufferCount>& buffer_bytes() const { return buffer_bytes_; }
  const Operand& output() const { return output_; }
  bool quantized() const { return quantized_; }

  std::size_t planned_bytes() const {
    std::size_t total = 0;
    for (std::size_t b : buffer_bytes_) total += b;
    return total;
  }

  const LayerSpec* FindLayer(const std::string& name) const {
    for (const auto& l : layers_)
      if (l.name == name) return &l;
    return nullptr;
  }

 private:
  friend class GraphBuilder;

  Shape input_shape_{};
  std::vector<LayerSpec> layers_;
  std::vector<Step> steps_;
  std::vector<ConvLayer> convs_;
  std::vector<QConvLayer> qconvs_;
  std::array<std::size_t, kBufferCount> buffer_bytes_{};
  Operand output_{};
  bool quantized_ = false;
};

struct ConvOptions {
  bool relu = true;
  // In quantized graphs, dequantize the accumulators straight to f32 instead
  // of requantizing (used by the last conv before float-only layers).
  bool float_output = false;
};

class GraphBuilder {
 public:
  GraphBuilder(const Shape& input_shape, GraphOptions options)
      : options_(std::move(options)) {
    ValidateShape(input_shape);
    graph_.input_shape_ = input_shape;
    graph_.quantized_ = options_.quantized;
    cur_ = {kGraphInput, input_shape, DType::kF32, 0, 0};
  }

  GraphBuilder& Conv(const std::string& name, ConvWeights w, const ConvParams& p,
                     ConvOptions copts = {}) {
    Claim(name);
    if (w.weight.shape().c != cur_.shape.c || w.weight.shape().h != p.kernel_h ||
        w.weight.shape().w != p.kernel_w ||
        w.bias.size() != static_cast<std::size_t>(w.weight.shape().n)) {
      Fail(ErrorCode::kBuild, "layer '" + name + "': weight " + w.weight.shape().ToString() +
                                  " does not fit input " + cur_.shape.ToString());
    }
    const Shape os = OutShape(name, [&] {
      return ConvOutputShape(cur_.shape, w.out_channels(), p);
    });
    if (!options_.quantized) {
      const Operand out = Place(NextArena(), os, DType::kF32);
      AddConvStep(name, name, std::move(w), p, cur_, out);
      PushLayer({LayerKind::kConv, name, p, false, os, DType::kF32});
      cur_ = out;
    } else if (options_.quant_mode == QuantMode::kRequantizeBetweenLayers) {
      QuantizeCurrentInPlace(name);
      const QuantParams in_q = *cur_q_;
      const Operand acc = Place(kAccumBuffer, os, DType::kI32);
      const std::size_t li = AddQConvStep(name, name, w, p, in_q, cur_, acc);
      PushLayer({LayerKind::kConv, name, p, true, os, DType::kI32});
      if (copts.float_output) {
        const Operand out = Place(NextArena(), os, DType::kF32);
        AddStep({name + "/dequantize", LayerKind::kDequantize, name,
                 step::DequantizeAccumulators{graph_.qconvs_[li].acc_scale()}, acc, out, ""});
        PushLayer({LayerKind::kDequantize, name + "/dequantize", {}, false, os, DType::kF32});
        cur_ = out;
        cur_q_.reset();
      } else {
        const QuantParams out_q = Calibration(name);
        const Operand out = Place(NextArena(), os, DType::kU8);
        AddStep({name + "/requantize", LayerKind::kRequantize, name,
                 step::Requantize{RequantizeMultiplier(in_q, graph_.qconvs_[li].weights.params, out_q),
                                  out_q},
                 acc, out, ""});
        PushLayer({LayerKind::kRequantize, name + "/requantize", out_q, false, os, DType::kU8});
        cur_ = out;
        cur_q_ = out_q;
      }
    } else {
      const QuantParams in_q = Calibration(cur_key_);
      const Operand staged = Place(kQuantScratch, cur_.shape, DType::kU8);
      AddStep({name + "/quantize", LayerKind::kQuantize, name, step::Quantize{in_q}, cur_,
               staged, ""});
      PushLayer({LayerKind::kQuantize, name + "/quantize", in_q, false, cur_.shape, DType::kU8});
      const Operand acc = Place(kAccumBuffer, os, DType::kI32);
      const std::size_t li = AddQConvStep(name, name, w, p, in_q, staged, acc);
      PushLayer({LayerKind::kConv, name, p, true, os, DType::kI32});
      const Operand out = Place(NextArena(), os, DType::kF32);
      AddStep({name + "/dequantize", LayerKind::kDequantize, name,
               step::DequantizeAccumulators{graph_.qconvs_[li].acc_scale()}, acc, out, ""});
      PushLayer({LayerKind::kDequantize, name + "/dequantize", {}, false, os, DType::kF32});
      cur_ = out;
    }
    cur_key_ = name;
    if (copts.relu) AddRelu(name + "/relu", name, cur_, name);
    steps().back().calib_key = name;
    return *this;
  }

  GraphBuilder& MaxPool(const std::string& name, const PoolParams& p) {
    Claim(name);
    const Shape os = OutShape(name, [&] { return PoolOutputShape(cur_.shape, p); });
    const Operand out = Place(NextArena(), os, cur_.dtype);
    AddStep({name, LayerKind::kMaxPool, name, step::MaxPool{p}, cur_, out, ""});
    PushLayer({LayerKind::kMaxPool, name, p, false, os, cur_.dtype});
    cur_ = out;
    return *this;
  }

  GraphBuilder& Fire(const std::string& name, const FireConfig& cfg, FireWeights w) {
    Claim(name);
    try {
      ValidateFire(cur_.shape.c, cfg, w);
    } catch (const Error& e) {
      Fail(ErrorCode::kBuild, "layer '" + name + "': " + e.what());
    }
    const std::string sq_name = name + "/squeeze1x1";
    const std::string e1_name = name + "/expand1x1";
    const std::string e3_name = name + "/expand3x3";
    for (const auto& n : {sq_name, e1_name, e3_name}) Claim(n);

    const bool quant = options_.quantized;
    const bool requant = quant && options_.quant_mode == QuantMode::kRequantizeBetweenLayers;
    if (requant) QuantizeCurrentInPlace(name);
    const DType act = requant ? DType::kU8 : DType::kF32;

    const Shape is = cur_.shape;
    const Shape sq_shape{is.n, cfg.squeeze, is.h, is.w};
    const Shape os = FireOutputShape(is, cfg);
    const Operand squeeze = Place(kSqueezeBuffer, sq_shape, act);
    const Operand out = Place(NextArena(), os, act);
    Operand left = out;
    left.shape.c = cfg.expand1;
    left.parent_channels = os.c;
    Operand right = left;
    right.shape.c = cfg.expand3;
    right.channel_offset = cfg.expand1;

    if (!quant) {
      AddConvStep(sq_name, name, std::move(w.squeeze), kSqueezeParams, cur_, squeeze);
      AddRelu(sq_name + "/relu", name, squeeze, sq_name);
      AddConvStep(e1_name, name, std::move(w.expand1), kExpand1Params, squeeze, left);
      AddRelu(e1_name + "/relu", name, left, name);
      AddConvStep(e3_name, name, std::move(w.expand3), kExpand3Params, squeeze, right);
      AddRelu(e3_name + "/relu", name, right, name);
    } else if (requant) {
      const QuantParams in_q = *cur_q_;
      const QuantParams sq_q = Calibration(sq_name);
      const QuantParams out_q = Calibration(name);
      QConvRequant(sq_name, name, w.squeeze, kSqueezeParams, in_q, cur_, squeeze, sq_q);
      AddRelu(sq_name + "/relu", name, squeeze, sq_name, sq_q.zero_point);
      QConvRequant(e1_name, name, w.expand1, kExpand1Params, sq_q, squeeze, left, out_q);
      AddRelu(e1_name + "/relu", name, left, name, out_q.zero_point);
      QConvRequant(e3_name, name, w.expand3, kExpand3Params, sq_q, squeeze, right, out_q);
      AddRelu(e3_name + "/relu", name, right, name, out_q.zero_point);
      cur_q_ = out_q;
    } else {
      const QuantParams in_q = Calibration(cur_key_);
      const QuantParams sq_q = Calibration(sq_name);
      const Operand staged_in = Place(kQuantScratch, is, DType::kU8);
      AddStep({sq_name + "/quantize", LayerKind::kQuantize, name, step::Quantize{in_q}, cur_,
               staged_in, ""});
      QConvDequant(sq_name, name, w.squeeze, kSqueezeParams, in_q, staged_in, squeeze);
      AddRelu(sq_name + "/relu", name, squeeze, sq_name);
      const Operand staged_sq = Place(kQuantScratch, sq_shape, DType::kU8);
      AddStep({name + "/expand/quantize", LayerKind::kQuantize, name, step::Quantize{sq_q},
               squeeze, staged_sq, ""});
      QConvDequant(e1_name, name, w.expand1, kExpand1Params, sq_q, staged_sq, left);
      AddRelu(e1_name + "/relu", name, left, name);
      QConvDequant(e3_name, name, w.expand3, kExpand3Params, sq_q, staged_sq, right);
      AddRelu(e3_name + "/relu", name, right, name);
    }
    AddStep({name + "/concat", LayerKind::kConcat, name, step::Concat{}, out, out, ""});
    PushLayer({LayerKind::kFire, name, cfg, quant, os, act});
    cur_ = out;
    cur_key_ = name;
    return *this;
  }

  GraphBuilder& GlobalAvgPool(const std::string& name) {
    Claim(name);
    DequantizeCurrent(name);
    const Shape os{cur_.shape.n, cur_.shape.c, 1, 1};
    const Operand out = Place(NextArena(), os, DType::kF32);
    AddStep({name, LayerKind::kGlobalAvgPool, name, step::GlobalAvgPool{}, cur_, out, ""});
    PushLayer({LayerKind::kGlobalAvgPool, name, {}, false, os, DType::kF32});
    cur_ = out;
    return *this;
  }

  GraphBuilder& Scale(const std::string& name, float coeff) {
    Claim(name);
    Check(std::isfinite(coeff), ErrorCode::kBuild, "layer '" + name + "': non-finite scale");
    DequantizeCurrent(name);
    // In place, except on the caller's input, which is read-only.
    const Operand out =
        cur_.buffer == kGraphInput ? Place(NextArena(), cur_.shape, DType::kF32) : cur_;
    AddStep({name, LayerKind::kScale, name, step::Scale{coeff}, cur_, out, ""});
    PushLayer({LayerKind::kScale, name, coeff, false, cur_.shape, DType::kF32});
    cur_ = out;
    return *this;
  }

  GraphBuilder& Softmax(const std::string& name) {
    Claim(name);
    DequantizeCurrent(name);
    Check(cur_.shape.h == 1 && cur_.shape.w == 1, ErrorCode::kBuild,
          "layer '" + name + "': softmax needs (n, c, 1, 1), got " + cur_.shape.ToString());
    const Operand out = Place(kOutputBuffer, cur_.shape, DType::kF32);
    AddStep({name, LayerKind::kSoftmax, name, step::Softmax{}, cur_, out, ""});
    PushLayer({LayerKind::kSoftmax, name, {}, false, cur_.shape, DType::kF32});
    cur_ = out;
    return *this;
  }

  Graph Finish() {
    Check(!graph_.steps_.empty(), ErrorCode::kBuild, "graph has no layers");
    Check(cur_.dtype == DType::kF32, ErrorCode::kBuild, "graph output must be f32");
    graph_.output_ = cur_;
    return std::move(graph_);
  }

 private:
  std::vector<Step>& steps() { return graph_.steps_; }

  void Claim(const std::string& name) {
    Check(!name.empty(), ErrorCode::kBuild, "empty layer name");
    Check(names_.insert(name).second, ErrorCode::kBuild, "duplicate layer name '" + name + "'");
  }

  template <typename F>
  Shape OutShape(const std::string& name, F&& compute) {
    try {
      return compute();
    } catch (const Error& e) {
      Fail(ErrorCode::kBuild, "layer '" + name + "': " + e.what());
    }
  }

  int NextArena() const { return cur_.buffer == kArenaA ? kArenaB : kArenaA; }

  Operand Place(int buffer, const Shape& shape, DType dtype) {
    const std::size_t bytes = static_cast<std::size_t>(shape.count()) * DTypeSize(dtype);
    auto& slot = graph_.buffer_bytes_[static_cast<std::size_t>(buffer)];
    slot = std::max(slot, bytes);
    return {buffer, shape, dtype, 0, 0};
  }

  void AddStep(Step s) { graph_.steps_.push_back(std::move(s)); }
  void PushLayer(LayerSpec l) { graph_.layers_.push_back(std::move(l)); }

  QuantParams Calibration(const std::string& key) const {
    auto it = options_.calibration.find(key);
    if (it == options_.calibration.end()) {
      Fail(ErrorCode::kBuild, "missing activation calibration for '" + key + "'");
    }
    ValidateQuantParams(it->second);
    return it->second;
  }

  void AddConvStep(const std::string& name, const std::string& layer, ConvWeights w,
                   const ConvParams& p, const Operand& in, const Operand& out) {
    graph_.convs_.push_back({name, std::move(w), p});
    AddStep({name, LayerKind::kConv, layer, step::Conv{graph_.convs_.size() - 1}, in, out, ""});
  }

  std::size_t AddQConvStep(const std::string& name, const std::string& layer,
                           const ConvWeights& w, const ConvParams& p, const QuantParams& in_q,
                           const Operand& in, const Operand& acc) {
    QConvLayer q;
    q.name = name;
    q.params = p;
    q.input_params = in_q;
    q.weights = QuantizeTensor(w.weight, ChooseQuantParams(w.weight));
    q.bias = QuantizeBias(w.bias, q.acc_scale());
    Check(AccumulatorFits(w.in_channels(), p.kernel_h, p.kernel_w, q.bias), ErrorCode::kBuild,
          "layer '" + name + "': i32 accumulator could overflow");
    graph_.qconvs_.push_back(std::move(q));
    const std::size_t li = graph_.qconvs_.size() - 1;
    AddStep({name, LayerKind::kConv, layer, step::QConv{li}, in, acc, ""});
    return li;
  }

  void QConvRequant(const std::string& name, const std::string& layer, const ConvWeights& w,
                    const ConvParams& p, const QuantParams& in_q, const Operand& in,
                    const Operand& out, const QuantParams& out_q) {
    Shape acc_shape = out.shape;
    const Operand acc = Place(kAccumBuffer, acc_shape, DType::kI32);
    const std::size_t li = AddQConvStep(name, layer, w, p, in_q, in, acc);
    AddStep({name + "/requantize", LayerKind::kRequantize, layer,
             step::Requantize{RequantizeMultiplier(in_q, graph_.qconvs_[li].weights.params, out_q),
                              out_q},
             acc, out, ""});
  }

  void QConvDequant(const std::string& name, const std::string& layer, const ConvWeights& w,
                    const ConvParams& p, const QuantParams& in_q, const Operand& in,
                    const Operand& out) {
    const Operand acc = Place(kAccumBuffer, out.shape, DType::kI32);
    const std::size_t li = AddQConvStep(name, layer, w, p, in_q, in, acc);
    AddStep({name + "/dequantize", LayerKind::kDequantize, layer,
             step::DequantizeAccumulators{graph_.qconvs_[li].acc_scale()}, acc, out, ""});
  }

  void AddRelu(const std::string& name, const std::string& layer, const Operand& target,
               const std::string& calib_key, std::optional<std::int32_t> zero_point = {}) {
    if (target.dtype == DType::kU8) {
      AddStep({name, LayerKind::kRelu, layer, step::ReluQuantized{zero_point.value_or(cur_q_ ? cur_q_->zero_point : 0)},
               target, target, calib_key});
    } else {
      AddStep({name, LayerKind::kRelu, layer, step::Relu{}, target, target, calib_key});
    }
  }

  // Requantize-between mode: the first integer layer quantizes the float
  // activation it receives.
  void QuantizeCurrentInPlace(const std::string& layer) {
    if (cur_.dtype == DType::kU8) return;
    const QuantParams q = Calibration(cur_key_);
    const Operand out = Place(NextArena(), cur_.shape, DType::kU8);
    AddStep({layer + "/quantize", LayerKind::kQuantize, layer, step::Quantize{q}, cur_, out, ""});
    PushLayer({LayerKind::kQuantize, layer + "/quantize", q, false, cur_.shape, DType::kU8});
    cur_ = out;
    cur_q_ = q;
  }

  void DequantizeCurrent(const std::string& layer) {
    if (cur_.dtype != DType::kU8) return;
    const Operand out = Place(NextArena(), cur_.shape, DType::kF32);
    AddStep({layer + "/dequantize", LayerKind::kDequantize, layer, step::Dequantize{*cur_q_},
             cur_, out, ""});
    PushLayer({LayerKind::kDequantize, layer + "/dequantize", *cur_q_, false, cur_.shape,
               DType::kF32});
    cur_ = out;
    cur_q_.reset();
  }

  GraphOptions options_;
  Graph graph_;
  Operand cur_;
  std::string cur_key_ = "input";
  std::optional<QuantParams> cur_q_;
  std::set<std::string> names_;
};

namespace internal {
template <class... Fs> struct Overloaded : Fs... { using Fs::operator()...; };
template <class... Fs> Overloaded(Fs...) -> Overloaded<Fs...>;
}  // namespace internal

struct RunResult {
  Tensor probs;  // view of the executor's output buffer, valid until the next Run
  TimingReport report;
};

// Owns the planned buffers and worker pool for one graph. One run at a time;
// concurrent runs need separate executors.
class Executor {
 public:
  using Observer = std::function<void(const Step&, const Tensor& out)>;

  Executor(const Graph& graph, int workers = 1, Clock* clock = nullptr,
           AllocationTally& tally = AllocationTally::Default())
      : graph_(&graph), pool_(workers), clock_(clock ? clock : &SteadyClock::Instance()) {
    for (std::size_t b = 0; b < kBufferCount; ++b) {
      const std::size_t bytes = graph.buffer_bytes()[b];
      if (bytes == 0) continue;
      buffers_[b] = Tensor::Create({1, 1, 1, static_cast<index_t>(bytes)}, DType::kU8, tally);
    }
    bound_.reserve(graph.steps().size());
    report_.entries.reserve(graph.steps().size());
    for (const Step& s : graph.steps()) {
      bound_.push_back({Bind(s.in), Bind(s.out)});
      report_.entries.push_back({s.name, s.kind, std::chrono::nanoseconds{0}, 0});
    }
    output_ = Bind(graph.output());
  }

  int workers() const { return pool_.workers(); }
  std::size_t planned_bytes() const { return graph_->planned_bytes(); }
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  RunResult Run(const Tensor& input) {
    Check(input.shape() == graph_->input_shape() && input.dtype() == DType::kF32,
          ErrorCode::kShape,
          "input " + input.shape().ToString() + ", graph expects f32 " +
              graph_->input_shape().ToString());
    const auto& steps = graph_->steps();
    const auto start = clock_->Now();
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const Step& s = steps[i];
      const Tensor& in = s.in.buffer == kGraphInput ? input : bound_[i].in;
      Tensor& out = bound_[i].out;
      const auto t0 = clock_->Now();
      Execute(s, in, out);
      const auto t1 = clock_->Now();
      report_.entries[i].duration = t1 - t0;
      report_.entries[i].iterations = 1;
      if (observer_) observer_(s, out);
    }
    report_.total = clock_->Now() - start;
    report_.iterations = 1;
    return {output_, report_};
  }

 private:
  struct BoundStep {
    Tensor in;
    Tensor out;
  };

  Tensor Bind(const Operand& op) const {
    if (op.buffer == kGraphInput) return {};
    const Tensor& buf = buffers_[static_cast<std::size_t>(op.buffer)];
    if (op.parent_channels == 0) return buf.AliasAs(op.shape, op.dtype);
    Shape whole = op.shape;
    whole.c = op.parent_channels;
    return SliceChannels(buf.AliasAs(whole, op.dtype), op.channel_offset, op.shape.c).tensor();
  }

  void Execute(const Step& s, const Tensor& in, Tensor& out) {
    ThreadPool* pool = &pool_;
    std::visit(
        internal::Overloaded{
            [&](const step::Conv& c) {
              const ConvLayer& l = graph_->conv_layers()[c.layer];
              Conv2d(in, l.weights, l.params, out, pool);
            },
            [&](const step::QConv& c) {
              const QConvLayer& l = graph_->qconv_layers()[c.layer];
              QConv2dAccumulate(in, l.input_params, l.weights, l.bias, l.params, out, pool);
            },
            [&](const step::Relu&) { ReluInPlace(out, pool); },
            [&](const step::ReluQuantized& r) { ReluQuantizedInPlace(out, r.zero_point); },
            [&](const step::MaxPool& m) { MaxPool2d(in, m.params, out, pool); },
            [&](const step::GlobalAvgPool&) { tinyinfer::GlobalAvgPool(in, out, pool); },
            [&](const step::Scale& sc) {
              if (s.in.buffer != s.out.buffer) in.CopyTo(out);
              ScaleInPlace(out, sc.coeff);
            },
            [&](const step::Softmax&) { tinyinfer::Softmax(in, out); },
            [&](const step::Quantize& q) { QuantizeInto(in, q.params, out, pool); },
            [&](const step::Requantize& r) {
              RequantizeInto(in, r.multiplier, r.out_params, out, pool);
            },
            [&](const step::Dequantize& d) { DequantizeInto(in, d.params, out, pool); },
            [&](const step::DequantizeAccumulators& d) {
              DequantizeAccumulatorsInto(in, d.acc_scale, out, pool);
            },
            [&](const step::Concat&) {},
        },
        s.op);
  }

  const Graph* graph_;
  ThreadPool pool_;
  Clock* clock_;
  std::array<Tensor, kBufferCount> buffers_;
  std::vector<BoundStep> bound_;
  Tensor output_;
  TimingReport report_;
  Observer observer_;
};

// One-shot convenience: plans buffers, runs once.
inline RunResult Run(const Graph& graph, const Tensor& input, int workers = 1) {
  Executor exec(graph, workers);
  return exec.Run(input);
}

}  // namespace tinyinfer

#endif  // TINYINFER_GRAPH_HPP_
