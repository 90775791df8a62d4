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

// Asymmetric per-tensor u8 quantization: real = scale * (q - zero_point).
//
// The integer convolution only produces i32 accumulators. Converting those
// to the next layer's u8 codes (Requantize) or to f32 (Dequantize) are
// separate operators so the graph can time them on their own.

#ifndef TINYINFER_QUANT_HPP_
#define TINYINFER_QUANT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tinyinfer/error.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/thread_pool.hpp"

namespace tinyinfer {

constexpr std::int32_t kQuantMin = 0;
constexpr std::int32_t kQuantMax = 255;

struct QuantParams {
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

inline void ValidateQuantParams(const QuantParams& p) {
  Check(std::isfinite(p.scale) && p.scale > 0.0f, ErrorCode::kArgument,
        "quant scale must be positive and finite");
  Check(p.zero_point >= kQuantMin && p.zero_point <= kQuantMax, ErrorCode::kArgument,
        "zero point " + std::to_string(p.zero_point) + " outside [0, 255]");
}

struct QTensor {
  Tensor tensor;  // u8 codes
  QuantParams params;
};

// Ties go to the even neighbour (the default FE_TONEAREST mode).
inline double RoundHalfEven(double x) { return std::nearbyint(x); }

inline std::uint8_t SaturateU8(double q) {
  return static_cast<std::uint8_t>(std::clamp(q, double{kQuantMin}, double{kQuantMax}));
}

// Params covering [min(t, 0), max(t, 0)]. A range that collapses to a point
// (all-zero input) falls back to scale 1.
inline QuantParams ChooseQuantParamsForRange(float min_value, float max_value) {
  Check(std::isfinite(min_value) && std::isfinite(max_value), ErrorCode::kArgument,
        "quantization range must be finite");
  const double lo = std::min<double>(min_value, 0.0);
  const double hi = std::max<double>(max_value, 0.0);
  if (hi == lo) {
    const double zp = std::clamp(RoundHalfEven(-lo), double{kQuantMin}, double{kQuantMax});
    return {1.0f, static_cast<std::int32_t>(zp)};
  }
  const double scale = (hi - lo) / kQuantMax;
  // -lo / scale without rounding the scale first, so [-1, 1] lands exactly on 127.5.
  const double zp = std::clamp(RoundHalfEven(kQuantMax * -lo / (hi - lo)), double{kQuantMin},
                               double{kQuantMax});
  return {static_cast<float>(scale), static_cast<std::int32_t>(zp)};
}

inline QuantParams ChooseQuantParams(const Tensor& t) {
  Check(!t.empty() && t.element_count() > 0, ErrorCode::kArgument, "empty tensor");
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  const Shape s = t.shape();
  for (index_t n = 0; n < s.n; ++n) {
    for (index_t c = 0; c < s.c; ++c) {
      for (float x : t.Plane<const float>(n, c)) {
        Check(std::isfinite(x), ErrorCode::kArgument, "non-finite value in calibration tensor");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  return ChooseQuantParamsForRange(lo, hi);
}

inline std::uint8_t QuantizeValue(float x, const QuantParams& p) {
  return SaturateU8(RoundHalfEven(static_cast<double>(x) / p.scale) + p.zero_point);
}

inline float DequantizeValue(std::int32_t q, const QuantParams& p) {
  return static_cast<float>(static_cast<double>(p.scale) * (q - p.zero_point));
}

inline void QuantizeInto(const Tensor& in, const QuantParams& p, Tensor& out,
                         ThreadPool* pool = nullptr) {
  Check(in.shape() == out.shape(), ErrorCode::kShape, "quantize shape mismatch");
  const Shape s = in.shape();
  ParallelFor(pool, static_cast<std::size_t>(s.n * s.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / s.c;
      const index_t c = static_cast<index_t>(k) % s.c;
      const auto src = in.Plane<const float>(n, c);
      const auto dst = out.Plane<std::uint8_t>(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = QuantizeValue(src[i], p);
    }
  });
}

inline QTensor QuantizeTensor(const Tensor& t, const QuantParams& p) {
  ValidateQuantParams(p);
  QTensor q{Tensor::Create(t.shape(), DType::kU8), p};
  QuantizeInto(t, p, q.tensor);
  return q;
}

inline void DequantizeInto(const Tensor& in, const QuantParams& p, Tensor& out,
                           ThreadPool* pool = nullptr) {
  Check(in.shape() == out.shape(), ErrorCode::kShape, "dequantize shape mismatch");
  const Shape s = in.shape();
  ParallelFor(pool, static_cast<std::size_t>(s.n * s.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / s.c;
      const index_t c = static_cast<index_t>(k) % s.c;
      const auto src = in.Plane<const std::uint8_t>(n, c);
      const auto dst = out.Plane<float>(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = DequantizeValue(src[i], p);
    }
  });
}

inline Tensor DequantizeTensor(const QTensor& q) {
  Tensor out = Tensor::Create(q.tensor.shape(), DType::kF32);
  DequantizeInto(q.tensor, q.params, out);
  return out;
}

// Accumulators are in units of scale_in * scale_w.
inline void DequantizeAccumulatorsInto(const Tensor& acc, double acc_scale, Tensor& out,
                                       ThreadPool* pool = nullptr) {
  Check(acc.shape() == out.shape(), ErrorCode::kShape, "dequantize shape mismatch");
  const Shape s = acc.shape();
  ParallelFor(pool, static_cast<std::size_t>(s.n * s.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / s.c;
      const index_t c = static_cast<index_t>(k) % s.c;
      const auto src = acc.Plane<const std::int32_t>(n, c);
      const auto dst = out.Plane<float>(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>(src[i] * acc_scale);
      }
    }
  });
}

// q = clamp(round_half_even(acc * multiplier) + zero_point, 0, 255) with
// multiplier = scale_in * scale_w / scale_out.
inline void RequantizeInto(const Tensor& acc, double multiplier, const QuantParams& out_params,
                           Tensor& out, ThreadPool* pool = nullptr) {
  Check(acc.shape() == out.shape(), ErrorCode::kShape,
        "requantize " + acc.shape().ToString() + " into " + out.shape().ToString());
  const Shape s = acc.shape();
  ParallelFor(pool, static_cast<std::size_t>(s.n * s.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / s.c;
      const index_t c = static_cast<index_t>(k) % s.c;
      const auto src = acc.Plane<const std::int32_t>(n, c);
      const auto dst = out.Plane<std::uint8_t>(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = SaturateU8(RoundHalfEven(src[i] * multiplier) + out_params.zero_point);
      }
    }
  });
}

inline double RequantizeMultiplier(const QuantParams& in, const QuantParams& w,
                                   const QuantParams& out) {
  return static_cast<double>(in.scale) * w.scale / out.scale;
}

// ReLU on u8 codes: real value max(x, 0) is code max(q, zero_point).
inline void ReluQuantizedInPlace(Tensor& t, std::int32_t zero_point) {
  const auto floor = static_cast<std::uint8_t>(std::clamp(zero_point, kQuantMin, kQuantMax));
  const Shape s = t.shape();
  for (index_t n = 0; n < s.n; ++n)
    for (index_t c = 0; c < s.c; ++c)
      for (std::uint8_t& q : t.Plane<std::uint8_t>(n, c)) q = std::max(q, floor);
}

inline std::vector<std::int32_t> QuantizeBias(std::span<const float> bias, double acc_scale) {
  std::vector<std::int32_t> out;
  out.reserve(bias.size());
  for (float b : bias) {
    const double q = RoundHalfEven(b / acc_scale);
    Check(std::abs(q) < 1 << 30, ErrorCode::kBuild, "quantized bias overflows");
    out.push_back(static_cast<std::int32_t>(q));
  }
  return out;
}

// Largest |accumulator| is cin*kh*kw*255*255 + max|bias|; it must fit i32.
inline bool AccumulatorFits(index_t in_channels, index_t kernel_h, index_t kernel_w,
                            std::span<const std::int32_t> bias) {
  std::int64_t worst = in_channels * kernel_h * kernel_w * std::int64_t{kQuantMax * kQuantMax};
  std::int64_t max_bias = 0;
  for (std::int32_t b : bias) max_bias = std::max<std::int64_t>(max_bias, std::abs(std::int64_t{b}));
  return worst + max_bias <= std::numeric_limits<std::int32_t>::max();
}

// acc[o, y, x] = bias[o] + sum (q_in - zp_in) * (q_w - zp_w), exact in i32.
// Padding contributes nothing: a zero real input is the code zp_in.
inline void QConv2dAccumulate(const Tensor& in, const QuantParams& in_params,
                              const QTensor& weights, std::span<const std::int32_t> bias,
                              const ConvParams& p, Tensor& acc, ThreadPool* pool = nullptr) {
  const Shape ws = weights.tensor.shape();
  CheckConvOperands(in.shape(), ws, bias.size(), p, acc.shape());
  Check(AccumulatorFits(ws.c, ws.h, ws.w, bias), ErrorCode::kShape,
        "i32 accumulator could overflow");
  const Shape os = acc.shape();
  const std::uint8_t* wdata = weights.tensor.data<const std::uint8_t>();
  const std::int32_t zp_in = in_params.zero_point;
  const std::int32_t zp_w = weights.params.zero_point;
  const index_t rows = os.n * os.c * os.h;
  ParallelFor(pool, static_cast<std::size_t>(rows), [&](std::size_t b, std::size_t e) {
    for (auto r = static_cast<index_t>(b); r < static_cast<index_t>(e); ++r) {
      const index_t oy = r % os.h;
      const index_t o = (r / os.h) % os.c;
      const index_t n = r / (os.h * os.c);
      std::int32_t* row = acc.data<std::int32_t>() + acc.Offset(n, o, oy, 0);
      const std::uint8_t* wo = wdata + o * ws.c * ws.h * ws.w;
      internal::ConvRow<std::uint8_t, std::int32_t>(
          in, n, oy, p, os.w, row,
          [zp_in](std::uint8_t q) { return static_cast<std::int32_t>(q) - zp_in; },
          [&](index_t c, index_t i, index_t j) {
            return static_cast<std::int32_t>(wo[(c * ws.h + i) * ws.w + j]) - zp_w;
          });
      const std::int32_t bias_o = bias[static_cast<std::size_t>(o)];
      for (index_t ox = 0; ox < os.w; ++ox) row[ox] += bias_o;
    }
  });
}

// Accumulate then requantize to out_params. The graph runs the two halves as
// separate timed steps; this is the composed form.
inline QTensor QConv2d(const QTensor& in, const QTensor& weights,
                       std::span<const std::int32_t> bias, const ConvParams& p,
                       const QuantParams& out_params, ThreadPool* pool = nullptr) {
  ValidateQuantParams(out_params);
  const Shape os = ConvOutputShape(in.tensor.shape(), weights.tensor.shape().n, p);
  Tensor acc = Tensor::Create(os, DType::kI32);
  QConv2dAccumulate(in.tensor, in.params, weights, bias, p, acc, pool);
  QTensor out{Tensor::Create(os, DType::kU8), out_params};
  RequantizeInto(acc, RequantizeMultiplier(in.params, weights.params, out_params), out_params,
                 out.tensor, pool);
  return out;
}

}  // namespace tinyinfer

#endif  // TINYINFER_QUANT_HPP_
