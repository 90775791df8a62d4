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

// Float operators used by SqueezeNet: convolution, ReLU, max / global-average
// pooling, scaling, softmax and top-k. Every operator writes into a caller
// provided output (which may be a channel-slice view) and has an allocating
// convenience overload.

#ifndef TINYINFER_NN_OPS_HPP_
#define TINYINFER_NN_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tinyinfer/error.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/thread_pool.hpp"

namespace tinyinfer {

struct ConvParams {
  index_t kernel_h = 1;
  index_t kernel_w = 1;
  index_t stride = 1;
  index_t pad = 0;

  static ConvParams Square(index_t kernel, index_t stride = 1, index_t pad = 0) {
    return {kernel, kernel, stride, pad};
  }
};

// Filters shaped (out_channels, in_channels, kernel_h, kernel_w) plus one bias
// per output channel.
struct ConvWeights {
  Tensor weight;
  std::vector<float> bias;

  index_t out_channels() const { return weight.shape().n; }
  index_t in_channels() const { return weight.shape().c; }
};

inline index_t WindowedExtent(index_t in, index_t kernel, index_t stride, index_t pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

inline Shape ConvOutputShape(const Shape& in, index_t out_channels, const ConvParams& p) {
  Check(p.stride >= 1 && p.pad >= 0 && p.kernel_h >= 1 && p.kernel_w >= 1,
        ErrorCode::kShape, "invalid conv params");
  Check(in.h + 2 * p.pad >= p.kernel_h && in.w + 2 * p.pad >= p.kernel_w, ErrorCode::kShape,
        "conv kernel larger than padded input " + in.ToString());
  return {in.n, out_channels, WindowedExtent(in.h, p.kernel_h, p.stride, p.pad),
          WindowedExtent(in.w, p.kernel_w, p.stride, p.pad)};
}

inline void CheckConvOperands(const Shape& in, const Shape& weight, std::size_t bias_len,
                              const ConvParams& p, const Shape& out) {
  Check(weight.c == in.c, ErrorCode::kShape,
        "conv weight expects " + std::to_string(weight.c) + " input channels, got " +
            std::to_string(in.c));
  Check(weight.h == p.kernel_h && weight.w == p.kernel_w, ErrorCode::kShape,
        "conv weight kernel " + weight.ToString() + " does not match params");
  Check(bias_len == static_cast<std::size_t>(weight.n), ErrorCode::kShape,
        "conv bias length " + std::to_string(bias_len) + " != " + std::to_string(weight.n));
  const Shape expect = ConvOutputShape(in, weight.n, p);
  Check(out == expect, ErrorCode::kShape,
        "conv output " + out.ToString() + ", expected " + expect.ToString());
}

namespace internal {

// Output columns ox whose input column ox*stride - pad + j lies in [0, in_w).
inline void ValidColumns(index_t in_w, index_t out_w, index_t stride, index_t pad, index_t j,
                         index_t* lo, index_t* hi) {
  const index_t first = pad - j;  // smallest ox*stride allowed
  *lo = first <= 0 ? 0 : (first + stride - 1) / stride;
  const index_t last = in_w - 1 + pad - j;  // largest ox*stride allowed
  *hi = last < 0 ? 0 : std::min(out_w, last / stride + 1);
  if (*hi < *lo) *hi = *lo;
}

// Direct convolution over one output row, shared by the float and integer
// kernels. The row is used as the accumulator; each output element receives
// its products in (channel, kernel row, kernel column) order.
template <typename In, typename Acc, typename LoadIn, typename LoadW>
inline void ConvRow(const Tensor& in, index_t n, index_t oy, const ConvParams& p,
                    index_t out_w, Acc* row, LoadIn load_in, LoadW load_w) {
  const Shape& is = in.shape();
  const In* base = in.data<const In>() + n * in.batch_stride();
  std::fill(row, row + out_w, Acc{0});
  for (index_t c = 0; c < is.c; ++c) {
    const In* plane = base + c * in.channel_stride();
    for (index_t i = 0; i < p.kernel_h; ++i) {
      const index_t iy = oy * p.stride - p.pad + i;
      if (iy < 0 || iy >= is.h) continue;
      const In* irow = plane + iy * is.w;
      for (index_t j = 0; j < p.kernel_w; ++j) {
        const Acc wv = load_w(c, i, j);
        index_t lo, hi;
        ValidColumns(is.w, out_w, p.stride, p.pad, j, &lo, &hi);
        if (p.stride == 1) {
          const In* src = irow + j - p.pad;
          for (index_t ox = lo; ox < hi; ++ox) row[ox] += load_in(src[ox]) * wv;
        } else {
          const In* src = irow + j - p.pad;
          for (index_t ox = lo; ox < hi; ++ox) row[ox] += load_in(src[ox * p.stride]) * wv;
        }
      }
    }
  }
}

}  // namespace internal

// out[o, y, x] = bias[o] + sum_{c,i,j} in[c, y*s - pad + i, x*s - pad + j] * w[o, c, i, j]
// with zeros outside the input. Work is split over output rows, so results do
// not depend on the worker count.
inline void Conv2d(const Tensor& in, const ConvWeights& w, const ConvParams& p, Tensor& out,
                   ThreadPool* pool = nullptr) {
  CheckConvOperands(in.shape(), w.weight.shape(), w.bias.size(), p, out.shape());
  const Shape os = out.shape();
  const index_t cin = in.shape().c;
  const float* wdata = w.weight.data<const float>();
  const index_t rows = os.n * os.c * os.h;
  ParallelFor(pool, static_cast<std::size_t>(rows), [&](std::size_t b, std::size_t e) {
    for (auto r = static_cast<index_t>(b); r < static_cast<index_t>(e); ++r) {
      const index_t oy = r % os.h;
      const index_t o = (r / os.h) % os.c;
      const index_t n = r / (os.h * os.c);
      float* row = out.data<float>() + out.Offset(n, o, oy, 0);
      const float* wo = wdata + o * cin * p.kernel_h * p.kernel_w;
      internal::ConvRow<float, float>(
          in, n, oy, p, os.w, row, [](float x) { return x; },
          [&](index_t c, index_t i, index_t j) {
            return wo[(c * p.kernel_h + i) * p.kernel_w + j];
          });
      const float bias = w.bias[static_cast<std::size_t>(o)];
      for (index_t ox = 0; ox < os.w; ++ox) row[ox] += bias;
    }
  });
}

inline void Conv2d(const Tensor& in, const ConvWeights& w, const ConvParams& p,
                   ChannelSliceView& out, ThreadPool* pool = nullptr) {
  Conv2d(in, w, p, out.tensor(), pool);
}

inline Tensor Conv2d(const Tensor& in, const ConvWeights& w, const ConvParams& p,
                     ThreadPool* pool = nullptr) {
  Tensor out = Tensor::Create(ConvOutputShape(in.shape(), w.out_channels(), p), DType::kF32);
  Conv2d(in, w, p, out, pool);
  return out;
}

inline void ReluInPlace(Tensor& t, ThreadPool* pool = nullptr) {
  const Shape s = t.shape();
  ParallelFor(pool, static_cast<std::size_t>(s.n * s.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto nc = static_cast<index_t>(k);
      for (float& x : t.Plane<float>(nc / s.c, nc % s.c)) x = std::max(x, 0.0f);
    }
  });
}

inline Tensor Relu(Tensor& t, bool in_place) {
  Tensor out = in_place ? t : t.Clone();
  ReluInPlace(out);
  return out;
}

struct PoolParams {
  index_t kernel = 1;
  index_t stride = 1;
  index_t pad = 0;
};

inline Shape PoolOutputShape(const Shape& in, const PoolParams& p) {
  Check(p.kernel >= 1 && p.stride >= 1 && p.pad >= 0, ErrorCode::kShape, "invalid pool params");
  Check(p.pad < p.kernel, ErrorCode::kShape, "pool padding must be smaller than the window");
  Check(in.h + 2 * p.pad >= p.kernel && in.w + 2 * p.pad >= p.kernel, ErrorCode::kShape,
        "pool window " + std::to_string(p.kernel) + " larger than padded input " +
            in.ToString());
  return {in.n, in.c, WindowedExtent(in.h, p.kernel, p.stride, p.pad),
          WindowedExtent(in.w, p.kernel, p.stride, p.pad)};
}

namespace internal {

template <typename T>
void MaxPoolTyped(const Tensor& in, const PoolParams& p, Tensor& out, ThreadPool* pool) {
  const Shape is = in.shape();
  const Shape os = out.shape();
  ParallelFor(pool, static_cast<std::size_t>(os.n * os.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / os.c;
      const index_t c = static_cast<index_t>(k) % os.c;
      const T* src = in.Plane<const T>(n, c).data();
      T* dst = out.Plane<T>(n, c).data();
      for (index_t oy = 0; oy < os.h; ++oy) {
        const index_t y0 = std::max<index_t>(oy * p.stride - p.pad, 0);
        const index_t y1 = std::min(oy * p.stride - p.pad + p.kernel, is.h);
        for (index_t ox = 0; ox < os.w; ++ox) {
          const index_t x0 = std::max<index_t>(ox * p.stride - p.pad, 0);
          const index_t x1 = std::min(ox * p.stride - p.pad + p.kernel, is.w);
          T best = src[y0 * is.w + x0];
          for (index_t y = y0; y < y1; ++y)
            for (index_t x = x0; x < x1; ++x) best = std::max(best, src[y * is.w + x]);
          dst[oy * os.w + ox] = best;
        }
      }
    }
  });
}

}  // namespace internal

// Padded positions never take part in the max. Works on f32 and u8 tensors;
// the max commutes with the monotone u8 -> real mapping.
inline void MaxPool2d(const Tensor& in, const PoolParams& p, Tensor& out,
                      ThreadPool* pool = nullptr) {
  const Shape expect = PoolOutputShape(in.shape(), p);
  Check(out.shape() == expect && out.dtype() == in.dtype(), ErrorCode::kShape,
        "maxpool output " + out.shape().ToString() + ", expected " + expect.ToString());
  switch (in.dtype()) {
    case DType::kF32: internal::MaxPoolTyped<float>(in, p, out, pool); break;
    case DType::kU8: internal::MaxPoolTyped<std::uint8_t>(in, p, out, pool); break;
    default: Fail(ErrorCode::kArgument, "maxpool supports f32 and u8");
  }
}

inline Tensor MaxPool2d(const Tensor& in, index_t kernel, index_t stride, index_t pad) {
  const PoolParams p{kernel, stride, pad};
  Tensor out = Tensor::Create(PoolOutputShape(in.shape(), p), in.dtype());
  MaxPool2d(in, p, out);
  return out;
}

// out[n, c] = mean of channel c, summed in f32 in row-major order.
inline void GlobalAvgPool(const Tensor& in, Tensor& out, ThreadPool* pool = nullptr) {
  const Shape is = in.shape();
  Check(out.shape() == Shape{is.n, is.c, 1, 1}, ErrorCode::kShape,
        "global pool output " + out.shape().ToString());
  const auto denom = static_cast<float>(is.spatial());
  ParallelFor(pool, static_cast<std::size_t>(is.n * is.c), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const index_t n = static_cast<index_t>(k) / is.c;
      const index_t c = static_cast<index_t>(k) % is.c;
      float sum = 0.0f;
      for (float x : in.Plane<const float>(n, c)) sum += x;
      out.data<float>()[out.Offset(n, c, 0, 0)] = sum / denom;
    }
  });
}

inline Tensor GlobalAvgPool(const Tensor& in) {
  Tensor out = Tensor::Create({in.shape().n, in.shape().c, 1, 1}, DType::kF32);
  GlobalAvgPool(in, out);
  return out;
}

inline void ScaleInPlace(Tensor& t, float coeff) {
  Check(std::isfinite(coeff), ErrorCode::kArgument, "scale coefficient must be finite");
  const Shape s = t.shape();
  for (index_t n = 0; n < s.n; ++n)
    for (index_t c = 0; c < s.c; ++c)
      for (float& x : t.Plane<float>(n, c)) x *= coeff;
}

inline Tensor Scale(const Tensor& t, float coeff) {
  Tensor out = t.Clone();
  ScaleInPlace(out, coeff);
  return out;
}

// out[c] = exp(x[c] - max) / sum_j exp(x[j] - max) over the channel axis.
inline void Softmax(const Tensor& logits, Tensor& out) {
  const Shape s = logits.shape();
  Check(s.h == 1 && s.w == 1, ErrorCode::kShape, "softmax expects (n, c, 1, 1), got " +
                                                     s.ToString());
  Check(out.shape() == s, ErrorCode::kShape, "softmax output " + out.shape().ToString());
  const float* src = logits.data<const float>();
  float* dst = out.data<float>();
  for (index_t n = 0; n < s.n; ++n) {
    const index_t in_base = n * logits.batch_stride();
    const index_t out_base = n * out.batch_stride();
    float m = -std::numeric_limits<float>::infinity();
    for (index_t c = 0; c < s.c; ++c) m = std::max(m, src[in_base + c * logits.channel_stride()]);
    double sum = 0.0;
    for (index_t c = 0; c < s.c; ++c) {
      const float e = std::exp(src[in_base + c * logits.channel_stride()] - m);
      dst[out_base + c * out.channel_stride()] = e;
      sum += e;
    }
    const auto total = static_cast<float>(sum);
    for (index_t c = 0; c < s.c; ++c) dst[out_base + c * out.channel_stride()] /= total;
  }
}

inline Tensor Softmax(const Tensor& logits) {
  Tensor out = Tensor::Create(logits.shape(), DType::kF32);
  Softmax(logits, out);
  return out;
}

struct ClassScore {
  index_t index = 0;
  float prob = 0.0f;

  friend bool operator==(const ClassScore&, const ClassScore&) = default;
};

// The k largest entries of the first batch item, descending, ties to the
// lowest index.
inline std::vector<ClassScore> TopK(const Tensor& probs, index_t k) {
  const index_t count = probs.shape().c * probs.shape().spatial();
  Check(k >= 1, ErrorCode::kArgument, "top_k needs k >= 1");
  Check(k <= count, ErrorCode::kArgument,
        "top_k k=" + std::to_string(k) + " exceeds " + std::to_string(count) + " classes");
  std::vector<ClassScore> all;
  all.reserve(static_cast<std::size_t>(count));
  const Shape s = probs.shape();
  for (index_t c = 0; c < s.c; ++c) {
    const auto plane = probs.Plane<const float>(0, c);
    for (index_t i = 0; i < s.spatial(); ++i) {
      all.push_back({c * s.spatial() + i, plane[static_cast<std::size_t>(i)]});
    }
  }
  std::partial_sort(all.begin(), all.begin() + k, all.end(),
                    [](const ClassScore& a, const ClassScore& b) {
                      return a.prob != b.prob ? a.prob > b.prob : a.index < b.index;
                    });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace tinyinfer

#endif  // TINYINFER_NN_OPS_HPP_
