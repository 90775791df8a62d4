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

#ifndef TINYINFER_FIRE_HPP_
#define TINYINFER_FIRE_HPP_

#include <string>

#include "tinyinfer/error.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/thread_pool.hpp"

namespace tinyinfer {

// Squeeze 1x1 -> ReLU -> {expand 1x1, expand 3x3 (pad 1)} -> ReLU, with the
// two expand outputs stacked on the channel axis. Spatial extent is kept.
struct FireConfig {
  index_t squeeze = 1;
  index_t expand1 = 1;
  index_t expand3 = 1;

  index_t out_channels() const { return expand1 + expand3; }

  friend bool operator==(const FireConfig&, const FireConfig&) = default;
};

struct FireWeights {
  ConvWeights squeeze;
  ConvWeights expand1;
  ConvWeights expand3;
};

inline const ConvParams kSqueezeParams = ConvParams::Square(1, 1, 0);
inline const ConvParams kExpand1Params = ConvParams::Square(1, 1, 0);
inline const ConvParams kExpand3Params = ConvParams::Square(3, 1, 1);

inline void ValidateFire(index_t in_channels, const FireConfig& cfg, const FireWeights& w) {
  Check(cfg.squeeze >= 1 && cfg.expand1 >= 1 && cfg.expand3 >= 1, ErrorCode::kShape,
        "fire channel counts must be >= 1");
  auto expect = [](const ConvWeights& cw, const Shape& s, const char* what) {
    Check(cw.weight.shape() == s && cw.bias.size() == static_cast<std::size_t>(s.n),
          ErrorCode::kShape,
          std::string("fire ") + what + " weight " + cw.weight.shape().ToString() +
              ", expected " + s.ToString());
  };
  expect(w.squeeze, {cfg.squeeze, in_channels, 1, 1}, "squeeze");
  expect(w.expand1, {cfg.expand1, cfg.squeeze, 1, 1}, "expand1x1");
  expect(w.expand3, {cfg.expand3, cfg.squeeze, 3, 3}, "expand3x3");
}

inline Shape FireOutputShape(const Shape& in, const FireConfig& cfg) {
  return {in.n, cfg.out_channels(), in.h, in.w};
}

// Runs a fire module into caller-owned buffers. `out` receives the expand 1x1
// result in channels [0, expand1) and the expand 3x3 result in
// [expand1, expand1 + expand3) by writing through channel-slice views, so no
// concatenation copy happens.
inline void FireInto(const Tensor& input, const FireConfig& cfg, const FireWeights& w,
                     Tensor& squeeze_buf, Tensor& out, ThreadPool* pool = nullptr) {
  ValidateFire(input.shape().c, cfg, w);
  Check(out.shape() == FireOutputShape(input.shape(), cfg), ErrorCode::kShape,
        "fire output " + out.shape().ToString());
  Conv2d(input, w.squeeze, kSqueezeParams, squeeze_buf, pool);
  ReluInPlace(squeeze_buf, pool);

  ChannelSliceView left = SliceChannels(out, 0, cfg.expand1);
  Conv2d(squeeze_buf, w.expand1, kExpand1Params, left, pool);
  ReluInPlace(left.tensor(), pool);

  ChannelSliceView right = SliceChannels(out, cfg.expand1, cfg.expand3);
  Conv2d(squeeze_buf, w.expand3, kExpand3Params, right, pool);
  ReluInPlace(right.tensor(), pool);
}

inline Tensor Fire(const Tensor& input, const FireConfig& cfg, const FireWeights& w,
                   ThreadPool* pool = nullptr) {
  ValidateFire(input.shape().c, cfg, w);
  const Shape is = input.shape();
  Tensor squeeze = Tensor::Create({is.n, cfg.squeeze, is.h, is.w}, DType::kF32);
  Tensor out = Tensor::Create(FireOutputShape(is, cfg), DType::kF32);
  FireInto(input, cfg, w, squeeze, out, pool);
  return out;
}

}  // namespace tinyinfer

#endif  // TINYINFER_FIRE_HPP_
