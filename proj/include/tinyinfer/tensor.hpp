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

#ifndef TINYINFER_TENSOR_HPP_
#define TINYINFER_TENSOR_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <type_traits>

#include "tinyinfer/error.hpp"

namespace tinyinfer {

using index_t = std::int64_t;

enum class DType : std::uint8_t { kF32 = 0, kU8 = 1, kI32 = 2 };

inline std::size_t DTypeSize(DType dtype) {
  switch (dtype) {
    case DType::kF32: return 4;
    case DType::kU8: return 1;
    case DType::kI32: return 4;
  }
  Fail(ErrorCode::kArgument, "unknown dtype");
}

inline const char* DTypeName(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "f32";
    case DType::kU8: return "u8";
    case DType::kI32: return "i32";
  }
  return "?";
}

template <typename T> struct DTypeOf;
template <> struct DTypeOf<float> { static constexpr DType value = DType::kF32; };
template <> struct DTypeOf<std::uint8_t> { static constexpr DType value = DType::kU8; };
template <> struct DTypeOf<std::int32_t> { static constexpr DType value = DType::kI32; };

template <typename T>
concept Element = requires { DTypeOf<std::remove_const_t<T>>::value; };

struct Shape {
  index_t n = 1;
  index_t c = 1;
  index_t h = 1;
  index_t w = 1;

  index_t spatial() const { return h * w; }
  index_t count() const { return n * c * h * w; }

  friend bool operator==(const Shape&, const Shape&) = default;

  std::string ToString() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

// Throws a size error unless every extent is >= 1 and n*c*h*w fits index_t.
inline void ValidateShape(const Shape& s) {
  const index_t dims[4] = {s.n, s.c, s.h, s.w};
  index_t total = 1;
  for (index_t d : dims) {
    Check(d >= 1, ErrorCode::kSize, "extent < 1 in shape " + s.ToString());
    Check(total <= std::numeric_limits<index_t>::max() / d, ErrorCode::kSize,
          "element count overflows in shape " + s.ToString());
    total *= d;
  }
}

// Counts tensor buffer allocations. Graph execution and channel slicing are
// expected to leave it untouched; tests assert on the delta.
class AllocationTally {
 public:
  static AllocationTally& Default() {
    static AllocationTally tally;
    return tally;
  }

  void Record(std::size_t bytes) {
    count_.fetch_add(1, std::memory_order_relaxed);
    bytes_.fetch_add(static_cast<std::int64_t>(bytes), std::memory_order_relaxed);
  }

  std::int64_t count() const { return count_.load(std::memory_order_relaxed); }
  std::int64_t bytes() const { return bytes_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> count_{0};
  std::atomic<std::int64_t> bytes_{0};
};

// Dense N-C-H-W tensor handle. Copies are shallow and share the buffer, the
// way a channel-slice view does; Clone() makes an independent copy.
//
// Element (n, c, h, w) lives at
//   offset + n * batch_stride + c * channel_stride + h * w_extent + w
// where batch_stride = C_total * channel_stride for views into a parent with
// C_total channels.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Create(const Shape& shape, DType dtype,
                       AllocationTally& tally = AllocationTally::Default()) {
    ValidateShape(shape);
    const auto count = static_cast<std::size_t>(shape.count());
    Check(count <= std::numeric_limits<std::size_t>::max() / DTypeSize(dtype),
          ErrorCode::kSize, "byte size overflows for shape " + shape.ToString());
    const std::size_t bytes = count * DTypeSize(dtype);
    Tensor t;
    try {
      t.storage_ = std::make_shared<Storage>(bytes);
    } catch (const std::bad_alloc&) {
      Fail(ErrorCode::kSize, "cannot allocate " + std::to_string(bytes) + " bytes for shape " +
                                 shape.ToString());
    }
    tally.Record(bytes);
    t.shape_ = shape;
    t.dtype_ = dtype;
    t.channel_stride_ = shape.spatial();
    t.batch_stride_ = shape.c * shape.spatial();
    return t;
  }

  bool empty() const { return storage_ == nullptr; }
  const Shape& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  index_t element_count() const { return shape_.count(); }
  index_t channel_stride() const { return channel_stride_; }
  index_t batch_stride() const { return batch_stride_; }
  index_t offset() const { return offset_; }
  std::size_t storage_bytes() const { return storage_ ? storage_->size : 0; }

  bool is_contiguous() const {
    return channel_stride_ == shape_.spatial() &&
           batch_stride_ == shape_.c * shape_.spatial();
  }

  bool SharesStorageWith(const Tensor& other) const {
    return storage_ != nullptr && storage_ == other.storage_;
  }

  // Pointer to element (0, 0, 0, 0). The element type must match dtype().
  template <Element T>
  T* data() const {
    if (DTypeOf<std::remove_const_t<T>>::value != dtype_) {
      Fail(ErrorCode::kArgument, std::string("tensor holds ") + DTypeName(dtype_) +
                                     ", accessed as " +
                                     DTypeName(DTypeOf<std::remove_const_t<T>>::value));
    }
    return reinterpret_cast<T*>(storage_->bytes.get()) + offset_;
  }

  index_t Offset(index_t n, index_t c, index_t h, index_t w) const {
    return n * batch_stride_ + c * channel_stride_ + h * shape_.w + w;
  }

  // The h*w contiguous elements of one channel plane.
  template <Element T>
  std::span<T> Plane(index_t n, index_t c) const {
    return {data<T>() + n * batch_stride_ + c * channel_stride_,
            static_cast<std::size_t>(shape_.spatial())};
  }

  template <Element T>
  T Get(index_t n, index_t c, index_t h, index_t w) const {
    CheckIndex(n, c, h, w);
    return data<T>()[Offset(n, c, h, w)];
  }

  template <Element T>
  void Set(index_t n, index_t c, index_t h, index_t w, T value) {
    CheckIndex(n, c, h, w);
    data<T>()[Offset(n, c, h, w)] = value;
  }

  template <Element T>
  void Fill(T value) {
    for (index_t n = 0; n < shape_.n; ++n)
      for (index_t c = 0; c < shape_.c; ++c)
        for (T& x : Plane<T>(n, c)) x = value;
  }

  // Deep, contiguous copy. Counts as an allocation.
  Tensor Clone(AllocationTally& tally = AllocationTally::Default()) const {
    Tensor copy = Create(shape_, dtype_, tally);
    CopyTo(copy);
    return copy;
  }

  // Element-wise copy into a tensor of identical shape and dtype; either side
  // may be a strided view.
  void CopyTo(Tensor& dst) const {
    Check(dst.shape_ == shape_ && dst.dtype_ == dtype_, ErrorCode::kShape,
          "copy " + shape_.ToString() + " into " + dst.shape_.ToString());
    const std::size_t plane_bytes =
        static_cast<std::size_t>(shape_.spatial()) * DTypeSize(dtype_);
    const std::size_t esize = DTypeSize(dtype_);
    for (index_t n = 0; n < shape_.n; ++n) {
      for (index_t c = 0; c < shape_.c; ++c) {
        std::memmove(dst.RawPlane(n, c, esize), RawPlane(n, c, esize), plane_bytes);
      }
    }
  }

  // A tensor of a different shape/dtype over the same buffer, starting at
  // byte 0. Used by buffer planning to reuse one arena for many activations.
  Tensor AliasAs(const Shape& shape, DType dtype) const {
    ValidateShape(shape);
    Check(storage_ != nullptr, ErrorCode::kArgument, "alias of an empty tensor");
    const std::size_t need = static_cast<std::size_t>(shape.count()) * DTypeSize(dtype);
    Check(need <= storage_->size, ErrorCode::kSize,
          "alias " + shape.ToString() + " needs " + std::to_string(need) +
              " bytes, buffer holds " + std::to_string(storage_->size));
    Tensor t;
    t.storage_ = storage_;
    t.shape_ = shape;
    t.dtype_ = dtype;
    t.channel_stride_ = shape.spatial();
    t.batch_stride_ = shape.c * shape.spatial();
    return t;
  }

 private:
  friend class ChannelSliceView;

  struct Storage {
    explicit Storage(std::size_t n) : bytes(new std::byte[n]()), size(n) {}
    std::unique_ptr<std::byte[]> bytes;
    std::size_t size;
  };

  void CheckIndex(index_t n, index_t c, index_t h, index_t w) const {
    if (n < 0 || n >= shape_.n || c < 0 || c >= shape_.c || h < 0 || h >= shape_.h ||
        w < 0 || w >= shape_.w) {
      Fail(ErrorCode::kBounds, "index (" + std::to_string(n) + "," + std::to_string(c) +
                                   "," + std::to_string(h) + "," + std::to_string(w) +
                                   ") outside " + shape_.ToString());
    }
  }

  std::byte* RawPlane(index_t n, index_t c, std::size_t esize) const {
    return storage_->bytes.get() +
           static_cast<std::size_t>(offset_ + n * batch_stride_ + c * channel_stride_) * esize;
  }

  std::shared_ptr<Storage> storage_;
  Shape shape_{};
  DType dtype_ = DType::kF32;
  index_t offset_ = 0;
  index_t channel_stride_ = 1;
  index_t batch_stride_ = 1;
};

// A window onto channels [channel_offset, channel_offset + channel_count) of a
// parent tensor. Shares the parent's buffer; creating one allocates nothing.
class ChannelSliceView {
 public:
  ChannelSliceView(const Tensor& parent, index_t channel_offset, index_t channel_count)
      : channel_offset_(channel_offset), channel_count_(channel_count),
        parent_channels_(parent.shape().c) {
    Check(!parent.empty(), ErrorCode::kArgument, "slice of an empty tensor");
    if (channel_offset < 0 || channel_count < 1 ||
        channel_offset + channel_count > parent.shape().c) {
      Fail(ErrorCode::kBounds, "channel slice [" + std::to_string(channel_offset) + ", " +
                                   std::to_string(channel_offset + channel_count) +
                                   ") outside " + std::to_string(parent.shape().c) +
                                   " channels");
    }
    view_ = parent;
    view_.shape_.c = channel_count;
    view_.offset_ = parent.offset_ + channel_offset * parent.channel_stride_;
  }

  Tensor& tensor() { return view_; }
  const Tensor& tensor() const { return view_; }
  index_t channel_offset() const { return channel_offset_; }
  index_t channel_count() const { return channel_count_; }
  index_t parent_channels() const { return parent_channels_; }

  template <Element T>
  T Get(index_t n, index_t c, index_t h, index_t w) const { return view_.Get<T>(n, c, h, w); }

  template <Element T>
  void Set(index_t n, index_t c, index_t h, index_t w, T value) {
    view_.Set<T>(n, c, h, w, value);
  }

 private:
  Tensor view_;
  index_t channel_offset_;
  index_t channel_count_;
  index_t parent_channels_;
};

inline ChannelSliceView SliceChannels(const Tensor& t, index_t offset, index_t count) {
  return ChannelSliceView(t, offset, count);
}

}  // namespace tinyinfer

#endif  // TINYINFER_TENSOR_HPP_
