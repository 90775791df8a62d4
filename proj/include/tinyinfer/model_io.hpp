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

// Binary weight container (TIWF) and raw input files (TIRAW / TIF32).
//
// TIWF, all integers and floats little-endian:
//
//   "TIWF" | u32 version (=1) | u32 entry_count
//   entry_count times:
//     u16 name_len | name bytes | u8 dtype | u8 rank | u32 dims[rank]
//     u8 has_quant | [f32 scale | i32 zero_point]   (only when has_quant == 1)
//     u64 byte_len | payload
//
// dtype codes: 0 = f32, 1 = u8, 2 = i32. byte_len must equal
// product(dims) * dtype size. Nothing may follow the last entry.
//
// Reserved entry names:
//   meta.arch            u8 [len]   architecture tag (text)
//   meta.source          u8 [len]   provenance string written by the exporter
//   meta.means           f32 [3]    per-channel means, engine channel order
//   meta.channel_order   u8 [3]     "rgb" or "bgr"
//   calib.<key>          f32 [2]    observed (min, max), quant block holds the
//                                   derived activation QuantParams

#ifndef TINYINFER_MODEL_IO_HPP_
#define TINYINFER_MODEL_IO_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinyinfer/error.hpp"
#include "tinyinfer/quant.hpp"
#include "tinyinfer/tensor.hpp"

namespace tinyinfer {

// Tensor payloads are copied with memcpy in both directions.
static_assert(std::endian::native == std::endian::little,
              "TIWF tensor payloads assume a little-endian host");

inline constexpr std::array<char, 4> kTiwfMagic = {'T', 'I', 'W', 'F'};
inline constexpr std::uint32_t kTiwfVersion = 1;
inline constexpr std::size_t kTiwfHeaderBytes = 12;
inline constexpr std::size_t kTiwfMaxRank = 8;
inline constexpr std::string_view kRawInputMagic = "TIRAW001";
inline constexpr std::string_view kF32InputMagic = "TIF32001";
inline constexpr index_t kInputSize = 227;

struct WeightEntry {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
  std::optional<QuantParams> quant;

  std::uint64_t element_count() const {
    std::uint64_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return n;
  }

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

// Ordered name -> array map. Insertion order is the file order.
class WeightStore {
 public:
  const std::vector<WeightEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const WeightEntry* Find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  const WeightEntry& Get(std::string_view name) const {
    const WeightEntry* e = Find(name);
    if (e == nullptr) Fail(ErrorCode::kBuild, "missing weight entry '" + std::string(name) + "'");
    return *e;
  }

  void Add(WeightEntry e) {
    Validate(e);
    Check(!index_.contains(e.name), ErrorCode::kArgument, "duplicate entry '" + e.name + "'");
    index_.emplace(e.name, entries_.size());
    entries_.push_back(std::move(e));
  }

  // Replaces an existing entry in place, or appends.
  void Put(WeightEntry e) {
    Validate(e);
    auto it = index_.find(e.name);
    if (it == index_.end()) {
      Add(std::move(e));
    } else {
      entries_[it->second] = std::move(e);
    }
  }

  // Rank-4 entry (n, c, h, w). F32 tensors, or U8 with quant params.
  void PutTensor(const std::string& name, const Tensor& t,
                 std::optional<QuantParams> quant = std::nullopt) {
    const Shape s = t.shape();
    WeightEntry e{name, t.dtype(),
                  {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                   static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)},
                  {}, quant};
    e.data.resize(static_cast<std::size_t>(s.count()) * DTypeSize(t.dtype()));
    Tensor dense = t.is_contiguous() ? t : t.Clone();
    std::memcpy(e.data.data(), RawData(dense), e.data.size());
    Put(std::move(e));
  }

  void PutFloats(const std::string& name, std::span<const float> values,
                 std::optional<QuantParams> quant = std::nullopt) {
    WeightEntry e{name, DType::kF32, {static_cast<std::uint32_t>(values.size())}, {}, quant};
    e.data.resize(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) e.data[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    Put(std::move(e));
  }

  void PutText(const std::string& name, std::string_view text) {
    WeightEntry e{name, DType::kU8, {static_cast<std::uint32_t>(text.size())}, {}, std::nullopt};
    e.data.assign(text.begin(), text.end());
    Put(std::move(e));
  }

  // Rank-4 entry as a tensor (U8 entries come back as raw codes).
  Tensor GetTensor(std::string_view name) const {
    const WeightEntry& e = Get(name);
    Check(e.dims.size() == 4, ErrorCode::kBuild,
          "entry '" + e.name + "' has rank " + std::to_string(e.dims.size()) + ", expected 4");
    Tensor t = Tensor::Create({e.dims[0], e.dims[1], e.dims[2], e.dims[3]}, e.dtype);
    std::memcpy(RawData(t), e.data.data(), e.data.size());
    return t;
  }

  std::vector<float> GetFloats(std::string_view name) const {
    const WeightEntry& e = Get(name);
    Check(e.dtype == DType::kF32, ErrorCode::kBuild, "entry '" + e.name + "' is not f32");
    std::vector<float> out(e.data.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t{e.data[i * 4 + b]} << (8 * b);
      out[i] = std::bit_cast<float>(bits);
    }
    return out;
  }

  std::optional<std::string> GetText(std::string_view name) const {
    const WeightEntry* e = Find(name);
    if (e == nullptr || e->dtype != DType::kU8) return std::nullopt;
    return std::string(e->data.begin(), e->data.end());
  }

  friend bool operator==(const WeightStore& a, const WeightStore& b) {
    return a.entries_ == b.entries_;
  }

 private:
  static void Validate(const WeightEntry& e) {
    Check(!e.name.empty() && e.name.size() <= 0xFFFF, ErrorCode::kArgument,
          "entry name length must be in [1, 65535]");
    Check(!e.dims.empty() && e.dims.size() <= kTiwfMaxRank, ErrorCode::kArgument,
          "entry '" + e.name + "' rank must be in [1, 8]");
    Check(e.data.size() == e.element_count() * DTypeSize(e.dtype), ErrorCode::kArgument,
          "entry '" + e.name + "' payload length does not match its shape");
    if (e.quant) ValidateQuantParams(*e.quant);
  }

  static void* RawData(const Tensor& t) {
    switch (t.dtype()) {
      case DType::kF32: return t.data<float>();
      case DType::kU8: return t.data<std::uint8_t>();
      case DType::kI32: return t.data<std::int32_t>();
    }
    return nullptr;
  }

  std::vector<WeightEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

namespace internal {

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> Take() { return std::move(out_); }

 private:
  void Le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool Has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint64_t Le(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> Take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) Fail(ErrorCode::kIo, "read failed for '" + path.string() + "'");
  return bytes;
}

inline void WriteFile(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace internal

inline std::vector<std::uint8_t> SerializeWeights(const WeightStore& store) {
  internal::ByteWriter w;
  w.Bytes(kTiwfMagic.data(), kTiwfMagic.size());
  w.U32(kTiwfVersion);
  w.U32(static_cast<std::uint32_t>(store.size()));
  for (const WeightEntry& e : store.entries()) {
    w.U16(static_cast<std::uint16_t>(e.name.size()));
    w.Bytes(e.name.data(), e.name.size());
    w.U8(static_cast<std::uint8_t>(e.dtype));
    w.U8(static_cast<std::uint8_t>(e.dims.size()));
    for (std::uint32_t d : e.dims) w.U32(d);
    w.U8(e.quant ? 1 : 0);
    if (e.quant) {
      w.F32(e.quant->scale);
      w.U32(static_cast<std::uint32_t>(e.quant->zero_point));
    }
    w.U64(e.data.size());
    w.Bytes(e.data.data(), e.data.size());
  }
  return w.Take();
}

inline WeightStore ParseWeights(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes);
  if (!r.Has(4) || std::memcmp(bytes.data(), kTiwfMagic.data(), 4) != 0) {
    Fail(ErrorCode::kFormat, "not a TIWF file (bad magic)");
  }
  r.Take(4);
  Check(r.Has(8), ErrorCode::kCorruption, "truncated TIWF header");
  const auto version = static_cast<std::uint32_t>(r.Le(4));
  Check(version == kTiwfVersion, ErrorCode::kVersion,
        "TIWF version " + std::to_string(version) + " unsupported (expected " +
            std::to_string(kTiwfVersion) + ")");
  const auto count = static_cast<std::uint32_t>(r.Le(4));

  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string label = "entry #" + std::to_string(i);
    auto need = [&](std::size_t n) {
      if (!r.Has(n)) Fail(ErrorCode::kCorruption, "truncated record: " + label);
    };
    need(2);
    const auto name_len = static_cast<std::size_t>(r.Le(2));
    need(name_len);
    const auto name_bytes = r.Take(name_len);
    WeightEntry e;
    e.name.assign(name_bytes.begin(), name_bytes.end());
    label += " '" + e.name + "'";
    Check(!e.name.empty(), ErrorCode::kCorruption, "empty name in " + label);
    need(2);
    const auto dtype = static_cast<std::uint8_t>(r.Le(1));
    Check(dtype <= 2, ErrorCode::kCorruption, "unknown dtype code in " + label);
    e.dtype = static_cast<DType>(dtype);
    const auto rank = static_cast<std::size_t>(r.Le(1));
    Check(rank >= 1 && rank <= kTiwfMaxRank, ErrorCode::kCorruption, "bad rank in " + label);
    need(4 * rank);
    std::uint64_t elements = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      const auto dim = static_cast<std::uint32_t>(r.Le(4));
      e.dims.push_back(dim);
      Check(dim == 0 || elements <= (std::uint64_t{1} << 40) / dim, ErrorCode::kCorruption,
            "implausible shape in " + label);
      elements *= dim;
    }
    need(1);
    const auto has_quant = static_cast<std::uint8_t>(r.Le(1));
    Check(has_quant <= 1, ErrorCode::kCorruption, "bad quant flag in " + label);
    if (has_quant == 1) {
      need(8);
      QuantParams q;
      q.scale = std::bit_cast<float>(static_cast<std::uint32_t>(r.Le(4)));
      q.zero_point = static_cast<std::int32_t>(static_cast<std::uint32_t>(r.Le(4)));
      if (!(std::isfinite(q.scale) && q.scale > 0.0f) || q.zero_point < kQuantMin ||
          q.zero_point > kQuantMax) {
        Fail(ErrorCode::kCorruption, "invalid quant params in " + label);
      }
      e.quant = q;
    }
    need(8);
    const std::uint64_t byte_len = r.Le(8);
    Check(byte_len == elements * DTypeSize(e.dtype), ErrorCode::kCorruption,
          "payload length does not match shape in " + label);
    need(static_cast<std::size_t>(byte_len));
    const auto payload = r.Take(static_cast<std::size_t>(byte_len));
    e.data.assign(payload.begin(), payload.end());
    Check(store.Find(e.name) == nullptr, ErrorCode::kCorruption, "duplicate name in " + label);
    store.Add(std::move(e));
  }
  Check(r.remaining() == 0, ErrorCode::kCorruption,
        std::to_string(r.remaining()) + " trailing bytes after " + std::to_string(count) +
            " entries");
  return store;
}

inline void SaveWeights(const WeightStore& store, const std::filesystem::path& path) {
  internal::WriteFile(path, SerializeWeights(store));
}

inline WeightStore LoadWeights(const std::filesystem::path& path) {
  return ParseWeights(internal::ReadFile(path));
}

inline void PutCalibration(WeightStore& store, const std::string& key, float min_value,
                           float max_value) {
  const float range[2] = {min_value, max_value};
  store.PutFloats("calib." + key, range, ChooseQuantParamsForRange(min_value, max_value));
}

inline std::map<std::string, QuantParams> GetCalibration(const WeightStore& store) {
  std::map<std::string, QuantParams> out;
  constexpr std::string_view prefix = "calib.";
  for (const WeightEntry& e : store.entries()) {
    if (e.name.starts_with(prefix) && e.quant) out[e.name.substr(prefix.size())] = *e.quant;
  }
  return out;
}

// ---- Inputs ---------------------------------------------------------------

enum class ChannelOrder { kRGB, kBGR };

// means[i] is subtracted from engine channel i.
struct Preprocessing {
  std::array<float, 3> means = {104.0f, 117.0f, 123.0f};
  ChannelOrder order = ChannelOrder::kBGR;
};

inline Preprocessing PreprocessingFromStore(const WeightStore& store) {
  Preprocessing pp;
  if (store.Find("meta.means") != nullptr) {
    const auto means = store.GetFloats("meta.means");
    Check(means.size() == 3, ErrorCode::kFormat, "meta.means must hold 3 values");
    for (int i = 0; i < 3; ++i) pp.means[i] = means[i];
  }
  if (auto order = store.GetText("meta.channel_order")) {
    if (*order == "rgb") {
      pp.order = ChannelOrder::kRGB;
    } else if (*order == "bgr") {
      pp.order = ChannelOrder::kBGR;
    } else {
      Fail(ErrorCode::kFormat, "meta.channel_order must be 'rgb' or 'bgr'");
    }
  }
  return pp;
}

// Interleaved RGB bytes (row-major, 3 per pixel) -> planar f32, reordered to
// the engine channel order and mean-subtracted.
inline Tensor PreprocessRgb(std::span<const std::uint8_t> rgb, index_t size,
                            const Preprocessing& pp) {
  const auto pixels = static_cast<std::size_t>(size * size);
  Check(rgb.size() == pixels * 3, ErrorCode::kFormat,
        "raw input holds " + std::to_string(rgb.size()) + " bytes, expected " +
            std::to_string(pixels * 3));
  Tensor t = Tensor::Create({1, 3, size, size}, DType::kF32);
  for (index_t c = 0; c < 3; ++c) {
    const index_t src_channel = pp.order == ChannelOrder::kRGB ? c : 2 - c;
    auto plane = t.Plane<float>(0, c);
    for (std::size_t p = 0; p < pixels; ++p) {
      plane[p] = static_cast<float>(rgb[p * 3 + static_cast<std::size_t>(src_channel)]) -
                 pp.means[static_cast<std::size_t>(c)];
    }
  }
  return t;
}

// TIRAW001 payloads are preprocessed; TIF32001 payloads are taken as-is
// (already planar, preprocessed, engine channel order).
inline Tensor DecodeInput(std::span<const std::uint8_t> bytes, const Preprocessing& pp,
                          index_t size = kInputSize) {
  Check(bytes.size() >= 8, ErrorCode::kFormat, "input file shorter than its magic");
  const std::string_view magic(reinterpret_cast<const char*>(bytes.data()), 8);
  const auto payload = bytes.subspan(8);
  if (magic == kRawInputMagic) return PreprocessRgb(payload, size, pp);
  if (magic == kF32InputMagic) {
    const auto count = static_cast<std::size_t>(3 * size * size);
    Check(payload.size() == count * 4, ErrorCode::kFormat,
          "f32 input holds " + std::to_string(payload.size()) + " bytes, expected " +
              std::to_string(count * 4));
    Tensor t = Tensor::Create({1, 3, size, size}, DType::kF32);
    float* dst = t.data<float>();
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t{payload[i * 4 + b]} << (8 * b);
      dst[i] = std::bit_cast<float>(bits);
    }
    return t;
  }
  Fail(ErrorCode::kFormat, "unknown input magic");
}

inline Tensor LoadInput(const std::filesystem::path& path, const Preprocessing& pp,
                        index_t size = kInputSize) {
  return DecodeInput(internal::ReadFile(path), pp, size);
}

inline Tensor LoadInput(const std::filesystem::path& path, const std::array<float, 3>& means,
                        index_t size = kInputSize) {
  Preprocessing pp;
  pp.means = means;
  return LoadInput(path, pp, size);
}

inline void SaveRawInput(const std::filesystem::path& path, std::span<const std::uint8_t> rgb) {
  internal::ByteWriter w;
  w.Bytes(kRawInputMagic.data(), kRawInputMagic.size());
  w.Bytes(rgb.data(), rgb.size());
  internal::WriteFile(path, w.Take());
}

inline void SaveF32Input(const std::filesystem::path& path, const Tensor& t) {
  Check(t.dtype() == DType::kF32, ErrorCode::kArgument, "f32 input expected");
  internal::ByteWriter w;
  w.Bytes(kF32InputMagic.data(), kF32InputMagic.size());
  const Shape s = t.shape();
  for (index_t n = 0; n < s.n; ++n)
    for (index_t c = 0; c < s.c; ++c)
      for (float x : t.Plane<const float>(n, c)) w.F32(x);
  internal::WriteFile(path, w.Take());
}

}  // namespace tinyinfer

#endif  // TINYINFER_MODEL_IO_HPP_
