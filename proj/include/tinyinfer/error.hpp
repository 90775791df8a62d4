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

#ifndef TINYINFER_ERROR_HPP_
#define TINYINFER_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tinyinfer {

enum class ErrorCode {
  kSize,        // element count overflow or zero extent
  kBounds,      // index or slice outside a tensor
  kShape,       // operand shapes do not chain
  kArgument,    // bad scalar argument
  kFormat,      // wrong magic / payload size
  kCorruption,  // truncated or inconsistent record
  kVersion,     // unsupported container version
  kIo,          // filesystem failure
  kBuild,       // graph construction failure
  kReport,      // malformed timing report
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSize: return "size error";
    case ErrorCode::kBounds: return "bounds error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kArgument: return "argument error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kCorruption: return "corruption error";
    case ErrorCode::kVersion: return "version error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kBuild: return "build error";
    case ErrorCode::kReport: return "report error";
  }
  return "error";
}

// Every failure raised by the engine. The code is stable and is what the CLI
// maps to its exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Check(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace tinyinfer

#endif  // TINYINFER_ERROR_HPP_
