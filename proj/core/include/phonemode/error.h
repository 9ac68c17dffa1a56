/* Copyright 2026 The Phonemode Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PHONEMODE_ERROR_H_
#define PHONEMODE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace phonemode {

enum class ErrorCode {
  kIo,
  kUnsupportedEncoding,
  kChannelCount,
  kTruncatedHeader,
  kEmptyResult,
  kLength,
  kParse,
  kUnknownToken,
  kInvalidArgument,
  kDimensionMismatch,
  kDivergedTraining,
  kUndefinedCorrelation,
  kInventory,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported as Error. The code
// lets callers (and tests) distinguish failure classes without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // Message without the code prefix, for re-wrapping with more context.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace phonemode

#endif  // PHONEMODE_ERROR_H_
