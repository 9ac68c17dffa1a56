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

#include "phonemode/error.h"

namespace phonemode {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kUnsupportedEncoding: return "unsupported encoding";
    case ErrorCode::kChannelCount: return "unsupported channel count";
    case ErrorCode::kTruncatedHeader: return "truncated header";
    case ErrorCode::kEmptyResult: return "empty result";
    case ErrorCode::kLength: return "length error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kUnknownToken: return "unknown token";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kDivergedTraining: return "diverged training";
    case ErrorCode::kUndefinedCorrelation: return "undefined correlation";
    case ErrorCode::kInventory: return "inventory error";
    case ErrorCode::kConfig: return "config error";
  }
  return "error";
}

}  // namespace phonemode
