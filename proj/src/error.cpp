/* Copyright 2026 The locopipe Authors. All Rights Reserved.

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
#include "locopipe/error.hpp"

namespace locopipe {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kEmptyTape: return "EmptyTape";
    case ErrorCode::kMissingGradient: return "MissingGradient";
    case ErrorCode::kStepOutOfRange: return "StepOutOfRange";
    case ErrorCode::kInvalidArg: return "InvalidArg";
    case ErrorCode::kTooManyStages: return "TooManyStages";
    case ErrorCode::kPushAfterClose: return "PushAfterClose";
    case ErrorCode::kWorkerPanic: return "WorkerPanic";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kZeroDuration: return "ZeroDuration";
    case ErrorCode::kEmptyProfiles: return "EmptyProfiles";
    case ErrorCode::kInvalidMode: return "InvalidMode";
    case ErrorCode::kEmptyEvents: return "EmptyEvents";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace locopipe
