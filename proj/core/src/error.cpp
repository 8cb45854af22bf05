// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/error.hpp"

namespace tcts {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kMissingReferences: return "MissingReferences";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kModeViolation: return "ModeViolation";
    case ErrorCode::kDegenerateCaption: return "DegenerateCaption";
    case ErrorCode::kDataContract: return "DataContract";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tcts
