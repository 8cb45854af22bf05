// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcts {

enum class ErrorCode {
  kEmptyText,
  kMissingReferences,
  kShapeMismatch,
  kNonFinite,
  kModeViolation,
  kDegenerateCaption,
  kDataContract,
  kConfig,
  kIncompatibleCheckpoint,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// the CLI can map it onto a process exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace tcts
