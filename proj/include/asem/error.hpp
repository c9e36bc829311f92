// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asem {

enum class ErrorCode {
  ShapeMismatch,
  NonFiniteValue,
  ZeroNormRow,
  OutOfRange,
  BatchTooSmall,
  CacheMismatch,
  EpochOutOfRange,
  EmptyCandidates,
  MissingFile,
  BadFormat,
  DanglingPairReference,
  DuplicateTextPairing,
  UnpairedRow,
  InfeasibleConstraint,
  NonFiniteLoss,
  InvalidConfig,
  DimMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code and a
/// message naming the offending entry.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace asem
