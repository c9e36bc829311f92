// SPDX-License-Identifier: Apache-2.0

#include "asem/error.hpp"

namespace asem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::CacheMismatch: return "CacheMismatch";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::DanglingPairReference: return "DanglingPairReference";
    case ErrorCode::DuplicateTextPairing: return "DuplicateTextPairing";
    case ErrorCode::UnpairedRow: return "UnpairedRow";
    case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace asem
