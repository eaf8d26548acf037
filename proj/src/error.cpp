#include "emdtex/error.hpp"

namespace emdtex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewExtrema: return "TooFewExtrema";
    case ErrorCode::kSignalTooShort: return "SignalTooShort";
    case ErrorCode::kFieldTooSmall: return "FieldTooSmall";
    case ErrorCode::kBadWindow: return "BadWindow";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kGroupOutOfRange: return "GroupOutOfRange";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Unknown";
}

}  // namespace emdtex
