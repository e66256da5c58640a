#include "gfbeam/errors.hpp"

namespace gfb {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCoincident: return "COINCIDENT";
    case ErrorCode::kOnReflector: return "ON_REFLECTOR";
    case ErrorCode::kZeroGf: return "ZERO_GF";
    case ErrorCode::kNotABin: return "NOT_A_BIN";
    case ErrorCode::kTooShort: return "TOO_SHORT";
    case ErrorCode::kFreqMismatch: return "FREQ_MISMATCH";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kFormatMismatch: return "FORMAT_MISMATCH";
    case ErrorCode::kNonfiniteValue: return "NONFINITE_VALUE";
    case ErrorCode::kBoundary: return "BOUNDARY";
    case ErrorCode::kFdStep: return "FD_STEP";
    case ErrorCode::kIndexRange: return "INDEX_RANGE";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace gfb
