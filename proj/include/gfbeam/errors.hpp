#ifndef GFBEAM_ERRORS_HPP
#define GFBEAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfb {

enum class ErrorCode {
  kCoincident,        // source and receiver closer than 1e-9 m
  kOnReflector,       // source/receiver on a reflector plane
  kZeroGf,            // zero-magnitude Green's function entry
  kNotABin,           // frequency is not an exact DFT bin
  kTooShort,          // record shorter than one Welch block
  kFreqMismatch,      // CSM bin does not match a GF frequency
  kDimensionMismatch, // tensor/matrix dimensions disagree
  kFormatMismatch,    // wrong magic or version in a binary file
  kNonfiniteValue,    // NaN/Inf where a finite value is required
  kBoundary,          // grid-interior operation requested at the boundary
  kFdStep,            // fd step is not a grid-spacing multiple
  kIndexRange,        // index outside grid/array bounds
  kConfig,            // invalid configuration
  kIo,                // file could not be read/written
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gfb

#endif
