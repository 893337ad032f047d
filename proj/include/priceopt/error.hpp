#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace priceopt {

enum class ErrorCode {
  InvalidArgument,
  NonPositivePrice,
  SingularDesign,
  DimensionMismatch,
  ConstraintDimensionMismatch,
  NonContiguousPartition,
  TooLarge,
  Infeasible,
  NoFeasibleFound,
  SdpSolveFailure,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace priceopt
