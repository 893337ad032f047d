#include "priceopt/error.hpp"

namespace priceopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConstraintDimensionMismatch: return "ConstraintDimensionMismatch";
    case ErrorCode::NonContiguousPartition: return "NonContiguousPartition";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoFeasibleFound: return "NoFeasibleFound";
    case ErrorCode::SdpSolveFailure: return "SdpSolveFailure";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace priceopt
