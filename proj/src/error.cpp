#include "strawkit/error.hpp"

namespace strawkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownClassCode: return "UnknownClassCode";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::MalformedPly: return "MalformedPly";
    case ErrorCode::DanglingEdgeIndex: return "DanglingEdgeIndex";
    case ErrorCode::UnlabeledCloud: return "UnlabeledCloud";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::RadiusTooSmall: return "RadiusTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroGroundTruth: return "ZeroGroundTruth";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoEdges: return "NoEdges";
    case ErrorCode::EmptySkeleton: return "EmptySkeleton";
    case ErrorCode::NoCrownPoints: return "NoCrownPoints";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MixedPlants: return "MixedPlants";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace strawkit
