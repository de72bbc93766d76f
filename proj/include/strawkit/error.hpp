#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strawkit {

enum class ErrorCode {
  MalformedRecord,
  UnknownClassCode,
  EmptyCloud,
  MalformedPly,
  DanglingEdgeIndex,
  UnlabeledCloud,
  EmptyAfterFilter,
  InvalidArgument,
  DegenerateGeometry,
  RadiusTooSmall,
  LengthMismatch,
  ZeroGroundTruth,
  TooFewPoints,
  NoEdges,
  EmptySkeleton,
  NoCrownPoints,
  EmptyInput,
  MixedPlants,
  DuplicateDate,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace strawkit
