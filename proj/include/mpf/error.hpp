#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpf {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  RankDeficient,
  DegreesOfFreedomTooLarge,
  ParseError,
  DuplicateRecord,
  UnknownVariable,
  EmptyDesign,
  InsufficientRows,
  IncompleteResponses,
  NonConvergence,
  AlignmentError,
  EmptyCalibrationSet,
  EmptyTestSet,
  SchemaError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Numerical failures (rank deficiency, solver divergence) as opposed to
/// malformed or mismatched input data.
bool is_numerical(ErrorCode code) noexcept;

/// Every failure raised by the library. `index()` carries the ahead, fold or
/// row number the failure is attached to, when there is one.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace mpf
