#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kaczlab {

/// Failure categories shared by every module.
enum class ErrorKind {
  ZeroRow,
  NotSymmetric,
  NotSquare,
  DimensionMismatch,
  NonFinite,
  Inconsistent,
  IndexOutOfRange,
  BadBlockCount,
  BadSampling,
  TooLarge,
  NonPositiveConditioning,
  BadSpectrum,
  BadInterval,
  BadWeights,
  ConfigMismatch,
  MissingSpectrum,
  NotNormalized,
  BadDimensions,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kaczlab
