// Copyright 2026 The skewent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewent {

enum class ErrorKind {
  NotSymmetric,
  NotPositiveDefinite,
  DimensionMismatch,
  InvalidParameter,
  OutOfSupport,
  Unsupported,
  InvalidPartition,
  MismatchedLocationScale,
  DimensionTooLarge,
  NonConvergent,
  SupportMismatch,
  Parse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::OutOfSupport: return "OutOfSupport";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::InvalidPartition: return "InvalidPartition";
    case ErrorKind::MismatchedLocationScale: return "MismatchedLocationScale";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        message_(what) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

  /// Validation-type failures (bad input) as opposed to numerical ones.
  [[nodiscard]] bool is_validation() const noexcept {
    switch (kind_) {
      case ErrorKind::NonConvergent:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// NotPositiveDefinite with the index of the first failing pivot.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(std::size_t pivot, double value, const std::string& context)
      : Error(ErrorKind::NotPositiveDefinite,
              context + " (pivot " + std::to_string(pivot) + " = " + std::to_string(value) + ")"),
        pivot_(pivot),
        value_(value) {}

  [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }
  [[nodiscard]] double pivot_value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

}  // namespace skewent
