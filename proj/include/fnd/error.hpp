#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fnd {

enum class ErrorKind {
  MissingColumn,
  UnmappableLabel,
  EmptyCorpus,
  CorpusTooSmall,
  NTooLarge,
  EmptyInput,
  InconsistentDimension,
  NoOverlap,
  SingleClassInput,
  DivergedLoss,
  ShapeMismatch,
  RepresentationMismatch,
  LengthMismatch,
  Empty,
  SpecValidation,
  MissingFile,
  Parse,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. The kind is stable and machine-checkable; the
/// message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fnd
