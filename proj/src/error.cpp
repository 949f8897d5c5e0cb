#include "fnd/error.hpp"

#include <cstdio>

#include "fnd/fingerprint.hpp"

namespace fnd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnmappableLabel: return "UnmappableLabel";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorKind::NTooLarge: return "NTooLarge";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InconsistentDimension: return "InconsistentDimension";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::SpecValidation: return "SpecValidation";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace fnd
