#pragma once

#include <stdexcept>
#include <string>

namespace emdg {

enum class ErrorKind {
  AllZeroMass,
  IndexOutOfRange,
  InvalidWeight,
  VocabularyMismatch,
  LabelCountMismatch,
  DimensionMismatch,
  ShapeMismatch,
  InstanceTooLarge,
  IterationOutOfRange,
  EllTooLarge,
  ListTooShort,
  BadMagic,
  CountMismatch,
  TruncatedFile,
  MalformedHeader,
  DimensionDrift,
  NonFiniteValue,
  VersionMismatch,
  ChecksumFailure,
  IoFailure,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AllZeroMass: return "AllZeroMass";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorKind::LabelCountMismatch: return "LabelCountMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::IterationOutOfRange: return "IterationOutOfRange";
    case ErrorKind::EllTooLarge: return "EllTooLarge";
    case ErrorKind::ListTooShort: return "ListTooShort";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::DimensionDrift: return "DimensionDrift";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::ChecksumFailure: return "ChecksumFailure";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

class EmdgError : public std::runtime_error {
 public:
  EmdgError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  throw EmdgError(kind, message);
}

}  // namespace emdg
