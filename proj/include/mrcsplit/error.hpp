#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrcsplit {

enum class ErrorKind {
  MalformedFile,
  SchemaViolation,
  EmptyDataset,
  EmptyGolds,
  IndexOutOfRange,
  WrongStyle,
  KindMismatch,
  EmptyQuestion,
  MissingProjection,
  EmptyTarget,
  EmptyContext,
  UnknownItemIds,
  MissingPredictions,
  CoverageGap,
  VariantMismatch,
  SubsetTooSmall,
  UnknownTaskId,
  EmptyRecords,
  DegenerateVector,
  LengthMismatch,
  ProvenanceMismatch,
  CollectionOpen,
  BindFailure,
  StoreUnwritable,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyGolds: return "EmptyGolds";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::WrongStyle: return "WrongStyle";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::EmptyQuestion: return "EmptyQuestion";
    case ErrorKind::MissingProjection: return "MissingProjection";
    case ErrorKind::EmptyTarget: return "EmptyTarget";
    case ErrorKind::EmptyContext: return "EmptyContext";
    case ErrorKind::UnknownItemIds: return "UnknownItemIds";
    case ErrorKind::MissingPredictions: return "MissingPredictions";
    case ErrorKind::CoverageGap: return "CoverageGap";
    case ErrorKind::VariantMismatch: return "VariantMismatch";
    case ErrorKind::SubsetTooSmall: return "SubsetTooSmall";
    case ErrorKind::UnknownTaskId: return "UnknownTaskId";
    case ErrorKind::EmptyRecords: return "EmptyRecords";
    case ErrorKind::DegenerateVector: return "DegenerateVector";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorKind::CollectionOpen: return "CollectionOpen";
    case ErrorKind::BindFailure: return "BindFailure";
    case ErrorKind::StoreUnwritable: return "StoreUnwritable";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can emit a structured error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // what() without the kind prefix
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace mrcsplit
