#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topoalign {

enum class ErrorKind {
  AllMasked,
  DimMismatch,
  DegenerateTarget,
  LayoutError,
  IndexError,
  UnknownTopic,
  NonFiniteLoss,
  TooFewPoints,
  EmptyTemplateSet,
  LabelerUnavailable,
  SingleLabelCloud,
  MissingScore,
  InvalidArgument,
  // file formats
  BadMagic,
  TruncatedPayload,
  LabelOutOfRange,
  MalformedRecord,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::AllMasked: return "AllMasked";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::DegenerateTarget: return "DegenerateTarget";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::UnknownTopic: return "UnknownTopic";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::EmptyTemplateSet: return "EmptyTemplateSet";
    case ErrorKind::LabelerUnavailable: return "LabelerUnavailable";
    case ErrorKind::SingleLabelCloud: return "SingleLabelCloud";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

// All library failures surface as this exception; `kind()` is stable API.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace topoalign
