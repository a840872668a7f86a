#include "automsc/error.hpp"

namespace automsc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedCode: return "MalformedCode";
    case ErrorKind::MalformedField: return "MalformedField";
    case ErrorKind::CsvSyntax: return "CsvSyntax";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyLabels: return "EmptyLabels";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::UnknownId: return "UnknownId";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoReferences: return "NoReferences";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::AllClassesFiltered: return "AllClassesFiltered";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::UnknownDe: return "UnknownDe";
    case ErrorKind::TooFewPerClass: return "TooFewPerClass";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorFamily family_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::InvalidHyperparams:
      return ErrorFamily::Usage;
    case ErrorKind::Io:
      return ErrorFamily::Io;
    case ErrorKind::SingleClass:
    case ErrorKind::NonFinite:
    case ErrorKind::EmptyCorpus:
      return ErrorFamily::Training;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::VersionMismatch:
    case ErrorKind::CorruptFile:
      return ErrorFamily::Model;
    case ErrorKind::LengthMismatch:
    case ErrorKind::AllClassesFiltered:
    case ErrorKind::MissingScore:
    case ErrorKind::UnknownDe:
    case ErrorKind::TooFewPerClass:
      return ErrorFamily::Evaluation;
    default:
      return ErrorFamily::Data;
  }
}

}  // namespace automsc
