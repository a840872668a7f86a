#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace automsc {

enum class ErrorKind {
  // corpus
  MalformedCode,
  MalformedField,
  CsvSyntax,
  DuplicateId,
  EmptyLabels,
  DuplicateKey,
  UnknownId,
  // features
  EmptyCorpus,
  // classifier
  InvalidHyperparams,
  SingleClass,
  DimensionMismatch,
  NonFinite,
  NoReferences,
  VersionMismatch,
  CorruptFile,
  // evaluation
  LengthMismatch,
  AllClassesFiltered,
  MissingScore,
  UnknownDe,
  TooFewPerClass,
  // plumbing
  Io,
  Usage,
};

/// Groups error kinds into the families the command-line tool reports as
/// distinct exit codes.
enum class ErrorFamily { Usage = 2, Io = 3, Data = 4, Training = 5, Model = 6, Evaluation = 7 };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorFamily family_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorFamily family() const noexcept { return family_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace automsc
