#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabsynth {

enum class ErrorKind {
  // input / ingestion
  EmptyFile,
  MissingColumn,
  MissingValue,
  UnknownCategory,
  UnparseableNumeric,
  VocabularyOverflow,
  InvalidSchema,
  SchemaNotFound,
  DataNotFound,
  SchemaMismatch,
  InvalidFraction,
  InvalidArgument,
  // transforms
  ConstantColumn,
  // network / diffusion
  OddDimension,
  InvalidRange,
  StepOutOfRange,
  NonFiniteLoss,
  // evaluation
  EmptyColumn,
  EmptyDataset,
  MissingLabelColumn,
  // persistence / cli
  UnknownLabel,
  CorruptCheckpoint,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Exit code the command-line tool reports for an error of this kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tabsynth
