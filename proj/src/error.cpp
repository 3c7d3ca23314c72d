#include "tabsynth/error.hpp"

namespace tabsynth {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::UnparseableNumeric: return "UnparseableNumeric";
    case ErrorKind::VocabularyOverflow: return "VocabularyOverflow";
    case ErrorKind::InvalidSchema: return "InvalidSchema";
    case ErrorKind::SchemaNotFound: return "SchemaNotFound";
    case ErrorKind::DataNotFound: return "DataNotFound";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::InvalidFraction: return "InvalidFraction";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::InvalidRange: return "InvalidRange";
    case ErrorKind::StepOutOfRange: return "StepOutOfRange";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteLoss: return 3;
    case ErrorKind::CorruptCheckpoint: return 4;
    default: return 2;
  }
}

}  // namespace tabsynth
