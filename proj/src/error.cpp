#include "smiley/error.hpp"

namespace smiley {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyTaxonomy: return "EmptyTaxonomy";
    case ErrorCode::DuplicateCategory: return "DuplicateCategory";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::NumericError: return "NumericError";
    case ErrorCode::LabelError: return "LabelError";
    case ErrorCode::AugmentError: return "AugmentError";
    case ErrorCode::AnnotationError: return "AnnotationError";
    case ErrorCode::CompatibilityError: return "CompatibilityError";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::FoldError: return "FoldError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace smiley
