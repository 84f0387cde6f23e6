#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smiley {

enum class ErrorCode {
  ParseError,
  EmptyTaxonomy,
  DuplicateCategory,
  EncodingError,
  MalformedRecord,
  InvalidRange,
  OutOfRange,
  ShapeError,
  NumericError,
  LabelError,
  AugmentError,
  AnnotationError,
  CompatibilityError,
  NoGroundTruth,
  EmptyBatch,
  DegenerateClass,
  FoldError,
  InvalidArgument,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smiley
