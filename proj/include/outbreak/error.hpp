#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace outbreak {

enum class Errc {
  // ingest
  MissingHeader,
  DuplicateKey,
  // weather
  EmptyInput,
  DateMismatch,
  NegativeSpeed,
  OutOfRangeDay,
  ProviderUnavailable,
  EmptyDay,
  // embeddings
  BadMagic,
  DimMismatch,
  NonFiniteValue,
  MalformedLine,
  UnnormalizedKey,
  // features
  RaggedRows,
  LengthMismatch,
  DuplicateVocabulary,
  BlockDimMismatch,
  MissingWeather,
  // neuralnet
  BadArchitecture,
  TraceMismatch,
  ShapeMismatch,
  EmptyDataset,
  NonFiniteLoss,
  BadCheckpoint,
  // evaluate
  UndefinedR2,
  UnknownDisease,
  EmptyTrainingSet,
  IoFailure,
  // config
  UnknownKey,
  BadValue,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception. Every fatal condition carries a code so callers
/// (and tests) can branch on the kind of failure rather than the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by training when a batch loss stops being finite.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(std::size_t epoch, const std::string& message)
      : Error(Errc::NonFiniteLoss, message), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// A 1-based line-anchored diagnostic.
struct Issue {
  std::size_t line = 0;
  std::string message;

  bool operator==(const Issue&) const = default;
};

}  // namespace outbreak
