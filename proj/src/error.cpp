#include "outbreak/error.hpp"

namespace outbreak {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DateMismatch: return "DateMismatch";
    case Errc::NegativeSpeed: return "NegativeSpeed";
    case Errc::OutOfRangeDay: return "OutOfRangeDay";
    case Errc::ProviderUnavailable: return "ProviderUnavailable";
    case Errc::EmptyDay: return "EmptyDay";
    case Errc::BadMagic: return "BadMagic";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::UnnormalizedKey: return "UnnormalizedKey";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DuplicateVocabulary: return "DuplicateVocabulary";
    case Errc::BlockDimMismatch: return "BlockDimMismatch";
    case Errc::MissingWeather: return "MissingWeather";
    case Errc::BadArchitecture: return "BadArchitecture";
    case Errc::TraceMismatch: return "TraceMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::UndefinedR2: return "UndefinedR2";
    case Errc::UnknownDisease: return "UnknownDisease";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::IoFailure: return "IoFailure";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::BadValue: return "BadValue";
  }
  return "Unknown";
}

}  // namespace outbreak
