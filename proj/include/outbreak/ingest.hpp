#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outbreak/date.hpp"
#include "outbreak/error.hpp"

namespace outbreak {

enum class ValueType { cases, deaths, rate_per_100k };

std::string_view to_string(ValueType type) noexcept;
std::optional<ValueType> parse_value_type(std::string_view text) noexcept;

/// One reporting-period observation of a disease.
struct DiseaseRecord {
  std::string disease;  // normalized
  Date period_start;
  Date period_end;  // inclusive
  std::string region;
  double value = 0.0;
  ValueType value_type = ValueType::cases;

  bool operator==(const DiseaseRecord&) const = default;
};

/// Row-level outcome of a parse or validation pass. `row_count` counts
/// accepted records only.
struct ValidationReport {
  std::size_t row_count = 0;
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

inline constexpr std::string_view kDiseaseHeader = "disease,period_start,period_end,region,value,value_type";

struct DiseaseTable {
  std::vector<DiseaseRecord> records;
  ValidationReport report;
};

/// Parses the canonical disease CSV. Bad rows land in report.errors and are
/// skipped; only a wrong or missing header throws (Errc::MissingHeader).
DiseaseTable parse_disease_table(std::istream& in);

/// Writes records in the canonical schema. Throws Errc::BadValue for text
/// fields that cannot be represented (commas, line breaks).
void write_disease_table(std::ostream& out, std::span<const DiseaseRecord> records);

/// Flags overlapping periods and gaps per (disease, region), and mixed
/// value types per disease. Issue lines are 1-based positions in `records`.
ValidationReport validate_dataset(std::span<const DiseaseRecord> records);

struct SymptomProfile {
  std::string code;
  std::string name;  // normalized
  std::vector<std::string> symptoms;  // normalized, never empty strings
  std::string description;
  std::string test_procedure;
  std::string medication_desc;
  std::vector<std::string> medications;
  std::string symptom_desc;

  bool operator==(const SymptomProfile&) const = default;
};

struct DemographicsRecord {
  std::string name;  // normalized
  std::string risk_years;
  std::string less_risk_years;
  std::string high_risk_race_ethnicity;
  std::string high_risk_gender;
  std::string less_risk_race_ethnicity;
  std::string less_risk_gender;

  bool operator==(const DemographicsRecord&) const = default;
};

struct MergedHealthRecord {
  SymptomProfile profile;
  std::optional<DemographicsRecord> demographics;
};

struct SymptomParse {
  std::vector<SymptomProfile> profiles;
  ValidationReport report;
};

struct DemographicsParse {
  std::vector<DemographicsRecord> records;
  ValidationReport report;
};

/// Blank-line separated `key: value` records. Keys outside the record
/// vocabulary warn; a line without a colon, a repeated key, or a missing
/// code/name rejects the record.
SymptomParse parse_symptom_records(std::istream& in);
DemographicsParse parse_demographics_records(std::istream& in);

struct MergeResult {
  std::vector<MergedHealthRecord> records;
  std::vector<std::string> warnings;
};

/// Left join of profiles with demographics on normalized name. Throws
/// Errc::DuplicateKey when a demographics name repeats.
MergeResult merge_demographics(std::span<const SymptomProfile> profiles,
                               std::span<const DemographicsRecord> demographics);

}  // namespace outbreak
