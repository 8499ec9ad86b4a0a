#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "outbreak/config.hpp"
#include "outbreak/embeddings.hpp"
#include "outbreak/features.hpp"
#include "outbreak/ingest.hpp"
#include "outbreak/weather.hpp"

namespace outbreak {

/// Reads and parses a disease CSV; row errors stay in the report.
DiseaseTable load_disease_table(const std::filesystem::path& path);

struct HealthData {
  std::vector<MergedHealthRecord> records;
  std::vector<std::string> errors;    // "<file>:<line>: <message>"
  std::vector<std::string> warnings;
};

/// Symptom profiles left-joined with demographics. Either file may be unset.
HealthData load_health_data(const Config& config);

Embedder make_embedder(const Config& config);

std::vector<DailyWeatherSummary> load_daily_summaries(const std::filesystem::path& path);

/// Inclusive list of calendar days.
std::vector<Date> date_range(Date from, Date to);

/// Examples for `records`, aligning each to the daily weather of its period.
std::vector<Example> examples_for(std::span<const DiseaseRecord> records,
                                  std::span<const DailyWeatherSummary> daily, const HealthData& health,
                                  const Embedder& embedder);

}  // namespace outbreak
