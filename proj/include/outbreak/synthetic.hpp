#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "outbreak/ingest.hpp"
#include "outbreak/weather.hpp"

// Deterministic fixture generator: hourly station weather, monthly disease
// series that are a smooth function of the period weather plus a per-disease
// offset keyed on the disease-name embedding, and matching health records.
namespace outbreak::synthetic {

struct Options {
  int first_year = 2019;
  int years = 4;
  std::uint64_t seed = 7;
  std::size_t embed_dim = 64;      // must match the pipeline's fallback dim
  std::uint64_t embed_seed = 0;    // must match the pipeline's embed seed
  std::string station = "VIDP:9:IN";
  std::string region = "delhi";
};

/// 24 hourly readings for one day, in local time (+05:30).
std::vector<WeatherObservation> day_observations(Date date, const Options& opts);

/// aggregate_day over day_observations for every day of the range.
std::vector<DailyWeatherSummary> daily_weather(const Options& opts);

/// Nine disease names; the last one is the usual held-out series.
const std::vector<std::string>& disease_names();

std::vector<SymptomProfile> symptom_profiles();
std::vector<DemographicsRecord> demographics();

/// Weather-driven part of the target for one period.
double weather_response(const PeriodWeatherSummary& w);

/// Disease-specific shift, a linear function of the name's hash embedding.
double disease_offset(const std::string& disease, const Options& opts);

/// One monthly record per disease per month, all diseases in name order.
std::vector<DiseaseRecord> disease_records(std::span<const DailyWeatherSummary> daily, const Options& opts);

struct Dataset {
  std::vector<DailyWeatherSummary> daily;
  std::vector<DiseaseRecord> records;
  std::vector<SymptomProfile> profiles;
  std::vector<DemographicsRecord> demographics;
};

Dataset generate(const Options& opts = {});

struct FixtureFiles {
  bool observations = true;   // weather/<station>/<date>.tsv provider tree
  bool daily_summary = true;  // pre-aggregated daily_weather.tsv
};

/// Writes diseases.csv, symptoms.txt, demographics.txt, the requested
/// weather files and an outbreak.cfg wiring them together. `extra_config`
/// lines are appended verbatim to the config.
void write_fixtures(const std::filesystem::path& dir, const Options& opts = {}, FixtureFiles files = {},
                    const std::vector<std::string>& extra_config = {});

}  // namespace outbreak::synthetic
