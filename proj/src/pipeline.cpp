#include "outbreak/pipeline.hpp"

#include <fstream>

namespace outbreak {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return in;
}

void collect(const ValidationReport& report, const std::filesystem::path& file, HealthData& out) {
  for (const auto& e : report.errors) {
    out.errors.push_back(file.string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  for (const auto& w : report.warnings) {
    out.warnings.push_back(file.string() + ":" + std::to_string(w.line) + ": " + w.message);
  }
}

}  // namespace

DiseaseTable load_disease_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_disease_table(in);
}

HealthData load_health_data(const Config& config) {
  HealthData out;
  std::vector<SymptomProfile> profiles;
  std::vector<DemographicsRecord> demographics;
  if (!config.symptom_file.empty()) {
    auto in = open_input(config.symptom_file);
    auto parsed = parse_symptom_records(in);
    collect(parsed.report, config.symptom_file, out);
    profiles = std::move(parsed.profiles);
  }
  if (!config.demographics_file.empty()) {
    auto in = open_input(config.demographics_file);
    auto parsed = parse_demographics_records(in);
    collect(parsed.report, config.demographics_file, out);
    demographics = std::move(parsed.records);
  }
  auto merged = merge_demographics(profiles, demographics);
  out.records = std::move(merged.records);
  out.warnings.insert(out.warnings.end(), merged.warnings.begin(), merged.warnings.end());
  return out;
}

Embedder make_embedder(const Config& config) {
  EmbedderOptions options{config.embed_fallback_dim, config.embed_seed};
  if (config.embedding_cache.empty()) return Embedder(options);
  return Embedder(options, load_cache(config.embedding_cache));
}

std::vector<DailyWeatherSummary> load_daily_summaries(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_daily_summaries(in);
}

std::vector<Date> date_range(Date from, Date to) {
  std::vector<Date> out;
  for (auto d = to_days(from); d <= to_days(to); d += std::chrono::days{1}) out.push_back(from_days(d));
  return out;
}

std::vector<Example> examples_for(std::span<const DiseaseRecord> records,
                                  std::span<const DailyWeatherSummary> daily, const HealthData& health,
                                  const Embedder& embedder) {
  const auto periods = summarize_periods(daily, records);
  return collect_examples(records, periods, health.records, embedder);
}

}  // namespace outbreak
