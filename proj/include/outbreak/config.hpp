#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "outbreak/date.hpp"
#include "outbreak/neuralnet.hpp"

namespace outbreak {

/// Flat run configuration. Paths are resolved against the directory of the
/// config file; empty paths mean "not configured".
struct Config {
  HyperParams hp;
  std::vector<std::size_t> hidden_sizes{256, 128, 64, 32};
  std::size_t embed_fallback_dim = 64;
  std::uint64_t embed_seed = 0;
  std::string station = "VIDP:9:IN";
  double requests_per_second = 5.0;
  std::optional<Date> weather_start;
  std::optional<Date> weather_end;

  std::filesystem::path disease_file;
  std::filesystem::path symptom_file;
  std::filesystem::path demographics_file;
  std::filesystem::path weather_source_dir;
  std::filesystem::path weather_cache_dir;
  std::filesystem::path daily_weather_file;
  std::filesystem::path embedding_cache;
  std::filesystem::path output_dir;
};

/// `key = value` lines; `#` comments and blank lines are ignored. Throws
/// Errc::UnknownKey (with line), Errc::BadValue (with key) or
/// Errc::MalformedLine.
Config parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// Inverse of parse_config for the keys that differ from defaults.
void write_config(std::ostream& out, const Config& config);

}  // namespace outbreak
