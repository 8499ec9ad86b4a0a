#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outbreak/date.hpp"
#include "outbreak/error.hpp"
#include "outbreak/ingest.hpp"

namespace outbreak {

/// Station-local wall-clock time plus the UTC offset it was reported with.
struct LocalTimestamp {
  Date date;
  std::chrono::seconds time_of_day{0};
  std::chrono::minutes utc_offset{0};

  bool operator==(const LocalTimestamp&) const = default;
};

/// `YYYY-MM-DDTHH:MM[:SS](Z|±HH:MM)`.
std::optional<LocalTimestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(const LocalTimestamp& ts);

/// One raw reading. Numeric fields are optional: a blank cell means the
/// reading is absent and the observation is left out of that field's mean.
struct WeatherObservation {
  LocalTimestamp timestamp;
  std::optional<double> temp_c;
  std::string phrase;
  std::optional<double> wind_mph;
  std::optional<double> wind_deg;
  std::string wind_dir;
  std::optional<double> pressure;  // hPa
  std::optional<double> dew_point_c;
  std::optional<double> heat_index_c;
  std::optional<double> visibility_km;
  std::string cloud_cover;
  std::optional<double> uv_index;

  bool operator==(const WeatherObservation&) const = default;
};

/// The 14-column daily aggregate. A numeric field with no readings for the
/// day is NaN; a categorical one is empty.
struct DailyWeatherSummary {
  Date date;
  double avg_temp_c = 0.0;
  double avg_temp_f = 0.0;
  std::string top_phrase;
  double avg_wind_mph = 0.0;
  double avg_wind_kph = 0.0;
  double avg_wind_deg = 0.0;
  std::string top_wind_dir;
  double avg_pressure = 0.0;
  double avg_dew_point = 0.0;
  double avg_heat_index = 0.0;
  double avg_visibility = 0.0;
  std::string top_cloud_cover;
  double avg_uv_index = 0.0;
};

struct PeriodWeatherSummary {
  Date period_start;
  Date period_end;
  double avg_temp_c = 0.0;
  double avg_temp_f = 0.0;
  std::string top_phrase;
  double avg_wind_mph = 0.0;
  double avg_wind_kph = 0.0;
  double avg_wind_deg = 0.0;
  std::string top_wind_dir;
  double avg_pressure = 0.0;
  double avg_dew_point = 0.0;
  double avg_heat_index = 0.0;
  double avg_visibility = 0.0;
  std::string top_cloud_cover;
  double avg_uv_index = 0.0;
  std::size_t day_count = 0;
};

double celsius_to_fahrenheit(double c) noexcept;

/// Throws Errc::NegativeSpeed for v < 0.
double mph_to_kph(double v);

/// Most frequent value; ties go to the lexicographically smallest.
/// Throws Errc::EmptyInput.
std::string mode_categorical(std::span<const std::string> values);

/// Field-wise means and modes over one station-local day. Throws
/// Errc::EmptyInput or Errc::DateMismatch.
DailyWeatherSummary aggregate_day(std::span<const WeatherObservation> obs, Date date);

/// Unweighted means of the daily values, modes over the daily modes.
/// Throws Errc::EmptyInput or Errc::OutOfRangeDay.
PeriodWeatherSummary aggregate_period(std::span<const DailyWeatherSummary> days, Date period_start,
                                      Date period_end);

using PeriodKey = std::pair<Date, Date>;
using PeriodWeatherIndex = std::map<PeriodKey, PeriodWeatherSummary>;

/// Aggregates the daily summaries falling inside each distinct record
/// period. Throws Errc::MissingWeather naming the first uncovered period.
PeriodWeatherIndex summarize_periods(std::span<const DailyWeatherSummary> days,
                                     std::span<const DiseaseRecord> records);

// --- file formats ----------------------------------------------------------

inline constexpr std::string_view kObservationHeader =
    "timestamp\ttemp_c\tphrase\twind_mph\twind_deg\twind_dir\tpressure\tdew_point_c\theat_index_c\t"
    "visibility_km\tcloud_cover\tuv_index";

struct ObservationParse {
  std::vector<WeatherObservation> observations;
  ValidationReport report;
};

/// Raw observation TSV (fixture and cache format). Throws Errc::MissingHeader
/// on a bad header; row problems are collected in the report.
ObservationParse parse_observations(std::istream& in);
void write_observations(std::ostream& out, std::span<const WeatherObservation> obs);

/// Daily summary TSV with the 14 columns in their canonical order.
void write_daily_summaries(std::ostream& out, std::span<const DailyWeatherSummary> days);
std::vector<DailyWeatherSummary> read_daily_summaries(std::istream& in);

// --- acquisition -------------------------------------------------------------

struct StationKey {
  std::string key;

  explicit StationKey(std::string k);
  bool operator==(const StationKey&) const = default;
};

/// Thrown by providers for failures worth retrying.
class TransientProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of raw observations for one station-local day. Implementations
/// may be live transports or fixture directories.
class ObservationProvider {
 public:
  virtual ~ObservationProvider() = default;
  virtual std::vector<WeatherObservation> fetch(const StationKey& station, Date date) = 0;
};

/// Serves `<root>/<station>/<YYYY-MM-DD>.tsv`; a missing file is an empty day.
class DirectoryProvider : public ObservationProvider {
 public:
  explicit DirectoryProvider(std::filesystem::path root) : root_(std::move(root)) {}
  std::vector<WeatherObservation> fetch(const StationKey& station, Date date) override;

 private:
  std::filesystem::path root_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Minimum spacing between provider requests.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  /// `requests_per_second <= 0` disables limiting.
  explicit RateLimiter(double requests_per_second, Sleeper sleep = {});
  void acquire();

 private:
  std::mutex mutex_;
  Clock::duration interval_{};
  std::optional<Clock::time_point> last_;
  Sleeper sleep_;
};

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds initial_delay{1000};
};

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const StationKey& station, Date date);

/// Cache-first observation access. Concurrent callers for the same
/// (station, date) are serialized so at most one provider request is made.
class WeatherFetcher {
 public:
  WeatherFetcher(ObservationProvider& provider, std::filesystem::path cache_dir, RetryPolicy retry = {},
                 double requests_per_second = 0.0, Sleeper sleep = {});

  /// Throws Errc::ProviderUnavailable after exhausting retries with no cache
  /// entry, and Errc::EmptyDay for days with no observations.
  std::vector<WeatherObservation> fetch_observations(const StationKey& station, Date date);

  std::size_t provider_calls() const noexcept { return provider_calls_; }

 private:
  std::mutex& key_mutex(const std::string& key);

  ObservationProvider& provider_;
  std::filesystem::path cache_dir_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  Sleeper sleep_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
  std::atomic<std::size_t> provider_calls_{0};
};

}  // namespace outbreak
