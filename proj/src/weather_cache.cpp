#include <fstream>
#include <thread>

#include "outbreak/io.hpp"
#include "outbreak/weather.hpp"

namespace outbreak {

namespace {

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::string path_segment(const std::string& station) {
  std::string seg = station;
  for (char& c : seg) {
    if (c == '/' || c == '\\') c = '_';
  }
  return seg;
}

std::optional<std::vector<WeatherObservation>> read_cache_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    auto parsed = parse_observations(in);
    if (!parsed.report.ok()) return std::nullopt;
    return std::move(parsed.observations);
  } catch (const Error&) {
    return std::nullopt;  // unreadable entry; refetch
  }
}

}  // namespace

StationKey::StationKey(std::string k) : key(std::move(k)) {
  if (key.empty()) throw Error(Errc::BadValue, "station key must be non-empty");
}

std::vector<WeatherObservation> DirectoryProvider::fetch(const StationKey& station, Date date) {
  const auto path = cache_path(root_, station, date);
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  auto parsed = parse_observations(in);
  if (!parsed.report.ok()) {
    const auto& e = parsed.report.errors.front();
    throw Error(Errc::MalformedLine, path.string() + " line " + std::to_string(e.line) + ": " + e.message);
  }
  return std::move(parsed.observations);
}

RateLimiter::RateLimiter(double requests_per_second, Sleeper sleep)
    : sleep_(sleep ? std::move(sleep) : Sleeper(default_sleep)) {
  if (requests_per_second > 0.0) {
    interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / requests_per_second));
  }
}

void RateLimiter::acquire() {
  std::lock_guard lock(mutex_);
  if (interval_ == Clock::duration::zero()) return;
  auto now = Clock::now();
  if (last_ && now < *last_ + interval_) {
    sleep_(std::chrono::ceil<std::chrono::milliseconds>(*last_ + interval_ - now));
    now = std::max(Clock::now(), *last_ + interval_);
  }
  last_ = now;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const StationKey& station, Date date) {
  return cache_dir / path_segment(station.key) / (format_date(date) + ".tsv");
}

WeatherFetcher::WeatherFetcher(ObservationProvider& provider, std::filesystem::path cache_dir, RetryPolicy retry,
                               double requests_per_second, Sleeper sleep)
    : provider_(provider),
      cache_dir_(std::move(cache_dir)),
      retry_(retry),
      limiter_(requests_per_second, sleep),
      sleep_(sleep ? std::move(sleep) : Sleeper(default_sleep)) {}

std::mutex& WeatherFetcher::key_mutex(const std::string& key) {
  std::lock_guard lock(map_mutex_);
  auto& slot = key_mutexes_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::vector<WeatherObservation> WeatherFetcher::fetch_observations(const StationKey& station, Date date) {
  const auto path = cache_path(cache_dir_, station, date);
  std::lock_guard lock(key_mutex(path.string()));

  auto empty_day = [&] {
    return Error(Errc::EmptyDay, "no observations for " + station.key + " on " + format_date(date));
  };

  if (auto cached = read_cache_file(path)) {
    if (cached->empty()) throw empty_day();
    return std::move(*cached);
  }

  auto delay = retry_.initial_delay;
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    try {
      ++provider_calls_;
      auto obs = provider_.fetch(station, date);
      io::atomic_write(path, [&](std::ostream& out) { write_observations(out, obs); });
      if (obs.empty()) throw empty_day();
      return obs;
    } catch (const TransientProviderError& e) {
      if (attempt >= retry_.retries) {
        throw Error(Errc::ProviderUnavailable, station.key + " " + format_date(date) + " after " +
                                                   std::to_string(attempt + 1) + " attempts: " + e.what());
      }
      sleep_(delay);
      delay *= 2;
    }
  }
}

}  // namespace outbreak
