#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "outbreak/weather.hpp"
#include "test_util.hpp"

using namespace outbreak;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

WeatherObservation obs_at(Date date, int hour, double temp) {
  WeatherObservation o;
  o.timestamp = {date, std::chrono::hours{hour}, std::chrono::minutes{330}};
  o.temp_c = temp;
  o.phrase = "Fair";
  o.wind_mph = 5.0;
  o.wind_deg = 90.0;
  o.wind_dir = "E";
  o.pressure = 1010.0;
  o.dew_point_c = 10.0;
  o.heat_index_c = temp;
  o.visibility_km = 4.0;
  o.cloud_cover = "Clear";
  o.uv_index = 1.0;
  return o;
}

std::string brute_mode(const std::vector<std::string>& values) {
  std::vector<std::pair<std::string, int>> counts;
  for (const auto& v : values) {
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == v; });
    if (it == counts.end()) counts.emplace_back(v, 1);
    else ++it->second;
  }
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return counts.front().first;
}

Error code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error thrown";
  return Error(Errc::IoFailure, "none");
}

}  // namespace

TEST(Conversions, Fahrenheit) {
  EXPECT_EQ(celsius_to_fahrenheit(0.0), 32.0);
  EXPECT_EQ(celsius_to_fahrenheit(-40.0), -40.0);
  EXPECT_NEAR(celsius_to_fahrenheit(37.0), 98.6, 1e-12);
}

TEST(Conversions, Kph) {
  EXPECT_EQ(mph_to_kph(0.0), 0.0);
  EXPECT_NEAR(mph_to_kph(10.0), 16.09344, 1e-12);
  EXPECT_NEAR(mph_to_kph(100.0), 160.9344, 1e-12);
  EXPECT_EQ(code_of([] { mph_to_kph(-1.0); }).code(), Errc::NegativeSpeed);
}

TEST(Mode, Examples) {
  EXPECT_EQ(mode_categorical(std::vector<std::string>{"Haze", "Haze", "Fair"}), "Haze");
  EXPECT_EQ(mode_categorical(std::vector<std::string>{"Fair", "Haze"}), "Fair");
  EXPECT_EQ(mode_categorical(std::vector<std::string>{"Fog"}), "Fog");
  EXPECT_EQ(code_of([] { mode_categorical({}); }).code(), Errc::EmptyInput);
}

TEST(Mode, PermutationInvariantAndMatchesOracle) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> pool{"Haze", "Fair", "Fog", "Mist", "Rain"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> values;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 12); i < n; ++i) values.push_back(pool[rng() % pool.size()]);
    const auto expected = brute_mode(values);
    for (int p = 0; p < 5; ++p) {
      std::shuffle(values.begin(), values.end(), rng);
      EXPECT_EQ(mode_categorical(values), expected);
    }
  }
}

TEST(AggregateDay, MeanAndConversion) {
  const Date d = ymd(2019, 1, 1);
  std::vector<WeatherObservation> obs{obs_at(d, 0, 10), obs_at(d, 1, 20), obs_at(d, 2, 30)};
  auto s = aggregate_day(obs, d);
  EXPECT_DOUBLE_EQ(s.avg_temp_c, 20.0);
  EXPECT_DOUBLE_EQ(s.avg_temp_f, 68.0);
}

TEST(AggregateDay, SingleObservationIsIdentity) {
  const Date d = ymd(2019, 6, 1);
  auto o = obs_at(d, 12, 31.5);
  auto s = aggregate_day(std::vector{o}, d);
  EXPECT_EQ(s.date, d);
  EXPECT_EQ(s.avg_temp_c, 31.5);
  EXPECT_EQ(s.avg_wind_mph, 5.0);
  EXPECT_EQ(s.avg_wind_deg, 90.0);
  EXPECT_EQ(s.avg_pressure, 1010.0);
  EXPECT_EQ(s.avg_dew_point, 10.0);
  EXPECT_EQ(s.avg_heat_index, 31.5);
  EXPECT_EQ(s.avg_visibility, 4.0);
  EXPECT_EQ(s.avg_uv_index, 1.0);
  EXPECT_EQ(s.top_phrase, "Fair");
  EXPECT_EQ(s.top_wind_dir, "E");
  EXPECT_EQ(s.top_cloud_cover, "Clear");
}

TEST(AggregateDay, PhraseMode) {
  const Date d = ymd(2019, 1, 1);
  std::vector<WeatherObservation> obs{obs_at(d, 0, 1), obs_at(d, 1, 1), obs_at(d, 2, 1)};
  obs[0].phrase = "Haze";
  obs[1].phrase = "Fair";
  obs[2].phrase = "Haze";
  EXPECT_EQ(aggregate_day(obs, d).top_phrase, "Haze");
}

TEST(AggregateDay, Errors) {
  const Date d = ymd(2019, 1, 1);
  EXPECT_EQ(code_of([&] { aggregate_day({}, d); }).code(), Errc::EmptyInput);
  std::vector<WeatherObservation> obs{obs_at(d, 0, 1), obs_at(ymd(2019, 1, 2), 0, 1)};
  EXPECT_EQ(code_of([&] { aggregate_day(obs, d); }).code(), Errc::DateMismatch);
}

TEST(AggregateDay, MissingReadingsAreFieldwise) {
  const Date d = ymd(2019, 1, 1);
  std::vector<WeatherObservation> obs{obs_at(d, 0, 10), obs_at(d, 1, 20), obs_at(d, 2, 30)};
  obs[1].temp_c.reset();
  obs[0].uv_index.reset();
  obs[1].uv_index.reset();
  obs[2].uv_index.reset();
  auto s = aggregate_day(obs, d);
  EXPECT_DOUBLE_EQ(s.avg_temp_c, 20.0);
  EXPECT_DOUBLE_EQ(s.avg_heat_index, 20.0);
  EXPECT_TRUE(std::isnan(s.avg_uv_index));
}

TEST(AggregateDay, RandomObservationsMatchBruteForce) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-20.0, 45.0);
  const std::vector<std::string> phrases{"Haze", "Fair", "Fog", "Smoke"};
  for (int trial = 0; trial < 100; ++trial) {
    const Date d = ymd(2020, 1 + trial % 12, 1 + trial % 28);
    std::vector<WeatherObservation> obs;
    for (int h = 0; h < 24; ++h) {
      auto o = obs_at(d, h, u(rng));
      o.wind_mph = std::abs(u(rng));
      o.pressure = 1000 + u(rng);
      o.phrase = phrases[rng() % phrases.size()];
      o.wind_dir = phrases[rng() % 2];
      obs.push_back(o);
    }
    auto s = aggregate_day(obs, d);
    double t = 0, w = 0, p = 0;
    std::vector<std::string> ph, wd;
    for (const auto& o : obs) {
      t += *o.temp_c;
      w += *o.wind_mph;
      p += *o.pressure;
      ph.push_back(o.phrase);
      wd.push_back(o.wind_dir);
    }
    EXPECT_NEAR(s.avg_temp_c, t / 24, 1e-9);
    EXPECT_NEAR(s.avg_wind_mph, w / 24, 1e-9);
    EXPECT_NEAR(s.avg_pressure, p / 24, 1e-9);
    EXPECT_NEAR(s.avg_temp_f, s.avg_temp_c * 9.0 / 5.0 + 32.0, 1e-9);
    EXPECT_NEAR(s.avg_wind_kph, s.avg_wind_mph * 1.609344, 1e-9);
    EXPECT_EQ(s.top_phrase, brute_mode(ph));
    EXPECT_EQ(s.top_wind_dir, brute_mode(wd));
  }
}

TEST(AggregatePeriod, MeanOfDailyMeans) {
  std::vector<DailyWeatherSummary> days;
  for (int i = 0; i < 3; ++i) {
    const Date d = ymd(2019, 1, 1 + i);
    days.push_back(aggregate_day(std::vector{obs_at(d, 0, 10.0 * (i + 1))}, d));
  }
  auto p = aggregate_period(days, ymd(2019, 1, 1), ymd(2019, 1, 31));
  EXPECT_DOUBLE_EQ(p.avg_temp_c, 20.0);
  EXPECT_EQ(p.day_count, 3u);
  EXPECT_NEAR(p.avg_temp_f, 68.0, 1e-12);
}

TEST(AggregatePeriod, SingleDayAndErrors) {
  const Date d = ymd(2019, 3, 4);
  auto day = aggregate_day(std::vector{obs_at(d, 0, 12.0)}, d);
  auto p = aggregate_period(std::vector{day}, ymd(2019, 3, 1), ymd(2019, 3, 31));
  EXPECT_EQ(p.day_count, 1u);
  EXPECT_EQ(p.avg_temp_c, day.avg_temp_c);
  EXPECT_EQ(p.top_phrase, day.top_phrase);
  EXPECT_EQ(code_of([&] { aggregate_period(std::vector{day}, ymd(2019, 4, 1), ymd(2019, 4, 30)); }).code(),
            Errc::OutOfRangeDay);
  EXPECT_EQ(code_of([&] { aggregate_period({}, ymd(2019, 4, 1), ymd(2019, 4, 30)); }).code(), Errc::EmptyInput);
}

TEST(AggregatePeriod, EachDayCountsOnce) {
  // Day 1 has 23 "Haze" readings, days 2 and 3 one "Fair" each: the period mode is over daily modes.
  std::vector<DailyWeatherSummary> days;
  for (int i = 0; i < 3; ++i) {
    const Date d = ymd(2019, 1, 1 + i);
    std::vector<WeatherObservation> obs;
    for (int h = 0; h < (i == 0 ? 23 : 1); ++h) {
      obs.push_back(obs_at(d, h, 0));
      obs.back().phrase = i == 0 ? "Haze" : "Fair";
    }
    days.push_back(aggregate_day(obs, d));
  }
  EXPECT_EQ(aggregate_period(days, ymd(2019, 1, 1), ymd(2019, 1, 3)).top_phrase, "Fair");
}

TEST(SummarizePeriods, MissingWeatherNamesPeriod) {
  const Date d = ymd(2019, 1, 5);
  std::vector<DailyWeatherSummary> days{aggregate_day(std::vector{obs_at(d, 0, 1)}, d)};
  std::vector<DiseaseRecord> recs{{"a", ymd(2019, 1, 1), ymd(2019, 1, 31), "IN", 1, ValueType::cases},
                                  {"a", ymd(2019, 2, 1), ymd(2019, 2, 28), "IN", 1, ValueType::cases}};
  auto e = code_of([&] { summarize_periods(days, recs); });
  EXPECT_EQ(e.code(), Errc::MissingWeather);
  EXPECT_NE(std::string(e.what()).find("2019-02-01"), std::string::npos);
  recs.pop_back();
  EXPECT_EQ(summarize_periods(days, recs).size(), 1u);
}

TEST(Timestamp, ParseAndFormat) {
  auto ts = parse_timestamp("2019-01-01T05:30+05:30");
  ASSERT_TRUE(ts);
  EXPECT_EQ(ts->date, ymd(2019, 1, 1));
  EXPECT_EQ(ts->time_of_day, std::chrono::seconds{5 * 3600 + 1800});
  EXPECT_EQ(ts->utc_offset, std::chrono::minutes{330});
  EXPECT_EQ(parse_timestamp(format_timestamp(*ts)), ts);
  EXPECT_TRUE(parse_timestamp("2019-01-01T23:59:59Z"));
  EXPECT_FALSE(parse_timestamp("2019-01-01 05:30"));
  EXPECT_FALSE(parse_timestamp("2019-01-01T25:00Z"));
  EXPECT_FALSE(parse_timestamp("2019-02-30T01:00Z"));
}

TEST(ObservationFile, RoundTrip) {
  const Date d = ymd(2019, 7, 1);
  std::vector<WeatherObservation> obs{obs_at(d, 0, 30.25), obs_at(d, 1, -1.5)};
  obs[1].pressure.reset();
  obs[1].phrase.clear();
  std::ostringstream out;
  write_observations(out, obs);
  std::istringstream in(out.str());
  auto back = parse_observations(in);
  ASSERT_TRUE(back.report.ok());
  EXPECT_EQ(back.observations, obs);
}

TEST(ObservationFile, RowErrorsAndHeader) {
  std::istringstream bad_header("time\ttemp\n");
  EXPECT_EQ(code_of([&] { parse_observations(bad_header); }).code(), Errc::MissingHeader);
  std::istringstream rows(std::string(kObservationHeader) + "\nnot-a-time\t1\tx\t1\t1\tN\t1\t1\t1\t1\tc\t1\n" +
                          "2019-01-01T00:00Z\t1\tx\t-3\t1\tN\t1\t1\t1\t1\tc\t1\n" +
                          "2019-01-01T00:00Z\t1\tx\t3\t400\tN\t1\t1\t1\t1\tc\t1\n");
  auto parsed = parse_observations(rows);
  EXPECT_EQ(parsed.observations.size(), 0u);
  ASSERT_EQ(parsed.report.errors.size(), 3u);
  EXPECT_EQ(parsed.report.errors[0].line, 2u);
}

TEST(DailyFile, RoundTripWithMissingField) {
  const Date d = ymd(2019, 1, 1);
  auto day = aggregate_day(std::vector{obs_at(d, 0, 21.3)}, d);
  day.avg_uv_index = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream out;
  write_daily_summaries(out, std::vector{day});
  EXPECT_EQ(out.str().substr(0, 5), "Date\t");
  std::istringstream in(out.str());
  auto back = read_daily_summaries(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].avg_temp_c, day.avg_temp_c);
  EXPECT_EQ(back[0].avg_temp_f, day.avg_temp_f);
  EXPECT_TRUE(std::isnan(back[0].avg_uv_index));
  EXPECT_EQ(back[0].top_cloud_cover, day.top_cloud_cover);
}

// --- fetcher --------------------------------------------------------------

namespace {

class MockProvider : public ObservationProvider {
 public:
  std::vector<WeatherObservation> fetch(const StationKey&, Date date) override {
    ++calls;
    if (failures_left > 0) {
      --failures_left;
      throw TransientProviderError("connection reset");
    }
    if (empty) return {};
    std::vector<WeatherObservation> out;
    for (int h = 0; h < 24; ++h) out.push_back(obs_at(date, h, 20.0 + h));
    return out;
  }

  std::atomic<int> calls{0};
  int failures_left = 0;
  bool empty = false;
};

struct SleepLog {
  std::vector<std::chrono::milliseconds> delays;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { delays.push_back(d); };
  }
};

}  // namespace

TEST(Fetcher, ColdThenWarmCache) {
  test::TempDir dir("fetch");
  MockProvider provider;
  const StationKey station("VIDP:9:IN");
  const Date d = ymd(2019, 1, 1);
  {
    WeatherFetcher f(provider, dir.path());
    auto obs = f.fetch_observations(station, d);
    EXPECT_EQ(obs.size(), 24u);
    EXPECT_TRUE(std::filesystem::exists(cache_path(dir.path(), station, d)));
    EXPECT_EQ(f.provider_calls(), 1u);
  }
  WeatherFetcher warm(provider, dir.path());
  auto again = warm.fetch_observations(station, d);
  EXPECT_EQ(warm.provider_calls(), 0u);
  EXPECT_EQ(again.size(), 24u);
  EXPECT_EQ(provider.calls, 1);
}

TEST(Fetcher, IdempotentAcrossCalls) {
  test::TempDir dir("fetch");
  MockProvider provider;
  WeatherFetcher f(provider, dir.path());
  const StationKey station("VIDP:9:IN");
  auto a = f.fetch_observations(station, ymd(2019, 5, 5));
  auto b = f.fetch_observations(station, ymd(2019, 5, 5));
  EXPECT_EQ(a, b);
  EXPECT_EQ(provider.calls, 1);
}

TEST(Fetcher, ConcurrentSameKeyFetchesOnce) {
  test::TempDir dir("fetch");
  MockProvider provider;
  WeatherFetcher f(provider, dir.path());
  const StationKey station("VIDP:9:IN");
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (f.fetch_observations(station, ymd(2019, 2, 2)).size() == 24) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 8);
  EXPECT_EQ(provider.calls, 1);
}

TEST(Fetcher, RetriesWithBackoffThenFails) {
  test::TempDir dir("fetch");
  MockProvider provider;
  provider.failures_left = 100;
  SleepLog log;
  WeatherFetcher f(provider, dir.path(), RetryPolicy{}, 0.0, log.sleeper());
  auto e = code_of([&] { f.fetch_observations(StationKey("VIDP:9:IN"), ymd(2019, 1, 1)); });
  EXPECT_EQ(e.code(), Errc::ProviderUnavailable);
  using std::chrono::milliseconds;
  EXPECT_EQ(log.delays, (std::vector<milliseconds>{milliseconds{1000}, milliseconds{2000}, milliseconds{4000}}));
  EXPECT_EQ(provider.calls, 4);
  EXPECT_FALSE(std::filesystem::exists(cache_path(dir.path(), StationKey("VIDP:9:IN"), ymd(2019, 1, 1))));
}

TEST(Fetcher, RecoversFromTransientFailure) {
  test::TempDir dir("fetch");
  MockProvider provider;
  provider.failures_left = 2;
  SleepLog log;
  WeatherFetcher f(provider, dir.path(), RetryPolicy{}, 0.0, log.sleeper());
  EXPECT_EQ(f.fetch_observations(StationKey("S"), ymd(2019, 1, 1)).size(), 24u);
  EXPECT_EQ(log.delays.size(), 2u);
}

TEST(Fetcher, EmptyDayIsCached) {
  test::TempDir dir("fetch");
  MockProvider provider;
  provider.empty = true;
  WeatherFetcher f(provider, dir.path());
  const StationKey station("S");
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(code_of([&] { f.fetch_observations(station, ymd(2019, 1, 1)); }).code(), Errc::EmptyDay);
  }
  EXPECT_EQ(provider.calls, 1);
}

TEST(Fetcher, DirectoryProviderServesFixtures) {
  test::TempDir src("src"), cache("cache");
  const StationKey station("VIDP:9:IN");
  const Date d = ymd(2020, 2, 29);
  std::vector<WeatherObservation> obs{obs_at(d, 3, 14.0)};
  std::ostringstream out;
  write_observations(out, obs);
  test::spit(cache_path(src.path(), station, d), out.str());
  DirectoryProvider provider(src.path());
  WeatherFetcher f(provider, cache.path());
  EXPECT_EQ(f.fetch_observations(station, d), obs);
  EXPECT_EQ(test::slurp(cache_path(cache.path(), station, d)), out.str());
  EXPECT_EQ(code_of([&] { f.fetch_observations(station, ymd(2020, 3, 1)); }).code(), Errc::EmptyDay);
}

TEST(RateLimiter, SpacesRequests) {
  SleepLog log;
  RateLimiter limiter(2.0, log.sleeper());
  limiter.acquire();
  limiter.acquire();
  limiter.acquire();
  // The fake sleeper returns at once, so the third slot is a full second out.
  ASSERT_EQ(log.delays.size(), 2u);
  EXPECT_GT(log.delays[0].count(), 400);
  EXPECT_LE(log.delays[0].count(), 500);
  EXPECT_GT(log.delays[1].count(), 900);
  EXPECT_LE(log.delays[1].count(), 1000);
  RateLimiter off(0.0, log.sleeper());
  off.acquire();
  off.acquire();
  EXPECT_EQ(log.delays.size(), 2u);
}

TEST(StationKey, MustBeNonEmpty) { EXPECT_THROW(StationKey(""), Error); }
