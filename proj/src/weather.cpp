#include "outbreak/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

#include "outbreak/io.hpp"

namespace outbreak {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::string_view kDailyHeader =
    "Date\tAverage Temperature (C)\tAverage Temperature (F)\tMost Repeated Weather Phrase\t"
    "Average Wind Speed (mph)\tAverage Wind Speed (kph)\tAverage Wind Degree\tMost Repeated Wind Direction\t"
    "Average Pressure\tAverage Dew Point\tAverage Heat Index\tAverage Visibility\tMost Repeated Cloud Cover\t"
    "Average UV Index";

std::optional<int> two_digits(std::string_view s) {
  if (s.size() != 2 || s[0] < '0' || s[0] > '9' || s[1] < '0' || s[1] > '9') return std::nullopt;
  return (s[0] - '0') * 10 + (s[1] - '0');
}

// Running mean over present values; NaN when nothing contributed.
class Mean {
 public:
  void add(double x) {
    sum_ += x;
    ++n_;
  }
  void add(const std::optional<double>& x) {
    if (x) add(*x);
  }
  double value() const { return n_ ? sum_ / static_cast<double>(n_) : kNaN; }

 private:
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

std::string mode_or_empty(std::vector<std::string> values) {
  std::erase_if(values, [](const std::string& s) { return s.empty(); });
  return values.empty() ? std::string() : mode_categorical(values);
}

double kph_or_nan(double mph) { return std::isnan(mph) ? kNaN : mph_to_kph(mph); }

std::string cell(double v) { return std::isnan(v) ? std::string() : io::format_shortest(v); }

std::string cell(const std::optional<double>& v) { return v ? io::format_shortest(*v) : std::string(); }

}  // namespace

std::optional<LocalTimestamp> parse_timestamp(std::string_view text) {
  if (text.size() < 16) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date || (text[10] != 'T' && text[10] != ' ')) return std::nullopt;
  std::string_view rest = text.substr(11);

  auto hh = two_digits(rest.substr(0, 2));
  if (!hh || rest.size() < 5 || rest[2] != ':') return std::nullopt;
  auto mm = two_digits(rest.substr(3, 2));
  if (!mm) return std::nullopt;
  rest.remove_prefix(5);
  int ss = 0;
  if (!rest.empty() && rest[0] == ':') {
    auto s = two_digits(rest.substr(1, 2));
    if (!s) return std::nullopt;
    ss = *s;
    rest.remove_prefix(3);
  }
  if (*hh > 23 || *mm > 59 || ss > 60) return std::nullopt;

  int offset = 0;
  if (rest == "Z") {
    offset = 0;
  } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
    auto oh = two_digits(rest.substr(1, 2));
    auto om = two_digits(rest.substr(4, 2));
    if (!oh || !om || *oh > 18 || *om > 59) return std::nullopt;
    offset = (*oh * 60 + *om) * (rest[0] == '-' ? -1 : 1);
  } else {
    return std::nullopt;
  }
  return LocalTimestamp{*date, std::chrono::seconds{*hh * 3600 + *mm * 60 + ss}, std::chrono::minutes{offset}};
}

std::string format_timestamp(const LocalTimestamp& ts) {
  const auto secs = ts.time_of_day.count();
  const auto off = ts.utc_offset.count();
  const auto abs_off = off < 0 ? -off : off;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld%c%02lld:%02lld", format_date(ts.date).c_str(),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60), off < 0 ? '-' : '+', static_cast<long long>(abs_off / 60),
                static_cast<long long>(abs_off % 60));
  return buf;
}

double celsius_to_fahrenheit(double c) noexcept { return c * 9.0 / 5.0 + 32.0; }

double mph_to_kph(double v) {
  if (v < 0.0) throw Error(Errc::NegativeSpeed, "speed " + io::format_shortest(v) + " mph");
  return v * 1.609344;
}

std::string mode_categorical(std::span<const std::string> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "mode of an empty list");
  std::map<std::string_view, std::size_t> counts;
  for (const auto& v : values) ++counts[v];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;  // strict: earlier (smaller) key wins ties
  }
  return std::string(best->first);
}

DailyWeatherSummary aggregate_day(std::span<const WeatherObservation> obs, Date date) {
  if (obs.empty()) throw Error(Errc::EmptyInput, "no observations for " + format_date(date));
  Mean temp, wind, deg, pressure, dew, heat, vis, uv;
  std::vector<std::string> phrases, dirs, clouds;
  for (const auto& o : obs) {
    if (o.timestamp.date != date) {
      throw Error(Errc::DateMismatch,
                  "observation at " + format_timestamp(o.timestamp) + " is not on " + format_date(date));
    }
    temp.add(o.temp_c);
    wind.add(o.wind_mph);
    deg.add(o.wind_deg);
    pressure.add(o.pressure);
    dew.add(o.dew_point_c);
    heat.add(o.heat_index_c);
    vis.add(o.visibility_km);
    uv.add(o.uv_index);
    phrases.push_back(o.phrase);
    dirs.push_back(o.wind_dir);
    clouds.push_back(o.cloud_cover);
  }

  DailyWeatherSummary s;
  s.date = date;
  s.avg_temp_c = temp.value();
  s.avg_temp_f = celsius_to_fahrenheit(s.avg_temp_c);
  s.top_phrase = mode_or_empty(std::move(phrases));
  s.avg_wind_mph = wind.value();
  s.avg_wind_kph = kph_or_nan(s.avg_wind_mph);
  s.avg_wind_deg = deg.value();
  s.top_wind_dir = mode_or_empty(std::move(dirs));
  s.avg_pressure = pressure.value();
  s.avg_dew_point = dew.value();
  s.avg_heat_index = heat.value();
  s.avg_visibility = vis.value();
  s.top_cloud_cover = mode_or_empty(std::move(clouds));
  s.avg_uv_index = uv.value();
  return s;
}

PeriodWeatherSummary aggregate_period(std::span<const DailyWeatherSummary> days, Date period_start,
                                      Date period_end) {
  if (days.empty()) {
    throw Error(Errc::EmptyInput,
                "no daily summaries for " + format_date(period_start) + ".." + format_date(period_end));
  }
  Mean temp, wind, deg, pressure, dew, heat, vis, uv;
  std::vector<std::string> phrases, dirs, clouds;
  auto add = [](Mean& m, double x) {
    if (!std::isnan(x)) m.add(x);
  };
  for (const auto& d : days) {
    if (to_days(d.date) < to_days(period_start) || to_days(d.date) > to_days(period_end)) {
      throw Error(Errc::OutOfRangeDay, format_date(d.date) + " outside " + format_date(period_start) + ".." +
                                           format_date(period_end));
    }
    add(temp, d.avg_temp_c);
    add(wind, d.avg_wind_mph);
    add(deg, d.avg_wind_deg);
    add(pressure, d.avg_pressure);
    add(dew, d.avg_dew_point);
    add(heat, d.avg_heat_index);
    add(vis, d.avg_visibility);
    add(uv, d.avg_uv_index);
    phrases.push_back(d.top_phrase);
    dirs.push_back(d.top_wind_dir);
    clouds.push_back(d.top_cloud_cover);
  }

  PeriodWeatherSummary p;
  p.period_start = period_start;
  p.period_end = period_end;
  p.avg_temp_c = temp.value();
  p.avg_temp_f = celsius_to_fahrenheit(p.avg_temp_c);
  p.top_phrase = mode_or_empty(std::move(phrases));
  p.avg_wind_mph = wind.value();
  p.avg_wind_kph = kph_or_nan(p.avg_wind_mph);
  p.avg_wind_deg = deg.value();
  p.top_wind_dir = mode_or_empty(std::move(dirs));
  p.avg_pressure = pressure.value();
  p.avg_dew_point = dew.value();
  p.avg_heat_index = heat.value();
  p.avg_visibility = vis.value();
  p.top_cloud_cover = mode_or_empty(std::move(clouds));
  p.avg_uv_index = uv.value();
  p.day_count = days.size();
  return p;
}

PeriodWeatherIndex summarize_periods(std::span<const DailyWeatherSummary> days,
                                     std::span<const DiseaseRecord> records) {
  std::vector<DailyWeatherSummary> sorted(days.begin(), days.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return to_days(a.date) < to_days(b.date); });

  PeriodWeatherIndex index;
  for (const auto& r : records) {
    PeriodKey key{r.period_start, r.period_end};
    if (index.count(key)) continue;
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), r.period_start,
                               [](const auto& d, Date v) { return to_days(d.date) < to_days(v); });
    auto hi = std::upper_bound(sorted.begin(), sorted.end(), r.period_end,
                               [](Date v, const auto& d) { return to_days(v) < to_days(d.date); });
    if (lo >= hi) {
      throw Error(Errc::MissingWeather,
                  "no weather for period " + format_date(r.period_start) + ".." + format_date(r.period_end));
    }
    index.emplace(key, aggregate_period(std::span(&*lo, static_cast<std::size_t>(hi - lo)), r.period_start,
                                        r.period_end));
  }
  return index;
}

ObservationParse parse_observations(std::istream& in) {
  ObservationParse out;
  std::string line;
  if (!io::read_line(in, line) || line != kObservationHeader) {
    throw Error(Errc::MissingHeader, "line 1: expected observation TSV header");
  }
  std::size_t line_no = 1;
  while (io::read_line(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 12) {
      out.report.errors.push_back({line_no, "expected 12 fields, found " + std::to_string(f.size())});
      continue;
    }
    const std::size_t before = out.report.errors.size();
    auto number = [&](std::string_view text, std::string_view name, double lo,
                      double hi) -> std::optional<double> {
      text = io::trim(text);
      if (text.empty()) return std::nullopt;
      auto v = io::parse_double(text);
      if (!v || !std::isfinite(*v)) {
        out.report.errors.push_back({line_no, "bad " + std::string(name) + " '" + std::string(text) + "'"});
        return std::nullopt;
      }
      if (*v < lo || *v >= hi) {
        out.report.errors.push_back({line_no, std::string(name) + " out of range"});
        return std::nullopt;
      }
      return v;
    };
    constexpr double inf = std::numeric_limits<double>::infinity();

    WeatherObservation o;
    auto ts = parse_timestamp(io::trim(f[0]));
    if (!ts) out.report.errors.push_back({line_no, "bad timestamp '" + std::string(f[0]) + "'"});
    o.temp_c = number(f[1], "temp_c", -inf, inf);
    o.phrase = std::string(io::trim(f[2]));
    o.wind_mph = number(f[3], "wind_mph", 0.0, inf);
    o.wind_deg = number(f[4], "wind_deg", 0.0, 360.0);
    o.wind_dir = std::string(io::trim(f[5]));
    o.pressure = number(f[6], "pressure", -inf, inf);
    o.dew_point_c = number(f[7], "dew_point_c", -inf, inf);
    o.heat_index_c = number(f[8], "heat_index_c", -inf, inf);
    o.visibility_km = number(f[9], "visibility_km", 0.0, inf);
    o.cloud_cover = std::string(io::trim(f[10]));
    o.uv_index = number(f[11], "uv_index", 0.0, inf);
    if (out.report.errors.size() != before) continue;
    o.timestamp = *ts;
    out.observations.push_back(std::move(o));
  }
  out.report.row_count = out.observations.size();
  return out;
}

void write_observations(std::ostream& out, std::span<const WeatherObservation> obs) {
  out << kObservationHeader << '\n';
  for (const auto& o : obs) {
    out << format_timestamp(o.timestamp) << '\t' << cell(o.temp_c) << '\t' << o.phrase << '\t' << cell(o.wind_mph)
        << '\t' << cell(o.wind_deg) << '\t' << o.wind_dir << '\t' << cell(o.pressure) << '\t'
        << cell(o.dew_point_c) << '\t' << cell(o.heat_index_c) << '\t' << cell(o.visibility_km) << '\t'
        << o.cloud_cover << '\t' << cell(o.uv_index) << '\n';
  }
}

void write_daily_summaries(std::ostream& out, std::span<const DailyWeatherSummary> days) {
  out << kDailyHeader << '\n';
  for (const auto& d : days) {
    out << format_date(d.date) << '\t' << cell(d.avg_temp_c) << '\t' << cell(d.avg_temp_f) << '\t' << d.top_phrase
        << '\t' << cell(d.avg_wind_mph) << '\t' << cell(d.avg_wind_kph) << '\t' << cell(d.avg_wind_deg) << '\t'
        << d.top_wind_dir << '\t' << cell(d.avg_pressure) << '\t' << cell(d.avg_dew_point) << '\t'
        << cell(d.avg_heat_index) << '\t' << cell(d.avg_visibility) << '\t' << d.top_cloud_cover << '\t'
        << cell(d.avg_uv_index) << '\n';
  }
}

std::vector<DailyWeatherSummary> read_daily_summaries(std::istream& in) {
  std::string line;
  if (!io::read_line(in, line) || line != kDailyHeader) {
    throw Error(Errc::MissingHeader, "line 1: expected daily weather summary header");
  }
  std::vector<DailyWeatherSummary> days;
  std::size_t line_no = 1;
  while (io::read_line(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    auto f = io::split(line, '\t');
    const std::string where = "line " + std::to_string(line_no);
    if (f.size() != 14) throw Error(Errc::MalformedLine, where + ": expected 14 fields");
    auto num = [&](std::string_view text) {
      if (text.empty()) return kNaN;
      auto v = io::parse_double(text);
      if (!v || !std::isfinite(*v)) throw Error(Errc::MalformedLine, where + ": bad number '" + std::string(text) + "'");
      return *v;
    };
    auto date = parse_date(f[0]);
    if (!date) throw Error(Errc::MalformedLine, where + ": bad date");
    DailyWeatherSummary d;
    d.date = *date;
    d.avg_temp_c = num(f[1]);
    d.avg_temp_f = num(f[2]);
    d.top_phrase = std::string(f[3]);
    d.avg_wind_mph = num(f[4]);
    d.avg_wind_kph = num(f[5]);
    d.avg_wind_deg = num(f[6]);
    d.top_wind_dir = std::string(f[7]);
    d.avg_pressure = num(f[8]);
    d.avg_dew_point = num(f[9]);
    d.avg_heat_index = num(f[10]);
    d.avg_visibility = num(f[11]);
    d.top_cloud_cover = std::string(f[12]);
    d.avg_uv_index = num(f[13]);
    days.push_back(std::move(d));
  }
  return days;
}

}  // namespace outbreak
