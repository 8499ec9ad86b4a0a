#include "outbreak/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "outbreak/embeddings.hpp"
#include "outbreak/io.hpp"

namespace outbreak::synthetic {

namespace {

using std::numbers::pi;

constexpr const char* kCompass[] = {"N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
                                    "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Rounds to 2 decimals so the TSV fixtures stay small and exact.
double r2(double v) { return std::round(v * 100.0) / 100.0; }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

std::vector<WeatherObservation> day_observations(Date date, const Options& opts) {
  const auto days = to_days(date).time_since_epoch().count();
  const Date jan1{date.year(), std::chrono::January, std::chrono::day{1}};
  const double doy = static_cast<double>((to_days(date) - to_days(jan1)).count());
  const double year_off = static_cast<double>(static_cast<int>(date.year()) - opts.first_year);

  std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(days + 100000));
  const double jitter_t = 3.0 * (uniform(rng) - 0.5);
  const double jitter_p = 2.0 * (uniform(rng) - 0.5);
  const double jitter_w = 2.0 * uniform(rng);

  const double season = std::sin(2.0 * pi * (doy - 105.0) / 365.25);
  const double monsoon = std::exp(-std::pow((doy - 215.0) / 40.0, 2.0));

  std::vector<WeatherObservation> out;
  out.reserve(24);
  for (int h = 0; h < 24; ++h) {
    WeatherObservation o;
    o.timestamp = {date, std::chrono::hours{h}, std::chrono::minutes{330}};
    const double diurnal = std::sin(2.0 * pi * (h - 9) / 24.0);
    const double temp = 25.0 + 9.0 * season + 0.4 * year_off + jitter_t + 5.0 * diurnal;
    const double dew = 12.0 + 9.0 * monsoon + 3.0 * season + 1.5 * std::sin(2.0 * pi * (h - 6) / 24.0);
    const double vis = 5.0 - 1.5 * monsoon - 1.2 * std::cos(2.0 * pi * doy / 365.25) + 0.5 * diurnal;
    const double deg = std::fmod(270.0 + 60.0 * std::sin(2.0 * pi * doy / 365.25) + 20.0 * std::sin(2.0 * pi * h / 24.0) + 360.0, 360.0);

    o.temp_c = r2(temp);
    o.dew_point_c = r2(dew);
    o.heat_index_c = r2(temp + 0.35 * std::max(0.0, dew - 10.0));
    o.pressure = r2(1008.0 - 7.0 * season + jitter_p + 0.8 * std::cos(2.0 * pi * h / 12.0));
    o.wind_mph = r2(6.0 + 3.0 * std::cos(2.0 * pi * doy / 365.25) + 2.0 * std::sin(2.0 * pi * (h - 14) / 24.0) + jitter_w);
    o.wind_deg = r2(deg);
    o.wind_dir = kCompass[static_cast<int>(std::floor(deg / 22.5 + 0.5)) % 16];
    o.visibility_km = r2(vis);
    o.uv_index = (h >= 6 && h <= 18) ? r2(std::max(0.0, 10.0 * std::sin(pi * (h - 6) / 12.0) * (0.75 + 0.25 * season))) : 0.0;

    if (monsoon > 0.5 && h % 3 == 0) {
      o.phrase = "rain";
    } else if (temp > 32.0) {
      o.phrase = "sunny";
    } else if (vis < 3.5) {
      o.phrase = "haze";
    } else if (h < 6 || h > 19) {
      o.phrase = "clear";
    } else {
      o.phrase = "partly cloudy";
    }
    o.cloud_cover = monsoon > 0.5 ? "overcast" : vis < 3.5 ? "scattered clouds" : "fair";
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<DailyWeatherSummary> daily_weather(const Options& opts) {
  const Date first{std::chrono::year{opts.first_year}, std::chrono::January, std::chrono::day{1}};
  const Date last{std::chrono::year{opts.first_year + opts.years - 1}, std::chrono::December, std::chrono::day{31}};
  std::vector<DailyWeatherSummary> out;
  for (auto d = to_days(first); d <= to_days(last); ++d) {
    const Date date = from_days(d);
    out.push_back(aggregate_day(day_observations(date, opts), date));
  }
  return out;
}

const std::vector<std::string>& disease_names() {
  static const std::vector<std::string> names = {"dengue",      "malaria",  "cholera",      "typhoid",
                                                 "chikungunya", "measles",  "hepatitis a",  "tuberculosis",
                                                 "influenza"};
  return names;
}

std::vector<SymptomProfile> symptom_profiles() {
  const std::vector<std::vector<std::string>> symptoms = {
      {"high fever", "joint pain", "rash", "headache"},
      {"fever", "chills", "sweating", "nausea"},
      {"watery diarrhea", "vomiting", "dehydration"},
      {"prolonged fever", "abdominal pain", "weakness"},
      {"fever", "severe joint pain", "rash"},
      {"fever", "cough", "rash", "red eyes"},
      {"jaundice", "fatigue", "nausea"},
      {"persistent cough", "weight loss", "night sweats"},
      {"fever", "cough", "sore throat", "body aches"},
  };
  std::vector<SymptomProfile> out;
  for (std::size_t i = 0; i < disease_names().size(); ++i) {
    SymptomProfile p;
    p.code = "D" + std::to_string(100 + i);
    p.name = disease_names()[i];
    p.symptoms = symptoms[i];
    p.description = "Seasonal illness tracked for " + p.name + ".";
    p.test_procedure = "clinical assessment";
    p.medication_desc = "supportive care";
    p.medications = {"paracetamol", "oral rehydration"};
    p.symptom_desc = join(symptoms[i]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<DemographicsRecord> demographics() {
  std::vector<DemographicsRecord> out;
  for (std::size_t i = 0; i < disease_names().size(); i += 2) {
    DemographicsRecord d;
    d.name = disease_names()[i];
    d.risk_years = i % 4 == 0 ? "0-14" : "60+";
    d.less_risk_years = "25-44";
    d.high_risk_gender = i % 4 == 0 ? "male" : "female";
    d.less_risk_gender = i % 4 == 0 ? "female" : "male";
    out.push_back(std::move(d));
  }
  return out;
}

double weather_response(const PeriodWeatherSummary& w) {
  const double dew = (w.avg_dew_point - 12.0) / 9.0;
  return 2000.0 + 900.0 * std::tanh((w.avg_temp_c - 25.0) / 6.0) + 500.0 * dew * dew -
         300.0 * (w.avg_pressure - 1008.0) / 7.0;
}

double disease_offset(const std::string& disease, const Options& opts) {
  // Dense random unit direction; the embedding itself is sparse for short names.
  std::mt19937_64 rng(opts.seed ^ 0x0FF5E7ULL);
  std::vector<double> dir(opts.embed_dim);
  double norm = 0.0;
  for (auto& v : dir) {
    v = uniform(rng) - 0.5;
    norm += v * v;
  }
  const auto e = hash_embed(normalize_key(disease), opts.embed_dim, opts.embed_seed);
  double dot = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i) dot += dir[i] * e.values[i];
  return 640.0 * dot / std::sqrt(norm);
}

std::vector<DiseaseRecord> disease_records(std::span<const DailyWeatherSummary> daily, const Options& opts) {
  std::vector<DiseaseRecord> out;
  for (const auto& name : disease_names()) {
    const double offset = disease_offset(name, opts);
    for (int y = opts.first_year; y < opts.first_year + opts.years; ++y) {
      for (unsigned m = 1; m <= 12; ++m) {
        const std::chrono::year_month ym{std::chrono::year{y}, std::chrono::month{m}};
        const Date start{ym / std::chrono::day{1}};
        const Date end{ym / std::chrono::last};
        std::vector<DailyWeatherSummary> days;
        for (const auto& d : daily) {
          if (d.date >= start && d.date <= end) days.push_back(d);
        }
        const auto period = aggregate_period(days, start, end);
        out.push_back({name, start, end, opts.region, weather_response(period) + offset, ValueType::cases});
      }
    }
  }
  return out;
}

Dataset generate(const Options& opts) {
  Dataset ds;
  ds.daily = daily_weather(opts);
  ds.records = disease_records(ds.daily, opts);
  ds.profiles = symptom_profiles();
  ds.demographics = demographics();
  return ds;
}

void write_fixtures(const std::filesystem::path& dir, const Options& opts, FixtureFiles files,
                    const std::vector<std::string>& extra_config) {
  const auto ds = generate(opts);
  std::filesystem::create_directories(dir);

  io::atomic_write(dir / "diseases.csv", [&](std::ostream& out) { write_disease_table(out, ds.records); });
  io::atomic_write(dir / "symptoms.txt", [&](std::ostream& out) {
    for (const auto& p : ds.profiles) {
      out << "code: " << p.code << "\nname: " << p.name << "\nsymptoms: " << join(p.symptoms)
          << "\ndescription: " << p.description << "\ntest_procedure: " << p.test_procedure
          << "\nmedication_desc: " << p.medication_desc << "\nmedications: " << join(p.medications)
          << "\nsymptom_desc: " << p.symptom_desc << "\n\n";
    }
  });
  io::atomic_write(dir / "demographics.txt", [&](std::ostream& out) {
    for (const auto& d : ds.demographics) {
      out << "name: " << d.name << "\nrisk_years: " << d.risk_years << "\nless_risk_years: " << d.less_risk_years
          << "\nhigh_risk_gender: " << d.high_risk_gender << "\nless_risk_gender: " << d.less_risk_gender << "\n\n";
    }
  });
  if (files.observations) {
    const StationKey station(opts.station);
    for (const auto& day : ds.daily) {
      const auto obs = day_observations(day.date, opts);
      io::atomic_write(cache_path(dir / "weather", station, day.date),
                       [&](std::ostream& out) { write_observations(out, obs); });
    }
  }
  if (files.daily_summary) {
    io::atomic_write(dir / "daily_weather.tsv", [&](std::ostream& out) { write_daily_summaries(out, ds.daily); });
  }

  // Later keys replace defaults so callers can override any fixture setting.
  std::vector<std::pair<std::string, std::string>> settings{
      {"disease_file", "diseases.csv"},
      {"symptom_file", "symptoms.txt"},
      {"demographics_file", "demographics.txt"},
      {"weather_source_dir", "weather"},
      {"weather_cache_dir", "cache"},
      {"daily_weather_file", "daily_weather.tsv"},
      {"station", opts.station},
      {"requests_per_second", "0"},
      {"embed_fallback_dim", std::to_string(opts.embed_dim)},
      {"embed_seed", std::to_string(opts.embed_seed)},
  };
  std::vector<std::string> passthrough;
  for (const auto& line : extra_config) {
    const auto eq = line.find('=');
    const auto key = eq == std::string::npos ? std::string() : std::string(io::trim(line.substr(0, eq)));
    auto it = std::find_if(settings.begin(), settings.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != settings.end()) {
      it->second = std::string(io::trim(line.substr(eq + 1)));
    } else {
      passthrough.push_back(line);
    }
  }
  io::atomic_write(dir / "outbreak.cfg", [&](std::ostream& out) {
    out << "# synthetic fixture run\n";
    for (const auto& [key, value] : settings) out << key << " = " << value << '\n';
    for (const auto& line : passthrough) out << line << '\n';
  });
}

}  // namespace outbreak::synthetic
