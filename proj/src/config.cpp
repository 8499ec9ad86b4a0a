#include "outbreak/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "outbreak/io.hpp"

namespace outbreak {

namespace {

using Setter = std::function<void(Config&, std::string_view)>;

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(Errc::BadValue, std::string(key) + " = '" + std::string(value) + "'");
}

Setter real(double HyperParams::*field) {
  return [field](Config& c, std::string_view v) {
    auto d = io::parse_double(v);
    if (!d) throw Error(Errc::BadValue, "'" + std::string(v) + "' is not a number");
    c.hp.*field = *d;
  };
}

std::size_t count_value(std::string_view v) {
  auto n = io::parse_int(v);
  if (!n || *n <= 0) throw Error(Errc::BadValue, "'" + std::string(v) + "' is not a positive integer");
  return static_cast<std::size_t>(*n);
}

std::uint64_t seed_value(std::string_view v) {
  auto n = io::parse_int(v);
  if (!n || *n < 0) throw Error(Errc::BadValue, "'" + std::string(v) + "' is not a non-negative integer");
  return static_cast<std::uint64_t>(*n);
}

Setter path(std::filesystem::path Config::*field) {
  return [field](Config& c, std::string_view v) { c.*field = std::filesystem::path(std::string(v)); };
}

Setter date(std::optional<Date> Config::*field) {
  return [field](Config& c, std::string_view v) {
    auto d = parse_date(v);
    if (!d) throw Error(Errc::BadValue, "'" + std::string(v) + "' is not a YYYY-MM-DD date");
    c.*field = *d;
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"learning_rate", real(&HyperParams::learning_rate)},
      {"beta1", real(&HyperParams::beta1)},
      {"beta2", real(&HyperParams::beta2)},
      {"epsilon", real(&HyperParams::epsilon)},
      {"lambda", real(&HyperParams::lambda)},
      {"epochs", [](Config& c, std::string_view v) { c.hp.epochs = count_value(v); }},
      {"batch_size", [](Config& c, std::string_view v) { c.hp.batch_size = count_value(v); }},
      {"seed", [](Config& c, std::string_view v) { c.hp.seed = seed_value(v); }},
      {"hidden_sizes",
       [](Config& c, std::string_view v) {
         c.hidden_sizes.clear();
         if (io::trim(v).empty()) return;
         for (auto part : io::split(v, ',')) c.hidden_sizes.push_back(count_value(io::trim(part)));
       }},
      {"embed_fallback_dim", [](Config& c, std::string_view v) { c.embed_fallback_dim = count_value(v); }},
      {"embed_seed", [](Config& c, std::string_view v) { c.embed_seed = seed_value(v); }},
      {"station",
       [](Config& c, std::string_view v) {
         if (v.empty()) throw Error(Errc::BadValue, "station must be non-empty");
         c.station = std::string(v);
       }},
      {"requests_per_second",
       [](Config& c, std::string_view v) {
         auto d = io::parse_double(v);
         if (!d || !(*d >= 0.0)) throw Error(Errc::BadValue, "'" + std::string(v) + "' must be >= 0");
         c.requests_per_second = *d;
       }},
      {"weather_start", date(&Config::weather_start)},
      {"weather_end", date(&Config::weather_end)},
      {"disease_file", path(&Config::disease_file)},
      {"symptom_file", path(&Config::symptom_file)},
      {"demographics_file", path(&Config::demographics_file)},
      {"weather_source_dir", path(&Config::weather_source_dir)},
      {"weather_cache_dir", path(&Config::weather_cache_dir)},
      {"daily_weather_file", path(&Config::daily_weather_file)},
      {"embedding_cache", path(&Config::embedding_cache)},
      {"output_dir", path(&Config::output_dir)},
  };
  return table;
}

void resolve(std::filesystem::path& p, const std::filesystem::path& base) {
  if (!p.empty() && p.is_relative() && !base.empty()) p = base / p;
}

}  // namespace

Config parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  Config config;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (io::read_line(in, line)) {
    ++line_no;
    auto text = io::trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(io::trim(text.substr(0, eq)));
    const auto value = io::trim(text.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(Errc::UnknownKey, "line " + std::to_string(line_no) + ": '" + key + "'");
    }
    if (!seen.insert(key).second) bad_value(key, "set twice");
    try {
      it->second(config, value);
    } catch (const Error& e) {
      throw Error(Errc::BadValue, key + ": " + e.what());
    }
  }
  config.hp.validate();
  if (config.hidden_sizes.empty()) bad_value("hidden_sizes", "");

  for (auto* p : {&config.disease_file, &config.symptom_file, &config.demographics_file, &config.weather_source_dir,
                  &config.weather_cache_dir, &config.daily_weather_file, &config.embedding_cache, &config.output_dir}) {
    resolve(*p, base_dir);
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

void write_config(std::ostream& out, const Config& c) {
  const Config d;
  auto num = [&](const char* key, double v, double dv) {
    if (v != dv) out << key << " = " << io::format_shortest(v) << '\n';
  };
  num("learning_rate", c.hp.learning_rate, d.hp.learning_rate);
  num("beta1", c.hp.beta1, d.hp.beta1);
  num("beta2", c.hp.beta2, d.hp.beta2);
  num("epsilon", c.hp.epsilon, d.hp.epsilon);
  num("lambda", c.hp.lambda, d.hp.lambda);
  if (c.hp.epochs != d.hp.epochs) out << "epochs = " << c.hp.epochs << '\n';
  if (c.hp.batch_size != d.hp.batch_size) out << "batch_size = " << c.hp.batch_size << '\n';
  if (c.hp.seed != d.hp.seed) out << "seed = " << c.hp.seed << '\n';
  if (c.hidden_sizes != d.hidden_sizes) {
    out << "hidden_sizes = ";
    for (std::size_t i = 0; i < c.hidden_sizes.size(); ++i) out << (i ? "," : "") << c.hidden_sizes[i];
    out << '\n';
  }
  if (c.embed_fallback_dim != d.embed_fallback_dim) out << "embed_fallback_dim = " << c.embed_fallback_dim << '\n';
  if (c.embed_seed != d.embed_seed) out << "embed_seed = " << c.embed_seed << '\n';
  if (c.station != d.station) out << "station = " << c.station << '\n';
  num("requests_per_second", c.requests_per_second, d.requests_per_second);
  if (c.weather_start) out << "weather_start = " << format_date(*c.weather_start) << '\n';
  if (c.weather_end) out << "weather_end = " << format_date(*c.weather_end) << '\n';
  auto p = [&](const char* key, const std::filesystem::path& v) {
    if (!v.empty()) out << key << " = " << v.string() << '\n';
  };
  p("disease_file", c.disease_file);
  p("symptom_file", c.symptom_file);
  p("demographics_file", c.demographics_file);
  p("weather_source_dir", c.weather_source_dir);
  p("weather_cache_dir", c.weather_cache_dir);
  p("daily_weather_file", c.daily_weather_file);
  p("embedding_cache", c.embedding_cache);
  p("output_dir", c.output_dir);
}

}  // namespace outbreak
