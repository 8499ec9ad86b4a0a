#include "outbreak/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "outbreak/evaluate.hpp"
#include "outbreak/io.hpp"
#include "outbreak/pipeline.hpp"

namespace outbreak::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string output_dir;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Context {
 public:
  Context(const CommonOptions& common, std::ostream& err) : err_(err) {
    try {
      config_ = load_config(common.config_path);
    } catch (const Error& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    if (!common.output_dir.empty()) {
      out_dir_ = common.output_dir;
    } else if (!config_.output_dir.empty()) {
      out_dir_ = config_.output_dir;
    } else {
      std::time_t now = std::time(nullptr);
      char stamp[32];
      std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::localtime(&now));
      out_dir_ = fs::path("runs") / stamp;
    }
  }

  const Config& config() const { return config_; }
  std::ostream& log() { return err_ << "outbreak: "; }

  const fs::path& output_dir() {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create output dir " + out_dir_.string());
    return out_dir_;
  }

  /// Fails with a data error when a configured input is missing.
  const fs::path& require(const fs::path& p, std::string_view key) {
    if (p.empty()) throw Error(Errc::BadValue, std::string(key) + " is not configured");
    if (!fs::exists(p)) throw Error(Errc::IoFailure, std::string(key) + " " + p.string() + " does not exist");
    return p;
  }

 private:
  std::ostream& err_;
  Config config_;
  fs::path out_dir_;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  io::atomic_write(path, writer);
}

DiseaseTable checked_diseases(Context& ctx) {
  const auto& path = ctx.require(ctx.config().disease_file, "disease_file");
  auto table = load_disease_table(path);
  for (const auto& e : table.report.errors) {
    ctx.log() << path.string() << ":" << e.line << ": " << e.message << '\n';
  }
  if (!table.report.ok()) {
    throw Error(Errc::BadValue, std::to_string(table.report.errors.size()) + " invalid rows in " + path.string());
  }
  return table;
}

HealthData checked_health(Context& ctx) {
  if (!ctx.config().symptom_file.empty()) ctx.require(ctx.config().symptom_file, "symptom_file");
  if (!ctx.config().demographics_file.empty()) ctx.require(ctx.config().demographics_file, "demographics_file");
  auto health = load_health_data(ctx.config());
  for (const auto& w : health.warnings) ctx.log() << "warning: " << w << '\n';
  for (const auto& e : health.errors) ctx.log() << e << '\n';
  if (!health.errors.empty()) {
    throw Error(Errc::BadValue, std::to_string(health.errors.size()) + " invalid health records");
  }
  return health;
}

fs::path daily_weather_path(Context& ctx) {
  return ctx.config().daily_weather_file.empty() ? ctx.output_dir() / "daily_weather.tsv"
                                                 : ctx.config().daily_weather_file;
}

std::shared_ptr<const FeatureSchema> schema_for(const Embedder& embedder) {
  return std::make_shared<const FeatureSchema>(FeatureSchema::standard(embedder.dim()));
}

void report_sources(Context& ctx, std::span<const Example> examples) {
  std::size_t cache = 0, fallback = 0, zero = 0;
  for (const auto& ex : examples) {
    for (auto s : ex.sources) {
      (s == EmbeddingSource::cache ? cache : s == EmbeddingSource::fallback ? fallback : zero)++;
    }
  }
  ctx.log() << "embedding blocks: " << cache << " cache, " << fallback << " fallback, " << zero << " zero\n";
}

void write_history(const fs::path& path, const TrainingHistory& history) {
  write_file(path, [&](std::ostream& out) {
    out << "epoch\tdata_loss\tregularized_loss\n";
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
      out << i << '\t' << io::format_shortest(history.epochs[i].data) << '\t'
          << io::format_shortest(history.epochs[i].regularized) << '\n';
    }
  });
}

std::pair<Date, Date> sync_range(Context& ctx, const std::string& from, const std::string& to) {
  std::optional<Date> start = ctx.config().weather_start, end = ctx.config().weather_end;
  if (!from.empty()) start = parse_date(from);
  if (!to.empty()) end = parse_date(to);
  if ((!from.empty() && !start) || (!to.empty() && !end)) throw UsageError("dates must be YYYY-MM-DD");
  if (!start || !end) {
    auto table = checked_diseases(ctx);
    if (table.records.empty()) throw Error(Errc::EmptyInput, "no date range: set --from/--to or weather_start/end");
    for (const auto& r : table.records) {
      if (!start || to_days(r.period_start) < to_days(*start)) start = r.period_start;
      if (!end || to_days(r.period_end) > to_days(*end)) end = r.period_end;
    }
  }
  if (to_days(*start) > to_days(*end)) throw UsageError("date range is empty");
  return {*start, *end};
}

// --- subcommands -------------------------------------------------------------

int cmd_ingest(Context& ctx, bool emit_keys) {
  auto table = load_disease_table(ctx.require(ctx.config().disease_file, "disease_file"));
  const auto validation = validate_dataset(table.records);
  const auto& dpath = ctx.config().disease_file;

  for (const auto& e : table.report.errors) ctx.log() << dpath.string() << ":" << e.line << ": " << e.message << '\n';
  for (const auto& w : validation.warnings) ctx.log() << "warning: record " << w.line << ": " << w.message << '\n';

  HealthData health;
  bool health_ok = true;
  try {
    health = checked_health(ctx);
  } catch (const Error& e) {
    if (e.code() != Errc::BadValue) throw;
    health_ok = false;
  }

  const auto& out_dir = ctx.output_dir();
  write_file(out_dir / "validation.tsv", [&](std::ostream& out) {
    out << "severity\tline\tmessage\n";
    for (const auto& e : table.report.errors) out << "error\t" << e.line << '\t' << e.message << '\n';
    for (const auto& w : validation.warnings) out << "warning\t" << w.line << '\t' << w.message << '\n';
  });
  write_file(out_dir / "diseases.csv", [&](std::ostream& out) { write_disease_table(out, table.records); });

  if (emit_keys) {
    std::set<std::string> keys;
    for (const auto& r : table.records) keys.insert(r.disease);
    for (const auto& h : health.records) keys.insert(h.profile.symptoms.begin(), h.profile.symptoms.end());
    const auto& daily = ctx.config().daily_weather_file;
    if (!daily.empty() && fs::exists(daily)) {
      for (const auto& d : load_daily_summaries(daily)) {
        if (auto k = normalize_key(d.top_phrase); !k.empty()) keys.insert(k);
      }
    }
    write_file(out_dir / "keys.txt", [&](std::ostream& out) {
      for (const auto& k : keys) out << k << '\n';
    });
    ctx.log() << "wrote " << keys.size() << " embedding keys\n";
  }

  ctx.log() << table.report.row_count << " disease rows accepted, " << table.report.errors.size() << " rejected, "
            << validation.warnings.size() << " warnings; " << health.records.size() << " health records\n";
  return table.report.ok() && health_ok ? kOk : kDataError;
}

int cmd_weather_sync(Context& ctx, const std::string& from, const std::string& to, std::size_t jobs) {
  const auto& cfg = ctx.config();
  DirectoryProvider provider(ctx.require(cfg.weather_source_dir, "weather_source_dir"));
  if (cfg.weather_cache_dir.empty()) throw Error(Errc::BadValue, "weather_cache_dir is not configured");
  const auto [start, end] = sync_range(ctx, from, to);
  const auto dates = date_range(start, end);
  const StationKey station(cfg.station);
  WeatherFetcher fetcher(provider, cfg.weather_cache_dir, RetryPolicy{}, cfg.requests_per_second);

  std::atomic<std::size_t> next{0}, empty_days{0};
  std::mutex failure_mutex;
  std::optional<std::string> failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < dates.size(); i = next++) {
      try {
        fetcher.fetch_observations(station, dates[i]);
      } catch (const Error& e) {
        if (e.code() == Errc::EmptyDay) {
          ++empty_days;
          continue;
        }
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = e.what();
        next = dates.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < std::max<std::size_t>(jobs, 1); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (failure) throw Error(Errc::ProviderUnavailable, *failure);
  ctx.log() << "synced " << dates.size() << " days (" << empty_days << " empty, " << fetcher.provider_calls()
            << " provider requests)\n";
  return kOk;
}

int cmd_weather_aggregate(Context& ctx, const std::string& from, const std::string& to) {
  const auto& cfg = ctx.config();
  const auto& cache_dir = ctx.require(cfg.weather_cache_dir, "weather_cache_dir");
  const auto [start, end] = sync_range(ctx, from, to);
  const StationKey station(cfg.station);

  std::vector<DailyWeatherSummary> days;
  std::size_t missing = 0, empty = 0;
  for (auto date : date_range(start, end)) {
    std::ifstream in(cache_path(cache_dir, station, date), std::ios::binary);
    if (!in) {
      ++missing;
      continue;
    }
    auto parsed = parse_observations(in);
    if (!parsed.report.ok()) {
      throw Error(Errc::MalformedLine, cache_path(cache_dir, station, date).string() + ":" +
                                           std::to_string(parsed.report.errors.front().line) + ": " +
                                           parsed.report.errors.front().message);
    }
    if (parsed.observations.empty()) {
      ++empty;
      continue;
    }
    days.push_back(aggregate_day(parsed.observations, date));
  }
  if (missing) ctx.log() << "warning: " << missing << " days not in cache (run weather-sync)\n";
  const auto path = daily_weather_path(ctx);
  write_file(path, [&](std::ostream& out) { write_daily_summaries(out, days); });
  ctx.log() << "aggregated " << days.size() << " days (" << empty << " empty) into " << path.string() << '\n';
  return kOk;
}

struct Prepared {
  Embedder embedder;
  std::shared_ptr<const FeatureSchema> schema;
  std::vector<Example> examples;
};

Prepared prepare(Context& ctx, std::optional<std::string> only_disease = std::nullopt) {
  auto table = checked_diseases(ctx);
  auto health = checked_health(ctx);
  auto daily = load_daily_summaries(ctx.require(ctx.config().daily_weather_file, "daily_weather_file"));
  if (only_disease) {
    const auto key = normalize_key(*only_disease);
    std::erase_if(table.records, [&](const DiseaseRecord& r) { return r.disease != key; });
    if (table.records.empty()) throw Error(Errc::UnknownDisease, "'" + key + "' has no rows");
  }
  Prepared p{make_embedder(ctx.config()), nullptr, {}};
  p.schema = schema_for(p.embedder);
  p.examples = examples_for(table.records, daily, health, p.embedder);
  report_sources(ctx, p.examples);
  return p;
}

std::vector<std::size_t> layer_sizes(const Config& cfg, std::size_t input_dim) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(1);
  return sizes;
}

int cmd_train(Context& ctx) {
  auto prepared = prepare(ctx);
  if (prepared.examples.empty()) throw Error(Errc::EmptyDataset, "no training rows");
  const auto scaler = fit_example_scaler(prepared.examples);
  const auto rows = build_training_rows(prepared.examples, scaler, prepared.schema);
  auto net = init_network(layer_sizes(ctx.config(), prepared.schema->total_dim()), ctx.config().hp.seed);
  ctx.log() << "training on " << rows.size() << " rows for " << ctx.config().hp.epochs << " epochs\n";
  const auto history = train(net, rows, ctx.config().hp);

  const auto& out_dir = ctx.output_dir();
  write_file(out_dir / "checkpoint.txt", [&](std::ostream& out) { write_checkpoint(out, net, scaler); });
  write_history(out_dir / "history.tsv", history);
  write_file(out_dir / "features.tsv",
             [&](std::ostream& out) { write_feature_matrix(out, *prepared.schema, rows); });
  ctx.log() << "final data loss " << io::format_shortest(history.epochs.back().data) << " (scaled units)\n";
  return kOk;
}

int cmd_evaluate(Context& ctx, const std::string& held_out) {
  auto prepared = prepare(ctx);
  auto datasets = group_by_disease(std::move(prepared.examples));
  PipelineConfig pipeline{prepared.schema, ctx.config().hidden_sizes};
  const auto key = normalize_key(held_out);
  ctx.log() << "holding out '" << key << "', training on " << datasets.size() - datasets.count(key)
            << " diseases\n";
  const auto run = leave_one_out_eval(datasets, held_out, ctx.config().hp, pipeline);

  const auto& out_dir = ctx.output_dir();
  write_file(out_dir / "metrics.tsv", [&](std::ostream& out) { write_metrics(out, run.result.metrics); });
  export_plot_series(run.result, out_dir / "predictions.tsv");
  write_file(out_dir / "checkpoint.txt", [&](std::ostream& out) { write_checkpoint(out, run.net, run.scaler); });
  write_history(out_dir / "history.tsv", run.history);

  const auto& m = run.result.metrics;
  ctx.log() << "n=" << m.n << " mae=" << io::format_shortest(m.mae) << " mse=" << io::format_shortest(m.mse)
            << " rmse=" << io::format_shortest(m.rmse) << " r2=" << io::format_shortest(m.r_squared) << '\n';
  return kOk;
}

int cmd_predict(Context& ctx, const std::string& checkpoint_path, const std::string& disease) {
  std::ifstream in(ctx.require(checkpoint_path, "--checkpoint"), std::ios::binary);
  const auto ckpt = read_checkpoint(in);
  auto prepared = prepare(ctx, disease.empty() ? std::nullopt : std::optional<std::string>(disease));
  if (ckpt.net.input_dim() != prepared.schema->total_dim() ||
      ckpt.scaler.fields.size() != prepared.schema->numeric_dim()) {
    throw Error(Errc::DimMismatch, "checkpoint expects " + std::to_string(ckpt.net.input_dim()) +
                                       " inputs, features have " + std::to_string(prepared.schema->total_dim()));
  }
  const auto rows = build_training_rows(prepared.examples, ckpt.scaler, prepared.schema);
  std::vector<std::vector<std::string>> out_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = prepared.examples[i].record;
    out_rows.push_back({r.disease, format_date(r.period_start), format_date(r.period_end),
                        io::format_shortest(r.value), io::format_shortest(predict(ckpt.net, ckpt.scaler, rows[i].features))});
  }
  const std::vector<std::string> columns{"disease", "period_start", "period_end", "actual", "predicted"};
  write_series_tsv(ctx.output_dir() / "predictions.tsv", columns, out_rows);
  ctx.log() << "wrote " << out_rows.size() << " predictions\n";
  return kOk;
}

int cmd_plot_data(Context& ctx, const std::string& by) {
  if (by != "year" && by != "month") throw UsageError("--by must be 'year' or 'month'");
  auto daily = load_daily_summaries(ctx.require(ctx.config().daily_weather_file, "daily_weather_file"));
  std::stable_sort(daily.begin(), daily.end(), [](const auto& a, const auto& b) { return to_days(a.date) < to_days(b.date); });

  std::vector<std::vector<std::string>> rows;
  auto cell = [](double v) { return std::isnan(v) ? std::string() : io::format_shortest(v); };
  for (std::size_t i = 0; i < daily.size();) {
    const auto ym = daily[i].date;
    const Date start = by == "year" ? Date{ym.year(), std::chrono::January, std::chrono::day{1}}
                                    : Date{ym.year(), ym.month(), std::chrono::day{1}};
    const Date end = by == "year" ? Date{ym.year(), std::chrono::December, std::chrono::day{31}}
                                  : Date{ym.year() / ym.month() / std::chrono::last};
    std::size_t j = i;
    while (j < daily.size() && to_days(daily[j].date) <= to_days(end)) ++j;
    const auto p = aggregate_period(std::span(daily).subspan(i, j - i), start, end);
    rows.push_back({format_date(start), cell(p.avg_temp_c), cell(p.avg_pressure), cell(p.avg_visibility),
                    cell(p.avg_wind_mph)});
    i = j;
  }
  const std::vector<std::string> columns{"period_start", "avg_temp_c", "avg_pressure", "avg_visibility",
                                         "avg_wind_mph"};
  write_series_tsv(ctx.output_dir() / "weather_trends.tsv", columns, rows);
  ctx.log() << "wrote " << rows.size() << " " << by << "ly weather points\n";
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& err) {
  CLI::App app{"Outbreak forecasting pipeline", "outbreak"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Flat key = value config file")->required();
    sub->add_option("--output-dir", common.output_dir, "Override the run output directory");
  };

  bool emit_keys = false;
  std::string from, to, held_out = "influenza", checkpoint, disease, by = "year";
  std::size_t jobs = 1;

  auto* ingest = app.add_subcommand("ingest", "Parse and validate disease and health records");
  add_common(ingest);
  ingest->add_flag("--emit-keys", emit_keys, "Write the embedding key list");

  auto* sync = app.add_subcommand("weather-sync", "Fill the observation cache from the provider");
  add_common(sync);
  sync->add_option("--from", from, "First day (YYYY-MM-DD)");
  sync->add_option("--to", to, "Last day (YYYY-MM-DD)");
  sync->add_option("--jobs", jobs, "Concurrent fetches")->check(CLI::PositiveNumber);

  auto* aggregate = app.add_subcommand("weather-aggregate", "Aggregate cached observations into daily summaries");
  add_common(aggregate);
  aggregate->add_option("--from", from, "First day (YYYY-MM-DD)");
  aggregate->add_option("--to", to, "Last day (YYYY-MM-DD)");

  auto* train_cmd = app.add_subcommand("train", "Train on every disease and write a checkpoint");
  add_common(train_cmd);

  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-disease-out evaluation");
  add_common(evaluate);
  evaluate->add_option("--hold-out", held_out, "Disease to hold out")->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "Predict case counts with a checkpoint");
  add_common(predict_cmd);
  predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  predict_cmd->add_option("--disease", disease, "Only predict this disease");

  auto* plot = app.add_subcommand("plot-data", "Emit weather trend series for plotting");
  add_common(plot);
  plot->add_option("--by", by, "year or month")->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "outbreak: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    Context ctx(common, err);
    if (ingest->parsed()) return cmd_ingest(ctx, emit_keys);
    if (sync->parsed()) return cmd_weather_sync(ctx, from, to, jobs);
    if (aggregate->parsed()) return cmd_weather_aggregate(ctx, from, to);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (evaluate->parsed()) return cmd_evaluate(ctx, held_out);
    if (predict_cmd->parsed()) return cmd_predict(ctx, checkpoint, disease);
    if (plot->parsed()) return cmd_plot_data(ctx, by);
  } catch (const UsageError& e) {
    err << "outbreak: " << e.what() << '\n';
    return kUsage;
  } catch (const NonFiniteLossError& e) {
    err << "outbreak: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    err << "outbreak: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "outbreak: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cerr);
}

}  // namespace outbreak::cli
