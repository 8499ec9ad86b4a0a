#include "outbreak/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "outbreak/io.hpp"

namespace outbreak {

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                          std::to_string(predicted.size()) + " predicted values");
  }
  if (actual.empty()) throw Error(Errc::EmptyInput, "no values to score");
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i])) {
      throw Error(Errc::NonFiniteValue, "non-finite value at index " + std::to_string(i));
    }
  }

  const double n = static_cast<double>(actual.size());
  double abs_sum = 0.0, sq_sum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    mean += actual[i];
  }
  mean /= n;
  double ss_tot = 0.0;
  for (double a : actual) ss_tot += (a - mean) * (a - mean);

  MetricsReport m;
  m.n = actual.size();
  m.mae = abs_sum / n;
  m.mse = sq_sum / n;
  m.rmse = std::sqrt(m.mse);
  if (ss_tot == 0.0) {
    if (sq_sum != 0.0) throw Error(Errc::UndefinedR2, "actual values are constant but residuals are not zero");
    m.r_squared = 1.0;
  } else {
    m.r_squared = 1.0 - sq_sum / ss_tot;
  }
  return m;
}

void write_metrics(std::ostream& out, const MetricsReport& m) {
  out << "metric\tvalue\n"
      << "mae\t" << io::format_shortest(m.mae) << '\n'
      << "mse\t" << io::format_shortest(m.mse) << '\n'
      << "rmse\t" << io::format_shortest(m.rmse) << '\n'
      << "r_squared\t" << io::format_shortest(m.r_squared) << '\n'
      << "n\t" << m.n << '\n';
}

DiseaseDatasets group_by_disease(std::vector<Example> examples) {
  DiseaseDatasets out;
  for (auto& ex : examples) {
    auto key = ex.record.disease;
    out[key].push_back(std::move(ex));
  }
  return out;
}

namespace {

std::vector<Example> training_examples(const DiseaseDatasets& datasets, std::string_view held_out) {
  std::vector<Example> train;
  for (const auto& [name, rows] : datasets) {
    if (name != held_out) train.insert(train.end(), rows.begin(), rows.end());
  }
  return train;
}

}  // namespace

ScalerParams fit_training_scaler(const DiseaseDatasets& datasets, std::string_view held_out) {
  const auto train = training_examples(datasets, held_out);
  if (train.empty()) throw Error(Errc::EmptyTrainingSet, "no rows outside '" + std::string(held_out) + "'");
  return fit_example_scaler(train);
}

LeaveOneOutRun leave_one_out_eval(const DiseaseDatasets& datasets, std::string_view held_out, const HyperParams& hp,
                                  const PipelineConfig& config) {
  const std::string key = normalize_key(held_out);
  auto test_it = datasets.find(key);
  if (test_it == datasets.end()) throw Error(Errc::UnknownDisease, "'" + key + "' is not in the dataset");
  if (test_it->second.empty()) throw Error(Errc::UnknownDisease, "'" + key + "' has no rows");

  const auto train_examples = training_examples(datasets, key);
  if (train_examples.empty()) throw Error(Errc::EmptyTrainingSet, "no diseases besides '" + key + "'");

  LeaveOneOutRun run;
  run.scaler = fit_example_scaler(train_examples);
  const auto rows = build_training_rows(train_examples, run.scaler, config.schema);

  std::vector<std::size_t> sizes{config.schema->total_dim()};
  sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  sizes.push_back(1);
  run.net = init_network(sizes, hp.seed);
  run.history = train(run.net, rows, hp);

  std::vector<Example> test(test_it->second);
  std::stable_sort(test.begin(), test.end(), [](const Example& a, const Example& b) {
    return std::tie(a.record.period_start, a.record.period_end) < std::tie(b.record.period_start, b.record.period_end);
  });
  const auto test_rows = build_training_rows(test, run.scaler, config.schema);

  run.result.held_out_disease = key;
  std::vector<double> actual, predicted;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double p = predict(run.net, run.scaler, test_rows[i].features);
    run.result.predictions.push_back({test[i].record.period_start, test[i].record.period_end, test[i].record.value, p});
    actual.push_back(test[i].record.value);
    predicted.push_back(p);
  }
  run.result.metrics = compute_metrics(actual, predicted);
  return run;
}

void write_series_tsv(const std::filesystem::path& path, std::span<const std::string> columns,
                      std::span<const std::vector<std::string>> rows) {
  io::atomic_write(path, [&](std::ostream& out) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "\t" : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
      out << '\n';
    }
  });
}

void export_plot_series(const EvalResult& result, const std::filesystem::path& path) {
  if (result.predictions.empty()) throw Error(Errc::EmptyInput, "no predictions to export");
  auto points = result.predictions;
  std::stable_sort(points.begin(), points.end(), [](const PredictionPoint& a, const PredictionPoint& b) {
    return std::tie(a.period_start, a.period_end) < std::tie(b.period_start, b.period_end);
  });
  const std::vector<std::string> columns{"period_start", "actual", "predicted"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(points.size());
  for (const auto& p : points) {
    rows.push_back({format_date(p.period_start), io::format_shortest(p.actual), io::format_shortest(p.predicted)});
  }
  write_series_tsv(path, columns, rows);
}

}  // namespace outbreak
