#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outbreak/features.hpp"
#include "outbreak/neuralnet.hpp"

namespace outbreak {

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// MAE, MSE, RMSE and R^2 = 1 - SSres/SStot (SStot about the mean of
/// `actual`). Throws Errc::LengthMismatch, Errc::EmptyInput,
/// Errc::NonFiniteValue, or Errc::UndefinedR2 when `actual` is constant and
/// the residuals are not all zero.
MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted);

void write_metrics(std::ostream& out, const MetricsReport& m);

struct PredictionPoint {
  Date period_start;
  Date period_end;
  double actual = 0.0;
  double predicted = 0.0;
};

struct EvalResult {
  std::string held_out_disease;
  MetricsReport metrics;
  std::vector<PredictionPoint> predictions;  // chronological
};

using DiseaseDatasets = std::map<std::string, std::vector<Example>>;

DiseaseDatasets group_by_disease(std::vector<Example> examples);

struct PipelineConfig {
  std::shared_ptr<const FeatureSchema> schema;
  /// Widths between input and the scalar output.
  std::vector<std::size_t> hidden_sizes{256, 128, 64, 32};
};

/// Min-max scaler fitted on every disease except `held_out`.
ScalerParams fit_training_scaler(const DiseaseDatasets& datasets, std::string_view held_out);

struct LeaveOneOutRun {
  EvalResult result;
  Network net;
  ScalerParams scaler;
  TrainingHistory history;
};

/// Trains on all diseases but `held_out` and scores the held-out rows in
/// original units. Throws Errc::UnknownDisease or Errc::EmptyTrainingSet.
LeaveOneOutRun leave_one_out_eval(const DiseaseDatasets& datasets, std::string_view held_out, const HyperParams& hp,
                                  const PipelineConfig& config);

/// Tab-separated series with a header row, written atomically.
void write_series_tsv(const std::filesystem::path& path, std::span<const std::string> columns,
                      std::span<const std::vector<std::string>> rows);

/// `period_start\tactual\tpredicted`, sorted by period. Throws
/// Errc::EmptyInput for an empty result and Errc::IoFailure on write errors.
void export_plot_series(const EvalResult& result, const std::filesystem::path& path);

}  // namespace outbreak
