#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outbreak/embeddings.hpp"
#include "outbreak/ingest.hpp"
#include "outbreak/weather.hpp"

namespace outbreak {

struct EmbeddingBlock {
  std::string name;
  std::size_t dim = 0;

  bool operator==(const EmbeddingBlock&) const = default;
};

/// Ordered layout of a model input: numeric fields first, then embedding
/// blocks in declared order.
struct FeatureSchema {
  std::vector<std::string> numeric_fields;
  std::vector<EmbeddingBlock> embedding_blocks;

  std::size_t total_dim() const noexcept;
  std::size_t numeric_dim() const noexcept { return numeric_fields.size(); }

  /// The ten numeric daily weather aggregates, month sine/cosine and year,
  /// followed by disease, symptoms and phrase blocks of `embedding_dim`.
  static FeatureSchema standard(std::size_t embedding_dim);

  bool operator==(const FeatureSchema&) const = default;
};

struct FieldRange {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const FieldRange&) const = default;
};

/// Min-max scaling fitted on training rows only.
struct ScalerParams {
  std::vector<FieldRange> fields;
  double target_min = 0.0;
  double target_max = 0.0;

  double scale_target(double value) const noexcept;
  double unscale_target(double scaled) const noexcept;

  bool operator==(const ScalerParams&) const = default;
};

/// Throws Errc::EmptyInput or Errc::RaggedRows (also when targets and rows
/// differ in count).
ScalerParams fit_scaler(std::span<const std::vector<double>> rows, std::span<const double> targets);

/// (x - min) / (max - min), unclamped; constant fields map to 0.
/// Throws Errc::LengthMismatch.
std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> row);

/// Indicator vector over `vocabulary`; unknown values give all zeros.
/// Throws Errc::DuplicateVocabulary or Errc::EmptyInput.
std::vector<double> one_hot_encode(std::span<const std::string> vocabulary, std::string_view value);

struct FeatureVector {
  std::vector<double> values;
  std::shared_ptr<const FeatureSchema> schema;
};

/// Concatenates numerics then `blocks` in schema order. Blocks declared with
/// dim 0 are skipped. Throws Errc::BlockDimMismatch naming the block.
FeatureVector assemble_features(std::shared_ptr<const FeatureSchema> schema, std::span<const double> scaled_numerics,
                                std::span<const Embedding> blocks);

FeatureVector assemble_features(std::shared_ptr<const FeatureSchema> schema, std::span<const double> scaled_numerics,
                                const Embedding& disease_vec, const Embedding& symptom_vec,
                                const Embedding& phrase_vec);

/// Unscaled numeric inputs for one reporting period, in
/// FeatureSchema::standard order.
std::vector<double> period_numeric_features(const PeriodWeatherSummary& weather);

/// Everything needed to build a model row for one disease record, before
/// scaling. Scalers are fitted on these.
struct Example {
  DiseaseRecord record;
  std::vector<double> numerics;
  Embedding disease;
  Embedding symptoms;
  Embedding phrase;
  std::array<EmbeddingSource, 3> sources{};
};

/// One example per record, in input order. Unmatched diseases get a zero
/// symptom block. Throws Errc::MissingWeather when a record's period has no
/// summary or a numeric field has no readings in it.
std::vector<Example> collect_examples(std::span<const DiseaseRecord> records, const PeriodWeatherIndex& weather,
                                      std::span<const MergedHealthRecord> health, const Embedder& embedder);

ScalerParams fit_example_scaler(std::span<const Example> examples);

struct TrainingRow {
  FeatureVector features;
  double target = 0.0;  // scaled
};

std::vector<TrainingRow> build_training_rows(std::span<const Example> examples, const ScalerParams& scaler,
                                             std::shared_ptr<const FeatureSchema> schema);

/// Debug dump: header `num:<field>` / `<block>:<i>` ... `target`.
void write_feature_matrix(std::ostream& out, const FeatureSchema& schema, std::span<const TrainingRow> rows);

}  // namespace outbreak
