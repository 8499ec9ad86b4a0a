#include "outbreak/features.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <unordered_map>

#include "outbreak/io.hpp"

namespace outbreak {

namespace {

double scale(double x, double lo, double hi) noexcept { return hi == lo ? 0.0 : (x - lo) / (hi - lo); }

}  // namespace

std::size_t FeatureSchema::total_dim() const noexcept {
  std::size_t n = numeric_fields.size();
  for (const auto& b : embedding_blocks) n += b.dim;
  return n;
}

FeatureSchema FeatureSchema::standard(std::size_t embedding_dim) {
  FeatureSchema s;
  s.numeric_fields = {"avg_temp_c",     "avg_temp_f",    "avg_wind_mph",   "avg_wind_kph",   "avg_wind_deg",
                      "avg_pressure",   "avg_dew_point", "avg_heat_index", "avg_visibility", "avg_uv_index",
                      "month_sin",      "month_cos",     "year"};
  s.embedding_blocks = {{"disease", embedding_dim}, {"symptoms", embedding_dim}, {"phrase", embedding_dim}};
  return s;
}

double ScalerParams::scale_target(double value) const noexcept { return scale(value, target_min, target_max); }

double ScalerParams::unscale_target(double scaled) const noexcept {
  return target_min + scaled * (target_max - target_min);
}

ScalerParams fit_scaler(std::span<const std::vector<double>> rows, std::span<const double> targets) {
  if (rows.empty()) throw Error(Errc::EmptyInput, "cannot fit a scaler on zero rows");
  if (targets.size() != rows.size()) {
    throw Error(Errc::RaggedRows, std::to_string(rows.size()) + " rows but " + std::to_string(targets.size()) +
                                      " targets");
  }
  const std::size_t width = rows.front().size();
  ScalerParams p;
  p.fields.reserve(width);
  for (double x : rows.front()) p.fields.push_back({x, x});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error(Errc::RaggedRows, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                        " fields, expected " + std::to_string(width));
    }
    for (std::size_t i = 0; i < width; ++i) {
      p.fields[i].min = std::min(p.fields[i].min, rows[r][i]);
      p.fields[i].max = std::max(p.fields[i].max, rows[r][i]);
    }
  }
  p.target_min = p.target_max = targets.front();
  for (double t : targets) {
    p.target_min = std::min(p.target_min, t);
    p.target_max = std::max(p.target_max, t);
  }
  return p;
}

std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> row) {
  if (row.size() != params.fields.size()) {
    throw Error(Errc::LengthMismatch, "row has " + std::to_string(row.size()) + " fields, scaler fitted on " +
                                          std::to_string(params.fields.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = scale(row[i], params.fields[i].min, params.fields[i].max);
  return out;
}

std::vector<double> one_hot_encode(std::span<const std::string> vocabulary, std::string_view value) {
  if (vocabulary.empty()) throw Error(Errc::EmptyInput, "empty vocabulary");
  std::set<std::string_view> seen;
  for (const auto& v : vocabulary) {
    if (!seen.insert(v).second) throw Error(Errc::DuplicateVocabulary, "'" + v + "' listed twice");
  }
  std::vector<double> out(vocabulary.size(), 0.0);
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (vocabulary[i] == value) out[i] = 1.0;
  }
  return out;
}

FeatureVector assemble_features(std::shared_ptr<const FeatureSchema> schema, std::span<const double> scaled_numerics,
                                std::span<const Embedding> blocks) {
  if (scaled_numerics.size() != schema->numeric_dim()) {
    throw Error(Errc::BlockDimMismatch, "numeric block has " + std::to_string(scaled_numerics.size()) +
                                            " values, schema expects " + std::to_string(schema->numeric_dim()));
  }
  if (blocks.size() != schema->embedding_blocks.size()) {
    throw Error(Errc::BlockDimMismatch, std::to_string(blocks.size()) + " embedding blocks, schema declares " +
                                            std::to_string(schema->embedding_blocks.size()));
  }
  FeatureVector fv;
  fv.values.reserve(schema->total_dim());
  fv.values.insert(fv.values.end(), scaled_numerics.begin(), scaled_numerics.end());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& decl = schema->embedding_blocks[b];
    if (decl.dim == 0) continue;
    if (blocks[b].dim() != decl.dim) {
      throw Error(Errc::BlockDimMismatch, decl.name + ": got " + std::to_string(blocks[b].dim()) + ", schema dim " +
                                              std::to_string(decl.dim));
    }
    fv.values.insert(fv.values.end(), blocks[b].values.begin(), blocks[b].values.end());
  }
  fv.schema = std::move(schema);
  return fv;
}

FeatureVector assemble_features(std::shared_ptr<const FeatureSchema> schema, std::span<const double> scaled_numerics,
                                const Embedding& disease_vec, const Embedding& symptom_vec,
                                const Embedding& phrase_vec) {
  const std::array<Embedding, 3> blocks{disease_vec, symptom_vec, phrase_vec};
  return assemble_features(std::move(schema), scaled_numerics, blocks);
}

std::vector<double> period_numeric_features(const PeriodWeatherSummary& w) {
  const Date mid = period_midpoint(w.period_start, w.period_end);
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(static_cast<unsigned>(mid.month()) - 1) / 12.0;
  return {w.avg_temp_c,     w.avg_temp_f,     w.avg_wind_mph,   w.avg_wind_kph,
          w.avg_wind_deg,   w.avg_pressure,   w.avg_dew_point,  w.avg_heat_index,
          w.avg_visibility, w.avg_uv_index,   std::sin(angle),  std::cos(angle),
          static_cast<double>(static_cast<int>(mid.year()))};
}

std::vector<Example> collect_examples(std::span<const DiseaseRecord> records, const PeriodWeatherIndex& weather,
                                      std::span<const MergedHealthRecord> health, const Embedder& embedder) {
  std::unordered_map<std::string, const MergedHealthRecord*> by_name;
  for (const auto& h : health) by_name.emplace(h.profile.name, &h);

  const auto names = FeatureSchema::standard(0).numeric_fields;
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::string period = format_date(r.period_start) + ".." + format_date(r.period_end);
    auto w = weather.find({r.period_start, r.period_end});
    if (w == weather.end()) throw Error(Errc::MissingWeather, "no weather summary for period " + period);

    Example ex;
    ex.record = r;
    ex.numerics = period_numeric_features(w->second);
    for (std::size_t i = 0; i < ex.numerics.size(); ++i) {
      if (!std::isfinite(ex.numerics[i])) {
        throw Error(Errc::MissingWeather, names[i] + " has no readings for period " + period);
      }
    }

    auto disease = embedder.embed_text(r.disease);
    ex.disease = std::move(disease.embedding);
    ex.sources[0] = disease.source;

    if (auto it = by_name.find(r.disease); it != by_name.end()) {
      auto symptoms = embedder.embed_symptom_list(it->second->profile.symptoms);
      ex.symptoms = std::move(symptoms.embedding);
      ex.sources[1] = symptoms.source;
    } else {
      ex.symptoms = embedder.zero();
      ex.sources[1] = EmbeddingSource::zero;
    }

    if (w->second.top_phrase.empty()) {
      ex.phrase = embedder.zero();
      ex.sources[2] = EmbeddingSource::zero;
    } else {
      auto phrase = embedder.embed_text(w->second.top_phrase);
      ex.phrase = std::move(phrase.embedding);
      ex.sources[2] = phrase.source;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

ScalerParams fit_example_scaler(std::span<const Example> examples) {
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  rows.reserve(examples.size());
  targets.reserve(examples.size());
  for (const auto& ex : examples) {
    rows.push_back(ex.numerics);
    targets.push_back(ex.record.value);
  }
  return fit_scaler(rows, targets);
}

std::vector<TrainingRow> build_training_rows(std::span<const Example> examples, const ScalerParams& scaler,
                                             std::shared_ptr<const FeatureSchema> schema) {
  std::vector<TrainingRow> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto numerics = apply_scaler(scaler, ex.numerics);
    rows.push_back({assemble_features(schema, numerics, ex.disease, ex.symptoms, ex.phrase),
                    scaler.scale_target(ex.record.value)});
  }
  return rows;
}

void write_feature_matrix(std::ostream& out, const FeatureSchema& schema, std::span<const TrainingRow> rows) {
  bool first = true;
  auto sep = [&] {
    if (!first) out << '\t';
    first = false;
  };
  for (const auto& f : schema.numeric_fields) {
    sep();
    out << "num:" << f;
  }
  for (const auto& b : schema.embedding_blocks) {
    for (std::size_t i = 0; i < b.dim; ++i) {
      sep();
      out << b.name << ':' << i;
    }
  }
  sep();
  out << "target\n";
  for (const auto& row : rows) {
    for (double v : row.features.values) out << io::format_shortest(v) << '\t';
    out << io::format_shortest(row.target) << '\n';
  }
}

}  // namespace outbreak
