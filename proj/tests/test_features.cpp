#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "outbreak/features.hpp"
#include "outbreak/synthetic.hpp"

using namespace outbreak;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoFailure;
}

Embedding filled(std::size_t n, double v) { return Embedding{std::vector<double>(n, v)}; }

}  // namespace

TEST(Scaler, FitExamples) {
  std::vector<std::vector<double>> rows{{2, 5}, {4, 5}, {6, 5}};
  std::vector<double> targets{10, 30, 20};
  auto p = fit_scaler(rows, targets);
  ASSERT_EQ(p.fields.size(), 2u);
  EXPECT_EQ(p.fields[0], (FieldRange{2, 6}));
  EXPECT_EQ(p.fields[1], (FieldRange{5, 5}));
  EXPECT_EQ(p.target_min, 10);
  EXPECT_EQ(p.target_max, 30);
  EXPECT_EQ(error_of([] { fit_scaler({}, {}); }), Errc::EmptyInput);
  std::vector<std::vector<double>> ragged{{1, 2}, {1}};
  std::vector<double> two{1, 2};
  EXPECT_EQ(error_of([&] { fit_scaler(ragged, two); }), Errc::RaggedRows);
}

TEST(Scaler, ApplyExamples) {
  ScalerParams p{{{2, 6}, {5, 5}}, 0, 1};
  EXPECT_EQ(apply_scaler(p, std::vector<double>{4, 123}), (std::vector<double>{0.5, 0.0}));
  EXPECT_EQ(apply_scaler(p, std::vector<double>{8, 5}), (std::vector<double>{1.5, 0.0}));
  EXPECT_EQ(error_of([&] { apply_scaler(p, std::vector<double>{1}); }), Errc::LengthMismatch);
}

TEST(Scaler, TargetInverse) {
  ScalerParams p{{}, 100, 300};
  EXPECT_EQ(p.scale_target(200), 0.5);
  EXPECT_EQ(p.unscale_target(0.5), 200);
  EXPECT_EQ(p.unscale_target(p.scale_target(137.25)), 137.25);
}

TEST(Scaler, TrainingRowsLandInUnitInterval) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> rows(1 + rng() % 20, std::vector<double>(6));
    std::vector<double> targets;
    for (auto& r : rows) {
      for (auto& x : r) x = u(rng);
      targets.push_back(u(rng));
    }
    auto p = fit_scaler(rows, targets);
    for (const auto& f : p.fields) EXPECT_LE(f.min, f.max);
    for (const auto& r : rows) {
      for (double x : apply_scaler(p, r)) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
  }
}

TEST(OneHot, Definition) {
  std::vector<std::string> vocab{"a", "b", "c"};
  EXPECT_EQ(one_hot_encode(vocab, "b"), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(one_hot_encode(vocab, "z"), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(one_hot_encode(std::vector<std::string>{"a"}, "a"), std::vector<double>{1});
  std::vector<std::string> dup{"a", "a"};
  EXPECT_EQ(error_of([&] { one_hot_encode(dup, "a"); }), Errc::DuplicateVocabulary);
  for (const auto& v : {"a", "b", "c", "d"}) {
    double sum = 0;
    for (double x : one_hot_encode(vocab, v)) sum += x;
    EXPECT_EQ(sum, std::string(v) == "d" ? 0.0 : 1.0);
  }
}

TEST(Schema, StandardLayout) {
  auto s = FeatureSchema::standard(64);
  EXPECT_EQ(s.numeric_dim(), 13u);
  EXPECT_EQ(s.total_dim(), 13u + 3 * 64);
  EXPECT_EQ(s.embedding_blocks[0].name, "disease");
  EXPECT_EQ(s.embedding_blocks[1].name, "symptoms");
  EXPECT_EQ(s.embedding_blocks[2].name, "phrase");
}

TEST(Assemble, TwelveNumericsAndThreeBlocks) {
  auto schema = std::make_shared<const FeatureSchema>(FeatureSchema{
      std::vector<std::string>(12, "x"), {{"disease", 64}, {"symptoms", 64}, {"phrase", 64}}});
  std::vector<double> nums(12, 0.25);
  auto fv = assemble_features(schema, nums, filled(64, 1), filled(64, 2), filled(64, 3));
  EXPECT_EQ(fv.values.size(), 204u);
  EXPECT_EQ(fv.values.size(), schema->total_dim());
}

TEST(Assemble, SlicesAreInputsBitForBit) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  auto schema = std::make_shared<const FeatureSchema>(FeatureSchema::standard(16));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> nums(13);
    for (auto& x : nums) x = g(rng);
    std::array<Embedding, 3> blocks;
    for (auto& b : blocks) {
      b.values.resize(16);
      for (auto& x : b.values) x = g(rng);
    }
    auto fv = assemble_features(schema, nums, blocks);
    ASSERT_EQ(fv.values.size(), schema->total_dim());
    EXPECT_TRUE(std::equal(nums.begin(), nums.end(), fv.values.begin()));
    for (std::size_t b = 0; b < 3; ++b) {
      EXPECT_TRUE(std::equal(blocks[b].values.begin(), blocks[b].values.end(), fv.values.begin() + 13 + 16 * b));
    }
  }
}

TEST(Assemble, ZeroDimBlockIsSkipped) {
  auto schema = std::make_shared<const FeatureSchema>(
      FeatureSchema{{"a", "b"}, {{"disease", 3}, {"symptoms", 0}, {"phrase", 2}}});
  auto fv = assemble_features(schema, std::vector<double>{1, 2}, filled(3, 7), Embedding{}, filled(2, 9));
  EXPECT_EQ(fv.values, (std::vector<double>{1, 2, 7, 7, 7, 9, 9}));
}

TEST(Assemble, WrongBlockDimNamesBlock) {
  auto schema = std::make_shared<const FeatureSchema>(FeatureSchema::standard(64));
  std::vector<double> nums(13, 0.0);
  try {
    assemble_features(schema, nums, filled(32, 0), filled(64, 0), filled(64, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BlockDimMismatch);
    EXPECT_NE(std::string(e.what()).find("disease"), std::string::npos);
  }
}

TEST(PeriodFeatures, TemporalEncoding) {
  PeriodWeatherSummary w;
  w.period_start = ymd(2019, 4, 1);
  w.period_end = ymd(2019, 4, 30);
  auto f = period_numeric_features(w);
  ASSERT_EQ(f.size(), 13u);
  EXPECT_NEAR(f[10], std::sin(2 * M_PI * 3 / 12), 1e-15);
  EXPECT_NEAR(f[11], std::cos(2 * M_PI * 3 / 12), 1e-15);
  EXPECT_EQ(f[12], 2019.0);
}

namespace {

struct Fixture {
  synthetic::Dataset ds = synthetic::generate({.years = 1});
  Embedder embedder{{.fallback_dim = 8, .seed = 0}};
  PeriodWeatherIndex index;
  std::vector<MergedHealthRecord> health;

  Fixture() {
    index = summarize_periods(ds.daily, ds.records);
    health = merge_demographics(ds.profiles, ds.demographics).records;
  }
};

}  // namespace

TEST(Examples, OneRowPerRecord) {
  Fixture fx;
  auto ex = collect_examples(fx.ds.records, fx.index, fx.health, fx.embedder);
  ASSERT_EQ(ex.size(), fx.ds.records.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    EXPECT_EQ(ex[i].record, fx.ds.records[i]);
    EXPECT_EQ(ex[i].sources[0], EmbeddingSource::fallback);
    EXPECT_EQ(ex[i].sources[1], EmbeddingSource::fallback);
  }
  auto schema = std::make_shared<const FeatureSchema>(FeatureSchema::standard(8));
  auto scaler = fit_example_scaler(ex);
  auto rows = build_training_rows(ex, scaler, schema);
  ASSERT_EQ(rows.size(), ex.size());
  for (const auto& r : rows) {
    EXPECT_EQ(r.features.values.size(), schema->total_dim());
    for (double v : r.features.values) EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(r.target, 0.0);
    EXPECT_LE(r.target, 1.0);
  }
}

TEST(Examples, UnmatchedProfileGivesZeroSymptoms) {
  Fixture fx;
  std::vector<DiseaseRecord> recs{fx.ds.records.front()};
  recs[0].disease = "leprosy";
  auto ex = collect_examples(recs, fx.index, fx.health, fx.embedder);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].symptoms, fx.embedder.zero());
  EXPECT_EQ(ex[0].sources[1], EmbeddingSource::zero);
}

TEST(Examples, MissingWeather) {
  Fixture fx;
  std::vector<DiseaseRecord> recs{fx.ds.records.front()};
  recs[0].period_start = ymd(2030, 1, 1);
  recs[0].period_end = ymd(2030, 1, 31);
  EXPECT_EQ(error_of([&] { collect_examples(recs, fx.index, fx.health, fx.embedder); }), Errc::MissingWeather);
}

TEST(FeatureMatrix, HeaderNamesEveryPosition) {
  auto schema = FeatureSchema{{"a"}, {{"disease", 2}}};
  auto sp = std::make_shared<const FeatureSchema>(schema);
  std::vector<TrainingRow> rows{{assemble_features(sp, std::vector<double>{0.5}, std::vector<Embedding>{filled(2, 1)}), 0.25}};
  std::ostringstream out;
  write_feature_matrix(out, schema, rows);
  EXPECT_EQ(out.str(), "num:a\tdisease:0\tdisease:1\ttarget\n0.5\t1\t1\t0.25\n");
}
