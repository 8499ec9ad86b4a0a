#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "outbreak/ingest.hpp"

using namespace outbreak;

namespace {

DiseaseTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_disease_table(in);
}

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

const std::string kHeader = "disease,period_start,period_end,region,value,value_type\n";

}  // namespace

TEST(DiseaseTable, ParsesCanonicalRow) {
  auto t = parse(kHeader + "influenza,2019-01-01,2019-01-31,IN,1200,cases\n");
  ASSERT_TRUE(t.report.ok());
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0], (DiseaseRecord{"influenza", ymd(2019, 1, 1), ymd(2019, 1, 31), "IN", 1200.0, ValueType::cases}));
  EXPECT_EQ(t.report.row_count, 1u);
}

TEST(DiseaseTable, HeaderOnlyIsEmpty) {
  auto t = parse(kHeader);
  EXPECT_TRUE(t.records.empty());
  EXPECT_EQ(t.report.row_count, 0u);
  EXPECT_TRUE(t.report.ok());
}

TEST(DiseaseTable, NegativeValueIsRowError) {
  auto t = parse(kHeader + "influenza,2019-01-01,2019-01-31,IN,1200,cases\ncholera,2019-01-01,2019-01-31,IN,-5,cases\n");
  ASSERT_EQ(t.report.errors.size(), 1u);
  EXPECT_EQ(t.report.errors[0].line, 3u);
  EXPECT_EQ(t.report.errors[0].message, "negative value");
  EXPECT_EQ(t.report.row_count, 1u);
}

TEST(DiseaseTable, WrongHeaderThrows) {
  try {
    parse("disease,start,end\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingHeader);
  }
  EXPECT_THROW(parse(""), Error);
}

TEST(DiseaseTable, AcceptsCrlfAndBom) {
  auto t = parse("\xEF\xBB\xBF" "disease,period_start,period_end,region,value,value_type\r\n"
                 "Typhoid  Fever,2019-01-01,2019-12-31,IN,3.5,rate_per_100k\r\n");
  ASSERT_TRUE(t.report.ok());
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].disease, "typhoid fever");
  EXPECT_EQ(t.records[0].value_type, ValueType::rate_per_100k);
}

TEST(DiseaseTable, CollectsEveryRowProblem) {
  auto t = parse(kHeader +
                 "a,2019-02-30,2019-01-31,IN,1,cases\n"   // bad date
                 "b,2019-03-01,2019-02-01,IN,1,cases\n"   // reversed
                 "c,2019-01-01,2019-01-31,IN,1,hospital\n"  // unknown type
                 "d,2019-01-01,2019-01-31,IN,abc,cases\n"  // bad value
                 "e,2019-01-01,2019-01-31,IN,nan,cases\n"  // non-finite
                 ",2019-01-01,2019-01-31,IN,1,cases\n"     // empty name
                 "f,2019-01-01,2019-01-31\n");             // short row
  EXPECT_EQ(t.report.row_count, 0u);
  ASSERT_EQ(t.report.errors.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(t.report.errors[i].line, i + 2);
}

TEST(DiseaseTable, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DiseaseRecord> recs;
    for (int i = 0; i < 20; ++i) {
      const int y = 1990 + static_cast<int>(rng() % 30);
      const unsigned m = 1 + rng() % 12;
      const auto start = ymd(y, m, 1);
      const auto end = Date{start.year() / start.month() / std::chrono::last};
      const double value = std::ldexp(static_cast<double>(rng() >> 11), -static_cast<int>(rng() % 60));
      recs.push_back({"disease " + std::to_string(rng() % 5), start, end, "r" + std::to_string(rng() % 3), value,
                      static_cast<ValueType>(rng() % 3)});
    }
    std::ostringstream out;
    write_disease_table(out, recs);
    auto back = parse(out.str());
    ASSERT_TRUE(back.report.ok());
    EXPECT_EQ(back.records, recs);
    std::ostringstream again;
    write_disease_table(again, back.records);
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(DiseaseTable, WriterRejectsUnrepresentableText) {
  std::vector<DiseaseRecord> recs{{"a,b", ymd(2019, 1, 1), ymd(2019, 1, 2), "IN", 1.0, ValueType::cases}};
  std::ostringstream out;
  EXPECT_THROW(write_disease_table(out, recs), Error);
}

TEST(DiseaseTable, ParsingIsTotal) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab,-.0123456789 \t\r\nE";
  for (int trial = 0; trial < 300; ++trial) {
    std::string body;
    for (int i = 0, n = static_cast<int>(rng() % 200); i < n; ++i) body += alphabet[rng() % alphabet.size()];
    auto t = parse(kHeader + body);
    EXPECT_EQ(t.report.row_count, t.records.size());
    for (const auto& e : t.report.errors) EXPECT_GE(e.line, 2u);
  }
}

TEST(ValidateDataset, EmptyListHasNoWarnings) {
  auto r = validate_dataset({});
  EXPECT_EQ(r.row_count, 0u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ValidateDataset, IdenticalPeriodsOverlapOnce) {
  std::vector<DiseaseRecord> recs{{"influenza", ymd(2019, 1, 1), ymd(2019, 1, 31), "IN", 1, ValueType::cases},
                                  {"influenza", ymd(2019, 1, 1), ymd(2019, 1, 31), "IN", 2, ValueType::cases}};
  auto r = validate_dataset(recs);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].message.find("overlap"), std::string::npos);
}

TEST(ValidateDataset, YearlyGapNamesMissingYear) {
  std::vector<DiseaseRecord> recs;
  for (int y = 2020; y >= 1950; --y) {
    if (y != 1960) recs.push_back({"cholera", ymd(y, 1, 1), ymd(y, 12, 31), "IN", 10, ValueType::cases});
  }
  auto r = validate_dataset(recs);
  // Oracle: scan sorted years for the first missing one.
  std::vector<int> years;
  for (const auto& rec : recs) years.push_back(static_cast<int>(rec.period_start.year()));
  std::sort(years.begin(), years.end());
  int missing = 0;
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (years[i] != years[i - 1] + 1) missing = years[i - 1] + 1;
  }
  ASSERT_EQ(missing, 1960);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].message.find("1960-01-01..1960-12-31"), std::string::npos) << r.warnings[0].message;
}

TEST(ValidateDataset, MixedValueTypeWarns) {
  std::vector<DiseaseRecord> recs{{"typhoid", ymd(2019, 1, 1), ymd(2019, 12, 31), "IN", 1, ValueType::cases},
                                  {"typhoid", ymd(2020, 1, 1), ymd(2020, 12, 31), "IN", 2, ValueType::rate_per_100k}};
  auto r = validate_dataset(recs);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].message.find("mixed value_type"), std::string::npos);
}

TEST(ValidateDataset, AdjacentPeriodsAreClean) {
  std::vector<DiseaseRecord> recs;
  for (unsigned m = 1; m <= 12; ++m) {
    const Date s = ymd(2021, m, 1);
    recs.push_back({"dengue", s, Date{s.year() / s.month() / std::chrono::last}, "IN", 1, ValueType::cases});
  }
  EXPECT_TRUE(validate_dataset(recs).warnings.empty());
}

TEST(SymptomRecords, ParsesRecord) {
  std::istringstream in("code: D001\nname: Influenza\nsymptoms: fever, cough\n");
  auto p = parse_symptom_records(in);
  ASSERT_TRUE(p.report.ok());
  ASSERT_EQ(p.profiles.size(), 1u);
  EXPECT_EQ(p.profiles[0].code, "D001");
  EXPECT_EQ(p.profiles[0].name, "influenza");
  EXPECT_EQ(p.profiles[0].symptoms, (std::vector<std::string>{"fever", "cough"}));
  EXPECT_TRUE(p.profiles[0].description.empty());
}

TEST(SymptomRecords, EmptyInput) {
  std::istringstream in("");
  auto p = parse_symptom_records(in);
  EXPECT_TRUE(p.profiles.empty());
  EXPECT_EQ(p.report.row_count, 0u);
}

TEST(SymptomRecords, MissingNameErrorsAtFirstLine) {
  std::istringstream in("code: D001\nname: a\n\n\n\ncode: D002\nsymptoms: x\n");
  auto p = parse_symptom_records(in);
  ASSERT_EQ(p.profiles.size(), 1u);
  ASSERT_EQ(p.report.errors.size(), 1u);
  EXPECT_EQ(p.report.errors[0].line, 6u);
  EXPECT_NE(p.report.errors[0].message.find("missing required key"), std::string::npos);
}

TEST(SymptomRecords, MalformedLineRejectsRecord) {
  std::istringstream in("code: D001\nname a\n\ncode: D002\nname: b\nColour: red\nsymptoms: , Fever ,,\n");
  auto p = parse_symptom_records(in);
  ASSERT_EQ(p.profiles.size(), 1u);
  EXPECT_EQ(p.profiles[0].name, "b");
  EXPECT_EQ(p.profiles[0].symptoms, std::vector<std::string>{"fever"});
  ASSERT_EQ(p.report.errors.size(), 1u);
  EXPECT_EQ(p.report.errors[0].line, 2u);
  ASSERT_EQ(p.report.warnings.size(), 1u);
  EXPECT_EQ(p.report.warnings[0].line, 6u);
}

TEST(Demographics, UnknownFieldsStayEmpty) {
  std::istringstream in("name: Typhoid\nrisk_years: 5-19\n");
  auto d = parse_demographics_records(in);
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].name, "typhoid");
  EXPECT_EQ(d.records[0].risk_years, "5-19");
  EXPECT_TRUE(d.records[0].high_risk_gender.empty());
}

TEST(Merge, LeftJoinSemantics) {
  SymptomProfile flu{.code = "D1", .name = "influenza"};
  SymptomProfile cholera{.code = "D2", .name = "cholera"};
  DemographicsRecord demo{.name = "influenza", .risk_years = "65+"};
  DemographicsRecord other{.name = "measles"};
  std::vector<SymptomProfile> profiles{flu, cholera};
  std::vector<DemographicsRecord> demos{demo, other};
  auto m = merge_demographics(profiles, demos);
  ASSERT_EQ(m.records.size(), 2u);
  ASSERT_TRUE(m.records[0].demographics);
  EXPECT_EQ(m.records[0].demographics->name, "influenza");
  EXPECT_FALSE(m.records[1].demographics);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("measles"), std::string::npos);
}

TEST(Merge, DuplicateDemographicsThrow) {
  std::vector<SymptomProfile> profiles{{.code = "D1", .name = "typhoid"}};
  std::vector<DemographicsRecord> demos{{.name = "typhoid"}, {.name = "typhoid"}};
  try {
    merge_demographics(profiles, demos);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateKey);
  }
}

TEST(Merge, OutputLengthEqualsProfileCount) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SymptomProfile> profiles;
    std::vector<DemographicsRecord> demos;
    for (int i = 0, n = static_cast<int>(rng() % 10); i < n; ++i) {
      profiles.push_back({.code = "c", .name = "d" + std::to_string(rng() % 6)});
    }
    for (int i = 0; i < 6; ++i) {
      if (rng() % 2) demos.push_back({.name = "d" + std::to_string(i)});
    }
    auto m = merge_demographics(profiles, demos);
    ASSERT_EQ(m.records.size(), profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      EXPECT_EQ(m.records[i].profile, profiles[i]);
      if (m.records[i].demographics) {
        EXPECT_EQ(m.records[i].demographics->name, profiles[i].name);
      }
    }
  }
}
