#include "outbreak/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "outbreak/embeddings.hpp"
#include "outbreak/io.hpp"

namespace outbreak {

std::string_view to_string(ValueType type) noexcept {
  switch (type) {
    case ValueType::cases: return "cases";
    case ValueType::deaths: return "deaths";
    case ValueType::rate_per_100k: return "rate_per_100k";
  }
  return "cases";
}

std::optional<ValueType> parse_value_type(std::string_view text) noexcept {
  if (text == "cases") return ValueType::cases;
  if (text == "deaths") return ValueType::deaths;
  if (text == "rate_per_100k") return ValueType::rate_per_100k;
  return std::nullopt;
}

namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";

bool is_blank(std::string_view line) { return io::trim(line).empty(); }

// Parses one data row; problems are appended to `errors` and the row is
// accepted only if none were found.
std::optional<DiseaseRecord> parse_disease_row(std::string_view line, std::size_t line_no,
                                               std::vector<Issue>& errors) {
  auto fields = io::split(line, ',');
  if (fields.size() != 6) {
    errors.push_back({line_no, "expected 6 fields, found " + std::to_string(fields.size())});
    return std::nullopt;
  }
  for (auto& f : fields) f = io::trim(f);

  const std::size_t before = errors.size();
  DiseaseRecord rec;
  rec.disease = normalize_key(fields[0]);
  if (rec.disease.empty()) errors.push_back({line_no, "empty disease name"});

  auto start = parse_date(fields[1]);
  auto end = parse_date(fields[2]);
  if (!start) errors.push_back({line_no, "bad period_start '" + std::string(fields[1]) + "'"});
  if (!end) errors.push_back({line_no, "bad period_end '" + std::string(fields[2]) + "'"});
  if (start && end && to_days(*start) > to_days(*end)) {
    errors.push_back({line_no, "period_start after period_end"});
  }

  rec.region = std::string(fields[3]);
  if (rec.region.empty()) errors.push_back({line_no, "empty region"});

  auto value = io::parse_double(fields[4]);
  if (!value) {
    errors.push_back({line_no, "bad value '" + std::string(fields[4]) + "'"});
  } else if (!std::isfinite(*value)) {
    errors.push_back({line_no, "non-finite value"});
  } else if (*value < 0.0) {
    errors.push_back({line_no, "negative value"});
  }

  auto type = parse_value_type(fields[5]);
  if (!type) errors.push_back({line_no, "unknown value_type '" + std::string(fields[5]) + "'"});

  if (errors.size() != before) return std::nullopt;
  rec.period_start = *start;
  rec.period_end = *end;
  rec.value = *value;
  rec.value_type = *type;
  return rec;
}

// --- key: value records ---------------------------------------------------

struct Field {
  std::string key;
  std::string value;
  std::size_t line;
};

struct RawRecord {
  std::size_t first_line = 0;
  std::vector<Field> fields;
  bool rejected = false;
};

const std::set<std::string, std::less<>>& record_vocabulary() {
  static const std::set<std::string, std::less<>> keys = {
      "code", "name", "symptoms", "description", "test_procedure", "medication_desc", "medications",
      "symptom_desc", "risk_years", "less_risk_years", "high_risk_race_ethnicity", "high_risk_gender",
      "less_risk_race_ethnicity", "less_risk_gender"};
  return keys;
}

std::string lower_key(std::string_view raw) {
  std::string key(io::trim(raw));
  for (char& c : key) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return key;
}

std::vector<RawRecord> read_records(std::istream& in, ValidationReport& report) {
  std::vector<RawRecord> records;
  std::optional<RawRecord> current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (current) records.push_back(std::move(*current));
    current.reset();
  };

  while (io::read_line(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with(kBom)) view.remove_prefix(kBom.size());
    if (is_blank(view)) {
      flush();
      continue;
    }
    if (!current) current = RawRecord{line_no, {}, false};
    auto colon = view.find(':');
    std::string key = colon == std::string_view::npos ? std::string() : lower_key(view.substr(0, colon));
    if (key.empty()) {
      report.errors.push_back({line_no, "malformed line, expected 'key: value'"});
      current->rejected = true;
      continue;
    }
    auto dup = std::find_if(current->fields.begin(), current->fields.end(),
                            [&](const Field& f) { return f.key == key; });
    if (dup != current->fields.end()) {
      report.errors.push_back({line_no, "duplicate key '" + key + "' in record"});
      current->rejected = true;
      continue;
    }
    if (!record_vocabulary().count(key)) {
      report.warnings.push_back({line_no, "unknown key '" + key + "'"});
    }
    current->fields.push_back({key, std::string(io::trim(view.substr(colon + 1))), line_no});
  }
  flush();
  return records;
}

const std::string* lookup(const RawRecord& rec, std::string_view key) {
  for (const auto& f : rec.fields) {
    if (f.key == key) return &f.value;
  }
  return nullptr;
}

std::string text_or_empty(const RawRecord& rec, std::string_view key) {
  const std::string* v = lookup(rec, key);
  return v ? *v : std::string();
}

std::vector<std::string> split_list(std::string_view value, bool normalize) {
  std::vector<std::string> out;
  for (auto part : io::split(value, ',')) {
    std::string item = normalize ? normalize_key(part) : std::string(io::trim(part));
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

bool require_key(const RawRecord& rec, std::string_view key, ValidationReport& report) {
  const std::string* v = lookup(rec, key);
  if (v && !normalize_key(*v).empty()) return true;
  report.errors.push_back({rec.first_line, "missing required key '" + std::string(key) + "'"});
  return false;
}

}  // namespace

DiseaseTable parse_disease_table(std::istream& in) {
  DiseaseTable table;
  std::string line;
  if (!io::read_line(in, line)) throw Error(Errc::MissingHeader, "line 1: empty input");
  std::string_view header = line;
  if (header.starts_with(kBom)) header.remove_prefix(kBom.size());
  if (io::trim(header) != kDiseaseHeader) {
    throw Error(Errc::MissingHeader, "line 1: expected '" + std::string(kDiseaseHeader) + "'");
  }

  std::size_t line_no = 1;
  while (io::read_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (auto rec = parse_disease_row(line, line_no, table.report.errors)) {
      table.records.push_back(std::move(*rec));
    }
  }
  table.report.row_count = table.records.size();
  return table;
}

void write_disease_table(std::ostream& out, std::span<const DiseaseRecord> records) {
  auto check = [](const std::string& text, std::string_view what) {
    if (text.find_first_of(",\r\n") != std::string::npos) {
      throw Error(Errc::BadValue, std::string(what) + " '" + text + "' cannot be written as CSV");
    }
  };
  out << kDiseaseHeader << '\n';
  for (const auto& r : records) {
    check(r.disease, "disease");
    check(r.region, "region");
    out << r.disease << ',' << format_date(r.period_start) << ',' << format_date(r.period_end) << ','
        << r.region << ',' << io::format_shortest(r.value) << ',' << to_string(r.value_type) << '\n';
  }
}

ValidationReport validate_dataset(std::span<const DiseaseRecord> records) {
  ValidationReport report;
  report.row_count = records.size();

  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> series;
  for (std::size_t i = 0; i < records.size(); ++i) {
    series[{records[i].disease, records[i].region}].push_back(i);
  }

  for (auto& [key, idx] : series) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(records[a].period_start, records[a].period_end) <
             std::tie(records[b].period_start, records[b].period_end);
    });
    Date covered_until = records[idx.front()].period_end;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const auto& r = records[idx[k]];
      const std::string where = key.first + " (" + key.second + ")";
      if (to_days(r.period_start) <= to_days(covered_until)) {
        report.warnings.push_back({idx[k] + 1, "overlapping period " + format_date(r.period_start) + ".." +
                                                   format_date(r.period_end) + " for " + where});
      } else if (to_days(r.period_start) > to_days(add_days(covered_until, 1))) {
        report.warnings.push_back({idx[k] + 1, "gap " + format_date(add_days(covered_until, 1)) + ".." +
                                                   format_date(add_days(r.period_start, -1)) + " for " + where});
      }
      if (to_days(r.period_end) > to_days(covered_until)) covered_until = r.period_end;
    }
  }

  std::map<std::string, ValueType> first_type;
  std::set<std::string> flagged;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto [it, inserted] = first_type.emplace(r.disease, r.value_type);
    if (!inserted && it->second != r.value_type && flagged.insert(r.disease).second) {
      report.warnings.push_back({i + 1, "mixed value_type for " + r.disease + ": " +
                                            std::string(to_string(it->second)) + " and " +
                                            std::string(to_string(r.value_type))});
    }
  }
  return report;
}

SymptomParse parse_symptom_records(std::istream& in) {
  SymptomParse out;
  for (const auto& rec : read_records(in, out.report)) {
    if (rec.rejected) continue;
    const bool has_code = require_key(rec, "code", out.report);
    const bool has_name = require_key(rec, "name", out.report);
    if (!has_code || !has_name) continue;

    SymptomProfile p;
    p.code = std::string(io::trim(*lookup(rec, "code")));
    p.name = normalize_key(*lookup(rec, "name"));
    p.symptoms = split_list(text_or_empty(rec, "symptoms"), true);
    p.description = text_or_empty(rec, "description");
    p.test_procedure = text_or_empty(rec, "test_procedure");
    p.medication_desc = text_or_empty(rec, "medication_desc");
    p.medications = split_list(text_or_empty(rec, "medications"), false);
    p.symptom_desc = text_or_empty(rec, "symptom_desc");
    out.profiles.push_back(std::move(p));
  }
  out.report.row_count = out.profiles.size();
  return out;
}

DemographicsParse parse_demographics_records(std::istream& in) {
  DemographicsParse out;
  for (const auto& rec : read_records(in, out.report)) {
    if (rec.rejected || !require_key(rec, "name", out.report)) continue;
    DemographicsRecord d;
    d.name = normalize_key(*lookup(rec, "name"));
    d.risk_years = text_or_empty(rec, "risk_years");
    d.less_risk_years = text_or_empty(rec, "less_risk_years");
    d.high_risk_race_ethnicity = text_or_empty(rec, "high_risk_race_ethnicity");
    d.high_risk_gender = text_or_empty(rec, "high_risk_gender");
    d.less_risk_race_ethnicity = text_or_empty(rec, "less_risk_race_ethnicity");
    d.less_risk_gender = text_or_empty(rec, "less_risk_gender");
    out.records.push_back(std::move(d));
  }
  out.report.row_count = out.records.size();
  return out;
}

MergeResult merge_demographics(std::span<const SymptomProfile> profiles,
                               std::span<const DemographicsRecord> demographics) {
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < demographics.size(); ++i) {
    if (!by_name.emplace(demographics[i].name, i).second) {
      throw Error(Errc::DuplicateKey, "demographics name '" + demographics[i].name + "' appears twice");
    }
  }

  MergeResult out;
  std::vector<bool> used(demographics.size(), false);
  out.records.reserve(profiles.size());
  for (const auto& p : profiles) {
    MergedHealthRecord merged{p, std::nullopt};
    if (auto it = by_name.find(p.name); it != by_name.end()) {
      merged.demographics = demographics[it->second];
      used[it->second] = true;
    }
    out.records.push_back(std::move(merged));
  }
  for (std::size_t i = 0; i < demographics.size(); ++i) {
    if (!used[i]) out.warnings.push_back("demographics for '" + demographics[i].name + "' matched no profile");
  }
  return out;
}

}  // namespace outbreak
