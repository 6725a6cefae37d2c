#include "boq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "boq/csv.hpp"
#include "boq/error.hpp"
#include "boq/porter_stemmer.hpp"
#include "boq/random.hpp"
#include "boq/stop_words.hpp"

namespace boq {
namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\v\f";
  auto begin = s.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(kSpace);
  return s.substr(begin, end - begin + 1);
}

std::string stem_to_fixed_point(std::string term) {
  for (;;) {
    std::string next = porter_stem(term);
    if (next == term) return term;
    term = std::move(next);
  }
}

}  // namespace

int LabelSpace::index_of(std::string_view code) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), code);
  if (it == labels.end() || *it != code) return -1;
  return static_cast<int>(it - labels.begin());
}

bool is_valid_label(std::string_view label) {
  int groups = 0;
  std::size_t i = 0;
  while (i <= label.size()) {
    std::size_t start = i;
    while (i < label.size() && label[i] >= '0' && label[i] <= '9') ++i;
    if (i == start) return false;
    ++groups;
    if (i == label.size()) break;
    if (label[i] != '.') return false;
    ++i;
  }
  return groups == 3;
}

std::vector<RawRecord> read_records(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("missing header row");
  auto& names = header->fields;
  if (!names.empty() && names[0].rfind("\xEF\xBB\xBF", 0) == 0) names[0].erase(0, 3);

  auto column = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (trim(names[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int desc_col = column("description");
  const int label_col = column("label");
  const int project_col = column("project_id");
  if (desc_col < 0) throw SchemaError("missing column 'description'");
  if (label_col < 0) throw SchemaError("missing column 'label'");

  std::vector<RawRecord> records;
  while (auto row = reader.next()) {
    auto& f = row->fields;
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    if (f.size() != names.size())
      throw RowError(row->line, "expected " + std::to_string(names.size()) + " fields, got " +
                                    std::to_string(f.size()));
    RawRecord rec;
    rec.description = std::move(f[desc_col]);
    if (trim(rec.description).empty()) throw RowError(row->line, "empty description");
    rec.label = std::string(trim(f[label_col]));
    if (!is_valid_label(rec.label))
      throw RowError(row->line, "label '" + rec.label + "' is not a dotted numeric ICMS code");
    if (project_col >= 0 && !f[project_col].empty()) rec.project_id = std::move(f[project_col]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_records(in);
}

void write_records(std::ostream& out, const std::vector<RawRecord>& records) {
  bool with_project = std::any_of(records.begin(), records.end(),
                                  [](const RawRecord& r) { return r.project_id.has_value(); });
  if (with_project)
    csv::write_row(out, {"description", "label", "project_id"});
  else
    csv::write_row(out, {"description", "label"});
  for (const auto& r : records) {
    if (with_project)
      csv::write_row(out, {r.description, r.label, r.project_id.value_or("")});
    else
      csv::write_row(out, {r.description, r.label});
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_records(out, records);
}

std::vector<std::string> clean_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!is_stop_word(current)) {
      std::string stem = stem_to_fixed_point(std::move(current));
      if (!stem.empty() && !is_stop_word(stem)) tokens.push_back(std::move(stem));
    }
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= 'a' && c <= 'z') {
      current.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TokenizedRecord clean(const RawRecord& record, std::size_t record_id) {
  return {clean_text(record.description), record.label, record_id};
}

std::vector<TokenizedRecord> clean_all(const std::vector<RawRecord>& records) {
  std::vector<TokenizedRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out.push_back(clean(records[i], i));
  return out;
}

CutoffResult apply_cutoff(const std::vector<TokenizedRecord>& records, std::size_t cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be at least 1");

  CutoffResult result;
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  std::vector<const TokenizedRecord*> unique;
  unique.reserve(records.size());
  for (const auto& r : records) {
    if (seen.emplace(r.label, r.tokens).second)
      unique.push_back(&r);
    else
      ++result.duplicates_removed;
  }

  std::map<std::string, std::size_t> counts;
  for (const auto* r : unique) ++counts[r->label];
  for (const auto& [label, count] : counts) {
    if (count >= cutoff) {
      result.labels.labels.push_back(label);
      result.labels.counts.push_back(count);
    } else {
      result.dropped_labels.push_back(label);
    }
  }
  if (result.labels.size() == 0)
    throw ConfigError("no label has at least " + std::to_string(cutoff) + " samples");

  for (const auto* r : unique) {
    int idx = result.labels.index_of(r->label);
    if (idx >= 0) result.docs.push_back({r->tokens, idx, r->record_id});
  }
  return result;
}

DatasetSplit split(const std::vector<CleanDoc>& docs, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must be in (0, 1)");

  int n_classes = 0;
  for (const auto& d : docs) {
    if (d.label_index < 0) throw ContractError("negative label index");
    n_classes = std::max(n_classes, d.label_index + 1);
  }
  std::vector<std::vector<std::size_t>> members(n_classes);
  for (std::size_t i = 0; i < docs.size(); ++i) members[docs[i].label_index].push_back(i);

  std::vector<char> is_test(docs.size(), 0);
  for (int c = 0; c < n_classes; ++c) {
    auto& m = members[c];
    if (m.empty()) continue;
    if (m.size() < 2)
      throw ConfigError("label index " + std::to_string(c) +
                        " has a single sample; raise the cutoff so every label has at least 2");
    auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m.size())));
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    std::shuffle(m.begin(), m.end(), rng);
    for (std::size_t k = 0; k < n_test; ++k) is_test[m[k]] = 1;
  }

  DatasetSplit out;
  out.seed = seed;
  for (std::size_t i = 0; i < docs.size(); ++i) (is_test[i] ? out.test : out.train).push_back(docs[i]);
  return out;
}

}  // namespace boq
