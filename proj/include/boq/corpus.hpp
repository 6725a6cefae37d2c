#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace boq {

/// One Bill-of-Quantities line item as it arrives from a cost document.
struct RawRecord {
  std::string description;
  std::string label;  // ICMS code, e.g. "1.05.080"
  std::optional<std::string> project_id;
};

/// Tokens of one record after normalisation, still carrying its label string.
struct TokenizedRecord {
  std::vector<std::string> tokens;
  std::string label;
  std::size_t record_id = 0;  // position in the ingested record list
};

/// A normalised document bound to an index in a LabelSpace.
struct CleanDoc {
  std::vector<std::string> tokens;
  int label_index = 0;
  std::size_t record_id = 0;
};

/// Sorted label codes with their per-label sample counts.
struct LabelSpace {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;

  std::size_t size() const noexcept { return labels.size(); }
  /// -1 when the code is not part of the space.
  int index_of(std::string_view code) const;
};

struct DatasetSplit {
  std::vector<CleanDoc> train;
  std::vector<CleanDoc> test;
  std::uint64_t seed = 0;
};

struct CutoffResult {
  std::vector<CleanDoc> docs;
  LabelSpace labels;
  std::size_t duplicates_removed = 0;
  std::vector<std::string> dropped_labels;
};

/// True for dotted numeric codes such as "1.02.010".
bool is_valid_label(std::string_view label);

std::vector<RawRecord> read_records(std::istream& in);
std::vector<RawRecord> load_csv(const std::filesystem::path& path);
void write_records(std::ostream& out, const std::vector<RawRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<RawRecord>& records);

/// Lowercase, strip everything that is not an ASCII letter, drop stop-words
/// and Porter-stem what remains. Stemming is repeated until the term no
/// longer changes, which makes the whole function idempotent.
std::vector<std::string> clean_text(std::string_view text);
TokenizedRecord clean(const RawRecord& record, std::size_t record_id = 0);
std::vector<TokenizedRecord> clean_all(const std::vector<RawRecord>& records);

/// Removes duplicate (tokens, label) pairs, then every label with fewer than
/// `cutoff` remaining samples. Throws ConfigError when nothing survives.
CutoffResult apply_cutoff(const std::vector<TokenizedRecord>& records, std::size_t cutoff);

/// Stratified split: each label contributes round(fraction * count) records
/// to the test side.
DatasetSplit split(const std::vector<CleanDoc>& docs, double fraction, std::uint64_t seed);

}  // namespace boq
