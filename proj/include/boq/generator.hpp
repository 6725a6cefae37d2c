#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "boq/corpus.hpp"

namespace boq {

/// Shape of a synthetic BoQ corpus. Defaults follow the published corpus
/// statistics: 32 categories of 250 to 9000 items, median description length
/// 14 words within [1, 160].
struct GenSpec {
  int n_classes = 32;
  int min_per_class = 250;
  int max_per_class = 9000;
  double tail_exponent = 1.45;
  int median_len = 14;
  int max_len = 160;
  int min_len = 1;
  double misspell_rate = 0.01;
  double unit_variant_rate = 0.3;
  std::vector<std::pair<int, int>> overlap_pairs = {{2, 9}, {5, 17}, {12, 25}};
  std::uint64_t seed = 7;

  /// Throws ConfigError when the spec cannot be generated.
  void validate() const;
};

nlohmann::json to_json(const GenSpec& spec);
GenSpec gen_spec_from_json(const nlohmann::json& j);

/// ICMS-style code assigned to generated class `index` ("1.01.010", ...).
/// Codes sort in class order.
std::string class_code(int index);

/// Target record count of every class, in class order (largest first).
std::vector<int> class_sizes(const GenSpec& spec);

/// Every cleaned term a record of class `cls` can contain when misspellings
/// are disabled.
std::set<std::string> grammar_terms(const GenSpec& spec, int cls);

std::vector<RawRecord> generate(const GenSpec& spec);

/// Writes `csv_path` and a sidecar `<csv_path>.manifest.json` with the spec
/// and the per-class counts.
void write_corpus(const std::filesystem::path& csv_path, const GenSpec& spec,
                  const std::vector<RawRecord>& records);

}  // namespace boq
