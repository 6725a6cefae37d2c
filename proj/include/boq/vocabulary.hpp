#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "boq/corpus.hpp"

namespace boq {

enum class VocabMode { bow, sequence };
enum class WeightingScheme { binary, tf, tfidf };

std::string to_string(VocabMode mode);
std::string to_string(WeightingScheme scheme);
VocabMode parse_vocab_mode(std::string_view text);
WeightingScheme parse_weighting(std::string_view text);

/// Term index built from a training split. Terms are indexed in
/// lexicographic order; sequence vocabularies reserve id 0 for padding and
/// id 1 for unknown terms, so their first stored term has id 2.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnknownId = 1;

  Vocabulary() = default;
  Vocabulary(VocabMode mode, int min_df, int ngram, std::size_t n_docs,
             std::vector<std::string> terms, std::vector<std::size_t> doc_freq);

  VocabMode mode() const noexcept { return mode_; }
  int min_df() const noexcept { return min_df_; }
  int ngram() const noexcept { return ngram_; }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::size_t>& doc_freq() const noexcept { return doc_freq_; }

  /// Number of ids, including reserved ones.
  std::size_t size() const noexcept { return terms_.size() + offset(); }
  std::size_t offset() const noexcept { return mode_ == VocabMode::sequence ? 2 : 0; }
  /// Id of `term`, or -1 when unknown.
  int index_of(std::string_view term) const;
  double idf(std::size_t id) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);
  /// Stable fingerprint of the serialised vocabulary.
  std::string hash() const;

 private:
  VocabMode mode_ = VocabMode::bow;
  int min_df_ = 1;
  int ngram_ = 1;
  std::size_t n_docs_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::unordered_map<std::string, int> index_;
};

struct SparseVector {
  std::vector<int> indices;  // strictly increasing
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const noexcept { return indices.size(); }
  /// Value at `index`, zero when absent.
  double at(int index) const;
};

struct PaddedSequence {
  std::vector<int> ids;
  std::vector<char> mask;  // 1 = real token

  std::size_t length() const noexcept { return ids.size(); }
  /// Number of real tokens (they are always left-aligned).
  std::size_t real_length() const;
};

/// Terms for the bag-of-words side: uni-grams, plus space-joined n-grams up
/// to `ngram` when it is larger than one.
std::vector<std::string> bow_terms(const std::vector<std::string>& tokens, int ngram);

Vocabulary build_vocab(const std::vector<CleanDoc>& train_docs, int min_df, VocabMode mode,
                       int ngram = 1);

SparseVector vectorize_bow(const CleanDoc& doc, const Vocabulary& vocab, WeightingScheme scheme);
std::vector<SparseVector> vectorize_all(const std::vector<CleanDoc>& docs, const Vocabulary& vocab,
                                        WeightingScheme scheme);

PaddedSequence encode_sequence(const CleanDoc& doc, const Vocabulary& vocab, std::size_t length);

/// FNV-1a 64-bit digest rendered as 16 hex digits.
std::string fingerprint(std::string_view bytes);

}  // namespace boq
