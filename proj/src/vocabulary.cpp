#include "boq/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "boq/error.hpp"

namespace boq {

std::string to_string(VocabMode mode) { return mode == VocabMode::bow ? "bow" : "sequence"; }

std::string to_string(WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::binary:
      return "binary";
    case WeightingScheme::tf:
      return "tf";
    case WeightingScheme::tfidf:
      return "tfidf";
  }
  return "?";
}

VocabMode parse_vocab_mode(std::string_view text) {
  if (text == "bow") return VocabMode::bow;
  if (text == "sequence") return VocabMode::sequence;
  throw ConfigError("unknown vocabulary mode '" + std::string(text) + "'");
}

WeightingScheme parse_weighting(std::string_view text) {
  if (text == "binary") return WeightingScheme::binary;
  if (text == "tf") return WeightingScheme::tf;
  if (text == "tfidf") return WeightingScheme::tfidf;
  throw ConfigError("unknown weighting scheme '" + std::string(text) + "'");
}

Vocabulary::Vocabulary(VocabMode mode, int min_df, int ngram, std::size_t n_docs,
                       std::vector<std::string> terms, std::vector<std::size_t> doc_freq)
    : mode_(mode),
      min_df_(min_df),
      ngram_(ngram),
      n_docs_(n_docs),
      terms_(std::move(terms)),
      doc_freq_(std::move(doc_freq)) {
  if (terms_.size() != doc_freq_.size())
    throw FormatError("vocabulary terms and doc_freq differ in length");
  if (!std::is_sorted(terms_.begin(), terms_.end()) ||
      std::adjacent_find(terms_.begin(), terms_.end()) != terms_.end())
    throw FormatError("vocabulary terms must be sorted and unique");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (doc_freq_[i] < 1) throw FormatError("vocabulary term '" + terms_[i] + "' has doc_freq 0");
    index_.emplace(terms_[i], static_cast<int>(i + offset()));
  }
}

int Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : it->second;
}

double Vocabulary::idf(std::size_t id) const {
  std::size_t df = doc_freq_.at(id - offset());
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df))) + 1.0;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"terms", terms_},  {"doc_freq", doc_freq_},     {"n_docs", n_docs_},
          {"mode", to_string(mode_)}, {"min_df", min_df_}, {"ngram", ngram_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    return Vocabulary(parse_vocab_mode(j.at("mode").get<std::string>()), j.at("min_df").get<int>(),
                      j.value("ngram", 1), j.at("n_docs").get<std::size_t>(),
                      j.at("terms").get<std::vector<std::string>>(),
                      j.at("doc_freq").get<std::vector<std::size_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed vocabulary: ") + e.what());
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open vocabulary " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("vocabulary " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string Vocabulary::hash() const { return fingerprint(to_json().dump()); }

std::string fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double SparseVector::at(int index) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), index);
  if (it == indices.end() || *it != index) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

std::size_t PaddedSequence::real_length() const {
  std::size_t n = 0;
  while (n < mask.size() && mask[n]) ++n;
  return n;
}

std::vector<std::string> bow_terms(const std::vector<std::string>& tokens, int ngram) {
  std::vector<std::string> out = tokens;
  for (int n = 2; n <= ngram; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

Vocabulary build_vocab(const std::vector<CleanDoc>& train_docs, int min_df, VocabMode mode,
                       int ngram) {
  if (train_docs.empty()) throw ConfigError("cannot build a vocabulary from zero documents");
  if (min_df < 1) throw ConfigError("min_df must be at least 1");
  if (ngram < 1) throw ConfigError("ngram must be at least 1");
  if (mode == VocabMode::sequence) ngram = 1;

  std::map<std::string, std::size_t> df;
  std::unordered_set<std::string> in_doc;
  for (const auto& doc : train_docs) {
    in_doc.clear();
    for (auto& t : bow_terms(doc.tokens, ngram)) in_doc.insert(std::move(t));
    for (const auto& t : in_doc) ++df[t];
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> freq;
  for (const auto& [term, count] : df) {
    if (count >= static_cast<std::size_t>(min_df)) {
      terms.push_back(term);
      freq.push_back(count);
    }
  }
  if (terms.empty()) throw ConfigError("vocabulary is empty after applying min_df");
  return Vocabulary(mode, min_df, ngram, train_docs.size(), std::move(terms), std::move(freq));
}

SparseVector vectorize_bow(const CleanDoc& doc, const Vocabulary& vocab, WeightingScheme scheme) {
  if (vocab.mode() != VocabMode::bow) throw ContractError("vectorize_bow needs a bow vocabulary");
  std::map<int, double> counts;
  for (const auto& t : bow_terms(doc.tokens, vocab.ngram())) {
    int id = vocab.index_of(t);
    if (id >= 0) counts[id] += 1.0;
  }
  SparseVector v;
  v.dim = vocab.size();
  v.indices.reserve(counts.size());
  v.values.reserve(counts.size());
  for (auto [id, count] : counts) {
    double w = count;
    if (scheme == WeightingScheme::binary) w = 1.0;
    else if (scheme == WeightingScheme::tfidf) w = count * vocab.idf(static_cast<std::size_t>(id));
    v.indices.push_back(id);
    v.values.push_back(w);
  }
  if (scheme == WeightingScheme::tfidf && !v.values.empty()) {
    double norm = 0.0;
    for (double w : v.values) norm += w * w;
    norm = std::sqrt(norm);
    for (double& w : v.values) w /= norm;
  }
  return v;
}

std::vector<SparseVector> vectorize_all(const std::vector<CleanDoc>& docs, const Vocabulary& vocab,
                                        WeightingScheme scheme) {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(vectorize_bow(d, vocab, scheme));
  return out;
}

PaddedSequence encode_sequence(const CleanDoc& doc, const Vocabulary& vocab, std::size_t length) {
  if (vocab.mode() != VocabMode::sequence)
    throw ContractError("encode_sequence needs a sequence vocabulary");
  if (length < 1) throw ContractError("sequence length must be at least 1");
  PaddedSequence seq;
  seq.ids.assign(length, Vocabulary::kPadId);
  seq.mask.assign(length, 0);
  std::size_t n = std::min(length, doc.tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    int id = vocab.index_of(doc.tokens[i]);
    seq.ids[i] = id >= 0 ? id : Vocabulary::kUnknownId;
    seq.mask[i] = 1;
  }
  return seq;
}

}  // namespace boq
