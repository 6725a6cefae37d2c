#include "boq/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boq/corpus.hpp"
#include "boq/error.hpp"
#include "boq/random.hpp"

namespace boq {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool is_count(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

PretrainedEmbeddings load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                                std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file " + path.string());

  PretrainedEmbeddings out;
  out.terms = vocab.terms().size();
  out.table = Tensor({vocab.size(), dim});
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (double& v : out.table.values()) v = normal(rng);
  if (vocab.mode() == VocabMode::sequence) std::fill_n(out.table.data(), dim, 0.0);

  std::vector<char> filled(vocab.size(), 0);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values(dim);
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
      if (std::stoul(std::string(fields[1])) != dim)
        throw FormatError("embedding header declares dimension " + std::string(fields[1]) + ", expected " +
                          std::to_string(dim));
      continue;
    }
    if (fields.size() - 1 != dim)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values, found " + std::to_string(fields.size() - 1));
    for (std::size_t k = 0; k < dim; ++k)
      if (!parse_double(fields[k + 1], values[k]))
        throw ParseError(line_no, "not a number: '" + std::string(fields[k + 1]) + "'");

    auto cleaned = clean_text(fields[0]);
    if (cleaned.size() != 1) continue;
    const int id = vocab.index_of(cleaned.front());
    if (id < 0 || filled[static_cast<std::size_t>(id)]) continue;
    filled[static_cast<std::size_t>(id)] = 1;
    ++out.found;
    std::copy(values.begin(), values.end(), out.table.data() + static_cast<std::size_t>(id) * dim);
  }
  out.coverage = out.terms == 0 ? 0.0 : static_cast<double>(out.found) / static_cast<double>(out.terms);
  return out;
}

}  // namespace boq
