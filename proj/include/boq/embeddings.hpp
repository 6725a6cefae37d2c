#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "boq/tensor.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

struct PretrainedEmbeddings {
  Tensor table;            // [vocab.size(), dim]
  std::size_t found = 0;   // vocabulary terms copied from the file
  std::size_t terms = 0;   // vocabulary terms (reserved ids excluded)
  double coverage = 0.0;   // found / terms
};

/// Reads "term v1 ... v_dim" lines (an optional leading "count dim" header
/// line is accepted). File terms pass through the same text cleaning as the
/// corpus; the first line that maps onto a vocabulary term wins. Terms not
/// in the file get N(0, 0.1^2) vectors and the padding row is zero.
/// Throws ParseError for unparseable numbers and FormatError when a line
/// carries a different number of values than `dim`.
PretrainedEmbeddings load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                                std::size_t dim = 300, std::uint64_t seed = 7);

}  // namespace boq
