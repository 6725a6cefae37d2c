#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace boq {

// The shipped English stop-word list (data/stopwords_en.txt), sorted.
const std::vector<std::string>& stop_words();
bool is_stop_word(std::string_view term);
// Version number declared in the data file header.
int stop_words_version();

}  // namespace boq
