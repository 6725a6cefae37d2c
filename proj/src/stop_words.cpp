#include "boq/stop_words.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

namespace boq {
namespace detail {
extern const std::string_view kStopWordsText;
}

namespace {

struct StopList {
  std::vector<std::string> words;
  std::unordered_set<std::string_view> lookup;
  int version = 0;

  StopList() {
    std::string_view text = detail::kStopWordsText;
    while (!text.empty()) {
      std::size_t eol = text.find('\n');
      std::string_view line = text.substr(0, eol);
      text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (line.empty()) continue;
      if (line.front() == '#') {
        constexpr std::string_view kTag = "version ";
        if (auto pos = line.find(kTag); pos != std::string_view::npos) {
          auto digits = line.substr(pos + kTag.size());
          std::from_chars(digits.data(), digits.data() + digits.size(), version);
        }
        continue;
      }
      words.emplace_back(line);
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (const auto& w : words) lookup.insert(w);
  }
};

const StopList& stop_list() {
  static const StopList list;
  return list;
}

}  // namespace

const std::vector<std::string>& stop_words() { return stop_list().words; }

bool is_stop_word(std::string_view term) { return stop_list().lookup.count(term) != 0; }

int stop_words_version() { return stop_list().version; }

}  // namespace boq
