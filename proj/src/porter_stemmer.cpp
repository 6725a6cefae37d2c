#include "boq/porter_stemmer.hpp"

#include <array>
#include <utility>

namespace boq {
namespace {

bool is_consonant(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 || !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// m in [C](VC)^m[V], evaluated on w[0, len).
int measure(const std::string& w, std::size_t len) {
  int m = 0;
  std::size_t i = 0;
  while (i < len && is_consonant(w, i)) ++i;
  while (i < len) {
    while (i < len && !is_consonant(w, i)) ++i;
    if (i >= len) break;
    while (i < len && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

bool has_vowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i)
    if (!is_consonant(w, i)) return true;
  return false;
}

bool ends_double_consonant(const std::string& w, std::size_t len) {
  return len >= 2 && w[len - 1] == w[len - 2] && is_consonant(w, len - 1);
}

// *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
bool ends_cvc(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  if (!is_consonant(w, len - 3) || is_consonant(w, len - 2) || !is_consonant(w, len - 1))
    return false;
  char c = w[len - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         std::string_view(w).substr(w.size() - suffix.size()) == suffix;
}

using Rule = std::pair<std::string_view, std::string_view>;

// Only the longest matching suffix is considered; if its condition fails the
// step leaves the word alone. Rule tables are ordered so that a suffix always
// precedes any shorter suffix it ends with.
template <std::size_t N, typename Cond>
void apply_rules(std::string& w, const std::array<Rule, N>& rules, Cond cond) {
  for (const auto& [suffix, replacement] : rules) {
    if (!ends_with(w, suffix)) continue;
    std::size_t stem_len = w.size() - suffix.size();
    if (cond(stem_len)) {
      w.resize(stem_len);
      w.append(replacement);
    }
    return;
  }
}

void step1a(std::string& w) {
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ss")) {
    // unchanged
  } else if (ends_with(w, "s")) {
    w.pop_back();
  }
}

void step1b(std::string& w) {
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.pop_back();
    return;
  }
  std::size_t cut = 0;
  if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
    cut = 2;
  } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
    cut = 3;
  } else {
    return;
  }
  w.resize(w.size() - cut);
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w.push_back('e');
  } else if (ends_double_consonant(w, w.size())) {
    char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.pop_back();
  } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
    w.push_back('e');
  }
}

void step1c(std::string& w) {
  if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

constexpr std::array<Rule, 20> kStep2 = {{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"},
    {"ative", ""},
    {"alize", "al"},
    {"iciti", "ic"},
    {"ical", "ic"},
    {"ful", ""},
    {"ness", ""},
}};

void step4(std::string& w) {
  static constexpr std::array<std::string_view, 19> kSuffixes = {
      "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
      "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
  for (std::string_view suffix : kSuffixes) {
    if (!ends_with(w, suffix)) continue;
    std::size_t stem_len = w.size() - suffix.size();
    bool ok = measure(w, stem_len) > 1;
    if (ok && suffix == "ion") ok = stem_len > 0 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't');
    if (ok) w.resize(stem_len);
    return;
  }
}

void step5(std::string& w) {
  if (ends_with(w, "e")) {
    std::size_t stem_len = w.size() - 1;
    int m = measure(w, stem_len);
    if (m > 1 || (m == 1 && !ends_cvc(w, stem_len))) w.pop_back();
  }
  if (ends_with(w, "ll") && measure(w, w.size() - 1) > 1) w.pop_back();
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  for (char c : w)
    if (c < 'a' || c > 'z') return w;
  if (w.empty()) return w;

  step1a(w);
  step1b(w);
  step1c(w);
  apply_rules(w, kStep2, [&](std::size_t len) { return measure(w, len) > 0; });
  apply_rules(w, kStep3, [&](std::size_t len) { return measure(w, len) > 0; });
  step4(w);
  step5(w);
  return w;
}

}  // namespace boq
