#include "boq/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "boq/error.hpp"
#include "boq/random.hpp"
#include "boq/stop_words.hpp"

namespace boq {
namespace {

// Generic BoQ wording shared by every category.
constexpr std::array<const char*, 96> kNoiseWords = {
    "supply",     "install",      "including",   "works",       "accordance", "drawing",
    "complete",   "provide",      "remove",      "existing",    "new",        "type",
    "site",       "location",     "approved",    "specification", "detail",  "fixing",
    "item",       "necessary",    "labour",      "materials",   "plant",      "connection",
    "assembly",   "section",      "unit",        "standard",    "general",    "main",
    "final",      "minor",        "access",      "maintain",    "testing",    "commissioning",
    "carriageway", "lane",        "scheme",      "schedule",    "diagram",    "reference",
    "package",    "allowance",    "contractor",  "clause",      "length",     "width",
    "depth",      "area",         "level",       "layer",       "edge",       "side",
    "north",      "south",        "east",        "west",        "bound",      "junction",
    "chainage",   "phase",        "stage",       "temporary",   "permanent",  "additional",
    "repair",     "replace",      "extend",      "adjust",      "prepare",    "dispose",
    "tip",        "take",         "upgrade",     "provisional", "sum",        "rate",
    "measured",   "quantity",     "lump",        "nominal",     "diameter",   "thick",
    "wide",       "deep",         "high",        "grade",       "class",      "concrete",
    "steel",      "timber",       "surface",     "finish",      "support",    "frame"};

constexpr std::array<const char*, 12> kFillers = {"of",   "to", "in",   "the", "and",  "with",
                                                 "for",  "at", "on",   "from", "as",  "into"};

struct Unit {
  const char* symbol;
  const char* long_form;
};
constexpr std::array<Unit, 3> kUnits = {{{"m", "metre"}, {"mm", "millimetre"}, {"kg", "kilogram"}}};

constexpr std::array<const char*, 10> kNumberWords = {"one", "two",    "three",  "four",  "five",
                                                      "six", "ten",    "twelve", "fifty", "hundred"};
constexpr std::array<const char*, 2> kPlaceholders = {"XX", "YY"};
constexpr std::array<const char*, 3> kReferenceHeads = {"drawing", "diagram", "type"};

constexpr int kKeysPerClass = 30;
constexpr int kSharedKeysPerPair = 6;
constexpr double kShortDocRate = 0.03;
constexpr double kLengthSigma = 0.55;
constexpr double kKeyRate = 0.30;
constexpr double kFillerRate = 0.20;
constexpr double kMeasureRate = 0.06;
constexpr double kReferenceRate = 0.05;
constexpr double kLeakRate = 0.08;
constexpr double kOverlapDocRate = 0.5;
constexpr int kDedupAttempts = 200;

struct OverlapGroup {
  int a = 0;
  int b = 0;
  std::vector<std::string> shared;
  std::string u;
  std::string v;
};

struct Grammar {
  std::vector<std::vector<std::string>> keys;
  std::vector<OverlapGroup> overlaps;
  std::vector<int> overlap_of;  // class -> index into overlaps, or -1
};

// Pronounceable pseudo-terms that are fixed points of clean_text, so the raw
// key term is also its cleaned form.
class TermFactory {
 public:
  explicit TermFactory(Rng& rng) : rng_(rng) {
    for (const char* w : kNoiseWords)
      for (auto& t : clean_text(w)) used_.insert(t);
  }

  std::string make() {
    static constexpr std::array<const char*, 24> kOnsets = {
        "b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r",
        "s", "t", "v", "br", "cr", "dr", "gr", "pl", "st", "tr", "sp", "ch"};
    static constexpr std::array<const char*, 5> kVowels = {"a", "e", "i", "o", "u"};
    static constexpr std::array<const char*, 9> kCodas = {"", "", "", "n", "r", "l", "t", "m", "k"};
    for (;;) {
      std::uniform_int_distribution<int> syllables(2, 3);
      std::string w;
      int n = syllables(rng_);
      for (int i = 0; i < n; ++i) {
        w += kOnsets[pick(kOnsets.size())];
        w += kVowels[pick(kVowels.size())];
        if (i + 1 == n) w += kCodas[pick(kCodas.size())];
      }
      if (w.size() < 4) continue;
      auto cleaned = clean_text(w);
      if (cleaned.size() != 1 || cleaned[0] != w) continue;
      if (!used_.insert(w).second) continue;
      return w;
    }
  }

 private:
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

Grammar build_grammar(const GenSpec& spec) {
  Rng rng = make_rng(spec.seed, 0x6a09e667ULL);
  TermFactory factory(rng);
  Grammar g;
  g.keys.resize(spec.n_classes);
  for (auto& keys : g.keys)
    for (int k = 0; k < kKeysPerClass; ++k) keys.push_back(factory.make());
  g.overlap_of.assign(spec.n_classes, -1);
  for (auto [a, b] : spec.overlap_pairs) {
    OverlapGroup grp;
    grp.a = a;
    grp.b = b;
    for (int k = 0; k < kSharedKeysPerPair; ++k) grp.shared.push_back(factory.make());
    grp.u = factory.make();
    grp.v = factory.make();
    g.overlap_of[a] = g.overlap_of[b] = static_cast<int>(g.overlaps.size());
    g.overlaps.push_back(std::move(grp));
  }
  return g;
}

std::discrete_distribution<int> zipf(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / std::pow(static_cast<double>(k + 1), exponent);
  return std::discrete_distribution<int>(w.begin(), w.end());
}

bool is_alpha_word(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

// One character substitution, deletion or adjacent transposition.
std::string misspell(const std::string& w, Rng& rng) {
  std::string out = w;
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::size_t> pos(0, w.size() - 1);
  std::uniform_int_distribution<int> letter(0, 25);
  switch (kind(rng)) {
    case 0: {
      std::size_t i = pos(rng);
      char c;
      do c = static_cast<char>('a' + letter(rng));
      while (c == out[i]);
      out[i] = c;
      break;
    }
    case 1:
      out.erase(pos(rng), 1);
      break;
    default: {
      std::size_t i = std::uniform_int_distribution<std::size_t>(0, w.size() - 2)(rng);
      if (out[i] == out[i + 1]) {
        out.erase(i, 1);  // transposing equal letters is a no-op; delete instead
      } else {
        std::swap(out[i], out[i + 1]);
      }
    }
  }
  return out;
}

class ClassWriter {
 public:
  ClassWriter(const GenSpec& spec, const Grammar& g, int cls)
      : spec_(spec),
        g_(g),
        cls_(cls),
        rng_(make_rng(spec.seed, 1000 + static_cast<std::uint64_t>(cls))),
        own_keys_(zipf(kKeysPerClass, 1.0)),
        shared_keys_(zipf(kSharedKeysPerPair, 0.5)),
        noise_(zipf(kNoiseWords.size(), 0.8)) {}

  std::string sentence() {
    const int n = draw_length();
    const int overlap = g_.overlap_of[cls_];
    const bool overlap_doc = overlap >= 0 && coin(kOverlapDocRate);

    std::vector<std::string> context;
    if (overlap_doc) {
      const auto& grp = g_.overlaps[overlap];
      // Class a carries both context terms or neither, class b exactly one:
      // neither term alone says anything about the class.
      bool first = coin(0.5);
      bool second = (cls_ == grp.a) ? first : !first;
      if (first) context.push_back(grp.u);
      if (second) context.push_back(grp.v);
    }
    const int context_words = static_cast<int>(context.size());
    if (context_words + 1 > n) context.clear();

    // Phrases ("10 m", "drawing XX") stay intact when the order is shuffled.
    std::vector<std::vector<std::string>> phrases;
    const int body = n - static_cast<int>(context.size());
    int count = 1;
    phrases.push_back({key_term(overlap_doc)});
    while (count < body) {
      const int room = body - count;
      double r = uniform();
      std::vector<std::string> phrase;
      if (r < kKeyRate) {
        phrase = {key_term(overlap_doc)};
      } else if ((r -= kKeyRate) < kFillerRate) {
        phrase = {kFillers[pick(kFillers.size())]};
      } else if ((r -= kFillerRate) < kMeasureRate && (room >= 2 || spec_.unit_variant_rate > 0.0)) {
        // a one-word slot only fits the compact variant
        phrase = measurement(room);
      } else if ((r -= kMeasureRate) < kReferenceRate && room >= 2) {
        phrase = {kReferenceHeads[pick(kReferenceHeads.size())],
                  kPlaceholders[pick(kPlaceholders.size())]};
      } else {
        phrase = {kNoiseWords[noise_(rng_)]};
      }
      count += static_cast<int>(phrase.size());
      phrases.push_back(std::move(phrase));
    }
    if (!context.empty()) phrases.push_back(context);
    std::shuffle(phrases.begin(), phrases.end(), rng_);

    std::vector<std::string> words;
    for (auto& p : phrases)
      for (auto& w : p) words.push_back(std::move(w));

    for (auto& w : words)
      if (w.size() >= 4 && is_alpha_word(w) && coin(spec_.misspell_rate)) w = misspell(w, rng_);

    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text.push_back(' ');
      text += words[i];
    }
    if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 32);
    if (coin(0.5)) text.push_back('.');
    return text;
  }

  std::string project() {
    char buf[8];
    std::snprintf(buf, sizeof buf, "P%02d", static_cast<int>(pick(24)) + 1);
    return buf;
  }

 private:
  int draw_length() {
    if (coin(kShortDocRate)) {
      int hi = std::min(3, spec_.max_len);
      return std::uniform_int_distribution<int>(spec_.min_len, std::max(spec_.min_len, hi))(rng_);
    }
    std::normal_distribution<double> z(0.0, kLengthSigma);
    double len = std::round(spec_.median_len * std::exp(z(rng_)));
    return static_cast<int>(std::clamp(len, double(spec_.min_len), double(spec_.max_len)));
  }

  std::string key_term(bool overlap_doc) {
    if (overlap_doc) return g_.overlaps[g_.overlap_of[cls_]].shared[shared_keys_(rng_)];
    int owner = cls_;
    if (spec_.n_classes > 1 && coin(kLeakRate)) {
      owner = static_cast<int>(pick(spec_.n_classes - 1));
      if (owner >= cls_) ++owner;
    }
    return g_.keys[owner][own_keys_(rng_)];
  }

  // "10 m" in the base format; unit variants give "10m" or "ten metre".
  std::vector<std::string> measurement(int room) {
    const Unit& unit = kUnits[pick(kUnits.size())];
    std::string number = coin(0.3) ? std::string(kPlaceholders[pick(kPlaceholders.size())])
                                   : std::to_string(1 + pick(500));
    if (room < 2 || coin(spec_.unit_variant_rate)) {
      if (room < 2 || coin(0.5)) return {number + unit.symbol};
      return {kNumberWords[pick(kNumberWords.size())], unit.long_form};
    }
    return {number, unit.symbol};
  }

  bool coin(double p) { return p > 0.0 && uniform() < p; }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  const GenSpec& spec_;
  const Grammar& g_;
  int cls_;
  Rng rng_;
  std::discrete_distribution<int> own_keys_;
  std::discrete_distribution<int> shared_keys_;
  std::discrete_distribution<int> noise_;
};

}  // namespace

void GenSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid generator spec: " + msg); };
  if (n_classes < 1) fail("n_classes must be at least 1");
  if (min_per_class < 1) fail("min_per_class must be at least 1");
  if (max_per_class < min_per_class) fail("max_per_class must be >= min_per_class");
  if (!std::isfinite(tail_exponent) || tail_exponent < 0) fail("tail_exponent must be >= 0");
  if (min_len < 1) fail("min_len must be at least 1");
  if (!(min_len <= median_len && median_len <= max_len))
    fail("lengths must satisfy min_len <= median_len <= max_len");
  if (!(misspell_rate >= 0 && misspell_rate <= 1)) fail("misspell_rate must be in [0, 1]");
  if (!(unit_variant_rate >= 0 && unit_variant_rate <= 1))
    fail("unit_variant_rate must be in [0, 1]");
  std::vector<int> seen(n_classes, 0);
  for (auto [a, b] : overlap_pairs) {
    if (a < 0 || b < 0 || a >= n_classes || b >= n_classes)
      fail("overlap pair (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    if (a == b) fail("overlap pair needs two distinct classes");
    if (seen[a]++ || seen[b]++) fail("a class may belong to at most one overlap pair");
  }
}

nlohmann::json to_json(const GenSpec& spec) {
  nlohmann::json pairs = nlohmann::json::array();
  for (auto [a, b] : spec.overlap_pairs) pairs.push_back({a, b});
  return {{"n_classes", spec.n_classes},         {"min_per_class", spec.min_per_class},
          {"max_per_class", spec.max_per_class}, {"tail_exponent", spec.tail_exponent},
          {"median_len", spec.median_len},       {"max_len", spec.max_len},
          {"min_len", spec.min_len},             {"misspell_rate", spec.misspell_rate},
          {"unit_variant_rate", spec.unit_variant_rate},
          {"overlap_pairs", pairs},              {"seed", spec.seed}};
}

GenSpec gen_spec_from_json(const nlohmann::json& j) {
  GenSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_classes") s.n_classes = value.get<int>();
    else if (key == "min_per_class") s.min_per_class = value.get<int>();
    else if (key == "max_per_class") s.max_per_class = value.get<int>();
    else if (key == "tail_exponent") s.tail_exponent = value.get<double>();
    else if (key == "median_len") s.median_len = value.get<int>();
    else if (key == "max_len") s.max_len = value.get<int>();
    else if (key == "min_len") s.min_len = value.get<int>();
    else if (key == "misspell_rate") s.misspell_rate = value.get<double>();
    else if (key == "unit_variant_rate") s.unit_variant_rate = value.get<double>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else if (key == "overlap_pairs") {
      s.overlap_pairs.clear();
      for (const auto& p : value) s.overlap_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else {
      throw ConfigError("unknown generator spec key '" + key + "'");
    }
  }
  return s;
}

std::string class_code(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "1.%02d.%03d", 1 + index / 6, 10 * (1 + index % 6));
  return buf;
}

std::vector<int> class_sizes(const GenSpec& spec) {
  spec.validate();
  const int n = spec.n_classes;
  const double lo = spec.min_per_class;
  const double hi = spec.max_per_class;
  const double a = spec.tail_exponent;
  // Inverse CDF of a density proportional to x^-a on [lo, hi].
  auto quantile = [&](double q) {
    if (hi == lo) return lo;
    if (std::abs(a - 1.0) < 1e-12) return lo * std::pow(hi / lo, q);
    double e = 1.0 - a;
    return std::pow(std::pow(lo, e) + q * (std::pow(hi, e) - std::pow(lo, e)), 1.0 / e);
  };
  Rng rng = make_rng(spec.seed, 0xbb67ae85ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> sizes(n);
  for (int i = 0; i < n; ++i) {
    // One draw per stratum keeps the sorted sizes spread over the whole tail.
    double q = 1.0 - (i + u(rng)) / n;
    sizes[i] = static_cast<int>(std::clamp(std::round(quantile(q)), lo, hi));
  }
  for (int i = n - 2; i >= 0; --i)
    if (sizes[i] <= sizes[i + 1] && sizes[i + 1] < spec.max_per_class) sizes[i] = sizes[i + 1] + 1;
  return sizes;
}

std::set<std::string> grammar_terms(const GenSpec& spec, int cls) {
  spec.validate();
  Grammar g = build_grammar(spec);
  std::set<std::string> terms;
  auto add = [&](const std::string& raw) {
    for (auto& t : clean_text(raw)) terms.insert(t);
  };
  for (const auto& keys : g.keys)
    for (const auto& k : keys) add(k);
  if (int o = g.overlap_of.at(cls); o >= 0) {
    for (const auto& k : g.overlaps[o].shared) add(k);
    add(g.overlaps[o].u);
    add(g.overlaps[o].v);
  }
  for (const char* w : kNoiseWords) add(w);
  for (const char* w : kFillers) add(w);
  for (const auto& u : kUnits) {
    add(u.symbol);
    add(u.long_form);
  }
  for (const char* w : kNumberWords) add(w);
  for (const char* w : kPlaceholders) add(w);
  for (const char* w : kReferenceHeads) add(w);
  return terms;
}

std::vector<RawRecord> generate(const GenSpec& spec) {
  spec.validate();
  const Grammar g = build_grammar(spec);
  const std::vector<int> sizes = class_sizes(spec);

  std::vector<RawRecord> records;
  for (int c = 0; c < spec.n_classes; ++c) {
    ClassWriter writer(spec, g, c);
    const std::string code = class_code(c);
    std::set<std::vector<std::string>> seen;
    for (int i = 0; i < sizes[c]; ++i) {
      std::string text;
      for (int attempt = 0; attempt < kDedupAttempts; ++attempt) {
        text = writer.sentence();
        if (seen.insert(clean_text(text)).second) break;
      }
      records.push_back({std::move(text), code, writer.project()});
    }
  }
  return records;
}

void write_corpus(const std::filesystem::path& csv_path, const GenSpec& spec,
                  const std::vector<RawRecord>& records) {
  write_csv(csv_path, records);
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& r : records) counts[r.label] = counts.value(r.label, 0) + 1;
  nlohmann::json manifest = {{"generator_spec", to_json(spec)},
                             {"records", records.size()},
                             {"class_counts", counts},
                             {"stop_words_version", stop_words_version()}};
  std::ofstream out(csv_path.string() + ".manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest next to " + csv_path.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace boq
