// End-to-end acceptance run. Every criterion prints one PASS/FAIL line; the
// exit status is non-zero when any of them fails. Heavy criteria drive the
// boq executable on the default generated corpus inside ./acceptance_work.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "boq/corpus.hpp"
#include "boq/curves.hpp"
#include "boq/forest.hpp"
#include "boq/metrics.hpp"
#include "boq/naive_bayes.hpp"
#include "boq/prediction.hpp"
#include "boq/tcn.hpp"
#include "boq/vocabulary.hpp"
#include "neural_checks.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace boq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;

  // Records a sub-check; the first failing one leads the detail text.
  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail = "FAILED " + what + (detail.empty() ? "" : "; " + detail);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

const fs::path kWork = fs::absolute("acceptance_work");

int run_boq(const std::string& args) {
  const char* exe = std::getenv("BOQ_EXE");
  std::string cmd = std::string(exe ? exe : BOQ_EXE) + " " + args + " >> " + (kWork / "log.txt").string() + " 2>&1";
  {
    std::ofstream(kWork / "log.txt", std::ios::app) << "\n$ boq " << args << "\n";
  }
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string at(const std::string& rel) { return (kWork / rel).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double macro_f1_of(const std::string& run) {
  return json::parse(slurp(kWork / run / "test_metrics.json")).at("macro_f1").get<double>();
}

// trees -> OOB error from an oob_curve.csv
std::map<int, double> oob_curve(const std::string& run) {
  std::map<int, double> out;
  std::istringstream in(slurp(kWork / run / "oob_curve.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string trees, err;
    std::getline(row, trees, ',');
    std::getline(row, err, ',');
    out[std::stoi(trees)] = std::stod(err);
  }
  return out;
}

// ---------------------------------------------------------------- criteria

Verdict gradient_checks() {
  auto t0 = Clock::now();
  Verdict v;
  double worst_mlp = 0.0, worst_tcn = 0.0;
  const auto toy = test::toy_tcn_config();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto m = test::mlp_grad_check(seed).result;
    worst_mlp = std::max(worst_mlp, m.max_rel_error);
    v.need(m.max_rel_error < 1e-4, "MLP seed " + std::to_string(seed) + " in " + m.worst_param);
    for (bool training : {false, true}) {
      auto t = test::tcn_grad_check(seed, toy, training).result;
      worst_tcn = std::max(worst_tcn, t.max_rel_error);
      v.need(t.max_rel_error < 1e-4, "TCN seed " + std::to_string(seed) + " in " + t.worst_param);
    }
  }
  const double secs = seconds_since(t0);
  v.need(secs < 60.0, "runtime budget of 60 s");
  v.note("20 seeds each; worst relative error MLP " + sci(worst_mlp) + ", TCN " + sci(worst_tcn) + " (dropout on and off); " + fmt(secs, 1) + " s");
  return v;
}

SparseVector sparse_row(const std::vector<double>& dense) {
  SparseVector s;
  s.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) {
      s.indices.push_back(static_cast<int>(i));
      s.values.push_back(dense[i]);
    }
  return s;
}

Verdict classical_oracles() {
  auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(20240607);
  int nb_cases = 0;
  double nb_worst = 0.0;
  for (int trial = 0; trial < 250; ++trial) {
    const std::size_t docs = 1 + rng() % 5, terms = 1 + rng() % 5;
    const int classes = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<double>> dense(docs, std::vector<double>(terms));
    std::vector<int> y(docs);
    std::vector<SparseVector> x;
    for (std::size_t i = 0; i < docs; ++i) {
      y[i] = static_cast<int>(rng() % static_cast<unsigned>(classes));
      for (auto& e : dense[i]) e = static_cast<double>(rng() % 4);
      x.push_back(sparse_row(dense[i]));
    }
    const double alpha = trial % 4 == 0 ? 0.5 : 1.0;
    auto model = nb_fit(x, y, static_cast<std::size_t>(classes), alpha);
    std::vector<double> q(terms);
    for (auto& e : q) e = static_cast<double>(rng() % 3);
    auto expected = oracle::nb_posterior(dense, y, classes, alpha, q);
    auto got = normalize_log_scores(nb_scores(model, sparse_row(q)));
    for (int c = 0; c < classes; ++c)
      nb_worst = std::max(nb_worst, std::abs(got[static_cast<std::size_t>(c)] - expected[static_cast<std::size_t>(c)]));
    ++nb_cases;
  }
  v.need(nb_worst <= 1e-12, "NB posterior within 1e-12 (worst " + sci(nb_worst) + ")");

  int gini_cases = 0, gini_mismatch = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + rng() % 19, dim = 1 + rng() % 5;
    const int classes = 2 + static_cast<int>(rng() % 3);
    std::vector<std::vector<float>> xf(n, std::vector<float>(dim));
    std::vector<SparseVector> xs;
    std::vector<int> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % static_cast<unsigned>(classes));
      w[i] = static_cast<int>(rng() % 3);
      std::vector<double> row(dim);
      for (std::size_t f = 0; f < dim; ++f) {
        row[f] = rng() % 2 ? 0.0 : static_cast<double>(rng() % 4) / (rng() % 2 ? 1.0 : 3.0);
        xf[i][f] = static_cast<float>(row[f]);
      }
      xs.push_back(sparse_row(row));
    }
    auto expected = oracle::gini_best(xf, y, w, classes);
    auto got = best_gini_split(xs, y, w, static_cast<std::size_t>(classes));
    bool same = got.found == expected.found;
    if (same && expected.found) same = got.feature == expected.feature && got.threshold == expected.threshold;
    gini_mismatch += !same;
    ++gini_cases;
  }
  v.need(gini_mismatch == 0, std::to_string(gini_mismatch) + " Gini splits differ from exhaustive search");
  const double secs = seconds_since(t0);
  v.need(secs < 60.0, "runtime budget of 60 s");
  v.note(std::to_string(nb_cases) + " NB cases (worst diff " + sci(nb_worst) + "), " +
         std::to_string(gini_cases) + " Gini cases; " + fmt(secs, 1) + " s");
  return v;
}

Verdict tfidf_oracle() {
  Verdict v;
  std::mt19937_64 rng(31337);
  const std::vector<std::string> pool{"pipe", "duct", "valv", "cabl", "tray", "fix", "steel", "copper"};
  double worst = 0.0;
  std::size_t missing = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> corpus(1 + rng() % 6);
    std::vector<CleanDoc> docs;
    for (auto& d : corpus) {
      d.resize(1 + rng() % 7);
      for (auto& t : d) t = pool[rng() % pool.size()];
      docs.push_back({d, 0, docs.size()});
    }
    auto vocab = build_vocab(docs, 1, VocabMode::bow);
    auto expected = oracle::tfidf(corpus);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto x = vectorize_bow(docs[i], vocab, WeightingScheme::tfidf);
      if (x.nnz() != expected[i].size()) ++missing;
      for (const auto& [term, w] : expected[i]) worst = std::max(worst, std::abs(x.at(vocab.index_of(term)) - w));
    }
  }
  v.need(missing == 0, std::to_string(missing) + " rows with a different support");
  v.need(worst <= 1e-12, "agreement within 1e-12");
  v.note("50 corpora, worst abs diff " + sci(worst));
  return v;
}

PaddedSequence padded(const std::vector<int>& ids, std::size_t length) {
  PaddedSequence s;
  s.ids.assign(length, 0);
  s.mask.assign(length, 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s.ids[i] = ids[i];
    s.mask[i] = 1;
  }
  return s;
}

Verdict tcn_structure() {
  Verdict v;
  // Default stack (300-d embeddings, 100 filters, kernel 3, dilations 1,2,4) on a small vocabulary.
  TcnConfig c;
  c.vocab_size = 60;
  c.n_classes = 32;
  c.seq_len = 40;
  TcnModel m(c, 7);
  std::mt19937_64 rng(5);
  std::vector<int> ids;
  for (int t = 0; t < 40; ++t) ids.push_back(2 + static_cast<int>(rng() % 58));
  auto base_seq = padded(ids, 40);
  auto base = m.position_features(base_seq);
  std::size_t reach = 0;
  bool leaked = false;
  for (std::size_t src = 0; src < 40; ++src) {
    auto s = base_seq;
    s.ids[src] = s.ids[src] == 59 ? 58 : 59;
    auto f = m.position_features(s);
    for (std::size_t t = 0; t < 40; ++t) {
      bool changed = false;
      for (std::size_t k = 0; k < c.filters; ++k) changed |= f.at(t, k) != base.at(t, k);
      const std::size_t dist = t > src ? t - src : src - t;
      if (changed) reach = std::max(reach, dist);
      leaked |= changed && dist > 7;
    }
  }
  v.need(!leaked && reach == 7, "receptive radius 7 (measured " + std::to_string(reach) + ")");

  // Extending the padding leaves every logit bit-identical.
  TcnConfig longer_cfg = c;
  longer_cfg.seq_len = 160;
  TcnModel longer(longer_cfg, 7);
  std::size_t differing = 0, checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> seq(1 + rng() % 40);
    for (auto& id : seq) id = 1 + static_cast<int>(rng() % 59);
    auto a = tcn_forward(m, {padded(seq, 40)});
    auto b = tcn_forward(longer, {padded(seq, 40 + rng() % 121)});
    for (std::size_t k = 0; k < a.size(); ++k) {
      differing += a[k] != b[k];
      ++checked;
    }
  }
  v.need(differing == 0, std::to_string(differing) + " of " + std::to_string(checked) + " logits changed under extra padding");
  v.note("perturbation radius " + std::to_string(reach) + ", conv parameters " + std::to_string(m.conv_parameter_count()) +
         ", padding check over 50 sequences bit-exact: " + (differing == 0 ? "yes" : "no"));
  return v;
}

Verdict metrics_oracle() {
  Verdict v;
  std::mt19937_64 rng(99);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 8);
    std::vector<int> t, p;
    const std::size_t n = 1 + rng() % 80;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(static_cast<int>(rng() % static_cast<unsigned>(c)));
      p.push_back(rng() % 2 ? t.back() : static_cast<int>(rng() % static_cast<unsigned>(c)));
    }
    auto r = metrics(confusion(t, p, static_cast<std::size_t>(c)));
    auto o = oracle::metrics(t, p, c);
    bool same = r.accuracy == o.accuracy && r.macro_f1 == o.macro_f1;
    for (int k = 0; k < c; ++k) {
      const auto& pc = r.per_class[static_cast<std::size_t>(k)];
      const auto kk = static_cast<std::size_t>(k);
      same = same && pc.precision == o.precision[kk] && pc.recall == o.recall[kk] && pc.f1 == o.f1[kk];
    }
    mismatches += !same;
  }
  v.need(mismatches == 0, std::to_string(mismatches) + " matrices disagree");
  v.note("500 random confusion matrices, exact equality");
  return v;
}

// ------------------------------------------------------- corpus-level runs

struct Runs {
  bool corpus_ok = false;
  std::map<std::string, bool> ok;  // run name -> exit status 0
  std::map<std::string, double> secs;
};

Runs& runs() {
  static Runs r;
  return r;
}

bool train(const std::string& name, const std::string& args) {
  auto t0 = Clock::now();
  fs::remove_all(kWork / name);
  bool ok = run_boq("train " + args + " --data " + at("corpus.csv") + " --out " + at(name)) == 0;
  runs().ok[name] = ok;
  runs().secs[name] = seconds_since(t0);
  std::cout << "  trained " << name << (ok ? "" : " (FAILED)") << " in " << fmt(runs().secs[name], 0) << " s" << std::endl;
  return ok;
}

Verdict corpus_statistics() {
  Verdict v;
  auto records = load_csv(kWork / "corpus.csv");
  std::map<std::string, std::size_t> per_label;
  std::vector<std::size_t> lengths;
  for (const auto& r : records) {
    ++per_label[r.label];
    std::istringstream words(r.description);
    std::size_t n = 0;
    for (std::string w; words >> w;) ++n;
    lengths.push_back(n);
  }
  std::vector<std::size_t> sizes;
  for (const auto& [label, n] : per_label) sizes.push_back(n);
  std::sort(sizes.rbegin(), sizes.rend());
  std::sort(lengths.begin(), lengths.end());
  const double median = lengths.size() % 2 ? static_cast<double>(lengths[lengths.size() / 2])
                                            : 0.5 * static_cast<double>(lengths[lengths.size() / 2 - 1] + lengths[lengths.size() / 2]);
  v.need(sizes.size() == 32, "32 classes (got " + std::to_string(sizes.size()) + ")");
  v.need(!sizes.empty() && sizes.back() >= 250, "every class has at least 250 records");
  v.need(median >= 12 && median <= 16, "median length in [12, 16]");
  v.need(!lengths.empty() && lengths.front() >= 1 && lengths.back() <= 160, "lengths within [1, 160]");
  bool strictly_decreasing = true;
  for (std::size_t i = 1; i < sizes.size(); ++i) strictly_decreasing &= sizes[i] < sizes[i - 1];
  std::size_t total = 0, head = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    total += sizes[i];
    if (i < sizes.size() / 4) head += sizes[i];
  }
  const double head_share = total ? static_cast<double>(head) / static_cast<double>(total) : 0.0;
  v.need(strictly_decreasing, "strictly decreasing sorted class sizes");
  v.need(head_share > 0.5, "largest quarter of classes holds most records");
  v.note(std::to_string(records.size()) + " records, " + std::to_string(sizes.size()) + " classes, sizes " +
         (sizes.empty() ? "-" : std::to_string(sizes.front()) + ".." + std::to_string(sizes.back())) + ", median " +
         fmt(median, 1) + " words, range [" + (lengths.empty() ? "-" : std::to_string(lengths.front()) + ", " +
         std::to_string(lengths.back())) + "], top-quarter share " + fmt(head_share, 3));
  return v;
}

Verdict forest_behaviour() {
  Verdict v;
  const bool ok = runs().ok["rf_log2"] && runs().ok["rf_sqrt"];
  v.need(ok, "both forest runs completed");
  if (!ok) return v;
  auto log2 = oob_curve("rf_log2");
  auto sqrt = oob_curve("rf_sqrt");
  v.need(log2.count(25) && log2.count(600) && sqrt.count(600), "OOB checkpoints at 25 and 600 trees");
  if (!v.pass) return v;
  v.need(log2[600] <= log2[25], "OOB(600) <= OOB(25)");
  v.need(log2[600] <= sqrt[600] + 0.01, "log2 OOB <= sqrt OOB + 0.01");
  const double secs = runs().secs["rf_log2"] + runs().secs["rf_sqrt"];
  v.need(secs < 20 * 60, "runtime budget of 20 min");
  const std::size_t terms = Vocabulary::load(kWork / "rf_log2" / "vocab.json").size();
  const std::string mf_text = " (|V| " + std::to_string(terms) + ", max_features " +
                              std::to_string(resolve_max_features("log2", terms)) + " vs " +
                              std::to_string(resolve_max_features("sqrt", terms)) + ")";
  v.note("log2 OOB 25/100/300/600 trees: " + fmt(log2[25]) + "/" + fmt(log2[100]) + "/" + fmt(log2[300]) + "/" +
         fmt(log2[600]) + ", sqrt at 600: " + fmt(sqrt[600]) + mf_text + "; " + fmt(secs / 60, 1) + " min");
  return v;
}

Verdict end_to_end() {
  Verdict v;
  for (const char* r : {"nb", "mlp", "tcn", "rf_12"}) v.need(runs().ok[r], std::string(r) + " training completed");
  if (!v.pass) return v;
  const double mlp = macro_f1_of("mlp"), tcn = macro_f1_of("tcn"), rf = macro_f1_of("rf_12"), nb = macro_f1_of("nb");
  v.need(mlp >= 0.85, "MLP macro F1 >= 0.85");
  v.need(tcn >= 0.85, "TCN macro F1 >= 0.85");
  v.need(mlp - nb >= 0.02, "NB trails the MLP by >= 0.02");
  v.need(std::abs(rf - mlp) <= 0.03, "RF within 0.03 of the MLP");
  const double secs = runs().secs["nb"] + runs().secs["mlp"] + runs().secs["tcn"] + runs().secs["rf_12"];
  v.need(secs < 30 * 60, "runtime budget of 30 min");
  const bool order = mlp >= tcn && tcn >= rf && rf > nb;
  std::string residual_off = runs().ok["tcn_nores"] ? fmt(macro_f1_of("tcn_nores")) : "n/a";
  v.note("test macro F1 MLP " + fmt(mlp) + ", TCN " + fmt(tcn) + ", RF(600, 12) " + fmt(rf) + ", NB " + fmt(nb) +
         "; order MLP>=TCN>=RF>NB " + (order ? "holds" : "does not hold") + "; TCN without residuals " + residual_off +
         "; " + fmt(secs / 60, 1) + " min");
  return v;
}

Verdict convergence() {
  Verdict v;
  for (const char* name : {"mlp", "tcn"}) {
    if (!runs().ok[name]) {
      v.need(false, std::string(name) + " training completed");
      continue;
    }
    auto h = parse_history_csv(slurp(kWork / name / "history.csv"));
    if (h.size() < 40) {
      v.need(false, std::string(name) + " history reaches epoch 40");
      continue;
    }
    const double a25 = h[24].dev_acc, a40 = h[39].dev_acc;
    double lo = a25, hi = a25;
    for (std::size_t e = 24; e < 40; ++e) {
      lo = std::min(lo, h[e].dev_acc);
      hi = std::max(hi, h[e].dev_acc);
    }
    const double change = std::abs(a40 - a25);
    v.need(change < 0.005, std::string(name) + " dev accuracy change < 0.005");
    v.note(std::string(name) + " dev acc epoch 25 " + fmt(a25) + ", epoch 40 " + fmt(a40) + ", change " + fmt(change) +
           ", spread over 25-40 " + fmt(hi - lo));
  }
  return v;
}

Verdict determinism() {
  Verdict v;
  v.need(run_boq("generate --seed 7 --out " + at("corpus_again.csv")) == 0, "second generate run");
  v.need(slurp(kWork / "corpus.csv") == slurp(kWork / "corpus_again.csv"), "byte-identical CSV from generate --seed 7");
  for (const char* r : {"mlp_seed1_a", "mlp_seed1_b"}) v.need(runs().ok[r], std::string(r) + " training completed");
  if (!v.pass) return v;
  for (const char* f : {"model.bin", "test_metrics.json", "dev_metrics.json", "history.csv"})
    v.need(slurp(kWork / "mlp_seed1_a" / f) == slurp(kWork / "mlp_seed1_b" / f), std::string(f) + " identical");
  v.note("two seed-1 MLP runs: weights, history and metrics byte-identical; CSV identical");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  // --quick stops after the criteria that need no corpus-level training
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  fs::create_directories(kWork);
  std::ofstream(kWork / "log.txt", std::ios::trunc);
  std::vector<std::pair<std::string, Verdict>> results;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& f) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": " << v.detail << " ["
              << fmt(seconds_since(t0), 1) << " s]" << std::endl;
    results.emplace_back(name, v);
  };

  report(1, "gradient verification", gradient_checks);
  report(2, "classical oracles", classical_oracles);
  report(3, "tf-idf oracle", tfidf_oracle);
  report(4, "TCN structure", tcn_structure);
  report(10, "metrics oracle", metrics_oracle);
  if (quick) return std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });

  std::cout << "generating the default corpus and training models (log: " << (kWork / "log.txt").string() << ")"
            << std::endl;
  runs().corpus_ok = run_boq("generate --seed 7 --out " + at("corpus.csv")) == 0;
  if (runs().corpus_ok) {
    train("rf_log2", "rf --seed 7 --max-features log2 --oob-checkpoints 25,100,300,600");
    train("rf_sqrt", "rf --seed 7 --max-features sqrt --oob-checkpoints 25,600");
    train("nb", "nb --seed 7");
    train("rf_12", "rf --seed 7 --max-features 12");
    train("mlp", "mlp --seed 7");
    train("tcn", "tcn --seed 7");
    train("tcn_nores", "tcn --seed 7 --residual false");
    train("mlp_seed1_a", "mlp --seed 1");
    train("mlp_seed1_b", "mlp --seed 1");
  }

  report(9, "corpus statistics", corpus_statistics);
  report(5, "random forest behaviour", forest_behaviour);
  report(6, "end-to-end thresholds", end_to_end);
  report(7, "convergence shape", convergence);
  report(8, "determinism", determinism);

  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
  std::cout << results.size() - static_cast<std::size_t>(failed) << " of " << results.size() << " criteria passed"
            << std::endl;
  return failed ? 1 : 0;
}
