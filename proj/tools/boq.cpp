// boq: generate corpora, train, evaluate, predict and serve BoQ classifiers.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "boq/artifact.hpp"
#include "boq/corpus.hpp"
#include "boq/csv.hpp"
#include "boq/curves.hpp"
#include "boq/error.hpp"
#include "boq/generator.hpp"
#include "boq/pipeline.hpp"
#include "boq/predictor.hpp"
#include "boq/server.hpp"
#include "boq/tcn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

enum class Type { str, integer, real, boolean, int_list };

struct OptSpec {
  std::string name;
  Type type;
  std::string fallback;
  std::string help;
  bool positional = false;
};

// Options of one subcommand, all held as strings until the command runs.
// Resolution order: command line, then BOQ_<NAME> environment variables,
// then the --config file, then built-in defaults.
const char* type_name(Type t) {
  switch (t) {
    case Type::integer: return "INT";
    case Type::real: return "NUM";
    case Type::boolean: return "[BOOL]";
    case Type::int_list: return "INT,...";
    default: return "TEXT";
  }
}

class OptionSet {
 public:
  OptionSet(std::string command, std::vector<OptSpec> specs) : command_(std::move(command)), specs_(std::move(specs)) {
    specs_.push_back({"config", Type::str, "", "JSON file with option values"});
    for (const auto& s : specs_) values_[s.name] = s.fallback;
  }

  void attach(CLI::App* app) {
    for (const auto& s : specs_) {
      std::string flag = s.positional ? s.name + ",--" + s.name : "--" + s.name;
      std::string help = s.help;
      if (s.type == Type::boolean) help += " (default " + s.fallback + ")";
      auto* opt = app->add_option(flag, values_[s.name], help);
      opt->type_name(type_name(s.type));
      std::string env = "BOQ_" + s.name;
      for (char& c : env) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      opt->envname(env);
      // CLI11 hands a bare flag its default string, so booleans keep theirs out of it
      if (s.type == Type::boolean)
        opt->expected(0, 1);
      else if (!s.fallback.empty())
        opt->default_str(s.fallback);
      options_[s.name] = opt;
    }
  }

  // Config values become the defaults CLI11 falls back to.
  void apply_config(const json& cfg) {
    if (!cfg.is_object()) throw boq::ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "command") {
        if (value != command_) throw boq::ConfigError("config file is for command " + value.dump());
        continue;
      }
      auto it = options_.find(key);
      if (it == options_.end() || key == "config")
        throw boq::ConfigError("unknown config key '" + key + "' for " + command_);
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) text += (i ? "," : "") + scalar(value[i]);
      } else {
        text = scalar(value);
      }
      values_[key] = text;
      if (it->second->get_expected_min() != 0) it->second->default_str(text);
    }
  }

  const std::string& str(const std::string& name) const { return values_.at(name); }
  long long integer(const std::string& name) const {
    const auto& s = str(name);
    try {
      std::size_t used = 0;
      long long v = std::stoll(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw boq::ConfigError("--" + name + " expects an integer, got '" + s + "'");
  }

  double real(const std::string& name) const {
    const auto& s = str(name);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw boq::ConfigError("--" + name + " expects a number, got '" + s + "'");
  }

  bool boolean(const std::string& name) const {
    const auto& s = str(name);
    if (s.empty() || s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw boq::ConfigError("--" + name + " expects true or false, got '" + s + "'");
  }

  std::vector<long long> int_list(const std::string& name) const {
    std::vector<long long> out;
    std::stringstream ss(str(name));
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
        out.push_back(v);
      } catch (const std::exception&) {
        throw boq::ConfigError("--" + name + " expects comma-separated integers, got '" + str(name) + "'");
      }
    }
    return out;
  }

  /// Every resolved option, typed, ready to be fed back through --config.
  json resolved() const {
    json j = {{"command", command_}};
    for (const auto& s : specs_) {
      if (s.name == "config") continue;
      switch (s.type) {
        case Type::integer: j[s.name] = integer(s.name); break;
        case Type::real: j[s.name] = real(s.name); break;
        case Type::boolean: j[s.name] = boolean(s.name); break;
        case Type::int_list: j[s.name] = int_list(s.name); break;
        default: j[s.name] = str(s.name); break;
      }
    }
    return j;
  }

  void require(const std::string& name) const {
    if (str(name).empty()) throw boq::ConfigError("--" + name + " is required");
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      std::ostringstream s;
      s.precision(17);
      s << v.get<double>();
      return s.str();
    }
    throw boq::ConfigError("config values must be strings, numbers, booleans or lists of those");
  }

  std::string command_;
  std::vector<OptSpec> specs_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

void write_json(const fs::path& path, const json& j) { boq::write_text(path, j.dump(2) + "\n"); }

void log_line(const std::string& s) { std::cerr << s << std::endl; }

// ---- generate

std::vector<OptSpec> generate_specs() {
  return {{"out", Type::str, "", "corpus CSV to write"},
          {"seed", Type::integer, "7", "random seed"},
          {"classes", Type::integer, "32", "number of categories"},
          {"min", Type::integer, "250", "records in the smallest category"},
          {"max", Type::integer, "9000", "records in the largest category"},
          {"tail-exponent", Type::real, "1.45", "power-law exponent of the category sizes"},
          {"median-len", Type::integer, "14", "median description length in words"},
          {"max-len", Type::integer, "160", "longest description"},
          {"min-len", Type::integer, "1", "shortest description"},
          {"misspell-rate", Type::real, "0.01", "share of words given one character edit"},
          {"unit-variant-rate", Type::real, "0.3", "share of measurements written in a variant format"},
          {"overlap-pairs", Type::str, "default",
           "category pairs sharing key terms, e.g. 2:9,5:17; 'none' or 'default'"}};
}

int run_generate(const OptionSet& o) {
  o.require("out");
  boq::GenSpec spec;
  spec.n_classes = static_cast<int>(o.integer("classes"));
  spec.min_per_class = static_cast<int>(o.integer("min"));
  spec.max_per_class = static_cast<int>(o.integer("max"));
  spec.tail_exponent = o.real("tail-exponent");
  spec.median_len = static_cast<int>(o.integer("median-len"));
  spec.max_len = static_cast<int>(o.integer("max-len"));
  spec.min_len = static_cast<int>(o.integer("min-len"));
  spec.misspell_rate = o.real("misspell-rate");
  spec.unit_variant_rate = o.real("unit-variant-rate");
  spec.seed = static_cast<std::uint64_t>(o.integer("seed"));
  const std::string pairs = o.str("overlap-pairs");
  if (pairs == "default") {
    // Built-in pairs that refer to categories beyond --classes are dropped.
    std::vector<std::pair<int, int>> keep;
    for (auto p : spec.overlap_pairs)
      if (p.first < spec.n_classes && p.second < spec.n_classes) keep.push_back(p);
    spec.overlap_pairs = keep;
  } else {
    spec.overlap_pairs.clear();
    if (pairs != "none" && !pairs.empty()) {
      std::stringstream ss(pairs);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        try {
          if (colon == std::string::npos) throw std::invalid_argument(item);
          spec.overlap_pairs.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
        } catch (const std::exception&) {
          throw boq::ConfigError("--overlap-pairs entries look like 2:9, got '" + item + "'");
        }
      }
    }
  }
  spec.validate();
  auto records = boq::generate(spec);
  const fs::path out = o.str("out");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  boq::write_corpus(out, spec, records);
  write_json(out.string() + ".run_config.json", o.resolved());
  log_line("wrote " + std::to_string(records.size()) + " records to " + out.string());
  return 0;
}

// ---- train

std::vector<OptSpec> train_specs() {
  return {{"model", Type::str, "", "nb, svm, rf, mlp or tcn", true},
          {"data", Type::str, "", "labelled corpus CSV"},
          {"out", Type::str, "run", "output directory"},
          {"seed", Type::integer, "7", "random seed for splits, initialisation and shuffling"},
          {"cutoff", Type::integer, "250", "drop categories with fewer records"},
          {"test-fraction", Type::real, "0.2", "held-out share per category"},
          {"dev-fraction", Type::real, "0.1", "share of the training part used for checkpoint selection"},
          {"lr", Type::real, "0.01", "Adam learning rate"},
          {"batch", Type::integer, "64", "mini-batch size"},
          {"epochs", Type::integer, "40", "training epochs"},
          {"min-df", Type::integer, "1", "minimum document frequency of a term"},
          {"ngram", Type::integer, "1", "longest word n-gram in bag-of-words features"},
          {"weighting", Type::str, "default", "binary, tf, tfidf or default"},
          {"seq-len", Type::integer, "160", "sequence length for the TCN"},
          {"alpha", Type::real, "1.0", "naive Bayes smoothing"},
          {"svm-lambda", Type::real, "0.0001", "SVM regularisation"},
          {"svm-epochs", Type::integer, "10", "SVM passes over the data"},
          {"trees", Type::integer, "600", "forest size"},
          {"max-features", Type::str, "log2", "features per split: log2, sqrt, all or a number"},
          {"oob-checkpoints", Type::int_list, "25,100,300,600", "forest sizes at which OOB error is reported"},
          {"hidden", Type::int_list, "300,50", "MLP hidden layer widths"},
          {"dilations", Type::str, "exp", "TCN dilation schedule: exp (1,2,4) or linear (1,1,2)"},
          {"residual", Type::boolean, "true", "TCN residual connections"},
          {"pooling", Type::str, "max", "TCN pooling over positions: max or mean"},
          {"dropout", Type::real, "0.5", "TCN dropout after each conv"},
          {"embedding", Type::str, "learned", "learned or pretrained:<file>"},
          {"freeze-embedding", Type::boolean, "false", "keep the embedding table fixed"}};
}

int run_train(const OptionSet& o) {
  o.require("model");
  o.require("data");
  boq::TrainOptions t;
  t.kind = boq::parse_model_kind(o.str("model"));
  t.seed = static_cast<std::uint64_t>(o.integer("seed"));
  t.train.lr = o.real("lr");
  t.train.batch = static_cast<std::size_t>(o.integer("batch"));
  t.train.epochs = static_cast<int>(o.integer("epochs"));
  t.train.dev_fraction = o.real("dev-fraction");
  t.train.seed = t.seed;
  t.min_df = static_cast<int>(o.integer("min-df"));
  t.ngram = static_cast<int>(o.integer("ngram"));
  if (o.str("weighting") != "default") t.weighting = boq::parse_weighting(o.str("weighting"));
  t.seq_len = static_cast<std::size_t>(o.integer("seq-len"));
  t.alpha = o.real("alpha");
  t.svm_lambda = o.real("svm-lambda");
  t.svm_epochs = static_cast<int>(o.integer("svm-epochs"));
  t.trees = static_cast<int>(o.integer("trees"));
  t.max_features = o.str("max-features");
  t.oob_checkpoints.clear();
  for (auto v : o.int_list("oob-checkpoints")) t.oob_checkpoints.push_back(static_cast<int>(v));
  t.hidden.clear();
  for (auto v : o.int_list("hidden")) {
    if (v < 1) throw boq::ConfigError("--hidden widths must be positive");
    t.hidden.push_back(static_cast<std::size_t>(v));
  }
  t.dilations = o.str("dilations");
  t.residual = o.boolean("residual");
  t.pooling = boq::parse_pooling(o.str("pooling"));
  t.dropout = o.real("dropout");
  t.embedding = o.str("embedding");
  t.freeze_embedding = o.boolean("freeze-embedding");
  t.train.validate();
  if (o.integer("cutoff") < 1) throw boq::ConfigError("--cutoff must be at least 1");
  if (t.min_df < 1 || t.ngram < 1 || t.seq_len < 1) throw boq::ConfigError("--min-df, --ngram and --seq-len must be positive");
  if (t.trees < 1) throw boq::ConfigError("--trees must be at least 1");
  boq::dilation_schedule(t.dilations);

  const fs::path out = o.str("out");
  fs::create_directories(out);
  write_json(out / "run_config.json", o.resolved());

  auto records = boq::load_csv(o.str("data"));
  auto data = boq::prepare_data(records, static_cast<std::size_t>(o.integer("cutoff")), o.real("test-fraction"),
                                t.train.dev_fraction, t.seed);
  log_line("records " + std::to_string(data.n_records) + ", duplicates removed " +
           std::to_string(data.duplicates_removed) + ", categories " + std::to_string(data.labels.size()) +
           ", fit/dev/test " + std::to_string(data.fit.size()) + "/" + std::to_string(data.dev.size()) + "/" +
           std::to_string(data.test.size()));

  auto outcome = boq::run_training(data, t, log_line);

  // Held-out records in their original form so `evaluate` can score them.
  std::vector<boq::RawRecord> held_out;
  for (const auto& d : data.test) held_out.push_back(records[d.record_id]);
  boq::write_csv(out / "test.csv", held_out);

  outcome.vocab.save(out / "vocab.json");
  boq::save_artifact(out / boq::artifact_file_name(t.kind), outcome.artifact);
  write_json(out / "data_summary.json",
             {{"records", data.n_records},
              {"duplicates_removed", data.duplicates_removed},
              {"dropped_labels", data.dropped_labels},
              {"labels", data.labels.labels},
              {"label_counts", data.labels.counts},
              {"fit", data.fit.size()},
              {"dev", data.dev.size()},
              {"test", data.test.size()}});
  if (!data.dev.empty()) {
    write_json(out / "dev_metrics.json", outcome.dev_report.to_json());
    boq::write_text(out / "dev_metrics.txt", outcome.dev_report.to_table());
  }
  if (!data.test.empty()) {
    write_json(out / "test_metrics.json", outcome.test_report.to_json());
    boq::write_text(out / "test_metrics.txt", outcome.test_report.to_table());
  }
  if (!outcome.history.empty()) boq::write_text(out / "history.csv", boq::history_csv(outcome.history));
  if (!outcome.oob.empty()) boq::write_text(out / "oob_curve.csv", boq::oob_csv(outcome.oob));
  log_line("artifacts written to " + out.string());
  return 0;
}

// ---- evaluate

std::vector<OptSpec> evaluate_specs() {
  return {{"model", Type::str, "", "model artifact"},
          {"data", Type::str, "", "labelled CSV to score"},
          {"vocab", Type::str, "", "vocabulary file (default: vocab.json beside the model)"},
          {"out", Type::str, "", "report directory (default: evaluation/ beside the model)"},
          {"in-sample", Type::boolean, "false", "label the report as in-sample (data seen in training)"},
          {"seed", Type::integer, "7", "unused; accepted for a uniform command line"}};
}

std::optional<fs::path> vocab_arg(const OptionSet& o) {
  if (o.str("vocab").empty()) return std::nullopt;
  return fs::path(o.str("vocab"));
}

int run_evaluate(const OptionSet& o) {
  o.require("model");
  o.require("data");
  auto predictor = boq::Predictor::load(o.str("model"), vocab_arg(o));
  const fs::path out = o.str("out").empty() ? fs::path(o.str("model")).parent_path() / "evaluation" : fs::path(o.str("out"));

  auto records = boq::load_csv(o.str("data"));
  std::vector<boq::CleanDoc> docs;
  std::size_t skipped = 0;
  const auto& labels = predictor.labels();
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = std::lower_bound(labels.begin(), labels.end(), records[i].label);
    if (it == labels.end() || *it != records[i].label) {
      ++skipped;
      continue;
    }
    docs.push_back({boq::clean_text(records[i].description), static_cast<int>(it - labels.begin()), i});
  }
  auto report = boq::evaluate_docs(predictor, docs, o.boolean("in-sample") ? "in-sample" : "test");
  if (skipped) report.notes.push_back(std::to_string(skipped) + " records with labels outside the model were skipped");

  fs::create_directories(out);
  write_json(out / "run_config.json", o.resolved());
  write_json(out / "metrics.json", report.to_json());
  boq::write_text(out / "metrics.txt", report.to_table());
  std::cout << report.to_table();
  return 0;
}

// ---- predict

std::vector<OptSpec> predict_specs() {
  return {{"model", Type::str, "", "model artifact"},
          {"vocab", Type::str, "", "vocabulary file (default: vocab.json beside the model)"},
          {"input", Type::str, "", "CSV with a description column; standard input lines when omitted"},
          {"out", Type::str, "", "output CSV (default: standard output)"},
          {"seed", Type::integer, "7", "unused; accepted for a uniform command line"}};
}

int run_predict(const OptionSet& o) {
  o.require("model");
  auto predictor = boq::Predictor::load(o.str("model"), vocab_arg(o));

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!o.str("out").empty()) {
    fs::path p = o.str("out");
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file.open(p, std::ios::binary);
    if (!file) throw boq::Error("cannot write " + p.string());
    out = &file;
    write_json(p.string() + ".run_config.json", o.resolved());
  }
  // No input, no output: the header is written with the first prediction.
  bool header = false;
  auto emit = [&](const std::string& text) {
    if (!header) {
      boq::csv::write_row(*out, {"description", "code", "confidence", "note"});
      header = true;
    }
    auto p = predictor.predict_text(text);
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.6f", p.confidence);
    boq::csv::write_row(*out, {text, p.code, conf, p.note});
    out->flush();
  };

  if (o.str("input").empty()) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) emit(line);
    }
  } else {
    std::ifstream in(o.str("input"), std::ios::binary);
    if (!in) throw boq::SchemaError("cannot open " + o.str("input"));
    boq::csv::Reader reader(in);
    auto header = reader.next();
    if (!header) return 0;
    auto& h = header->fields;
    if (!h.empty() && h[0].rfind("\xEF\xBB\xBF", 0) == 0) h[0] = h[0].substr(3);
    auto col = std::find(h.begin(), h.end(), "description");
    if (col == h.end()) throw boq::SchemaError("missing column 'description'");
    const auto idx = static_cast<std::size_t>(col - h.begin());
    while (auto row = reader.next()) {
      if (row->fields.size() == 1 && row->fields[0].empty()) continue;
      if (row->fields.size() != h.size()) throw boq::RowError(row->line, "expected " + std::to_string(h.size()) + " fields");
      emit(row->fields[idx]);
    }
  }
  return 0;
}

// ---- serve

std::vector<OptSpec> serve_specs() {
  return {{"model", Type::str, "", "model artifact"},
          {"vocab", Type::str, "", "vocabulary file (default: vocab.json beside the model)"},
          {"host", Type::str, "127.0.0.1", "address to bind"},
          {"port", Type::integer, "8080", "port to bind"},
          {"max-batch", Type::integer, "1024", "largest accepted request array"},
          {"seed", Type::integer, "7", "unused; accepted for a uniform command line"},
          {"out", Type::str, "", "unused; accepted for a uniform command line"}};
}

int run_serve(const OptionSet& o) {
  o.require("model");
  auto predictor = boq::Predictor::load(o.str("model"), vocab_arg(o));
  boq::ServeOptions so;
  so.host = o.str("host");
  so.port = static_cast<int>(o.integer("port"));
  if (o.integer("max-batch") < 0) throw boq::ConfigError("--max-batch must be nonnegative");
  so.max_batch = static_cast<std::size_t>(o.integer("max-batch"));
  auto server = boq::make_server(predictor, so);
  if (!server->bind_to_port(so.host, so.port)) throw boq::Error("cannot bind " + so.host + ":" + std::to_string(so.port));
  log_line("serving " + boq::to_string(predictor.kind()) + " model on http://" + so.host + ":" + std::to_string(so.port));
  server->listen_after_bind();
  return 0;
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw boq::ConfigError("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw boq::ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// --config (or BOQ_CONFIG) must be known before the real parse so its values
// can sit below flags and environment variables.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  if (const char* env = std::getenv("BOQ_CONFIG")) return env;
  return {};
}

int run(int argc, char** argv) {
  CLI::App app{"Bill-of-Quantities item classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", boq::kToolkitVersion);

  struct Command {
    std::string name, help;
    std::unique_ptr<OptionSet> opts;
    int (*fn)(const OptionSet&);
    CLI::App* app = nullptr;
  };
  std::vector<Command> commands;
  commands.push_back({"generate", "write a synthetic labelled corpus", std::make_unique<OptionSet>("generate", generate_specs()), run_generate});
  commands.push_back({"train", "fit a model and report dev/test metrics", std::make_unique<OptionSet>("train", train_specs()), run_train});
  commands.push_back({"evaluate", "score a model on labelled data", std::make_unique<OptionSet>("evaluate", evaluate_specs()), run_evaluate});
  commands.push_back({"predict", "classify unlabelled descriptions", std::make_unique<OptionSet>("predict", predict_specs()), run_predict});
  commands.push_back({"serve", "HTTP batch inference", std::make_unique<OptionSet>("serve", serve_specs()), run_serve});
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    c.opts->attach(c.app);
  }

  const std::string config = find_config(argc, argv);
  if (!config.empty() && argc > 1) {
    for (auto& c : commands)
      if (c.name == argv[1]) c.opts->apply_config(read_config(config));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  for (auto& c : commands)
    if (c.app->parsed()) return c.fn(*c.opts);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const boq::TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const boq::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const boq::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const boq::RowError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const boq::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const boq::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const boq::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const boq::ContractError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
