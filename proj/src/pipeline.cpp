#include "boq/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "boq/embeddings.hpp"
#include "boq/error.hpp"
#include "boq/predictor.hpp"
#include "boq/random.hpp"
#include "boq/stop_words.hpp"

namespace boq {

PreparedData prepare_data(const std::vector<RawRecord>& records, std::size_t cutoff, double test_fraction,
                          double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) throw ConfigError("dev_fraction must be in [0, 1)");
  PreparedData out;
  out.n_records = records.size();
  CutoffResult cut = apply_cutoff(clean_all(records), cutoff);
  out.labels = cut.labels;
  out.duplicates_removed = cut.duplicates_removed;
  out.dropped_labels = cut.dropped_labels;
  DatasetSplit outer = split(cut.docs, test_fraction, seed);
  out.test = std::move(outer.test);
  if (dev_fraction > 0.0) {
    DatasetSplit inner = split(outer.train, dev_fraction, derive_seed(seed, 1));
    out.fit = std::move(inner.train);
    out.dev = std::move(inner.test);
  } else {
    out.fit = std::move(outer.train);
  }
  return out;
}

WeightingScheme default_weighting(ModelKind kind) {
  return kind == ModelKind::rf ? WeightingScheme::tf : WeightingScheme::tfidf;
}

WeightingScheme TrainOptions::resolved_weighting() const { return weighting.value_or(default_weighting(kind)); }

namespace {

std::vector<int> labels_of(const std::vector<CleanDoc>& docs) {
  std::vector<int> y;
  y.reserve(docs.size());
  for (const auto& d : docs) y.push_back(d.label_index);
  return y;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

nlohmann::json summary(const MetricsReport& r) { return {{"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}}; }

}  // namespace

TrainOutcome run_training(const PreparedData& data, const TrainOptions& opt, const LogFn& log_fn) {
  auto log = [&](const std::string& s) {
    if (log_fn) log_fn(s);
  };
  if (data.fit.empty()) throw ConfigError("no training records after splitting");
  const std::size_t n_classes = data.labels.size();
  const bool sequence = opt.kind == ModelKind::tcn;
  const WeightingScheme weighting = opt.resolved_weighting();

  TrainOutcome out;
  out.vocab = build_vocab(data.fit, opt.min_df, sequence ? VocabMode::sequence : VocabMode::bow, sequence ? 1 : opt.ngram);
  log("vocabulary: " + std::to_string(out.vocab.terms().size()) + " terms (" + to_string(out.vocab.mode()) + ")");

  const std::vector<int> y_fit = labels_of(data.fit), y_dev = labels_of(data.dev);
  std::vector<std::size_t> fit_counts(n_classes, 0);
  for (int c : y_fit) ++fit_counts[static_cast<std::size_t>(c)];

  nlohmann::json manifest = {
      {"vocab_hash", out.vocab.hash()},
      {"vocab_size", out.vocab.terms().size()},
      {"input", sequence ? "sequence" : "bow"},
      {"labels", data.labels.labels},
      {"class_counts", fit_counts},
      {"seed", opt.seed},
      {"cleaning", {{"tokens", "ascii letters, lowercased"},
                    {"stemmer", "porter (original rules), repeated to a fixed point"},
                    {"stop_words_version", stop_words_version()}}},
  };
  nlohmann::json params;

  ModelArtifact& art = out.artifact;
  art.kind = opt.kind;

  if (sequence) {
    manifest["seq_len"] = opt.seq_len;
    std::vector<PaddedSequence> x_fit, x_dev;
    for (const auto& d : data.fit) x_fit.push_back(encode_sequence(d, out.vocab, opt.seq_len));
    for (const auto& d : data.dev) x_dev.push_back(encode_sequence(d, out.vocab, opt.seq_len));
    TcnConfig cfg;
    cfg.vocab_size = out.vocab.size();
    cfg.n_classes = n_classes;
    cfg.dilations = dilation_schedule(opt.dilations);
    cfg.residual = opt.residual;
    cfg.pooling = opt.pooling;
    cfg.dropout = opt.dropout;
    cfg.train_embedding = !opt.freeze_embedding;
    cfg.seq_len = opt.seq_len;
    TcnModel model(cfg, opt.seed);
    params["embedding"] = opt.embedding;
    params["dilation_schedule"] = opt.dilations;
    if (opt.embedding.rfind("pretrained:", 0) == 0) {
      auto pre = load_pretrained_embeddings(opt.embedding.substr(11), out.vocab, cfg.embed_dim, opt.seed);
      model.embedding() = std::move(pre.table);
      out.embedding_coverage = pre.coverage;
      params["embedding_coverage"] = pre.coverage;
      log(fmt("pretrained embeddings: coverage %.4f", pre.coverage) + " (" + std::to_string(pre.found) + " of " +
          std::to_string(pre.terms) + " terms)");
    } else if (opt.embedding != "learned") {
      throw ConfigError("embedding must be 'learned' or 'pretrained:<path>'");
    }
    log("TCN conv parameters: " + std::to_string(model.conv_parameter_count()) + ", receptive radius " +
        std::to_string(cfg.receptive_radius()));
    TrainConfig tc = opt.train;
    tc.seed = opt.seed;
    auto res = train(model, x_fit, y_fit, x_dev, y_dev, tc, [&](const EpochRecord& r) {
      log(fmt("epoch %2.0f  train loss %.4f acc %.4f", r.epoch, r.train_loss, r.train_acc) +
          fmt("  dev loss %.4f acc %.4f", r.dev_loss, r.dev_acc));
    });
    out.history = res.history;
    out.best_epoch = res.best_epoch;
    manifest["train_config"] = tc.to_json();
    manifest["best_epoch"] = res.best_epoch;
    art.model = std::move(model);
  } else {
    manifest["weighting"] = to_string(weighting);
    manifest["ngram"] = opt.ngram;
    if (weighting == WeightingScheme::tfidf) manifest["idf"] = "ln((1 + n_docs) / (1 + df)) + 1, rows L2-normalised";
    auto x_fit = vectorize_all(data.fit, out.vocab, weighting);
    auto x_dev = vectorize_all(data.dev, out.vocab, weighting);
    switch (opt.kind) {
      case ModelKind::nb:
        params["alpha"] = opt.alpha;
        art.model = nb_fit(x_fit, y_fit, n_classes, opt.alpha);
        break;
      case ModelKind::svm: {
        SvmParams p;
        p.reg_lambda = opt.svm_lambda;
        p.epochs = opt.svm_epochs;
        p.seed = opt.seed;
        params["reg_lambda"] = p.reg_lambda;
        params["epochs"] = p.epochs;
        params["solver"] = "pegasos one-vs-rest hinge";
        art.model = svm_fit(x_fit, y_fit, n_classes, p);
        break;
      }
      case ModelKind::rf: {
        ForestParams p;
        p.n_trees = opt.trees;
        p.max_features = resolve_max_features(opt.max_features, out.vocab.size());
        p.seed = opt.seed;
        params["trees"] = p.n_trees;
        params["max_features"] = opt.max_features;
        params["max_features_resolved"] = p.max_features;
        params["voting"] = "soft";
        log("forest: " + std::to_string(p.n_trees) + " trees, max_features " + std::to_string(p.max_features));
        Forest f = forest_fit(x_fit, y_fit, n_classes, p);
        std::vector<int> marks;
        for (int m : opt.oob_checkpoints)
          if (m >= 1 && m <= p.n_trees) marks.push_back(m);
        marks.push_back(p.n_trees);
        std::sort(marks.begin(), marks.end());
        marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
        out.oob = oob_curve(f, x_fit, y_fit, marks);
        for (const auto& pt : out.oob) log(fmt("OOB error after %4.0f trees: %.4f", pt.trees, pt.error));
        manifest["oob_error"] = out.oob.back().error;
        art.model = std::move(f);
        break;
      }
      case ModelKind::mlp: {
        MlpModel model(out.vocab.size(), opt.hidden, n_classes, opt.seed);
        TrainConfig tc = opt.train;
        tc.seed = opt.seed;
        params["hidden"] = opt.hidden;
        params["activation"] = "relu";
        params["dropout"] = 0.0;
        params["first_dense_layer"] = "bag-of-words input feeds the first hidden layer directly";
        auto res = train(model, x_fit, y_fit, x_dev, y_dev, tc, [&](const EpochRecord& r) {
          log(fmt("epoch %2.0f  train loss %.4f acc %.4f", r.epoch, r.train_loss, r.train_acc) +
              fmt("  dev loss %.4f acc %.4f", r.dev_loss, r.dev_acc));
        });
        out.history = res.history;
        out.best_epoch = res.best_epoch;
        manifest["train_config"] = tc.to_json();
        manifest["best_epoch"] = res.best_epoch;
        art.model = std::move(model);
        break;
      }
      default:
        break;
    }
  }
  quantize_to_float32(art.model);
  manifest["params"] = params;
  art.manifest = manifest;

  Predictor predictor(art, out.vocab);
  if (!data.dev.empty()) {
    out.dev_report = evaluate_docs(predictor, data.dev, "dev");
    art.manifest["metrics"]["dev"] = summary(out.dev_report);
  }
  if (!data.test.empty()) {
    out.test_report = evaluate_docs(predictor, data.test, "test");
    art.manifest["metrics"]["test"] = summary(out.test_report);
    log(fmt("test accuracy %.4f  macro F1 %.4f", out.test_report.accuracy, out.test_report.macro_f1));
  }
  return out;
}

}  // namespace boq
