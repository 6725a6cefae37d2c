#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "boq/artifact.hpp"
#include "boq/curves.hpp"
#include "boq/error.hpp"
#include "boq/generator.hpp"
#include "boq/metrics.hpp"
#include "boq/pipeline.hpp"
#include "boq/predictor.hpp"
#include "boq/server.hpp"
#include "oracles.hpp"

using namespace boq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ConfusionMatrix matrix(std::size_t c, std::vector<std::uint64_t> counts) {
  ConfusionMatrix m(c);
  m.counts = std::move(counts);
  return m;
}

// Four small, well separated classes; shared by the artifact and predictor tests.
const PreparedData& small_data() {
  static const PreparedData data = [] {
    GenSpec s;
    s.n_classes = 4;
    s.min_per_class = 250;
    s.max_per_class = 250;
    s.overlap_pairs.clear();
    s.seed = 11;
    return prepare_data(generate(s), 250, 0.2, 0.1, 5);
  }();
  return data;
}

TrainOptions quick(ModelKind kind) {
  TrainOptions o;
  o.kind = kind;
  o.seed = 5;
  o.train.epochs = 2;
  o.trees = 20;
  o.oob_checkpoints = {5, 20};
  o.hidden = {16};
  return o;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("boq_eval_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("confusion counting") {
  std::vector<int> t{0, 0, 1}, p{0, 1, 1};
  auto cm = confusion(t, p, 2);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(1, 0) == 0);
  auto diag = confusion(t, t, 2);
  CHECK(diag.at(0, 1) == 0);
  auto empty = confusion(std::vector<int>{}, std::vector<int>{}, 3);
  CHECK(empty.total() == 0);
  CHECK(empty.counts.size() == 9);
  CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{2}, 2), ContractError);
}

TEST_CASE("metrics worked example") {
  auto r = metrics(matrix(2, {8, 2, 3, 7}));
  CHECK(r.per_class[0].precision == doctest::Approx(8.0 / 11));
  CHECK(r.per_class[0].recall == doctest::Approx(0.8));
  CHECK(r.per_class[0].f1 == doctest::Approx(0.7619).epsilon(1e-4));
  CHECK(r.per_class[1].f1 == doctest::Approx(14.0 / 19));
  CHECK(r.macro_f1 == doctest::Approx((16.0 / 21 + 14.0 / 19) / 2));
  CHECK(r.accuracy == doctest::Approx(0.75));

  auto d = metrics(matrix(3, {4, 0, 0, 0, 2, 0, 0, 0, 9}));
  CHECK(d.accuracy == 1.0);
  CHECK(d.macro_f1 == 1.0);

  auto z = metrics(matrix(2, {0, 3, 0, 5}));
  CHECK(z.per_class[0].precision == 0.0);
  CHECK_FALSE(z.notes.empty());

  CHECK_THROWS_AS(metrics(ConfusionMatrix(3)), UndefinedResultError);
}

TEST_CASE("metrics agree with the counting oracle") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 500; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 6);
    std::vector<int> t, p;
    const std::size_t n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(static_cast<int>(rng() % static_cast<unsigned>(c)));
      p.push_back(rng() % 2 ? t.back() : static_cast<int>(rng() % static_cast<unsigned>(c)));
    }
    auto r = metrics(confusion(t, p, static_cast<std::size_t>(c)));
    auto o = oracle::metrics(t, p, c);
    CHECK(r.accuracy == o.accuracy);
    CHECK(r.macro_f1 == o.macro_f1);
    for (int k = 0; k < c; ++k) {
      CHECK(r.per_class[static_cast<std::size_t>(k)].precision == o.precision[static_cast<std::size_t>(k)]);
      CHECK(r.per_class[static_cast<std::size_t>(k)].recall == o.recall[static_cast<std::size_t>(k)]);
      CHECK(r.per_class[static_cast<std::size_t>(k)].f1 == o.f1[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("metrics report serialisation") {
  auto r = metrics(matrix(2, {8, 2, 3, 7}), {"1.01", "1.02"});
  r.scope = "dev";
  auto back = MetricsReport::from_json(r.to_json());
  CHECK(back.scope == "dev");
  CHECK(back.macro_f1 == r.macro_f1);
  CHECK(back.confusion.counts == r.confusion.counts);
  CHECK(back.per_class[1].label == "1.02");
  auto table = r.to_table();
  CHECK(table.find("1.02") != std::string::npos);
  CHECK(table.find("macro") != std::string::npos);
}

TEST_CASE("history and OOB curves") {
  std::vector<EpochRecord> h;
  for (int e = 1; e <= 40; ++e) h.push_back({e, 1.0 / e, 0.5 + e / 100.0, e < 10 ? 1.0 / e : 0.1 + 0.02 * e, 0.9});
  auto csv = history_csv(h);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  CHECK(csv.rfind("epoch,train_loss,train_acc,dev_loss,dev_acc", 0) == 0);
  auto back = parse_history_csv(csv);
  REQUIRE(back.size() == 40);
  CHECK(back[12].dev_loss == h[12].dev_loss);
  CHECK(back[39].train_acc == h[39].train_acc);

  auto flags = overfit_flags(h);
  // best dev loss is 0.1111 at epoch 9; epoch 10 jumps to 0.3
  CHECK_FALSE(flags[8]);
  CHECK(flags[9]);
  CHECK(flags[39]);
  CHECK_FALSE(flags[0]);

  auto oob = oob_csv({{25, 0.2, 10}, {100, 0.15, 10}, {300, 0.12, 10}, {600, 0.11, 10}});
  CHECK(std::count(oob.begin(), oob.end(), '\n') == 5);
  CHECK(oob.rfind("trees,oob_error", 0) == 0);
}

TEST_CASE("every model kind survives save and load") {
  const auto& data = small_data();
  for (auto kind : {ModelKind::nb, ModelKind::svm, ModelKind::rf, ModelKind::mlp, ModelKind::tcn}) {
    CAPTURE(to_string(kind));
    auto outcome = run_training(data, quick(kind));
    auto dir = scratch(to_string(kind));
    save_artifact(dir / artifact_file_name(kind), outcome.artifact);
    outcome.vocab.save(dir / "vocab.json");
    auto reloaded = Predictor::load(dir / artifact_file_name(kind));
    CHECK(reloaded.kind() == kind);
    auto report = evaluate_docs(reloaded, data.test, "test");
    CHECK(report.accuracy == outcome.test_report.accuracy);
    CHECK(report.macro_f1 == outcome.test_report.macro_f1);
    CHECK(report.confusion.counts == outcome.test_report.confusion.counts);
    CHECK(report.accuracy > 0.7);
    CHECK(reloaded.manifest().contains("vocab_hash"));
    CHECK(reloaded.manifest()["toolkit_version"] == kToolkitVersion);
  }
}

TEST_CASE("artifact loading rejects damaged files") {
  auto dir = scratch("damaged");
  write_text(dir / "model.bin", "BOQM\x01");
  CHECK_THROWS_AS(load_artifact(dir / "model.bin"), FormatError);
  write_text(dir / "model.json", "{\"format\":\"boq-model\",\"version\":99}");
  CHECK_THROWS_AS(load_artifact(dir / "model.json"), FormatError);
  CHECK_THROWS_AS(load_artifact(dir / "missing.bin"), FormatError);
  CHECK_THROWS_AS(parse_model_kind("lstm"), ConfigError);
}

TEST_CASE("predictor behaviour") {
  const auto& data = small_data();
  auto outcome = run_training(data, quick(ModelKind::nb));
  Predictor p(outcome.artifact, outcome.vocab);
  CHECK(p.confidence_kind() == "posterior");

  auto none = p.predict_text("10 20 30 !!!");
  CHECK(none.note == "no-signal");
  std::size_t best = 0;
  for (std::size_t i = 0; i < data.labels.counts.size(); ++i)
    if (data.labels.counts[i] > data.labels.counts[best]) best = i;
  CHECK(none.code == data.labels.labels[best]);

  // Held-out records of class 3 come back as class 3.
  const int three = static_cast<int>(std::find(data.labels.labels.begin(), data.labels.labels.end(), class_code(3)) -
                                     data.labels.labels.begin());
  int right = 0, total = 0;
  for (const auto& d : data.test) {
    if (d.label_index != three) continue;
    auto pred = p.predict_tokens(d.tokens);
    ++total;
    right += pred.code == class_code(3);
    CHECK(pred.confidence > 0.25);
  }
  REQUIRE(total > 0);
  CHECK(right > total * 9 / 10);

  auto batch = p.predict_texts({"cable tray", "x"});
  CHECK(batch.size() == 2);
  CHECK(batch[0].code == p.predict_text("cable tray").code);

  // Vocabulary of another run: refused.
  auto other = build_vocab({{{"zzz"}, 0, 0}}, 1, VocabMode::bow);
  CHECK_THROWS_AS(Predictor(outcome.artifact, other), ConfigError);
}

TEST_CASE("prediction endpoint") {
  const auto& data = small_data();
  auto outcome = run_training(data, quick(ModelKind::nb));
  Predictor p(outcome.artifact, outcome.vocab);

  auto empty = handle_predict(p, "[]", 10);
  CHECK(empty.status == 200);
  CHECK(json::parse(empty.body) == json::array());

  auto one = handle_predict(p, R"(["Geophysical Survey in accordance with drawing XX"])", 10);
  CHECK(one.status == 200);
  auto arr = json::parse(one.body);
  REQUIRE(arr.size() == 1);
  CHECK(arr[0].contains("code"));
  CHECK(arr[0]["confidence_kind"] == "posterior");

  CHECK(handle_predict(p, "not json", 10).status == 400);
  CHECK(handle_predict(p, R"({"a": 1})", 10).status == 400);
  CHECK(handle_predict(p, R"(["ok", 3])", 10).status == 400);
  CHECK(handle_predict(p, R"(["a","b","c"])", 2).status == 413);

  ServeReply a, b;
  std::thread t1([&] { a = handle_predict(p, R"(["cable tray", "pipe"])", 10); });
  std::thread t2([&] { b = handle_predict(p, R"(["cable tray", "pipe"])", 10); });
  t1.join();
  t2.join();
  CHECK(a.body == b.body);

  auto health = json::parse(health_body(p));
  CHECK(health["status"] == "ok");
  CHECK(health["labels"] == 4);
}

TEST_CASE("HTTP server round trip") {
  const auto& data = small_data();
  auto outcome = run_training(data, quick(ModelKind::nb));
  Predictor p(outcome.artifact, outcome.vocab);
  ServeOptions opts;
  opts.max_batch = 3;
  auto server = make_server(p, opts);
  const int port = server->bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server->listen_after_bind(); });
  server->wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  auto ok = client.Post("/predict", R"(["cable tray"])", "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(json::parse(ok->body).size() == 1);
  auto big = client.Post("/predict", R"(["a","b","c","d"])", "application/json");
  REQUIRE(big);
  CHECK(big->status == 413);
  auto bad = client.Post("/predict", "[", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  server->stop();
  th.join();
}
