#include "boq/server.hpp"

#include "httplib.h"
#include "json.hpp"

namespace boq {

ServeReply handle_predict(const Predictor& predictor, const std::string& body, std::size_t max_batch) {
  auto error = [](int status, const std::string& msg) {
    return ServeReply{status, nlohmann::json{{"error", msg}}.dump()};
  };
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
  if (!in.is_array()) return error(400, "expected a JSON array of description strings");
  if (in.size() > max_batch)
    return error(413, "batch of " + std::to_string(in.size()) + " exceeds the limit of " + std::to_string(max_batch));
  std::vector<std::string> texts;
  for (const auto& e : in) {
    if (!e.is_string()) return error(400, "every array element must be a string");
    texts.push_back(e.get<std::string>());
  }
  nlohmann::json out = nlohmann::json::array();
  const std::string kind = predictor.confidence_kind();
  for (const auto& p : predictor.predict_texts(texts))
    out.push_back({{"code", p.code}, {"confidence", p.confidence}, {"confidence_kind", kind}, {"note", p.note}});
  return {200, out.dump()};
}

std::string health_body(const Predictor& predictor) {
  const auto& m = predictor.manifest();
  nlohmann::json h = {{"status", "ok"},
                      {"kind", m.value("kind", "")},
                      {"toolkit_version", m.value("toolkit_version", "")},
                      {"vocab_hash", m.value("vocab_hash", "")},
                      {"labels", predictor.labels().size()},
                      {"seed", m.value("seed", nlohmann::json())},
                      {"confidence_kind", predictor.confidence_kind()}};
  if (m.contains("metrics")) h["metrics"] = m["metrics"];
  return h.dump();
}

std::unique_ptr<httplib::Server> make_server(const Predictor& predictor, const ServeOptions& options) {
  auto server = std::make_unique<httplib::Server>();
  const std::size_t cap = options.max_batch;
  server->Post("/predict", [&predictor, cap](const httplib::Request& req, httplib::Response& res) {
    ServeReply r = handle_predict(predictor, req.body, cap);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  server->Get("/health", [&predictor](const httplib::Request&, httplib::Response& res) {
    res.set_content(health_body(predictor), "application/json");
  });
  return server;
}

}  // namespace boq
