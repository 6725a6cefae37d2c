#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "boq/predictor.hpp"

namespace httplib {
class Server;
}

namespace boq {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_batch = 1024;
};

/// Response body for POST /predict given the raw request body, together with
/// the HTTP status: 200, 400 (malformed) or 413 (batch over the cap).
struct ServeReply {
  int status = 200;
  std::string body;
};
ServeReply handle_predict(const Predictor& predictor, const std::string& body, std::size_t max_batch);
std::string health_body(const Predictor& predictor);

/// Server with POST /predict and GET /health bound to `predictor`, which
/// must outlive it.
std::unique_ptr<httplib::Server> make_server(const Predictor& predictor, const ServeOptions& options);

}  // namespace boq
