#include "rdict/service.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "rdict/error.hpp"

namespace rdict {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Reply error_reply(int status, const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return {status, j.dump()};
}

Reply bad_request(const std::string& message) {
  return error_reply(400, "bad-request", message);
}

std::optional<json> parse_object(const std::string& body, std::string& why) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) {
      why = "request body must be a JSON object";
      return std::nullopt;
    }
    return j;
  } catch (const json::parse_error&) {
    why = "request body is not valid JSON";
    return std::nullopt;
  }
}

// Reads "k" (default 10, capped by max_k for the default only).
std::optional<std::size_t> read_k(const json& j, std::size_t max_k, std::string& why) {
  if (!j.contains("k")) return std::min<std::size_t>(10, max_k);
  const json& k = j["k"];
  if (!k.is_number_integer() || k.get<std::int64_t>() < 1) {
    why = "\"k\" must be a positive integer";
    return std::nullopt;
  }
  const auto v = k.get<std::size_t>();
  if (v > max_k) {
    why = "\"k\" exceeds the server maximum of " + std::to_string(max_k);
    return std::nullopt;
  }
  return v;
}

std::string results_json(const std::vector<ScoredWord>& hits) {
  ordered_json arr = ordered_json::array();
  for (const auto& h : hits) {
    ordered_json r;
    r["word"] = h.word;
    r["similarity"] = h.degenerate ? ordered_json(nullptr) : ordered_json(h.similarity);
    arr.push_back(std::move(r));
  }
  ordered_json out;
  out["results"] = std::move(arr);
  return out.dump();
}

}  // namespace

// ---------------------------------------------------------------------------

BridgeClient::BridgeClient(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
  const auto scheme = url_.find("://");
  const auto path_at = url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url_.substr(0, path_at);
  if (path_at != std::string::npos) {
    path_prefix_ = url_.substr(path_at);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (base_.empty()) fail(ErrorCode::kInvalidArgument, "empty bridge URL");
}

std::vector<double> BridgeClient::embed(const std::string& text) const {
  httplib::Client client(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  const json req{{"text", text}};
  auto res = client.Post(path_prefix_ + "/embed", req.dump(), "application/json");
  if (!res) {
    fail(ErrorCode::kBridge, "embedding bridge unreachable at " + url_ + " (" +
                                 httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    fail(ErrorCode::kBridge, "embedding bridge returned HTTP " + std::to_string(res->status));
  }
  try {
    const json j = json::parse(res->body);
    std::vector<double> v;
    for (const auto& x : j.at("embedding")) {
      if (!x.is_number()) throw std::runtime_error("non-numeric element");
      v.push_back(x.get<double>());
    }
    return v;
  } catch (const std::exception& ex) {
    fail(ErrorCode::kBridge, std::string("malformed bridge reply: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------

Service::Service(SemiEncoder model, RetrievalIndex index, ServiceConfig cfg)
    : model_(std::move(model)), index_(std::move(index)), cfg_(std::move(cfg)),
      linter_(cfg_.lint) {
  if (cfg_.max_k < 1) fail(ErrorCode::kConfig, "max_k must be >= 1");
  if (index_.size() == 0) {
    fail(ErrorCode::kEmptyDataset, "vocabulary is empty");
  }
  if (index_.dim() != model_.output_dim()) {
    fail(ErrorCode::kDimensionMismatch, "vocabulary vectors have length " +
                                            std::to_string(index_.dim()) +
                                            " but the model outputs " +
                                            std::to_string(model_.output_dim()));
  }
  if (cfg_.bridge_url && !cfg_.bridge_url->empty()) {
    bridge_.emplace(*cfg_.bridge_url, cfg_.bridge_timeout);
  }
}

std::shared_ptr<const Service> Service::load(const ServiceConfig& cfg) {
  SemiEncoder model = load_checkpoint(cfg.checkpoint_path);
  RetrievalIndex index(load_vocabulary(cfg.vocab_path));
  return std::make_shared<const Service>(std::move(model), std::move(index), cfg);
}

std::vector<ScoredWord> Service::search(std::span<const double> definition_vec,
                                        std::size_t k) const {
  const auto mapped = predict(model_, definition_vec);
  return index_.top_k(mapped, k);
}

Reply Service::health() const {
  ordered_json j;
  j["status"] = "ok";
  j["dim_in"] = model_.input_dim();
  j["dim_out"] = model_.output_dim();
  j["vocab_size"] = index_.size();
  j["max_k"] = cfg_.max_k;
  j["version"] = kVersion;
  return {200, j.dump()};
}

Reply Service::query(const std::string& body) const {
  std::string why;
  const auto j = parse_object(body, why);
  if (!j) return bad_request(why);
  const auto k = read_k(*j, cfg_.max_k, why);
  if (!k) return bad_request(why);
  if (!j->contains("embedding") || !(*j)["embedding"].is_array()) {
    return bad_request("\"embedding\" must be an array of numbers");
  }
  std::vector<double> vec;
  for (const auto& x : (*j)["embedding"]) {
    if (!x.is_number()) return bad_request("\"embedding\" must contain only numbers");
    vec.push_back(x.get<double>());
    if (!std::isfinite(vec.back())) return bad_request("\"embedding\" contains a non-finite value");
  }
  if (vec.size() != model_.input_dim()) {
    return bad_request("dimension mismatch: embedding has length " + std::to_string(vec.size()) +
                       ", model expects " + std::to_string(model_.input_dim()));
  }
  try {
    return {200, results_json(search(vec, *k))};
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kDegenerateVector) {
      return error_reply(422, std::string(error_code_name(ex.code())), ex.what());
    }
    throw;
  }
}

Reply Service::query_text(const std::string& body) const {
  std::string why;
  const auto j = parse_object(body, why);
  if (!j) return bad_request(why);
  const auto k = read_k(*j, cfg_.max_k, why);
  if (!k) return bad_request(why);
  if (!j->contains("text") || !(*j)["text"].is_string()) {
    return bad_request("\"text\" must be a string");
  }
  const std::string text = (*j)["text"].get<std::string>();
  if (text.empty()) return bad_request("\"text\" must be non-empty");
  if (!bridge_) {
    return error_reply(503, "bridge-unavailable", "no embedding bridge configured (bridge_url)");
  }
  std::vector<double> vec;
  try {
    vec = bridge_->embed(text);
  } catch (const Error& ex) {
    return error_reply(503, "bridge-unavailable", ex.what());
  }
  if (vec.size() != model_.input_dim()) {
    return error_reply(502, "bridge-error",
                       "bridge returned a vector of length " + std::to_string(vec.size()) +
                           ", model expects " + std::to_string(model_.input_dim()));
  }
  try {
    return {200, results_json(search(vec, *k))};
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kDegenerateVector) {
      return error_reply(422, std::string(error_code_name(ex.code())), ex.what());
    }
    throw;
  }
}

Reply Service::lint(const std::string& body) const {
  std::string why;
  const auto j = parse_object(body, why);
  if (!j) return bad_request(why);
  if (!j->contains("word") || !(*j)["word"].is_string() || (*j)["word"].get<std::string>().empty()) {
    return bad_request("\"word\" must be a non-empty string");
  }
  if (!j->contains("gloss") || !(*j)["gloss"].is_string()) {
    return bad_request("\"gloss\" must be a string");
  }
  const LintRow row =
      linter_.lint((*j)["word"].get<std::string>(), (*j)["gloss"].get<std::string>());
  return {200, lint_row_to_json(row)};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  std::shared_ptr<const Service> service;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    send(res, fn());
  } catch (const Error& ex) {
    send(res, error_reply(500, std::string(error_code_name(ex.code())), ex.what()));
  } catch (const std::exception& ex) {
    send(res, error_reply(500, "internal-error", ex.what()));
  }
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<const Service> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& svr = impl_->server;
  const Service* s = impl_->service.get();
  svr.Get("/health", [s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return s->health(); });
  });
  svr.Post("/query", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return s->query(req.body); });
  });
  svr.Post("/query_text", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return s->query_text(req.body); });
  });
  svr.Post("/lint", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return s->lint(req.body); });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  // httplib defaults to SO_REUSEPORT, which would let a second server share
  // the port silently. SO_REUSEADDR alone still allows quick restarts.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port_ = svr.bind_to_any_port(host);
  } else {
    port_ = svr.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port) +
                             " (address in use or not permitted)");
  }
  return port_;
}

void HttpServer::run() {
  if (port_ < 0) fail(ErrorCode::kInvalidState, "HttpServer::run called before bind");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace rdict
