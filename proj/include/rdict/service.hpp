#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdict/lint.hpp"
#include "rdict/model.hpp"
#include "rdict/retrieval.hpp"

namespace rdict {

inline constexpr const char* kVersion = "0.1.0";

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string checkpoint_path;
  std::string vocab_path;
  std::optional<std::string> bridge_url;
  std::size_t max_k = 100;
  LintConfig lint = LintConfig::defaults();
  std::chrono::milliseconds bridge_timeout{5000};
};

/// HTTP client for the embedding bridge's POST /embed.
class BridgeClient {
 public:
  BridgeClient(std::string url, std::chrono::milliseconds timeout);

  /// Throws kBridge when the bridge is unreachable or replies with a non-200
  /// status or a malformed body.
  std::vector<double> embed(const std::string& text) const;

  const std::string& url() const noexcept { return url_; }

 private:
  std::string url_;
  std::string base_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
};

struct Reply {
  int status = 200;
  std::string body;  // JSON
};

/// Request handling over an immutable model, index, and linter. Every handler
/// is a pure function of the request body.
class Service {
 public:
  Service(SemiEncoder model, RetrievalIndex index, ServiceConfig cfg);

  /// Loads checkpoint and vocabulary named in `cfg`; checks their dimensions agree.
  static std::shared_ptr<const Service> load(const ServiceConfig& cfg);

  const SemiEncoder& model() const noexcept { return model_; }
  const RetrievalIndex& index() const noexcept { return index_; }
  const ServiceConfig& config() const noexcept { return cfg_; }

  Reply health() const;
  Reply query(const std::string& body) const;
  Reply query_text(const std::string& body) const;
  Reply lint(const std::string& body) const;

  /// Maps a definition vector through the model and returns the top k words.
  std::vector<ScoredWord> search(std::span<const double> definition_vec, std::size_t k) const;

 private:
  SemiEncoder model_;
  RetrievalIndex index_;
  ServiceConfig cfg_;
  Linter linter_;
  std::optional<BridgeClient> bridge_;
};

/// cpp-httplib server exposing /health, /query, /query_text and /lint.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Service> service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to host:port (port 0 chooses one). Throws kIo if the port is busy.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  void run();
  void stop();
  bool running() const;
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace rdict
