// rdict command-line front end. Talks to the engine only through rdict.h.
//
// Every failure prints exactly one line "error: <code>: <message>" to stderr
// and exits nonzero.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdict/rdict.h"

namespace {

struct CliError {
  std::string code;
  std::string message;
};

void check(rd_status st) {
  if (st != RD_OK) throw CliError{rd_status_name(st), rd_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Model = Handle<rd_model, rd_model_free>;
using Index = Handle<rd_index, rd_index_free>;
using DatasetH = Handle<rd_dataset, rd_dataset_free>;
using LinterH = Handle<rd_linter, rd_linter_free>;
using Server = Handle<rd_server, rd_server_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { rd_string_free(ptr); }
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CliError{"io-error", "cannot open " + path};
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    const auto j = nlohmann::json::parse(buf.str());
    if (!j.is_array()) throw CliError{"parse-error", path + ": expected a JSON array of numbers"};
    std::vector<double> v;
    for (const auto& x : j) {
      if (!x.is_number()) throw CliError{"parse-error", path + ": non-numeric array element"};
      v.push_back(x.get<double>());
    }
    return v;
  } catch (const nlohmann::json::parse_error& ex) {
    throw CliError{"parse-error", path + ": " + ex.what()};
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data, config, out, val;
};

int cmd_train(const TrainArgs& a) {
  const std::string history = a.out + ".history.jsonl";
  check(rd_train_files(a.data.c_str(), opt(a.val), a.config.c_str(), a.out.c_str(),
                       history.c_str()));
  std::cout << "checkpoint: " << a.out << "\nhistory: " << history << "\n";
  return 0;
}

struct EvalArgs {
  std::string model, data, vocab, out, language;
};

int cmd_eval(const EvalArgs& a) {
  Model model;
  Index index;
  DatasetH test;
  check(rd_model_load(a.model.c_str(), model.out()));
  check(rd_index_load(a.vocab.c_str(), index.out()));
  check(rd_dataset_load(a.data.c_str(), test.out()));
  const std::string out = a.out.empty() ? a.model + ".eval.json" : a.out;
  OwnedString json;
  check(rd_evaluate_to_file(model.get(), test.get(), index.get(), opt(a.language), out.c_str(),
                            &json.ptr));
  std::cout << json.ptr;
  return 0;
}

struct QueryArgs {
  std::string model, vocab, embedding_file, text, bridge_url;
  std::size_t k = 10;
};

int cmd_query(const QueryArgs& a) {
  if (a.embedding_file.empty() == a.text.empty()) {
    throw CliError{"invalid-argument", "give exactly one of --embedding-file or --text"};
  }
  if (!a.text.empty() && a.bridge_url.empty()) {
    throw CliError{"invalid-argument", "--text requires an embedding bridge (--bridge-url)"};
  }
  Model model;
  Index index;
  check(rd_model_load(a.model.c_str(), model.out()));
  check(rd_index_load(a.vocab.c_str(), index.out()));

  std::vector<double> vec;
  if (!a.embedding_file.empty()) {
    vec = read_vector_file(a.embedding_file);
  } else {
    std::size_t len = 0;
    check(rd_bridge_embed(a.bridge_url.c_str(), a.text.c_str(), nullptr, 0, &len));
    vec.resize(len);
    check(rd_bridge_embed(a.bridge_url.c_str(), a.text.c_str(), vec.data(), vec.size(), &len));
  }
  std::vector<rd_hit> hits(a.k);
  std::size_t n = 0;
  check(rd_query(model.get(), index.get(), vec.data(), vec.size(), a.k, hits.data(), hits.size(),
                 &n));
  for (std::size_t i = 0; i < n; ++i) {
    std::printf("%s\t%.6f\n", hits[i].word, hits[i].similarity);
  }
  return 0;
}

struct LintArgs {
  std::string data, out, summary, config;
};

int cmd_lint(const LintArgs& a) {
  LinterH linter;
  DatasetH data;
  check(rd_linter_create(opt(a.config), linter.out()));
  check(rd_dataset_load(a.data.c_str(), data.out()));
  OwnedString summary;
  check(rd_lint_dataset(linter.get(), data.get(), a.out.c_str(), a.summary.c_str(), &summary.ptr));
  std::cout << summary.ptr << "\n";
  return 0;
}

struct ServeArgs {
  std::string model, vocab, host = "127.0.0.1", bridge_url, lint_config;
  int port = 8080;
  std::size_t max_k = 100;
};

int cmd_serve(const ServeArgs& a) {
  // Block termination signals in every thread; a dedicated thread waits for
  // them and shuts the server down cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  rd_server_config cfg{};
  cfg.host = a.host.c_str();
  cfg.port = a.port;
  cfg.checkpoint_path = a.model.c_str();
  cfg.vocab_path = a.vocab.c_str();
  cfg.bridge_url = opt(a.bridge_url);
  cfg.max_k = a.max_k;
  cfg.lint_config_path = opt(a.lint_config);
  Server server;
  check(rd_server_create(&cfg, server.out()));

  std::cerr << "listening on " << a.host << ":" << rd_server_port(server.get()) << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    rd_server_stop(server.get());
  });
  const rd_status st = rd_server_run(server.get());
  // Wake the waiter if run() returned for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdict: reverse-dictionary engine"};
  app.set_version_flag("--version", std::string(rd_version()));
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model from JSONL");
  train->add_option("--data", ta.data, "training JSONL")->required();
  train->add_option("--config", ta.config, "JSON training config")->required();
  train->add_option("--out", ta.out, "checkpoint path")->required();
  train->add_option("--val", ta.val, "validation JSONL (default: split from --data)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a test set");
  eval->add_option("--model", ea.model, "checkpoint")->required();
  eval->add_option("--data", ea.data, "test JSONL")->required();
  eval->add_option("--vocab", ea.vocab, "vocabulary JSONL")->required();
  eval->add_option("--out", ea.out, "report path (default: <model>.eval.json)");
  eval->add_option("--language", ea.language, "language tag stored in the report");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Reverse-dictionary lookup");
  query->add_option("--model", qa.model, "checkpoint")->required();
  query->add_option("--vocab", qa.vocab, "vocabulary JSONL")->required();
  query->add_option("--embedding-file", qa.embedding_file, "JSON array definition embedding");
  query->add_option("--text", qa.text, "definition text, embedded by the bridge");
  query->add_option("--bridge-url", qa.bridge_url, "embedding bridge base URL");
  query->add_option("--k", qa.k, "number of results")->check(CLI::PositiveNumber);

  LintArgs la;
  auto* lint = app.add_subcommand("lint", "Check glosses against the definition rules");
  lint->add_option("--data", la.data, "JSONL with word and gloss")->required();
  lint->add_option("--out", la.out, "per-entry rows JSONL")->required();
  lint->add_option("--summary", la.summary, "histogram summary file")->required();
  lint->add_option("--config", la.config, "JSON lint config");

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--model", sa.model, "checkpoint")->required();
  serve->add_option("--vocab", sa.vocab, "vocabulary JSONL")->required();
  serve->add_option("--host", sa.host, "listen address");
  serve->add_option("--port", sa.port, "listen port (0 picks one)");
  serve->add_option("--bridge-url", sa.bridge_url, "embedding bridge base URL");
  serve->add_option("--max-k", sa.max_k, "largest k accepted")->check(CLI::PositiveNumber);
  serve->add_option("--lint-config", sa.lint_config, "JSON lint config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: usage-error: " << msg << "\n";
    return 2;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(ea);
    if (*query) return cmd_query(qa);
    if (*lint) return cmd_lint(la);
    if (*serve) return cmd_serve(sa);
  } catch (const CliError& e) {
    std::string msg = e.message;
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << e.code << ": " << msg << "\n";
    return 1;
  }
  return 1;
}
