// C ABI over the rdict C++ core. Exceptions never cross this boundary.

#include "rdict/rdict.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "rdict/data.hpp"
#include "rdict/error.hpp"
#include "rdict/eval.hpp"
#include "rdict/lint.hpp"
#include "rdict/model.hpp"
#include "rdict/retrieval.hpp"
#include "rdict/service.hpp"
#include "rdict/trainer.hpp"

struct rd_model {
  rdict::SemiEncoder model;
};

struct rd_index {
  rdict::RetrievalIndex index;
};

struct rd_dataset {
  rdict::Dataset data;
};

struct rd_linter {
  rdict::Linter linter;
};

struct rd_server {
  std::unique_ptr<rdict::HttpServer> http;
};

namespace {

thread_local std::string g_last_error;

rd_status to_status(rdict::ErrorCode code) { return static_cast<rd_status>(code); }

template <typename Fn>
rd_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RD_OK;
  } catch (const rdict::Error& ex) {
    g_last_error = ex.what();
    return to_status(ex.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RD_ERR_INTERNAL;
  } catch (const std::exception& ex) {
    g_last_error = ex.what();
    return RD_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) rdict::fail(rdict::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) rdict::fail(rdict::ErrorCode::kIo, std::string("cannot open ") + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const char* path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) rdict::fail(rdict::ErrorCode::kIo, std::string("cannot open for writing: ") + path);
  f << text;
  if (!f) rdict::fail(rdict::ErrorCode::kIo, std::string("failed writing ") + path);
}

rdict::LintConfig lint_config_from(const char* path) {
  if (!path) return rdict::LintConfig::defaults();
  return rdict::parse_lint_config(read_file(path));
}

}  // namespace

extern "C" {

const char* rd_version(void) { return rdict::kVersion; }

const char* rd_status_name(rd_status status) {
  if (status == RD_OK) return "ok";
  if (status < RD_ERR_INVALID_ARGUMENT || status > RD_ERR_INTERNAL) return "unknown";
  return rdict::error_code_name(static_cast<rdict::ErrorCode>(status)).data();
}

const char* rd_last_error(void) { return g_last_error.c_str(); }

void rd_string_free(char* s) { std::free(s); }

// ---- model -----------------------------------------------------------------

rd_status rd_model_create(uint32_t d, uint32_t b, uint32_t s, double dropout_rate,
                          uint64_t init_seed, rd_model** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    *out = new rd_model{rdict::build_model(d, b, s, dropout_rate, init_seed)};
  });
}

rd_status rd_model_load(const char* path, rd_model** out) {
  return guard([&] {
    require(path && out, "path/out is NULL");
    *out = new rd_model{rdict::load_checkpoint(path)};
  });
}

rd_status rd_model_save(const rd_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model/path is NULL");
    rdict::save_checkpoint(model->model, path);
  });
}

void rd_model_free(rd_model* model) { delete model; }

rd_status rd_model_dims(const rd_model* model, uint32_t* d, uint32_t* b, uint32_t* s) {
  return guard([&] {
    require(model != nullptr, "model is NULL");
    if (d) *d = static_cast<uint32_t>(model->model.input_dim());
    if (b) *b = static_cast<uint32_t>(model->model.output_dim());
    if (s) *s = static_cast<uint32_t>(model->model.base_width());
  });
}

uint64_t rd_model_param_count(const rd_model* model) {
  return model ? rdict::param_count(model->model) : 0;
}

rd_status rd_model_predict(const rd_model* model, const double* in, size_t in_len, double* out,
                           size_t out_len) {
  return guard([&] {
    require(model && in && out, "model/in/out is NULL");
    if (out_len != model->model.output_dim()) {
      rdict::fail(rdict::ErrorCode::kDimensionMismatch,
                  "output buffer has length " + std::to_string(out_len) + ", model outputs " +
                      std::to_string(model->model.output_dim()));
    }
    const auto y = rdict::predict(model->model, std::span<const double>(in, in_len));
    std::copy(y.begin(), y.end(), out);
  });
}

// ---- data ------------------------------------------------------------------

rd_status rd_dataset_load(const char* path, rd_dataset** out) {
  return guard([&] {
    require(path && out, "path/out is NULL");
    *out = new rd_dataset{rdict::load_jsonl(path)};
  });
}

void rd_dataset_free(rd_dataset* dataset) { delete dataset; }

size_t rd_dataset_size(const rd_dataset* dataset) { return dataset ? dataset->data.size() : 0; }

// ---- retrieval -------------------------------------------------------------

rd_status rd_index_load(const char* vocab_path, rd_index** out) {
  return guard([&] {
    require(vocab_path && out, "vocab_path/out is NULL");
    *out = new rd_index{rdict::RetrievalIndex(rdict::load_vocabulary(vocab_path))};
  });
}

void rd_index_free(rd_index* index) { delete index; }

size_t rd_index_size(const rd_index* index) { return index ? index->index.size() : 0; }

size_t rd_index_dim(const rd_index* index) { return index ? index->index.dim() : 0; }

rd_status rd_query(const rd_model* model, const rd_index* index, const double* definition_vec,
                   size_t len, size_t k, rd_hit* hits, size_t capacity, size_t* n_hits) {
  return guard([&] {
    require(model && index && definition_vec && hits && n_hits, "NULL argument");
    if (index->index.dim() != model->model.output_dim()) {
      rdict::fail(rdict::ErrorCode::kDimensionMismatch,
                  "vocabulary vectors have length " + std::to_string(index->index.dim()) +
                      " but the model outputs " + std::to_string(model->model.output_dim()));
    }
    const auto mapped = rdict::predict(model->model, std::span<const double>(definition_vec, len));
    const auto top = index->index.top_k(mapped, k);
    if (capacity < top.size()) {
      rdict::fail(rdict::ErrorCode::kInvalidArgument,
                  "hit buffer holds " + std::to_string(capacity) + " entries, need " +
                      std::to_string(top.size()));
    }
    for (std::size_t i = 0; i < top.size(); ++i) {
      const auto& w = top[i];
      hits[i] = rd_hit{index->index.vocabulary().word(w.vocab_index).c_str(), w.similarity,
                       w.vocab_index};
    }
    *n_hits = top.size();
  });
}

rd_status rd_bridge_embed(const char* bridge_url, const char* text, double* out, size_t capacity,
                          size_t* len) {
  return guard([&] {
    require(bridge_url && text && len, "NULL argument");
    const rdict::BridgeClient client(bridge_url, std::chrono::milliseconds(10000));
    const auto v = client.embed(text);
    *len = v.size();
    if (out) std::copy_n(v.begin(), std::min(capacity, v.size()), out);
  });
}

// ---- training --------------------------------------------------------------

rd_status rd_train_files(const char* data_path, const char* val_path, const char* config_path,
                         const char* checkpoint_out, const char* history_out) {
  return guard([&] {
    require(data_path && config_path, "data_path/config_path is NULL");
    rdict::TrainConfig cfg = rdict::load_train_config(config_path);
    if (checkpoint_out) cfg.checkpoint_path = checkpoint_out;
    // Dimension problems surface as schema errors before any training.
    const rdict::Dataset train_set = rdict::load_jsonl(data_path, cfg.d, cfg.b);
    std::optional<rdict::Dataset> val;
    if (val_path) val = rdict::load_jsonl(val_path, cfg.d, cfg.b);
    const auto result = rdict::train(train_set, val, cfg);
    if (history_out) write_file(history_out, rdict::history_to_jsonl(result.history));
  });
}

// ---- evaluation ------------------------------------------------------------

rd_status rd_evaluate(const rd_model* model, const rd_dataset* test, const rd_index* index,
                      rd_eval_report* out) {
  return guard([&] {
    require(model && test && index && out, "NULL argument");
    const auto r = rdict::evaluate(model->model, test->data, index->index);
    *out = rd_eval_report{r.n_items,   r.mse, r.mse_per_dim, r.mean_cosine, r.mean_rank,
                          r.median_rank, r.top1,  r.top10,       r.top100};
  });
}

rd_status rd_evaluate_to_file(const rd_model* model, const rd_dataset* test,
                              const rd_index* index, const char* language_tag,
                              const char* report_path, char** json_out) {
  return guard([&] {
    require(model && test && index, "NULL argument");
    auto r = rdict::evaluate(model->model, test->data, index->index);
    if (language_tag) r.language_tag = language_tag;
    if (report_path) rdict::write_report(r, report_path);
    if (json_out) *json_out = dup_string(rdict::report_to_json(r));
  });
}

// ---- lint ------------------------------------------------------------------

rd_status rd_linter_create(const char* config_path, rd_linter** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    *out = new rd_linter{rdict::Linter(lint_config_from(config_path))};
  });
}

void rd_linter_free(rd_linter* linter) { delete linter; }

rd_status rd_lint_entry(const rd_linter* linter, const char* word, const char* gloss,
                        char** json_out) {
  return guard([&] {
    require(linter && word && gloss && json_out, "NULL argument");
    *json_out = dup_string(rdict::lint_row_to_json(linter->linter.lint(word, gloss)));
  });
}

rd_status rd_lint_dataset(const rd_linter* linter, const rd_dataset* dataset,
                          const char* rows_path, const char* summary_path,
                          char** summary_json_out) {
  return guard([&] {
    require(linter && dataset, "NULL argument");
    const auto& cfg = linter->linter.config();
    const auto result = rdict::lint_dataset(dataset->data, cfg);
    if (rows_path) {
      std::string rows;
      for (const auto& row : result.rows) rows += rdict::lint_row_to_json(row) + "\n";
      write_file(rows_path, rows);
    }
    const std::string summary = rdict::lint_summary_to_json(result.summary);
    if (summary_path) write_file(summary_path, summary + "\n");
    if (summary_json_out) *summary_json_out = dup_string(summary);
  });
}

// ---- service ---------------------------------------------------------------

rd_status rd_server_create(const rd_server_config* cfg, rd_server** out) {
  return guard([&] {
    require(cfg && out && cfg->checkpoint_path && cfg->vocab_path,
            "config, checkpoint_path and vocab_path are required");
    rdict::ServiceConfig sc;
    if (cfg->host) sc.host = cfg->host;
    sc.port = cfg->port;
    sc.checkpoint_path = cfg->checkpoint_path;
    sc.vocab_path = cfg->vocab_path;
    if (cfg->bridge_url) sc.bridge_url = cfg->bridge_url;
    if (cfg->max_k > 0) sc.max_k = cfg->max_k;
    sc.lint = lint_config_from(cfg->lint_config_path);
    auto http = std::make_unique<rdict::HttpServer>(rdict::Service::load(sc));
    http->bind(sc.host, sc.port);
    *out = new rd_server{std::move(http)};
  });
}

int rd_server_port(const rd_server* server) { return server ? server->http->port() : -1; }

rd_status rd_server_run(rd_server* server) {
  return guard([&] {
    require(server != nullptr, "server is NULL");
    server->http->run();
  });
}

void rd_server_stop(rd_server* server) {
  if (server) server->http->stop();
}

void rd_server_free(rd_server* server) { delete server; }

}  // extern "C"
