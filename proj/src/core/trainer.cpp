#include "rdict/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rdict/error.hpp"
#include "rdict/rng.hpp"

namespace rdict {
namespace {

using nlohmann::json;

// Stream ids for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

template <typename T>
T field(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfig, "config field \"" + path + key + "\" has the wrong type");
  }
}

std::size_t positive_int(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    fail(ErrorCode::kConfig, "config field \"" + key + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
  std::string unknown;
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) unknown += (unknown.empty() ? "" : ", ") + prefix + key;
  }
  if (!unknown.empty()) fail(ErrorCode::kConfig, "unknown config keys: " + unknown);
}

Matrix gather(const Dataset& ds, const std::vector<std::size_t>& rows, bool def_side,
              std::size_t dim) {
  Matrix m(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& e = ds.entries[rows[r]];
    const auto& v = def_side ? *e.def_emb : *e.word_emb;
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

void check_trainable(const Dataset& ds, const TrainConfig& cfg, const char* role) {
  for (const auto& e : ds.entries) {
    const std::string where = std::string(role) + " " + e.locator();
    if (!e.def_emb || !e.word_emb) {
      fail(ErrorCode::kSchema, where + ": training entries need both def_emb and word_emb");
    }
    if (e.def_emb->size() != cfg.d) {
      fail(ErrorCode::kSchema, where + ": def_emb has length " +
                                   std::to_string(e.def_emb->size()) + ", config d=" +
                                   std::to_string(cfg.d));
    }
    if (e.word_emb->size() != cfg.b) {
      fail(ErrorCode::kSchema, where + ": word_emb has length " +
                                   std::to_string(e.word_emb->size()) + ", config b=" +
                                   std::to_string(cfg.b));
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (d == 0 || b == 0 || s == 0) fail(ErrorCode::kConfig, "d, b and s must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    fail(ErrorCode::kConfig, "dropout_rate must lie in [0,1)");
  }
  if (epochs < 1) fail(ErrorCode::kConfig, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::kConfig, "batch_size must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    fail(ErrorCode::kConfig, "val_fraction must lie in [0,1)");
  }
  if (metric_for_best != "val_mse") {
    fail(ErrorCode::kConfig, "metric_for_best must be \"val_mse\", got \"" + metric_for_best + "\"");
  }
  optim.validate();
}

TrainConfig parse_train_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");
  reject_unknown(j,
                 {"d", "b", "s", "dropout_rate", "epochs", "batch_size", "seed", "optim",
                  "val_fraction", "checkpoint_path", "metric_for_best"},
                 "");
  TrainConfig cfg;
  if (j.contains("d")) cfg.d = positive_int(j, "d");
  if (j.contains("b")) cfg.b = positive_int(j, "b");
  if (j.contains("s")) cfg.s = positive_int(j, "s");
  if (j.contains("epochs")) cfg.epochs = positive_int(j, "epochs");
  if (j.contains("batch_size")) cfg.batch_size = positive_int(j, "batch_size");
  if (j.contains("dropout_rate")) cfg.dropout_rate = field<double>(j, "dropout_rate", "");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      fail(ErrorCode::kConfig, "config field \"seed\" must be a non-negative integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("val_fraction")) cfg.val_fraction = field<double>(j, "val_fraction", "");
  if (j.contains("checkpoint_path")) {
    cfg.checkpoint_path = field<std::string>(j, "checkpoint_path", "");
  }
  if (j.contains("metric_for_best")) {
    cfg.metric_for_best = field<std::string>(j, "metric_for_best", "");
  }
  if (j.contains("optim")) {
    const json& o = j["optim"];
    if (!o.is_object()) fail(ErrorCode::kConfig, "config field \"optim\" must be an object");
    reject_unknown(o, {"learning_rate", "beta1", "beta2", "epsilon", "weight_decay"}, "optim.");
    if (o.contains("learning_rate")) cfg.optim.learning_rate = field<double>(o, "learning_rate", "optim.");
    if (o.contains("beta1")) cfg.optim.beta1 = field<double>(o, "beta1", "optim.");
    if (o.contains("beta2")) cfg.optim.beta2 = field<double>(o, "beta2", "optim.");
    if (o.contains("epsilon")) cfg.optim.epsilon = field<double>(o, "epsilon", "optim.");
    if (o.contains("weight_decay")) cfg.optim.weight_decay = field<double>(o, "weight_decay", "optim.");
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open config: " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_train_config(buf.str());
}

double eval_mse_per_dim(const SemiEncoder& model, const Dataset& data) {
  if (data.empty()) fail(ErrorCode::kEmptyDataset, "eval_mse_per_dim: empty dataset");
  const auto rows = all_rows(data.size());
  const Matrix x = gather(data, rows, true, model.input_dim());
  const Matrix y = gather(data, rows, false, model.output_dim());
  const auto out = forward(model, x, false);
  return mse_loss(out.output, y).per_dim;
}

TrainResult train(const Dataset& train_set, const std::optional<Dataset>& val_set,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) fail(ErrorCode::kEmptyDataset, "train: empty training set");
  check_trainable(train_set, cfg, "train");
  if (val_set) {
    if (val_set->empty()) fail(ErrorCode::kEmptyDataset, "train: empty validation set");
    check_trainable(*val_set, cfg, "validation");
  }

  // Choose the fitting and validation subsets.
  Dataset fit;
  std::optional<Dataset> val = val_set;
  if (!val && cfg.val_fraction > 0.0 && train_set.size() >= 2) {
    const std::size_t n = train_set.size();
    auto n_val = static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    const auto order = seeded_permutation(n, derive_seed(cfg.seed, {kSplitStream}));
    std::vector<bool> held(n, false);
    for (std::size_t i = 0; i < n_val; ++i) held[order[i]] = true;
    Dataset v;
    for (std::size_t i = 0; i < n; ++i) {
      (held[i] ? v : fit).entries.push_back(train_set.entries[i]);
    }
    fit.d = v.d = cfg.d;
    fit.b = v.b = cfg.b;
    fit.source_tags = v.source_tags = train_set.source_tags;
    val = std::move(v);
  } else {
    fit = train_set;
  }

  SemiEncoder model = build_model(cfg.d, cfg.b, cfg.s, cfg.dropout_rate, cfg.seed);
  AdamWState state = AdamWState::for_model(model);
  std::optional<SemiEncoder> best;
  double best_val = std::numeric_limits<double>::infinity();

  TrainHistory history;
  const std::uint64_t shuffle_seed = derive_seed(cfg.seed, {kShuffleStream});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    double sq_sum = 0.0;
    const auto batches = batch_iter(fit.size(), cfg.batch_size, shuffle_seed, epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Matrix x = gather(fit, batches[bi], true, cfg.d);
      const Matrix y = gather(fit, batches[bi], false, cfg.b);
      const auto fwd = forward(model, x, true, derive_seed(cfg.seed, {kDropoutStream, epoch, bi}));
      const auto loss = mse_loss(fwd.output, y);
      if (!std::isfinite(loss.value)) {
        fail(ErrorCode::kNumeric, "non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(bi));
      }
      for (double sq : loss.sample_sq_norms) sq_sum += sq;
      const GradientSet grads = backward(model, fwd.cache, fwd.output, y);
      try {
        adamw_step(model, grads, state, cfg.optim);
      } catch (const Error& ex) {
        fail(ex.code(), std::string(ex.what()) + " at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(bi));
      }
      ++rec.optimizer_steps;
    }
    rec.train_loss = sq_sum / static_cast<double>(fit.size());

    if (val) {
      const double v = eval_mse_per_dim(model, *val);
      if (!std::isfinite(v)) {
        fail(ErrorCode::kNumeric, "non-finite validation MSE at epoch " + std::to_string(epoch));
      }
      rec.val_mse_per_dim = v;
      if (v < best_val) {
        best_val = v;
        best = model;
        history.best_epoch = epoch;
      }
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (!best) {
    best = model;
    history.best_epoch = cfg.epochs;
  }

  if (!cfg.checkpoint_path.empty()) save_checkpoint(*best, cfg.checkpoint_path);
  return {std::move(*best), std::move(history)};
}

std::string history_to_jsonl(const TrainHistory& history) {
  std::string out;
  for (const auto& r : history.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_mse_per_dim"] = r.val_mse_per_dim ? nlohmann::ordered_json(*r.val_mse_per_dim)
                                             : nlohmann::ordered_json(nullptr);
    j["seconds"] = r.seconds;
    j["optimizer_steps"] = r.optimizer_steps;
    j["best"] = r.epoch == history.best_epoch;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace rdict
