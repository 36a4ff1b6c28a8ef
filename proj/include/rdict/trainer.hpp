#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdict/data.hpp"
#include "rdict/model.hpp"
#include "rdict/optim.hpp"

namespace rdict {

struct TrainConfig {
  std::size_t d = 256;
  std::size_t b = 256;
  std::size_t s = 256;
  double dropout_rate = 0.3;
  std::size_t epochs = 50;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  OptimConfig optim;
  double val_fraction = 0.05;  // only used when no validation set is supplied
  std::string checkpoint_path;  // empty: do not write
  std::string metric_for_best = "val_mse";

  void validate() const;
};

/// Parses a config JSON object whose keys mirror TrainConfig's fields. Missing
/// keys keep their defaults; unknown keys raise kConfig listing all of them.
TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::filesystem::path& path);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;                // squared L2 error averaged over every sample of the epoch
  std::optional<double> val_mse_per_dim;  // empty when there is no validation set
  double seconds = 0.0;
  std::size_t optimizer_steps = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  SemiEncoder model;
  TrainHistory history;
};

/// Per-dimension MSE of the model in eval mode over a dataset.
double eval_mse_per_dim(const SemiEncoder& model, const Dataset& data);

/// Fixed-epoch AdamW training. Returns the parameters of the epoch with the
/// lowest validation MSE (or of the last epoch without a validation set) and
/// writes them to cfg.checkpoint_path when set.
///
/// If `val_set` is absent and cfg.val_fraction > 0, a seeded fraction of
/// `train_set` is held out for validation.
TrainResult train(const Dataset& train_set, const std::optional<Dataset>& val_set,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// One JSON object per epoch record.
std::string history_to_jsonl(const TrainHistory& history);

}  // namespace rdict
