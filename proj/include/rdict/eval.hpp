#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "rdict/data.hpp"
#include "rdict/matrix.hpp"
#include "rdict/model.hpp"
#include "rdict/retrieval.hpp"

namespace rdict {

/// MSE / cosine / rank triplet plus retrieval hit rates over a test set.
struct EvalReport {
  std::size_t n_items = 0;
  double mse = 0.0;          // mean squared L2 error
  double mse_per_dim = 0.0;  // mse / b; the comparison metric
  double mean_cosine = 0.0;
  double mean_rank = 0.0;    // 0 best, 1 worst
  double median_rank = 0.0;
  double top1 = 0.0;
  double top10 = 0.0;
  double top100 = 0.0;
  std::optional<std::string> language_tag;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Scores precomputed predictions (one row per test entry). Used directly by
/// evaluate() and by tests that need oracle predictors.
EvalReport evaluate_predictions(const Matrix& predictions, const Dataset& test,
                                const RetrievalIndex& index);

/// Runs the model in eval mode over every test definition and scores it.
/// Throws kMissingGold listing absent words, kEmptyDataset on an empty set.
EvalReport evaluate(const SemiEncoder& model, const Dataset& test, const RetrievalIndex& index);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace rdict
