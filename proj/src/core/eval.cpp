#include "rdict/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdict/error.hpp"

namespace rdict {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Gold vocabulary indices for every test entry, or kMissingGold naming the
// absent words.
std::vector<std::size_t> resolve_gold(const Dataset& test, const RetrievalIndex& index) {
  std::vector<std::size_t> gold;
  std::vector<std::string> missing;
  gold.reserve(test.size());
  for (const auto& e : test.entries) {
    if (auto idx = index.vocabulary().find(e.word)) {
      gold.push_back(*idx);
    } else if (std::find(missing.begin(), missing.end(), e.word) == missing.end()) {
      missing.push_back(e.word);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& w : missing) list += (list.empty() ? "" : ", ") + w;
    fail(ErrorCode::kMissingGold, "test words absent from the vocabulary: " + list);
  }
  return gold;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EvalReport evaluate_predictions(const Matrix& predictions, const Dataset& test,
                                const RetrievalIndex& index) {
  if (test.empty()) fail(ErrorCode::kEmptyDataset, "evaluate: empty test set");
  if (predictions.rows() != test.size()) {
    fail(ErrorCode::kDimensionMismatch, "evaluate: " + std::to_string(predictions.rows()) +
                                            " predictions for " + std::to_string(test.size()) +
                                            " test entries");
  }
  if (index.size() < 2) fail(ErrorCode::kInvalidArgument, "evaluate: vocabulary needs >= 2 words");
  if (predictions.cols() != index.dim()) {
    fail(ErrorCode::kDimensionMismatch, "evaluate: predictions have length " +
                                            std::to_string(predictions.cols()) +
                                            ", vocabulary vectors " + std::to_string(index.dim()));
  }
  for (const auto& e : test.entries) {
    if (!e.word_emb) {
      fail(ErrorCode::kSchema, "evaluate: test entry " + e.locator() + " has no word_emb");
    }
    if (e.word_emb->size() != predictions.cols()) {
      fail(ErrorCode::kDimensionMismatch,
           "evaluate: test entry " + e.locator() + " word_emb length differs from the model output");
    }
  }
  const auto gold = resolve_gold(test, index);

  const std::size_t n = test.size();
  const double denom = static_cast<double>(index.size() - 1);
  double sq_total = 0.0;
  double cos_total = 0.0;
  double rank_total = 0.0;
  std::size_t hits1 = 0, hits10 = 0, hits100 = 0;
  std::vector<double> ranks(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto q = predictions.row(i);
    const auto& target = *test.entries[i].word_emb;
    double sq = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = q[j] - target[j];
      sq += diff * diff;
    }
    sq_total += sq;
    cos_total += cosine(q, target);

    const auto sims = index.similarities(q);
    const GoldPosition pos = gold_position(sims, gold[i]);
    ranks[i] = (static_cast<double>(pos.better) + 0.5 * static_cast<double>(pos.tied)) / denom;
    rank_total += ranks[i];
    // 0-based position of gold in top_k order (descending, ties by index).
    const std::size_t position = pos.better + pos.tied_before;
    hits1 += position < 1;
    hits10 += position < 10;
    hits100 += position < 100;
  }

  const double nn = static_cast<double>(n);
  EvalReport r;
  r.n_items = n;
  r.mse = sq_total / nn;
  r.mse_per_dim = r.mse / static_cast<double>(predictions.cols());
  r.mean_cosine = cos_total / nn;
  r.mean_rank = rank_total / nn;
  r.median_rank = median(ranks);
  r.top1 = static_cast<double>(hits1) / nn;
  r.top10 = static_cast<double>(hits10) / nn;
  r.top100 = static_cast<double>(hits100) / nn;
  return r;
}

EvalReport evaluate(const SemiEncoder& model, const Dataset& test, const RetrievalIndex& index) {
  if (test.empty()) fail(ErrorCode::kEmptyDataset, "evaluate: empty test set");
  Matrix inputs(test.size(), model.input_dim());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& e = test.entries[i];
    if (!e.def_emb) fail(ErrorCode::kSchema, "evaluate: test entry " + e.locator() + " has no def_emb");
    if (e.def_emb->size() != model.input_dim()) {
      fail(ErrorCode::kDimensionMismatch, "evaluate: test entry " + e.locator() +
                                              " def_emb has length " +
                                              std::to_string(e.def_emb->size()) +
                                              ", model expects " +
                                              std::to_string(model.input_dim()));
    }
    std::copy(e.def_emb->begin(), e.def_emb->end(), inputs.row(i).begin());
  }
  // Resolve gold words first so a vocabulary problem is reported before the
  // forward pass.
  resolve_gold(test, index);
  const auto result = forward(model, inputs, false);
  return evaluate_predictions(result.output, test, index);
}

std::string report_to_json(const EvalReport& r) {
  ordered_json j;
  j["n_items"] = r.n_items;
  j["mse"] = r.mse;
  j["mse_per_dim"] = r.mse_per_dim;
  j["mean_cosine"] = r.mean_cosine;
  j["mean_rank"] = r.mean_rank;
  j["median_rank"] = r.median_rank;
  j["top1"] = r.top1;
  j["top10"] = r.top10;
  j["top100"] = r.top100;
  j["language_tag"] = r.language_tag ? ordered_json(*r.language_tag) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    fail(ErrorCode::kParse, std::string("malformed report JSON: ") + ex.what());
  }
  EvalReport r;
  try {
    r.n_items = j.at("n_items").get<std::size_t>();
    r.mse = j.at("mse").get<double>();
    r.mse_per_dim = j.at("mse_per_dim").get<double>();
    r.mean_cosine = j.at("mean_cosine").get<double>();
    r.mean_rank = j.at("mean_rank").get<double>();
    r.median_rank = j.at("median_rank").get<double>();
    r.top1 = j.at("top1").get<double>();
    r.top10 = j.at("top10").get<double>();
    r.top100 = j.at("top100").get<double>();
    if (j.contains("language_tag") && !j["language_tag"].is_null()) {
      r.language_tag = j["language_tag"].get<std::string>();
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kSchema, std::string("report JSON: ") + ex.what());
  }
  return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  if (path.empty()) fail(ErrorCode::kIo, "write_report: empty path");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot open report for writing: " + path.string());
  f << report_to_json(report);
  if (!f) fail(ErrorCode::kIo, "failed writing report: " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open report: " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return report_from_json(buf.str());
}

}  // namespace rdict
