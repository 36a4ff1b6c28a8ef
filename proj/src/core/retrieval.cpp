#include "rdict/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdict/error.hpp"

namespace rdict {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double l2(std::span<const double> x) { return std::sqrt(dot(x.data(), x.data(), x.size())); }

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

bool ranks_before(const ScoredWord& a, const ScoredWord& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.vocab_index < b.vocab_index;
}

}  // namespace

double cosine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::kDimensionMismatch, "cosine: lengths " + std::to_string(x.size()) +
                                            " and " + std::to_string(y.size()) + " differ");
  }
  const double nx = l2(x);
  const double ny = l2(y);
  if (nx == 0.0 || ny == 0.0) fail(ErrorCode::kDegenerateVector, "cosine: zero-norm vector");
  return clamp_unit(dot(x.data(), y.data(), x.size()) / (nx * ny));
}

RetrievalIndex::RetrievalIndex(Vocabulary vocab) : vocab_(std::move(vocab)) {
  vectors_ = Matrix(vocab_.size(), vocab_.dim());
  norms_.resize(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const auto& v = vocab_.vector(i);
    std::copy(v.begin(), v.end(), vectors_.row(i).begin());
    norms_[i] = l2(v);
  }
}

void RetrievalIndex::check_query(std::span<const double> query) const {
  if (query.size() != dim()) {
    fail(ErrorCode::kDimensionMismatch, "query has length " + std::to_string(query.size()) +
                                            ", index vectors have length " +
                                            std::to_string(dim()));
  }
  if (l2(query) == 0.0) fail(ErrorCode::kDegenerateVector, "query vector has zero norm");
}

std::vector<double> RetrievalIndex::similarities(std::span<const double> query) const {
  check_query(query);
  const double qn = l2(query);
  std::vector<double> sims(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (norms_[i] == 0.0) {
      sims[i] = kDegenerateScore;
      continue;
    }
    sims[i] = clamp_unit(dot(query.data(), vectors_.row(i).data(), dim()) / (qn * norms_[i]));
  }
  return sims;
}

std::vector<ScoredWord> RetrievalIndex::score_all(std::span<const double> query) const {
  const auto sims = similarities(query);
  std::vector<ScoredWord> out;
  out.reserve(sims.size());
  for (std::size_t i = 0; i < sims.size(); ++i) {
    out.push_back({vocab_.word(i), sims[i], i, norms_[i] == 0.0});
  }
  return out;
}

std::vector<ScoredWord> RetrievalIndex::top_k(std::span<const double> query,
                                              std::size_t k) const {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "top_k: k must be >= 1");
  auto all = score_all(query);
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    ranks_before);
  all.resize(take);
  return all;
}

GoldPosition gold_position(std::span<const double> sims, std::size_t gold_index) {
  GoldPosition pos;
  const double g = sims[gold_index];
  for (std::size_t i = 0; i < sims.size(); ++i) {
    if (i == gold_index) continue;
    if (sims[i] > g) {
      ++pos.better;
    } else if (sims[i] == g) {
      ++pos.tied;
      if (i < gold_index) ++pos.tied_before;
    }
  }
  return pos;
}

double RetrievalIndex::rank_of_gold(std::span<const double> query,
                                    std::size_t gold_index) const {
  if (size() < 2) fail(ErrorCode::kInvalidArgument, "rank_of_gold needs at least 2 words");
  if (gold_index >= size()) {
    fail(ErrorCode::kInvalidArgument, "gold index " + std::to_string(gold_index) +
                                          " outside vocabulary of size " +
                                          std::to_string(size()));
  }
  const auto sims = similarities(query);
  const GoldPosition pos = gold_position(sims, gold_index);
  const double raw = static_cast<double>(pos.better) + 0.5 * static_cast<double>(pos.tied);
  return raw / static_cast<double>(size() - 1);
}

}  // namespace rdict
