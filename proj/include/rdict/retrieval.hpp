#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rdict/data.hpp"
#include "rdict/matrix.hpp"

namespace rdict {

/// Cosine similarity clamped to [-1, 1]. Throws kDegenerateVector if either
/// input has zero norm and kDimensionMismatch on unequal lengths.
double cosine(std::span<const double> x, std::span<const double> y);

/// Score assigned to vocabulary entries whose vector has zero norm.
inline constexpr double kDegenerateScore = -std::numeric_limits<double>::infinity();

struct ScoredWord {
  std::string word;
  double similarity = 0.0;
  std::size_t vocab_index = 0;
  bool degenerate = false;  // zero-norm vocabulary vector; similarity is kDegenerateScore
};

/// Immutable exact-search index over a vocabulary.
class RetrievalIndex {
 public:
  explicit RetrievalIndex(Vocabulary vocab);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  double norm(std::size_t i) const { return norms_.at(i); }

  /// Raw similarities in vocabulary order (kDegenerateScore for zero-norm rows).
  std::vector<double> similarities(std::span<const double> query) const;

  std::vector<ScoredWord> score_all(std::span<const double> query) const;

  /// The min(k, |V|) best words, similarity descending, ties by ascending index.
  std::vector<ScoredWord> top_k(std::span<const double> query, std::size_t k) const;

  /// Normalized rank of `gold_index`: (#better + 0.5 * #tied) / (|V| - 1).
  double rank_of_gold(std::span<const double> query, std::size_t gold_index) const;

 private:
  void check_query(std::span<const double> query) const;

  Vocabulary vocab_;
  Matrix vectors_;
  std::vector<double> norms_;
};

/// Rank statistics of a gold word against a similarity list.
struct GoldPosition {
  std::size_t better = 0;          // strictly higher similarity
  std::size_t tied = 0;            // equal similarity, excluding gold
  std::size_t tied_before = 0;     // equal similarity and lower vocabulary index
};

GoldPosition gold_position(std::span<const double> sims, std::size_t gold_index);

}  // namespace rdict
