#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace rdict {

/// One (definition, headword) record with optional embeddings.
struct Entry {
  std::optional<std::string> id;
  std::string word;
  std::string gloss;
  std::optional<std::vector<double>> def_emb;
  std::optional<std::vector<double>> word_emb;
  std::size_t source_line = 0;  // 1-based line in the file it came from; 0 if synthetic

  /// "id <id>" when an id is present, otherwise "line <n>".
  std::string locator() const;

  friend bool operator==(const Entry& a, const Entry& b) {
    return a.id == b.id && a.word == b.word && a.gloss == b.gloss && a.def_emb == b.def_emb &&
           a.word_emb == b.word_emb;
  }
};

struct Dataset {
  std::vector<Entry> entries;
  std::optional<std::size_t> d;  // definition-vector length, if any entry carries one
  std::optional<std::size_t> b;  // word-vector length, if any entry carries one
  std::vector<std::string> source_tags;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  /// True when every entry has both vectors.
  bool is_trainable() const noexcept;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads dataset JSONL. Dimensions are inferred from the first vector of each
/// kind unless given. Errors: kParse / kSchema carrying the 1-based line
/// number, kEmptyDataset when no entries are present, kIo.
Dataset load_jsonl(const std::filesystem::path& path,
                   std::optional<std::size_t> expected_d = std::nullopt,
                   std::optional<std::size_t> expected_b = std::nullopt);

/// Same as load_jsonl over an in-memory buffer; `source_tag` names it in errors.
Dataset parse_jsonl(std::string_view text, const std::string& source_tag,
                    std::optional<std::size_t> expected_d = std::nullopt,
                    std::optional<std::size_t> expected_b = std::nullopt);

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path);
std::string to_jsonl(const Dataset& dataset);

/// Concatenates datasets in argument order. Throws kSchema naming both sources
/// on a dimension disagreement.
Dataset merge_datasets(std::span<const Dataset> parts);

/// Unique headwords with their vectors; duplicates keep the first occurrence.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Returns false (and ignores the vector) if `word` is already present.
  bool add(const std::string& word, std::vector<double> vec);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  std::size_t dim() const noexcept { return vectors_.empty() ? 0 : vectors_.front().size(); }

  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<double>& vector(std::size_t i) const { return vectors_.at(i); }
  std::span<const std::string> words() const noexcept { return words_; }

  std::optional<std::size_t> find(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary build_vocabulary(std::span<const Dataset> datasets);
Vocabulary load_vocabulary(const std::filesystem::path& path);

/// Index batches covering 0..n-1 in a permutation fixed by (shuffle_seed, epoch).
/// The final batch may be short.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed,
                                                 std::uint64_t epoch);

/// Fisher-Yates permutation of 0..n-1 driven by `seed`.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace rdict
