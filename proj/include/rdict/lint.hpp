#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdict/data.hpp"

namespace rdict {

/// The eight definition-quality standards, in order.
enum class LintRule : int {
  kMorphologicalFormsOnly = 0,     // S1
  kAmbiguousPronoun = 1,           // S2
  kSpecializedBeforeGeneral = 2,   // S3
  kMissingDomainMarker = 3,        // S4
  kIllustrativePhrase = 4,         // S5
  kRedundantHeadwordPhrasing = 5,  // S6
  kSynonymOnly = 6,                // S7
  kCircularDefinition = 7,         // S8
};

inline constexpr std::size_t kNumLintRules = 8;
inline constexpr std::array<LintRule, kNumLintRules> kAllLintRules{
    LintRule::kMorphologicalFormsOnly,   LintRule::kAmbiguousPronoun,
    LintRule::kSpecializedBeforeGeneral, LintRule::kMissingDomainMarker,
    LintRule::kIllustrativePhrase,       LintRule::kRedundantHeadwordPhrasing,
    LintRule::kSynonymOnly,              LintRule::kCircularDefinition};

std::string_view rule_id(LintRule rule) noexcept;    // "S1".."S8"
std::string_view rule_name(LintRule rule) noexcept;  // "morphological-forms-only", ...
std::optional<LintRule> parse_rule_id(std::string_view id) noexcept;

/// Lexicons and thresholds for the lexical heuristics. Lexicon entries may be
/// written with or without diacritics; they are normalized like the text.
struct LintConfig {
  std::vector<std::string> morphological_marker_lexicon;
  std::vector<std::string> boilerplate_filler_lexicon;
  std::vector<std::string> pronoun_prefix_lexicon;     // independent pronouns opening a gloss
  std::vector<std::string> attached_pronoun_suffixes;  // third-person suffixes, e.g. ها
  std::map<std::string, std::vector<std::string>> domain_keyword_lexicon;
  std::vector<std::string> domain_tag_patterns;
  std::vector<std::string> idiom_opening_suffixes;  // first/second-person possessives
  std::vector<std::string> idiom_opening_words;
  std::vector<std::string> conjunction_lexicon;
  std::vector<std::string> function_word_lexicon;
  std::size_t synonym_only_max_tokens = 3;
  std::size_t min_definition_tokens = 2;
  bool strip_diacritics = true;
  std::array<bool, kNumLintRules> enabled{true, true, true, true, true, true, true, true};

  static LintConfig defaults();

  bool is_enabled(LintRule r) const noexcept { return enabled[static_cast<std::size_t>(r)]; }
  void set_enabled(LintRule r, bool on) noexcept { enabled[static_cast<std::size_t>(r)] = on; }

  /// Throws kConfig if an enabled rule is missing a lexicon it needs.
  void validate() const;
};

/// Starts from LintConfig::defaults() and overrides the keys present in the
/// JSON object. Unknown keys raise kConfig.
LintConfig parse_lint_config(const std::string& json_text);

struct LintFlag {
  LintRule rule;
  std::string evidence;  // substring of the gloss or headword

  friend bool operator==(const LintFlag&, const LintFlag&) = default;
};

struct LintRow {
  std::optional<std::string> id;
  std::string word;
  std::vector<LintFlag> flags;  // at most one per rule, in rule order
  int score = 5;                // max(1, 5 - number of flagged rules)
  bool skipped = false;         // empty gloss; no rules were applied

  bool has(LintRule r) const noexcept;

  friend bool operator==(const LintRow&, const LintRow&) = default;
};

struct LintSummary {
  std::size_t n_rows = 0;
  std::size_t n_skipped = 0;
  std::array<std::size_t, 5> score_histogram{};  // index 0 is score 1
  std::array<std::size_t, kNumLintRules> rule_counts{};
  double mean_score = 0.0;

  friend bool operator==(const LintSummary&, const LintSummary&) = default;
};

struct DatasetLint {
  std::vector<LintRow> rows;
  LintSummary summary;
};

/// Lints entries against a fixed configuration; lexicons are normalized once.
class Linter {
 public:
  explicit Linter(LintConfig cfg);
  ~Linter();
  Linter(Linter&&) noexcept;
  Linter& operator=(Linter&&) noexcept;

  const LintConfig& config() const noexcept;

  LintRow lint(const Entry& entry) const;
  LintRow lint(std::string_view word, std::string_view gloss) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LintRow lint_entry(const Entry& entry, const LintConfig& cfg);

/// One row per entry with a non-empty gloss, plus the score histogram.
DatasetLint lint_dataset(const Dataset& dataset, const LintConfig& cfg);

/// {"word", "flags":[{"rule","evidence"}], "score"}; skipped rows carry
/// "skipped": true and a null score.
std::string lint_row_to_json(const LintRow& row);
std::string lint_summary_to_json(const LintSummary& summary);

// Text utilities shared by the rules (exposed for tests).

/// A normalized string with, for every byte, the byte range of the original
/// text that produced it.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> orig_begin;
  std::vector<std::size_t> orig_end;

  /// Original-text byte range covering normalized bytes [begin, end).
  std::pair<std::size_t, std::size_t> original_range(std::size_t begin, std::size_t end) const;
};

/// NFC, removal of format controls, and optional diacritic/tatweel stripping.
NormalizedText normalize_arabic(std::string_view text, bool strip_diacritics);

struct Token {
  std::size_t begin = 0;  // byte offsets into NormalizedText::text
  std::size_t end = 0;
  std::string text;
};

/// Splits on whitespace and punctuation.
std::vector<Token> tokenize(const NormalizedText& text);

}  // namespace rdict
