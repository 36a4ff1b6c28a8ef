#include "rdict/lint.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "rdict/error.hpp"

namespace rdict {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kNumLintRules> kRuleNames{
    "morphological-forms-only",   "ambiguous-pronoun", "specialized-before-general",
    "missing-domain-marker",      "illustrative-phrase", "redundant-headword-phrasing",
    "synonym-only",               "circular-definition"};

constexpr std::string_view kDefiniteArticle = "ال";
constexpr std::string_view kWaw = "و";
// Separators that turn adjacent words into a list.
constexpr std::array<std::string_view, 5> kListSeparators{",", "،", "؛", ";", "/"};

bool is_arabic_diacritic(UChar32 c) {
  return (c >= 0x0610 && c <= 0x061A) || (c >= 0x064B && c <= 0x065F) || c == 0x0670 ||
         (c >= 0x06D6 && c <= 0x06DC) || (c >= 0x06DF && c <= 0x06E8) ||
         (c >= 0x06EA && c <= 0x06ED) || c == 0x0640;
}

bool is_combining(UChar32 c) {
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

bool is_delimiter(UChar32 c) { return c >= 0 && (u_isUWhiteSpace(c) || u_ispunct(c)); }

// Code point at byte offset `i` (advancing i), or -1 for an invalid sequence.
UChar32 next_cp(std::string_view s, std::size_t& i) {
  UChar32 c = 0;
  auto pos = static_cast<int32_t>(i);
  U8_NEXT(s.data(), pos, static_cast<int32_t>(s.size()), c);
  i = static_cast<std::size_t>(pos);
  return c;
}

// Code point ending just before byte offset `i`.
UChar32 prev_cp(std::string_view s, std::size_t i, std::size_t* start = nullptr) {
  UChar32 c = 0;
  auto pos = static_cast<int32_t>(i);
  U8_PREV(s.data(), 0, pos, c);
  if (start) *start = static_cast<std::size_t>(pos);
  return c;
}

std::size_t cp_len(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    next_cp(s, i);
    ++n;
  }
  return n;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

using WordSet = std::unordered_set<std::string>;

std::string normalize_term(std::string_view term, bool strip) {
  auto n = normalize_arabic(term, strip).text;
  const auto first = n.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = n.find_last_not_of(" \t\r\n");
  return n.substr(first, last - first + 1);
}

WordSet normalize_set(const std::vector<std::string>& words, bool strip) {
  WordSet out;
  for (const auto& w : words) {
    if (auto n = normalize_term(w, strip); !n.empty()) out.insert(std::move(n));
  }
  return out;
}

std::vector<std::string> normalize_list(const std::vector<std::string>& words, bool strip) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    if (auto n = normalize_term(w, strip); !n.empty()) out.push_back(std::move(n));
  }
  // Longest first so suffix checks prefer the most specific match.
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
  if (!j.is_array()) fail(ErrorCode::kConfig, "lint config \"" + key + "\" must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) fail(ErrorCode::kConfig, "lint config \"" + key + "\" must contain only strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::size_t count_field(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    fail(ErrorCode::kConfig, "lint config \"" + key + "\" must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace

std::string_view rule_id(LintRule rule) noexcept {
  static constexpr std::array<std::string_view, kNumLintRules> ids{"S1", "S2", "S3", "S4",
                                                                   "S5", "S6", "S7", "S8"};
  return ids[static_cast<std::size_t>(rule)];
}

std::string_view rule_name(LintRule rule) noexcept {
  return kRuleNames[static_cast<std::size_t>(rule)];
}

std::optional<LintRule> parse_rule_id(std::string_view id) noexcept {
  for (LintRule r : kAllLintRules) {
    if (rule_id(r) == id || rule_name(r) == id) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text normalization

std::pair<std::size_t, std::size_t> NormalizedText::original_range(std::size_t begin,
                                                                   std::size_t end) const {
  if (begin >= end || end > text.size()) return {0, 0};
  return {orig_begin[begin], orig_end[end - 1]};
}

NormalizedText normalize_arabic(std::string_view text, bool strip_diacritics) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::kInternal, "ICU NFC normalizer unavailable");

  NormalizedText out;
  out.text.reserve(text.size());
  auto emit = [&out](std::string_view bytes, std::size_t ob, std::size_t oe) {
    out.text.append(bytes);
    out.orig_begin.insert(out.orig_begin.end(), bytes.size(), ob);
    out.orig_end.insert(out.orig_end.end(), bytes.size(), oe);
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t cluster_begin = i;
    const UChar32 base = next_cp(text, i);
    if (base < 0) {
      emit(text.substr(cluster_begin, i - cluster_begin), cluster_begin, i);
      continue;
    }
    // Extend over following combining marks so composition sees the full cluster.
    while (i < text.size()) {
      std::size_t peek = i;
      const UChar32 c = next_cp(text, peek);
      if (c < 0 || !is_combining(c)) break;
      i = peek;
    }
    const std::size_t cluster_end = i;
    const auto src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data() + cluster_begin,
                         static_cast<int32_t>(cluster_end - cluster_begin)));
    status = U_ZERO_ERROR;
    const icu::UnicodeString composed = nfc->normalize(src, status);
    std::string utf8;
    (U_SUCCESS(status) ? composed : src).toUTF8String(utf8);

    for (std::size_t k = 0; k < utf8.size();) {
      const std::size_t cp_begin = k;
      const UChar32 c = next_cp(utf8, k);
      if (c >= 0 && u_charType(c) == U_FORMAT_CHAR) continue;
      if (strip_diacritics && c >= 0 && is_arabic_diacritic(c)) continue;
      emit(std::string_view(utf8).substr(cp_begin, k - cp_begin), cluster_begin, cluster_end);
    }
  }
  return out;
}

std::vector<Token> tokenize(const NormalizedText& norm) {
  std::vector<Token> tokens;
  const std::string_view s = norm.text;
  std::size_t i = 0;
  std::optional<std::size_t> start;
  while (i < s.size()) {
    const std::size_t at = i;
    const UChar32 c = next_cp(s, i);
    if (is_delimiter(c)) {
      if (start) tokens.push_back({*start, at, std::string(s.substr(*start, at - *start))});
      start.reset();
    } else if (!start) {
      start = at;
    }
  }
  if (start) tokens.push_back({*start, s.size(), std::string(s.substr(*start))});
  return tokens;
}

// ---------------------------------------------------------------------------
// Configuration

LintConfig LintConfig::defaults() {
  LintConfig c;
  // Derivational boilerplate of the form "<masdar>، فهو <fa'il>، والمفعول <maf'ul> به".
  c.morphological_marker_lexicon = {"فهو", "فهي", "والمفعول", "المفعول", "مصدر", "والمصدر",
                                    "للمفعول"};
  c.boilerplate_filler_lexicon = {"به", "بها", "له", "لها", "عليه", "عليها", "فيه", "فيها",
                                  "منه", "منها", "إليه", "إليها"};
  c.pronoun_prefix_lexicon = {"هو", "هي", "هما", "هم", "هن"};
  c.attached_pronoun_suffixes = {"ها", "هما", "هم", "هن"};
  c.domain_keyword_lexicon = {
      {"law", {"القانون", "قانون", "قانوني", "قانونية", "القانوني", "القانونية", "قضية",
               "القضية", "قضائي", "القضائية", "المحكمة", "محكمة", "الدعوى", "دعوى", "التشريع"}},
      {"mathematics", {"الرياضيات", "رياضيات", "المثلث", "مثلث", "الهندسة", "هندسي",
                       "المعادلة", "معادلة", "الزاوية"}},
      {"medicine", {"الطب", "طبي", "طبية", "المريض", "مريض", "المرض", "الدواء", "العلاج"}},
      {"textiles", {"الثوب", "ثوب", "القماش", "قماش", "النسيج"}},
      {"printing", {"الراصف", "الطباعة", "طباعة", "المطبعة"}},
      {"grammar", {"النحو", "النحاة", "الإعراب"}},
  };
  c.domain_tag_patterns = {"(قانون)",   "في القانون",  "(رياضيات)", "في الرياضيات",
                           "في الهندسة", "(طب)",        "في الطب",   "(طباعة)",
                           "في الطباعة", "(نحو)",       "في النحو",  "عند النحاة",
                           "في النسيج",  "في الفلسفة",  "(فلسفة)",   "في الفنون"};
  c.idiom_opening_suffixes = {"تي", "تنا", "تك", "تكم", "تكما", "تكن"};
  c.idiom_opening_words = {"أنا", "نحن", "أنت", "أنتم", "أنتما", "أنتن", "يا"};
  c.conjunction_lexicon = {"و", "أو", "ثم"};
  c.function_word_lexicon = {"على", "في", "من", "إلى", "عن", "مع", "ب", "ل", "عند", "بين"};
  return c;
}

void LintConfig::validate() const {
  auto need = [this](LintRule r, bool ok, const char* what) {
    if (is_enabled(r) && !ok) {
      fail(ErrorCode::kConfig, std::string("rule ") + std::string(rule_id(r)) +
                                   " is enabled but " + what + " is empty");
    }
  };
  need(LintRule::kMorphologicalFormsOnly, !morphological_marker_lexicon.empty(),
       "morphological_marker_lexicon");
  need(LintRule::kAmbiguousPronoun,
       !pronoun_prefix_lexicon.empty() || !attached_pronoun_suffixes.empty(),
       "pronoun_prefix_lexicon");
  need(LintRule::kSpecializedBeforeGeneral, !domain_tag_patterns.empty(), "domain_tag_patterns");
  need(LintRule::kMissingDomainMarker, !domain_keyword_lexicon.empty(), "domain_keyword_lexicon");
  need(LintRule::kIllustrativePhrase,
       !idiom_opening_suffixes.empty() || !idiom_opening_words.empty(), "idiom_opening_suffixes");
  need(LintRule::kSynonymOnly, synonym_only_max_tokens > 0, "synonym_only_max_tokens");
}

LintConfig parse_lint_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    fail(ErrorCode::kConfig, std::string("lint config is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) fail(ErrorCode::kConfig, "lint config must be a JSON object");
  LintConfig c = LintConfig::defaults();
  const std::unordered_map<std::string, std::vector<std::string>*> lists{
      {"morphological_marker_lexicon", &c.morphological_marker_lexicon},
      {"boilerplate_filler_lexicon", &c.boilerplate_filler_lexicon},
      {"pronoun_prefix_lexicon", &c.pronoun_prefix_lexicon},
      {"attached_pronoun_suffixes", &c.attached_pronoun_suffixes},
      {"domain_tag_patterns", &c.domain_tag_patterns},
      {"idiom_opening_suffixes", &c.idiom_opening_suffixes},
      {"idiom_opening_words", &c.idiom_opening_words},
      {"conjunction_lexicon", &c.conjunction_lexicon},
      {"function_word_lexicon", &c.function_word_lexicon},
  };
  std::string unknown;
  for (const auto& [key, value] : j.items()) {
    if (auto it = lists.find(key); it != lists.end()) {
      *it->second = string_list(value, key);
    } else if (key == "domain_keyword_lexicon") {
      if (!value.is_object()) fail(ErrorCode::kConfig, "lint config \"domain_keyword_lexicon\" must be an object");
      c.domain_keyword_lexicon.clear();
      for (const auto& [domain, words] : value.items()) {
        c.domain_keyword_lexicon[domain] = string_list(words, key + "." + domain);
      }
    } else if (key == "synonym_only_max_tokens") {
      c.synonym_only_max_tokens = count_field(value, key);
    } else if (key == "min_definition_tokens") {
      c.min_definition_tokens = count_field(value, key);
    } else if (key == "strip_diacritics") {
      if (!value.is_boolean()) fail(ErrorCode::kConfig, "lint config \"strip_diacritics\" must be a boolean");
      c.strip_diacritics = value.get<bool>();
    } else if (key == "disabled_rules") {
      for (const auto& id : string_list(value, key)) {
        const auto rule = parse_rule_id(id);
        if (!rule) fail(ErrorCode::kConfig, "lint config: unknown rule \"" + id + "\"");
        c.set_enabled(*rule, false);
      }
    } else {
      unknown += (unknown.empty() ? "" : ", ") + key;
    }
  }
  if (!unknown.empty()) fail(ErrorCode::kConfig, "unknown lint config keys: " + unknown);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Rules

struct Linter::Impl {
  LintConfig cfg;
  WordSet markers;
  WordSet fillers;
  WordSet pronouns;
  std::vector<std::string> pronoun_suffixes;
  WordSet domain_keywords;
  std::vector<std::string> tag_patterns;
  std::vector<std::string> idiom_suffixes;
  WordSet idiom_words;
  WordSet conjunctions;
  WordSet function_words;

  explicit Impl(LintConfig c) : cfg(std::move(c)) {
    cfg.validate();
    const bool strip = cfg.strip_diacritics;
    markers = normalize_set(cfg.morphological_marker_lexicon, strip);
    fillers = normalize_set(cfg.boilerplate_filler_lexicon, strip);
    pronouns = normalize_set(cfg.pronoun_prefix_lexicon, strip);
    pronoun_suffixes = normalize_list(cfg.attached_pronoun_suffixes, strip);
    for (const auto& [domain, words] : cfg.domain_keyword_lexicon) {
      auto set = normalize_set(words, strip);
      domain_keywords.insert(set.begin(), set.end());
    }
    tag_patterns = normalize_list(cfg.domain_tag_patterns, strip);
    idiom_suffixes = normalize_list(cfg.idiom_opening_suffixes, strip);
    idiom_words = normalize_set(cfg.idiom_opening_words, strip);
    conjunctions = normalize_set(cfg.conjunction_lexicon, strip);
    function_words = normalize_set(cfg.function_word_lexicon, strip);
  }

  struct Text {
    std::string_view original;
    NormalizedText norm;
    std::vector<Token> tokens;

    // Original substring covering tokens [first, last].
    std::string span(std::size_t first, std::size_t last) const {
      const auto [b, e] = norm.original_range(tokens[first].begin, tokens[last].end);
      return std::string(original.substr(b, e - b));
    }
    std::string range(std::size_t nb, std::size_t ne) const {
      const auto [b, e] = norm.original_range(nb, ne);
      return std::string(original.substr(b, e - b));
    }
  };

  Text prepare(std::string_view s) const {
    Text t{s, normalize_arabic(s, cfg.strip_diacritics), {}};
    t.tokens = tokenize(t.norm);
    return t;
  }

  // A possessive or pronoun suffix on a token that could carry one.
  static bool has_suffix(const std::string& token, const std::vector<std::string>& suffixes,
                         std::size_t min_stem) {
    if (starts_with(token, kDefiniteArticle)) return false;
    for (const auto& suf : suffixes) {
      if (ends_with(token, suf) && cp_len(token) >= cp_len(suf) + min_stem) return true;
    }
    return false;
  }

  std::optional<LintFlag> morphological(const Text& g, const Text& h) const {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      if (markers.contains(g.tokens[i].text)) hits.push_back(i);
    }
    if (hits.size() >= 2) {
      return LintFlag{LintRule::kMorphologicalFormsOnly, g.span(hits.front(), hits.back())};
    }
    // Gloss made only of boilerplate: markers, fillers, and derivatives of the headword.
    const std::string core = h.tokens.empty() ? std::string() : h.tokens.front().text;
    const bool core_usable = cp_len(core) >= 3;
    bool substantive = false;
    for (const auto& t : g.tokens) {
      const bool derivative = core_usable && t.text.find(core) != std::string::npos;
      if (markers.contains(t.text) || derivative) {
        substantive = true;
      } else if (!fillers.contains(t.text)) {
        return std::nullopt;
      }
    }
    if (!substantive || hits.empty()) return std::nullopt;
    return LintFlag{LintRule::kMorphologicalFormsOnly, g.span(0, g.tokens.size() - 1)};
  }

  std::optional<LintFlag> ambiguous_pronoun(const Text& g) const {
    // Only the opening token is examined: nothing precedes it that a pronoun
    // could refer to.
    const std::string& first = g.tokens.front().text;
    if (pronouns.contains(first) || has_suffix(first, pronoun_suffixes, 3)) {
      return LintFlag{LintRule::kAmbiguousPronoun, g.span(0, 0)};
    }
    return std::nullopt;
  }

  bool boundary_before(std::string_view s, std::size_t pos, const std::string& pattern) const {
    if (pos == 0) return true;
    std::size_t cp_start = 0;
    if (is_delimiter(next_cp(pattern, cp_start))) return true;
    const UChar32 prev = prev_cp(s, pos, &cp_start);
    if (is_delimiter(prev)) return true;
    // Allow a conjunction waw glued to the tag ("وفي الطب").
    if (s.substr(cp_start, pos - cp_start) == kWaw) {
      return cp_start == 0 || is_delimiter(prev_cp(s, cp_start));
    }
    return false;
  }

  bool boundary_after(std::string_view s, std::size_t end, const std::string& pattern) const {
    if (end >= s.size()) return true;
    if (is_delimiter(prev_cp(pattern, pattern.size()))) return true;
    std::size_t i = end;
    return is_delimiter(next_cp(s, i));
  }

  // Earliest domain tag occurrence as a normalized byte range.
  std::optional<std::pair<std::size_t, std::size_t>> find_tag(const Text& g) const {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    const std::string_view s = g.norm.text;
    for (const auto& p : tag_patterns) {
      for (std::size_t pos = s.find(p); pos != std::string_view::npos; pos = s.find(p, pos + 1)) {
        if (boundary_before(s, pos, p) && boundary_after(s, pos + p.size(), p)) {
          if (!best || pos < best->first) best = {{pos, pos + p.size()}};
          break;
        }
      }
    }
    return best;
  }

  void domain_rules(const Text& g, std::vector<LintFlag>& flags, bool want_s3,
                    bool want_s4) const {
    if (const auto tag = find_tag(g)) {
      if (!want_s3) return;
      std::size_t general = 0;
      for (const auto& t : g.tokens) {
        if (t.end <= tag->first) ++general;
      }
      if (general < cfg.min_definition_tokens) {
        flags.push_back({LintRule::kSpecializedBeforeGeneral, g.range(tag->first, tag->second)});
      }
      return;
    }
    if (!want_s4) return;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      if (domain_keywords.contains(g.tokens[i].text)) {
        flags.push_back({LintRule::kMissingDomainMarker, g.span(i, i)});
        return;
      }
    }
  }

  std::optional<LintFlag> illustrative(const Text& g) const {
    if (g.tokens.size() >= cfg.min_definition_tokens + 3) return std::nullopt;
    const std::string& first = g.tokens.front().text;
    if (idiom_words.contains(first) || has_suffix(first, idiom_suffixes, 2)) {
      return LintFlag{LintRule::kIllustrativePhrase, g.span(0, 0)};
    }
    return std::nullopt;
  }

  std::optional<LintFlag> redundant_headword(const Text& g, const Text& h) const {
    if (h.tokens.size() <= 2) return std::nullopt;
    std::optional<std::size_t> lo, hi;
    bool any = false;
    for (std::size_t i = 1; i < h.tokens.size(); ++i) {
      const std::string& w = h.tokens[i].text;
      if (function_words.contains(w) || conjunctions.contains(w)) continue;
      any = true;
      auto it = std::find_if(g.tokens.begin(), g.tokens.end(),
                             [&](const Token& t) { return t.text == w; });
      if (it == g.tokens.end()) return std::nullopt;
      const auto idx = static_cast<std::size_t>(it - g.tokens.begin());
      lo = lo ? std::min(*lo, idx) : idx;
      hi = hi ? std::max(*hi, idx) : idx;
    }
    if (!any) return std::nullopt;
    return LintFlag{LintRule::kRedundantHeadwordPhrasing, g.span(*lo, *hi)};
  }

  std::optional<LintFlag> synonym_only(const Text& g) const {
    std::vector<std::size_t> words;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      if (!conjunctions.contains(g.tokens[i].text)) words.push_back(i);
    }
    if (words.empty() || words.size() > cfg.synonym_only_max_tokens) return std::nullopt;
    const std::string_view s = g.norm.text;
    for (std::size_t k = 0; k + 1 < words.size(); ++k) {
      const Token& a = g.tokens[words[k]];
      const Token& b = g.tokens[words[k + 1]];
      const std::string_view gap = s.substr(a.end, b.begin - a.end);
      const bool separated =
          std::any_of(kListSeparators.begin(), kListSeparators.end(),
                      [&](std::string_view sep) { return gap.find(sep) != std::string_view::npos; }) ||
          words[k + 1] != words[k] + 1 ||  // a conjunction token sits between them
          (starts_with(b.text, kWaw) && cp_len(b.text) >= 4);
      if (!separated) return std::nullopt;
    }
    return LintFlag{LintRule::kSynonymOnly, g.span(0, g.tokens.size() - 1)};
  }

  std::optional<LintFlag> circular(const Text& g, const Text& h) const {
    if (h.tokens.empty()) return std::nullopt;
    const std::string& core = h.tokens.front().text;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      if (g.tokens[i].text == core) return LintFlag{LintRule::kCircularDefinition, g.span(i, i)};
    }
    return std::nullopt;
  }

  LintRow run(std::string_view word, std::string_view gloss) const {
    LintRow row;
    row.word = std::string(word);
    const Text g = prepare(gloss);
    if (g.tokens.empty()) {
      row.skipped = true;
      return row;
    }
    const Text h = prepare(word);
    auto add = [&](LintRule r, std::optional<LintFlag> f) {
      if (cfg.is_enabled(r) && f) row.flags.push_back(std::move(*f));
    };
    add(LintRule::kMorphologicalFormsOnly, morphological(g, h));
    add(LintRule::kAmbiguousPronoun, ambiguous_pronoun(g));
    domain_rules(g, row.flags, cfg.is_enabled(LintRule::kSpecializedBeforeGeneral),
                 cfg.is_enabled(LintRule::kMissingDomainMarker));
    add(LintRule::kIllustrativePhrase, illustrative(g));
    add(LintRule::kRedundantHeadwordPhrasing, redundant_headword(g, h));
    add(LintRule::kSynonymOnly, synonym_only(g));
    add(LintRule::kCircularDefinition, circular(g, h));
    row.score = std::max(1, 5 - static_cast<int>(row.flags.size()));
    return row;
  }
};

Linter::Linter(LintConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Linter::~Linter() = default;
Linter::Linter(Linter&&) noexcept = default;
Linter& Linter::operator=(Linter&&) noexcept = default;

const LintConfig& Linter::config() const noexcept { return impl_->cfg; }

LintRow Linter::lint(std::string_view word, std::string_view gloss) const {
  return impl_->run(word, gloss);
}

LintRow Linter::lint(const Entry& entry) const {
  LintRow row = impl_->run(entry.word, entry.gloss);
  row.id = entry.id;
  return row;
}

bool LintRow::has(LintRule r) const noexcept {
  return std::any_of(flags.begin(), flags.end(), [r](const LintFlag& f) { return f.rule == r; });
}

LintRow lint_entry(const Entry& entry, const LintConfig& cfg) { return Linter(cfg).lint(entry); }

DatasetLint lint_dataset(const Dataset& dataset, const LintConfig& cfg) {
  const Linter linter(cfg);
  DatasetLint out;
  double total = 0.0;
  for (const auto& e : dataset.entries) {
    LintRow row = linter.lint(e);
    if (row.skipped) {
      ++out.summary.n_skipped;
      continue;
    }
    ++out.summary.score_histogram[static_cast<std::size_t>(row.score - 1)];
    for (const auto& f : row.flags) ++out.summary.rule_counts[static_cast<std::size_t>(f.rule)];
    total += row.score;
    out.rows.push_back(std::move(row));
  }
  out.summary.n_rows = out.rows.size();
  if (!out.rows.empty()) out.summary.mean_score = total / static_cast<double>(out.rows.size());
  return out;
}

std::string lint_row_to_json(const LintRow& row) {
  ordered_json j;
  j["word"] = row.word;
  ordered_json flags = ordered_json::array();
  for (const auto& f : row.flags) {
    ordered_json fj;
    fj["rule"] = std::string(rule_id(f.rule));
    fj["evidence"] = f.evidence;
    flags.push_back(std::move(fj));
  }
  j["flags"] = std::move(flags);
  if (row.skipped) {
    j["score"] = nullptr;
    j["skipped"] = true;
  } else {
    j["score"] = row.score;
  }
  return j.dump();
}

std::string lint_summary_to_json(const LintSummary& s) {
  ordered_json j;
  j["n_rows"] = s.n_rows;
  j["n_skipped"] = s.n_skipped;
  ordered_json hist;
  for (std::size_t i = 0; i < s.score_histogram.size(); ++i) {
    hist[std::to_string(i + 1)] = s.score_histogram[i];
  }
  j["histogram"] = std::move(hist);
  j["mean_score"] = s.mean_score;
  ordered_json counts;
  for (LintRule r : kAllLintRules) {
    counts[std::string(rule_id(r))] = s.rule_counts[static_cast<std::size_t>(r)];
  }
  j["rule_counts"] = std::move(counts);
  return j.dump();
}

}  // namespace rdict
