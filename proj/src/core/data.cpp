#include "rdict/data.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rdict/error.hpp"
#include "rdict/rng.hpp"

namespace rdict {
namespace {

using nlohmann::json;

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

std::vector<double> read_vector(const json& value, const char* key, const std::string& where) {
  if (!value.is_array()) {
    fail(ErrorCode::kSchema, where + ": \"" + key + "\" must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& x : value) {
    if (!x.is_number()) {
      fail(ErrorCode::kSchema, where + ": \"" + key + "\" contains a non-numeric element");
    }
    const double v = x.get<double>();
    if (!std::isfinite(v)) {
      fail(ErrorCode::kSchema, where + ": \"" + key + "\" contains a non-finite value");
    }
    out.push_back(v);
  }
  return out;
}

void check_len(std::optional<std::size_t>& expected, std::size_t actual, const char* key,
               const std::string& where) {
  if (!expected) {
    expected = actual;
    return;
  }
  if (*expected != actual) {
    fail(ErrorCode::kSchema, where + ": \"" + key + "\" has length " + std::to_string(actual) +
                                 ", expected " + std::to_string(*expected));
  }
}

Entry parse_entry(const json& obj, const std::string& where, std::size_t line) {
  if (!obj.is_object()) fail(ErrorCode::kSchema, where + ": line is not a JSON object");
  Entry e;
  e.source_line = line;
  if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail(ErrorCode::kSchema, where + ": \"id\" must be a string");
    e.id = it->get<std::string>();
  }
  auto word = obj.find("word");
  if (word == obj.end() || !word->is_string()) {
    fail(ErrorCode::kSchema, where + ": \"word\" must be a string");
  }
  e.word = word->get<std::string>();
  if (e.word.empty()) fail(ErrorCode::kSchema, where + ": \"word\" is empty");
  if (auto it = obj.find("gloss"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail(ErrorCode::kSchema, where + ": \"gloss\" must be a string");
    e.gloss = it->get<std::string>();
  }
  if (auto it = obj.find("def_emb"); it != obj.end() && !it->is_null()) {
    e.def_emb = read_vector(*it, "def_emb", where);
  }
  if (auto it = obj.find("word_emb"); it != obj.end() && !it->is_null()) {
    e.word_emb = read_vector(*it, "word_emb", where);
  }
  return e;
}

}  // namespace

std::string Entry::locator() const {
  if (id) return "id " + *id;
  return "line " + std::to_string(source_line);
}

bool Dataset::is_trainable() const noexcept {
  for (const auto& e : entries) {
    if (!e.def_emb || !e.word_emb) return false;
  }
  return true;
}

Dataset parse_jsonl(std::string_view text, const std::string& source_tag,
                    std::optional<std::size_t> expected_d,
                    std::optional<std::size_t> expected_b) {
  Dataset ds;
  ds.d = expected_d;
  ds.b = expected_b;
  ds.source_tags.push_back(source_tag);

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = at_line(source_tag, line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& ex) {
      fail(ErrorCode::kParse, where + ": malformed JSON (" + ex.what() + ")");
    }
    Entry e = parse_entry(obj, where, line_no);
    if (e.def_emb) check_len(ds.d, e.def_emb->size(), "def_emb", where);
    if (e.word_emb) check_len(ds.b, e.word_emb->size(), "word_emb", where);
    ds.entries.push_back(std::move(e));
    if (end == text.size()) break;
  }
  if (ds.entries.empty()) fail(ErrorCode::kEmptyDataset, source_tag + ": no entries");
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path, std::optional<std::size_t> expected_d,
                   std::optional<std::size_t> expected_b) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open dataset: " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_jsonl(buf.str(), path.string(), expected_d, expected_b);
}

std::string to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& e : dataset.entries) {
    json obj = json::object();
    if (e.id) obj["id"] = *e.id;
    obj["word"] = e.word;
    obj["gloss"] = e.gloss;
    if (e.def_emb) obj["def_emb"] = *e.def_emb;
    if (e.word_emb) obj["word_emb"] = *e.word_emb;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  const std::string text = to_jsonl(dataset);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) fail(ErrorCode::kIo, "failed writing: " + path.string());
}

Dataset merge_datasets(std::span<const Dataset> parts) {
  if (parts.empty()) fail(ErrorCode::kEmptyDataset, "merge_datasets: no datasets given");
  Dataset out;
  std::string d_source;
  std::string b_source;
  auto name = [](const Dataset& ds) {
    std::string n;
    for (const auto& t : ds.source_tags) n += (n.empty() ? "" : "+") + t;
    return n.empty() ? std::string("<unnamed>") : n;
  };
  for (const Dataset& part : parts) {
    if (part.d) {
      if (out.d && *out.d != *part.d) {
        fail(ErrorCode::kSchema, "cannot merge " + name(part) + " (d=" + std::to_string(*part.d) +
                                     ") with " + d_source + " (d=" + std::to_string(*out.d) + ")");
      }
      if (!out.d) d_source = name(part);
      out.d = part.d;
    }
    if (part.b) {
      if (out.b && *out.b != *part.b) {
        fail(ErrorCode::kSchema, "cannot merge " + name(part) + " (b=" + std::to_string(*part.b) +
                                     ") with " + b_source + " (b=" + std::to_string(*out.b) + ")");
      }
      if (!out.b) b_source = name(part);
      out.b = part.b;
    }
  }
  for (const Dataset& part : parts) {
    out.entries.insert(out.entries.end(), part.entries.begin(), part.entries.end());
    out.source_tags.insert(out.source_tags.end(), part.source_tags.begin(),
                           part.source_tags.end());
  }
  return out;
}

bool Vocabulary::add(const std::string& word, std::vector<double> vec) {
  if (!vectors_.empty() && vec.size() != dim()) {
    fail(ErrorCode::kSchema, "vocabulary word \"" + word + "\" has vector length " +
                                 std::to_string(vec.size()) + ", expected " +
                                 std::to_string(dim()));
  }
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (!inserted) return false;
  words_.push_back(word);
  vectors_.push_back(std::move(vec));
  return true;
}

std::optional<std::size_t> Vocabulary::find(const std::string& word) const {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  return std::nullopt;
}

Vocabulary build_vocabulary(std::span<const Dataset> datasets) {
  std::size_t total = 0;
  for (const auto& ds : datasets) total += ds.size();
  if (total == 0) fail(ErrorCode::kEmptyDataset, "build_vocabulary: no entries");
  Vocabulary vocab;
  for (const auto& ds : datasets) {
    const std::string source = ds.source_tags.empty() ? "<dataset>" : ds.source_tags.front();
    for (const auto& e : ds.entries) {
      if (!e.word_emb) {
        fail(ErrorCode::kSchema,
             source + " " + e.locator() + ": entry \"" + e.word + "\" has no word_emb");
      }
      vocab.add(e.word, *e.word_emb);
    }
  }
  return vocab;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  const Dataset ds = load_jsonl(path);
  return build_vocabulary(std::span<const Dataset>(&ds, 1));
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed,
                                                 std::uint64_t epoch) {
  if (batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  const auto order = seeded_permutation(n, derive_seed(shuffle_seed, {epoch}));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace rdict
