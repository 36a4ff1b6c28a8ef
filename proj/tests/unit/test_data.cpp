#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "rdict/data.hpp"
#include "rdict/error.hpp"
#include "test_support.hpp"

using namespace rdict;
using rdict::testing::TempDir;

namespace {

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  return Error(ErrorCode::kInternal, "no error");
}

}  // namespace

TEST(Jsonl, ParsesEntriesAndInfersDimensions) {
  const auto ds = parse_jsonl(
      "{\"id\":\"a\",\"word\":\"قلم\",\"gloss\":\"أداة\",\"def_emb\":[1,2,3],\"word_emb\":[4,5]}\n"
      "\n"
      "{\"word\":\"x\",\"def_emb\":[0,0,1]}\n",
      "mem");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.d, 3u);
  EXPECT_EQ(ds.b, 2u);
  EXPECT_EQ(ds.entries[0].id, "a");
  EXPECT_EQ(ds.entries[0].word, "قلم");
  EXPECT_EQ(ds.entries[1].source_line, 3u);
  EXPECT_EQ(ds.entries[1].locator(), "line 3");
  EXPECT_EQ(ds.entries[0].locator(), "id a");
  EXPECT_FALSE(ds.is_trainable());
}

TEST(Jsonl, MalformedLineReportsLineNumber) {
  const auto e = error_of([] { parse_jsonl("{\"word\":\"a\"}\n{oops\n", "f.jsonl"); });
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_NE(std::string(e.what()).find("f.jsonl:2"), std::string::npos) << e.what();
}

TEST(Jsonl, SchemaViolations) {
  auto code = [](const char* text) { return error_of([&] { parse_jsonl(text, "t"); }).code(); };
  EXPECT_EQ(code("{\"gloss\":\"no word\"}"), ErrorCode::kSchema);
  EXPECT_EQ(code("{\"word\":\"\"}"), ErrorCode::kSchema);
  EXPECT_EQ(code("{\"word\":3}"), ErrorCode::kSchema);
  EXPECT_EQ(code("[1,2]"), ErrorCode::kSchema);
  EXPECT_EQ(code("{\"word\":\"a\",\"def_emb\":[1,\"x\"]}"), ErrorCode::kSchema);
  EXPECT_EQ(code("{\"word\":\"a\",\"def_emb\":5}"), ErrorCode::kSchema);
}

TEST(Jsonl, DimensionMismatchNamesLine) {
  const auto e = error_of([] {
    parse_jsonl("{\"word\":\"a\",\"def_emb\":[1,2]}\n{\"word\":\"b\",\"def_emb\":[1,2,3]}\n", "t");
  });
  EXPECT_EQ(e.code(), ErrorCode::kSchema);
  EXPECT_NE(std::string(e.what()).find("t:2"), std::string::npos) << e.what();

  const auto expected = error_of([] { parse_jsonl("{\"word\":\"a\",\"word_emb\":[1,2]}", "t", {}, 3); });
  EXPECT_EQ(expected.code(), ErrorCode::kSchema);
}

TEST(Jsonl, EmptyInputs) {
  EXPECT_EQ(error_of([] { parse_jsonl("", "t"); }).code(), ErrorCode::kEmptyDataset);
  EXPECT_EQ(error_of([] { parse_jsonl("\n  \n", "t"); }).code(), ErrorCode::kEmptyDataset);
  EXPECT_EQ(error_of([] { load_jsonl("/nonexistent/file.jsonl"); }).code(), ErrorCode::kIo);
}

TEST(Jsonl, CrlfAndMissingTrailingNewline) {
  const auto ds = parse_jsonl("{\"word\":\"a\"}\r\n{\"word\":\"b\"}", "t");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.entries[1].word, "b");
}

TEST(Jsonl, RoundTripThroughFile) {
  TempDir dir("data");
  std::mt19937_64 rng(3);
  Dataset ds = rdict::testing::random_dataset(rng, 20, 7, 5);
  ds.entries[3].gloss = "نص عربي مع \"اقتباس\"";
  save_jsonl(ds, dir / "d.jsonl");
  const auto back = load_jsonl(dir / "d.jsonl");
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back.entries[i], ds.entries[i]);
  EXPECT_EQ(back.d, 7u);
  EXPECT_EQ(back.b, 5u);
}

TEST(Merge, ConcatenatesInOrder) {
  const auto a = parse_jsonl("{\"word\":\"a\",\"def_emb\":[1,2]}", "A");
  const auto b = parse_jsonl("{\"word\":\"b\",\"word_emb\":[1]}\n{\"word\":\"c\"}", "B");
  const std::vector<Dataset> parts{a, b};
  const auto m = merge_datasets(parts);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.entries[0].word, "a");
  EXPECT_EQ(m.entries[2].word, "c");
  EXPECT_EQ(m.d, 2u);
  EXPECT_EQ(m.b, 1u);
  EXPECT_EQ(m.source_tags, (std::vector<std::string>{"A", "B"}));
}

TEST(Merge, DimensionConflictNamesBothSources) {
  const auto a = parse_jsonl("{\"word\":\"a\",\"def_emb\":[1,2]}", "first.jsonl");
  const auto b = parse_jsonl("{\"word\":\"b\",\"def_emb\":[1,2,3]}", "second.jsonl");
  const std::vector<Dataset> parts{a, b};
  const auto e = error_of([&] { merge_datasets(parts); });
  EXPECT_EQ(e.code(), ErrorCode::kSchema);
  const std::string msg = e.what();
  EXPECT_NE(msg.find("first.jsonl"), std::string::npos) << msg;
  EXPECT_NE(msg.find("second.jsonl"), std::string::npos) << msg;
  EXPECT_EQ(error_of([] { merge_datasets({}); }).code(), ErrorCode::kEmptyDataset);
}

TEST(Vocabulary, FirstOccurrenceWins) {
  const auto a = parse_jsonl(
      "{\"word\":\"x\",\"word_emb\":[1,0]}\n{\"word\":\"y\",\"word_emb\":[0,1]}\n"
      "{\"word\":\"x\",\"word_emb\":[5,5]}",
      "A");
  const std::vector<Dataset> parts{a};
  const auto v = build_vocabulary(parts);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.word(0), "x");
  EXPECT_EQ(v.vector(0), (std::vector<double>{1, 0}));
  EXPECT_EQ(v.find("y"), 1u);
  EXPECT_FALSE(v.find("z").has_value());
  EXPECT_EQ(v.dim(), 2u);
}

TEST(Vocabulary, MissingVectorIsSchemaError) {
  const auto a = parse_jsonl("{\"id\":\"e7\",\"word\":\"x\"}", "A");
  const std::vector<Dataset> parts{a};
  const auto e = error_of([&] { build_vocabulary(parts); });
  EXPECT_EQ(e.code(), ErrorCode::kSchema);
  EXPECT_NE(std::string(e.what()).find("e7"), std::string::npos);
  EXPECT_EQ(error_of([] { build_vocabulary({}); }).code(), ErrorCode::kEmptyDataset);
}

TEST(Batching, PermutationIsSeededAndComplete) {
  const auto p = seeded_permutation(100, 5);
  const auto q = seeded_permutation(100, 5);
  const auto r = seeded_permutation(100, 6);
  EXPECT_EQ(p, q);
  EXPECT_NE(p, r);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Batching, CoversEveryIndexOnceWithShortTail) {
  const auto batches = batch_iter(23, 5, 9, 1);
  ASSERT_EQ(batches.size(), 5u);
  EXPECT_EQ(batches.back().size(), 3u);
  std::multiset<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 23u);
  for (std::size_t i = 0; i < 23; ++i) EXPECT_EQ(seen.count(i), 1u);
}

TEST(Batching, EpochChangesOrderSeedFixesIt) {
  EXPECT_EQ(batch_iter(50, 8, 1, 3), batch_iter(50, 8, 1, 3));
  EXPECT_NE(batch_iter(50, 8, 1, 3), batch_iter(50, 8, 1, 4));
  EXPECT_EQ(error_of([] { batch_iter(5, 0, 1, 1); }).code(), ErrorCode::kInvalidArgument);
  EXPECT_TRUE(batch_iter(0, 4, 1, 1).empty());
}
