#include <gtest/gtest.h>

#include <thread>

#include "rdict/error.hpp"
#include "rdict/service.hpp"
#include "service_fixture.hpp"

using namespace rdict;
using nlohmann::json;
using rdict::testing::ServiceFiles;
using rdict::testing::StubBridge;

namespace {

ServiceConfig config_for(const ServiceFiles& f) {
  ServiceConfig cfg;
  cfg.checkpoint_path = f.checkpoint.string();
  cfg.vocab_path = f.vocab.string();
  cfg.max_k = 20;
  cfg.bridge_timeout = std::chrono::milliseconds(2000);
  return cfg;
}

std::string query_body(std::size_t len, int k = -1, double fill = 0.25) {
  json j;
  std::vector<double> v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = fill + 0.1 * static_cast<double>(i % 5);
  j["embedding"] = v;
  if (k >= 0) j["k"] = k;
  return j.dump();
}

class RunningServer {
 public:
  explicit RunningServer(std::shared_ptr<const Service> svc) : http_(std::move(svc)) {
    http_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { http_.run(); });
    for (int i = 0; i < 200 && !http_.running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  ~RunningServer() {
    http_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", http_.port());
    c.set_read_timeout(10, 0);
    return c;
  }
  int port() const { return http_.port(); }

 private:
  HttpServer http_;
  std::thread thread_;
};

}  // namespace

TEST(Service, Health) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto r = svc->health();
  EXPECT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["dim_in"], 12);
  EXPECT_EQ(j["dim_out"], 8);
  EXPECT_EQ(j["vocab_size"], 30);
  EXPECT_EQ(j["max_k"], 20);
  EXPECT_EQ(j["version"], kVersion);
}

TEST(Service, QueryReturnsKSortedResults) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto r = svc->query(query_body(12, 10));
  ASSERT_EQ(r.status, 200) << r.body;
  const auto results = json::parse(r.body)["results"];
  ASSERT_EQ(results.size(), 10u);
  for (std::size_t i = 1; i < results.size(); ++i) {
    EXPECT_GE(results[i - 1]["similarity"].get<double>(), results[i]["similarity"].get<double>());
  }
  // Identical bodies, identical answers.
  EXPECT_EQ(svc->query(query_body(12, 10)).body, r.body);
}

TEST(Service, QueryMatchesDirectSearch) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto body = json::parse(query_body(12, 5));
  const auto vec = body["embedding"].get<std::vector<double>>();
  const auto expected = svc->search(vec, 5);
  const auto results = json::parse(svc->query(body.dump()).body)["results"];
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(results[i]["word"], expected[i].word);
}

TEST(Service, QueryDefaultK) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  EXPECT_EQ(json::parse(svc->query(query_body(12)).body)["results"].size(), 10u);
}

TEST(Service, QueryBadRequests) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto short_vec = svc->query(query_body(11, 3));
  EXPECT_EQ(short_vec.status, 400);
  EXPECT_NE(short_vec.body.find("dimension"), std::string::npos) << short_vec.body;
  for (const std::string body :
       {std::string("{"), std::string("[]"), std::string("{\"k\":3}"),
        std::string("{\"embedding\":\"x\"}"), std::string("{\"embedding\":[1,\"a\"]}"),
        query_body(12, 0), query_body(12, 21), std::string("{\"embedding\":[1],\"k\":2.5}")}) {
    const auto r = svc->query(body);
    EXPECT_EQ(r.status, 400) << body;
    const auto j = json::parse(r.body);
    EXPECT_TRUE(j.contains("error"));
    EXPECT_TRUE(j.contains("message"));
  }
}

TEST(Service, QueryTextWithoutBridgeIs503) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto r = svc->query_text(R"({"text":"أداة للكتابة","k":3})");
  EXPECT_EQ(r.status, 503);
  EXPECT_NE(r.body.find("bridge"), std::string::npos);
}

TEST(Service, QueryTextCallsBridgeEmbed) {
  ServiceFiles f;
  StubBridge bridge(12);
  auto cfg = config_for(f);
  cfg.bridge_url = bridge.url();
  const auto svc = Service::load(cfg);
  const std::string text = "أداة للكتابة";
  const auto r = svc->query_text(json{{"text", text}, {"k", 4}}.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(bridge.calls(), 1);
  EXPECT_EQ(bridge.last_text(), text);
  // Same answer as /query with the vector the bridge produced.
  std::vector<double> v(12);
  for (std::size_t i = 0; i < 12; ++i) v[i] = std::sin(static_cast<double>(text.size() + i));
  EXPECT_EQ(r.body, svc->query(json{{"embedding", v}, {"k", 4}}.dump()).body);
}

TEST(Service, QueryTextHonoursBridgePathPrefix) {
  ServiceFiles f;
  StubBridge bridge(12, "/bridge/v1");
  auto cfg = config_for(f);
  cfg.bridge_url = bridge.url() + "/bridge/v1/";
  const auto svc = Service::load(cfg);
  EXPECT_EQ(svc->query_text(R"({"text":"x"})").status, 200);
}

TEST(Service, QueryTextBridgeDimensionMismatchIs502) {
  ServiceFiles f;
  StubBridge bridge(7);
  auto cfg = config_for(f);
  cfg.bridge_url = bridge.url();
  const auto svc = Service::load(cfg);
  EXPECT_EQ(svc->query_text(R"({"text":"x"})").status, 502);
}

TEST(Service, QueryTextUnreachableBridgeIs503) {
  ServiceFiles f;
  auto cfg = config_for(f);
  cfg.bridge_url = "http://127.0.0.1:" + std::to_string(rdict::testing::closed_port());
  const auto svc = Service::load(cfg);
  const auto r = svc->query_text(R"({"text":"x"})");
  EXPECT_EQ(r.status, 503);
  EXPECT_FALSE(json::parse(r.body)["message"].get<std::string>().empty());
}

TEST(Service, QueryTextBadRequests) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  EXPECT_EQ(svc->query_text("nope").status, 400);
  EXPECT_EQ(svc->query_text(R"({"text":3})").status, 400);
  EXPECT_EQ(svc->query_text(R"({"text":""})").status, 400);
  EXPECT_EQ(svc->query_text(R"({"text":"x","k":-1})").status, 400);
}

TEST(Service, Lint) {
  ServiceFiles f;
  const auto svc = Service::load(config_for(f));
  const auto r = svc->lint(json{{"word", "شجاع"}, {"gloss", "جريء، مقدام"}}.dump());
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["word"], "شجاع");
  EXPECT_EQ(j["flags"][0]["rule"], "S7");
  EXPECT_EQ(j["score"], 4);

  const auto skipped = json::parse(svc->lint(R"({"word":"x","gloss":""})").body);
  EXPECT_EQ(skipped["skipped"], true);

  EXPECT_EQ(svc->lint("{").status, 400);
  EXPECT_EQ(svc->lint(R"({"gloss":"x"})").status, 400);
  EXPECT_EQ(svc->lint(R"({"word":"x"})").status, 400);
  EXPECT_EQ(svc->lint(R"({"word":"","gloss":"x"})").status, 400);
}

TEST(Service, DegenerateModelOutputIs422) {
  ServiceFiles f;
  SemiEncoder zero = load_checkpoint(f.checkpoint);
  for (auto& l : zero.layers()) {
    for (auto& w : l.weight.values()) w = 0.0;
    for (auto& b : l.bias) b = 0.0;
  }
  const Service svc(zero, RetrievalIndex(load_vocabulary(f.vocab)), config_for(f));
  EXPECT_EQ(svc.query(query_body(12, 3)).status, 422);
}

TEST(Service, StartupChecks) {
  ServiceFiles f;
  auto cfg = config_for(f);
  cfg.max_k = 0;
  EXPECT_THROW(Service::load(cfg), Error);
  cfg = config_for(f);
  cfg.checkpoint_path = (f.dir / "missing.bin").string();
  EXPECT_THROW(Service::load(cfg), Error);

  // Vocabulary vectors must match the model output width.
  std::mt19937_64 rng(1);
  const auto wrong = f.dir / "wrong.jsonl";
  save_jsonl(rdict::testing::random_dataset(rng, 5, 12, 9), wrong);
  cfg = config_for(f);
  cfg.vocab_path = wrong.string();
  try {
    Service::load(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Http, EndpointsOverTheWire) {
  ServiceFiles f;
  RunningServer server(Service::load(config_for(f)));
  auto c = server.client();

  auto health = c.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["vocab_size"], 30);

  auto q = c.Post("/query", query_body(12, 7), "application/json");
  ASSERT_TRUE(q);
  EXPECT_EQ(q->status, 200);
  EXPECT_EQ(json::parse(q->body)["results"].size(), 7u);
  EXPECT_EQ(q->get_header_value("Content-Type"), "application/json");

  auto bad = c.Post("/query", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto lint = c.Post("/lint", json{{"word", "كتب"}, {"gloss", "خط الحروف، يقال: كتب الرسالة"}}.dump(),
                     "application/json");
  ASSERT_TRUE(lint);
  EXPECT_EQ(lint->status, 200);
  EXPECT_EQ(json::parse(lint->body)["flags"][0]["rule"], "S8");

  auto text = c.Post("/query_text", R"({"text":"x"})", "application/json");
  ASSERT_TRUE(text);
  EXPECT_EQ(text->status, 503);

  auto missing = c.Get("/nothing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST(Http, ConcurrentQueriesAgree) {
  ServiceFiles f;
  RunningServer server(Service::load(config_for(f)));
  const std::string body = query_body(12, 5);
  const std::string expected = server.client().Post("/query", body, "application/json")->body;
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      auto c = server.client();
      for (int i = 0; i < 10; ++i) {
        auto r = c.Post("/query", body, "application/json");
        if (!r || r->body != expected) ++mismatches;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(Http, BusyPortFailsAtBind) {
  ServiceFiles f;
  RunningServer first(Service::load(config_for(f)));
  HttpServer second(Service::load(config_for(f)));
  try {
    second.bind("127.0.0.1", first.port());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Http, ServiceDoesNotModifyItsFiles) {
  ServiceFiles f;
  const auto before_ckpt = std::filesystem::last_write_time(f.checkpoint);
  const auto before_size = std::filesystem::file_size(f.vocab);
  {
    RunningServer server(Service::load(config_for(f)));
    server.client().Post("/query", query_body(12, 3), "application/json");
  }
  EXPECT_EQ(std::filesystem::last_write_time(f.checkpoint), before_ckpt);
  EXPECT_EQ(std::filesystem::file_size(f.vocab), before_size);
}
