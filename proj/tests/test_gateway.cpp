#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"

using namespace copkit;

namespace {

/// Fails with TransportError for the first `failures` calls.
class FlakyProvider : public Provider {
 public:
  explicit FlakyProvider(int failures, ErrorCode code = ErrorCode::kTransportError)
      : failures_(failures), code_(code) {}
  std::string id() const override { return "flaky"; }
  ModelResponse complete(const ModelRequest& r) override {
    if (calls_++ < failures_) throw Error(code_, "simulated");
    return {"ok:" + r.instruction, {3, 1}, "flaky", false};
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  ErrorCode code_;
  std::atomic<int> calls_{0};
};

/// Tracks peak concurrency.
class SlowProvider : public Provider {
 public:
  std::string id() const override { return "slow"; }
  ModelResponse complete(const ModelRequest&) override {
    const int now = ++active_;
    int prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --active_;
    return {"done", {1, 1}, "slow", false};
  }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

GatewayOptions fast_options() {
  GatewayOptions o;
  o.initial_backoff = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST(Scripted, RulesAndDeterminism) {
  ScriptedProvider p;
  p.when_contains("next step", "step_2: X").set_default("fallback");
  ModelRequest r{"what is the next step?", {}, {}};
  const auto a = p.complete(r);
  const auto b = p.complete(r);
  EXPECT_EQ(a.text, "step_2: X");
  EXPECT_EQ(a, b);
  EXPECT_EQ(p.complete({"other", {}, {}}).text, "fallback");
  EXPECT_EQ(p.calls(), 3);
}

TEST(Scripted, SynthesizedUsageCountsWhitespaceTokens) {
  ScriptedProvider p("s", "one two three");
  auto r = p.complete({"a b c d", {"img1", "img2"}, {}});
  EXPECT_EQ(r.usage.input_tokens, 6);
  EXPECT_EQ(r.usage.output_tokens, 3);
}

TEST(Scripted, FromJson) {
  auto p = ScriptedProvider::from_json(json::parse(R"({
    "id": "s1", "default": "?",
    "rules": [{"image": "img-9", "text": "nine"}, {"regex": "step_[0-9]+", "text": "labelled"},
              {"contains": "hood", "text": "hood!"}]})"));
  EXPECT_EQ(p->id(), "s1");
  EXPECT_EQ(p->complete({"x", {"img-9"}, {}}).text, "nine");
  EXPECT_EQ(p->complete({"see step_3", {}, {}}).text, "labelled");
  EXPECT_EQ(p->complete({"open hood", {}, {}}).text, "hood!");
  EXPECT_EQ(p->complete({"zzz", {}, {}}).text, "?");
  EXPECT_THROW(ScriptedProvider::from_json(json::parse(R"({"rules":[{"text":"t"}]})")), Error);
}

TEST(Gateway, RetriesTransportErrorsThenSucceeds) {
  auto flaky = std::make_shared<FlakyProvider>(2);
  Gateway g(flaky, fast_options());
  EXPECT_EQ(g.complete({"hi", {}, {}}).text, "ok:hi");
  EXPECT_EQ(flaky->calls(), 3);
  EXPECT_EQ(g.attempts(), 3);
  EXPECT_EQ(g.requests(), 1);
}

TEST(Gateway, GivesUpAfterMaxAttempts) {
  auto flaky = std::make_shared<FlakyProvider>(5);
  Gateway g(flaky, fast_options());
  try {
    g.complete({"hi", {}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransportError);
  }
  EXPECT_EQ(flaky->calls(), 3);
}

TEST(Gateway, RefusalIsNotRetried) {
  auto flaky = std::make_shared<FlakyProvider>(5, ErrorCode::kProviderRefusal);
  Gateway g(flaky, fast_options());
  EXPECT_THROW(g.complete({"hi", {}, {}}), Error);
  EXPECT_EQ(flaky->calls(), 1);
}

TEST(Gateway, ValidatesRequests) {
  Gateway g(std::make_shared<ScriptedProvider>(), fast_options());
  EXPECT_THROW(g.complete({"  ", {}, {}}), Error);
  ModelRequest hot{"x", {}, {}};
  hot.decoding.temperature = -1;
  EXPECT_THROW(g.complete(hot), Error);
}

TEST(Gateway, TokenCeiling) {
  auto o = fast_options();
  o.token_ceiling = 10;
  Gateway g(std::make_shared<ScriptedProvider>("s", "a b"), o);
  g.complete({"one two three", {}, {}});  // 3 in + 2 out = 5
  try {
    g.complete({"four five six seven eight nine", {}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
  }
  EXPECT_EQ(g.tokens_used(), 5);
}

TEST(Gateway, BoundsInFlightRequests) {
  auto slow = std::make_shared<SlowProvider>();
  auto o = fast_options();
  o.max_in_flight = 2;
  Gateway g(slow, o);
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { g.complete({"x", {}, {}}); });
  }
  EXPECT_LE(slow->peak(), 2);
  EXPECT_EQ(g.requests(), 8);
}

TEST(Cache, HitAfterMissWithZeroInnerCalls) {
  fixtures::TempDir dir("cache");
  auto inner = std::make_shared<ScriptedProvider>("s", "answer");
  CachingProvider cache(inner, dir.path());
  ModelRequest r{"question", {"img"}, {}};
  const auto first = cache.complete(r);
  const auto second = cache.complete(r);
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.text, second.text);
  EXPECT_EQ(first.usage, second.usage);
  EXPECT_EQ(inner->calls(), 1);
  EXPECT_EQ(cache.hits(), 1);
  EXPECT_TRUE(std::filesystem::exists(dir / (cache_key("s", r) + ".json")));
}

TEST(Cache, CorruptEntryIsRefetchedAndRewritten) {
  fixtures::TempDir dir("cache");
  auto inner = std::make_shared<ScriptedProvider>("s", "answer");
  ModelRequest r{"question", {}, {}};
  const auto file = dir / (cache_key("s", r) + ".json");
  io::write_atomic(file, "{not json");
  CachingProvider cache(inner, dir.path());
  EXPECT_EQ(cache.complete(r).text, "answer");
  EXPECT_EQ(inner->calls(), 1);
  EXPECT_NO_THROW(json::parse(io::read_file(file)));
  EXPECT_TRUE(cache.complete(r).cached);
}

TEST(Cache, KeyDependsOnProviderAndDecoding) {
  ModelRequest r{"q", {"i"}, {}};
  EXPECT_NE(cache_key("a", r), cache_key("b", r));
  ModelRequest r2 = r;
  r2.decoding.max_output_tokens = 7;
  EXPECT_NE(cache_key("a", r), cache_key("a", r2));
  ModelRequest r3 = r;
  r3.image_ids = {"j"};
  EXPECT_NE(cache_key("a", r), cache_key("a", r3));
  EXPECT_EQ(cache_key("a", r), cache_key("a", ModelRequest{"q", {"i"}, {}}));
}

TEST(Cache, UncreatableDirectoryIsCacheIoError) {
  fixtures::TempDir dir("cache");
  io::write_atomic(dir / "file", "x");
  try {
    CachingProvider cache(std::make_shared<ScriptedProvider>(), dir / "file" / "sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheIoError);
  }
}

class HttpProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int n = hits_++;
      if (mode_ == "flaky" && n == 0) {
        res.status = 503;
        return;
      }
      if (mode_ == "unauthorized") {
        res.status = 401;
        return;
      }
      if (mode_ == "refusal") {
        res.set_content(R"({"choices":[{"message":{"refusal":"cannot help"},"finish_reason":"stop"}]})",
                        "application/json");
        return;
      }
      res.set_content(
          R"({"choices":[{"message":{"content":"step_2: Open the hood"},"finish_reason":"stop"}],)"
          R"("usage":{"prompt_tokens":120,"completion_tokens":6}})",
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    io::write_atomic(images_ / "img-1.png", "\x89PNG fake");
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::shared_ptr<HttpProvider> provider() {
    HttpProviderConfig c;
    c.id = "local-vlm";
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.model = "test-model";
    c.image_root = images_.path();
    c.api_key = "secret";
    c.timeout_seconds = 5;
    return std::make_shared<HttpProvider>(c);
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string mode_ = "ok";
  std::string last_body_;
  std::string last_auth_;
  fixtures::TempDir images_{"images"};
};

TEST_F(HttpProviderTest, SendsOpenAiShapedRequestAndParsesUsage) {
  auto p = provider();
  ModelRequest r{"predict", {"img-1"}, {}};
  const ModelResponse resp = p->complete(r);
  EXPECT_EQ(resp.text, "step_2: Open the hood");
  EXPECT_EQ(resp.usage.input_tokens, 120);
  EXPECT_EQ(resp.usage.output_tokens, 6);
  EXPECT_EQ(last_auth_, "Bearer secret");
  const json body = json::parse(last_body_);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0.0);
  const auto& content = body["messages"][0]["content"];
  ASSERT_EQ(content.size(), 2u);
  EXPECT_EQ(content[0]["text"], "predict");
  const std::string url = content[1]["image_url"]["url"];
  EXPECT_EQ(url, "data:image/png;base64," + io::base64_encode("\x89PNG fake"));
}

TEST_F(HttpProviderTest, ServerErrorIsRetriedByGateway) {
  mode_ = "flaky";
  Gateway g(provider(), fast_options());
  EXPECT_EQ(g.complete({"predict", {}, {}}).text, "step_2: Open the hood");
  EXPECT_EQ(g.attempts(), 2);
}

TEST_F(HttpProviderTest, UnauthorizedIsConfigError) {
  mode_ = "unauthorized";
  try {
    provider()->complete({"predict", {}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST_F(HttpProviderTest, RefusalIsProviderRefusal) {
  mode_ = "refusal";
  try {
    provider()->complete({"predict", {}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderRefusal);
  }
}

TEST_F(HttpProviderTest, MissingImageIsIoError) {
  try {
    provider()->complete({"predict", {"nope"}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(HttpProviderConfigTest, ApiKeyFromEnvironment) {
  EXPECT_EQ(api_key_variable("my-vlm.v2"), "COPKIT_API_KEY_MY_VLM_V2");
  HttpProviderConfig c{"envtest", "http://127.0.0.1:1", "/v1/chat/completions", "m", ".", 1, ""};
  EXPECT_NO_THROW(HttpProvider{c});
  c.model.clear();
  EXPECT_THROW(HttpProvider{c}, Error);
}

TEST(Usage, ReportAggregatesPhases) {
  RunResult a, b;
  a.instance_id = "a";
  b.instance_id = "b";
  PhaseRecord r1;
  r1.phase = "phase1";
  r1.usage = {10, 2};
  PhaseRecord r2 = r1;
  r2.phase = "phase3";
  r2.usage = {20, 4};
  a.trace.records = {r1, r2};
  b.trace.records = {r1};
  const UsageReport u = usage_report(std::vector<RunResult>{a, b});
  EXPECT_EQ(u.instances, 2u);
  EXPECT_EQ(u.totals.total(), 48);
  EXPECT_DOUBLE_EQ(u.per_instance_mean_tokens, 24.0);
  EXPECT_EQ(u.per_phase.at("phase1").input_tokens, 20);
}
