#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "smforge/gateway.hpp"

using namespace smforge;
namespace fs = std::filesystem;

namespace {

CompletionRequest req(std::string text, double temperature = 0.01) {
  CompletionRequest r;
  r.model = "m";
  r.messages = {{Role::kUser, std::move(text)}};
  r.temperature = temperature;
  return r;
}

BackendPtr echo() {
  return std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
    return CompletionResponse{"echo:" + r.messages.back().content, Finish::kStop, {3, 4}};
  });
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("smforge_gw_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Local stub provider on an ephemeral port.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(".*", [handler](const httplib::Request& rq, httplib::Response& rs) { handler(rq, rs); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

LiveConfig stub_config(const StubServer& s, Provider p, std::vector<std::chrono::milliseconds>* slept) {
  LiveConfig cfg;
  cfg.provider = p;
  cfg.api_key = "k";
  cfg.base_url = s.url();
  cfg.timeout = std::chrono::seconds(5);
  cfg.retry.sleep = [slept](std::chrono::milliseconds d) { slept->push_back(d); };
  return cfg;
}

}  // namespace

TEST(Digest, StableAndSensitive) {
  const auto a = request_digest(req("hello"));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a, request_digest(req("hello")));
  EXPECT_NE(a, request_digest(req("hello", 0.5)));
  EXPECT_NE(a, request_digest(req("hello!")));
}

TEST(Request, Validation) {
  EXPECT_THROW(CompletionRequest{}.validate(), std::invalid_argument);
  auto r = req("x");
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(Replay, HitMissAndFifo) {
  std::vector<TranscriptEntry> entries;
  for (const char* text : {"first", "second"}) {
    auto r = req("same");
    entries.push_back({request_digest(r), r, {text, Finish::kStop, {}}, 0});
  }
  ReplayBackend replay(entries);
  EXPECT_EQ(replay.complete(req("same")).content, "first");
  EXPECT_EQ(replay.complete(req("same")).content, "second");
  EXPECT_EQ(replay.remaining(), 0u);
  EXPECT_THROW(replay.complete(req("same")), ReplayMiss);
  EXPECT_THROW(replay.complete(req("other")), ReplayMiss);
}

TEST(Record, RecordThenReplay) {
  const auto dir = temp_dir("record");
  const auto path = dir / "t.jsonl";
  {
    auto rec = record_wrap(echo(), path);
    for (const char* t : {"a", "b", "c"}) rec->complete(req(t));
    EXPECT_EQ(rec->entries().size(), 3u);
  }
  auto entries = read_transcript(path);
  ASSERT_EQ(entries.size(), 3u);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  auto j = nlohmann::json::parse(line);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"digest", "ms", "request", "response"}));

  auto replay = ReplayBackend::from_file(path);
  EXPECT_EQ(replay->complete(req("b")).content, "echo:b");
  EXPECT_EQ(replay->complete(req("a")).content, "echo:a");
}

TEST(Record, ConcurrentRecordersKeepSeparateFiles) {
  const auto dir = temp_dir("concurrent");
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      auto rec = record_wrap(echo(), dir / (std::to_string(t) + ".jsonl"));
      for (int i = 0; i < 20; ++i) rec->complete(req(std::to_string(t) + "/" + std::to_string(i)));
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 4; ++t) {
    auto entries = read_transcript(dir / (std::to_string(t) + ".jsonl"));
    ASSERT_EQ(entries.size(), 20u);
    for (int i = 0; i < 20; ++i) {
      EXPECT_EQ(entries[i].request.messages[0].content, std::to_string(t) + "/" + std::to_string(i));
    }
  }
}

TEST(Transcript, MalformedLineRejected) {
  EXPECT_THROW(parse_transcript("{\"digest\": 1}\n"), TranscriptError);
  EXPECT_TRUE(parse_transcript("\n").empty());
}

TEST(Profiles, DefaultsAndOverrides) {
  SamplingConfig cfg;
  EXPECT_DOUBLE_EQ(profile(Profile::kDeterministic), 0.01);
  EXPECT_DOUBLE_EQ(profile(Profile::kCreative), 0.5);
  EXPECT_EQ(cfg.max_tokens, 1500);
  cfg.apply_overrides("# tuned\ncreative = 0.7\nmax_tokens = 800\n");
  EXPECT_DOUBLE_EQ(cfg.temperature(Profile::kCreative), 0.7);
  EXPECT_DOUBLE_EQ(cfg.temperature(Profile::kDeterministic), 0.01);
  EXPECT_EQ(cfg.max_tokens, 800);
  EXPECT_THROW(cfg.apply_overrides("top_p = 1"), std::invalid_argument);
  EXPECT_THROW(cfg.apply_overrides("creative = hot"), std::invalid_argument);
}

TEST(Env, MissingKeyIsAuthError) {
  ::unsetenv("SMFORGE_ANTHROPIC_KEY");
  EXPECT_THROW(live_config_from_env(Provider::kAnthropic), AuthError);
}

TEST(WireFormat, AnthropicSplitsSystem) {
  CompletionRequest r = req("hi");
  r.messages.insert(r.messages.begin(), {Role::kSystem, "be brief"});
  auto body = HttpBackend::encode(Provider::kAnthropic, r);
  EXPECT_EQ(body["system"], "be brief");
  EXPECT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["max_tokens"], 1500);
  auto resp = HttpBackend::decode(
      Provider::kAnthropic,
      nlohmann::json::parse(R"({"content":[{"type":"text","text":"ok"}],"stop_reason":"max_tokens"})"));
  EXPECT_TRUE(resp.truncated());
  EXPECT_THROW(HttpBackend::decode(Provider::kOpenAI, nlohmann::json::object()), ProviderError);
}

TEST(Http, TruncationFlagFromStub) {
  std::string seen_path, seen_auth;
  StubServer server([&](const httplib::Request& rq, httplib::Response& rs) {
    seen_path = rq.path;
    seen_auth = rq.get_header_value("Authorization");
    rs.set_content(
        R"({"choices":[{"message":{"content":"partial"},"finish_reason":"length"}],)"
        R"("usage":{"prompt_tokens":5,"completion_tokens":1500}})",
        "application/json");
  });
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend backend(stub_config(server, Provider::kOpenAI, &slept));
  auto resp = backend.complete(req("x"));
  EXPECT_EQ(resp.content, "partial");
  EXPECT_TRUE(resp.truncated());
  EXPECT_EQ(resp.usage.completion_tokens, 1500);
  EXPECT_EQ(seen_path, "/v1/chat/completions");
  EXPECT_EQ(seen_auth, "Bearer k");
}

TEST(Http, RetriesRateLimitWithBackoff) {
  std::atomic<int> calls = 0;
  StubServer server([&](const httplib::Request&, httplib::Response& rs) {
    if (++calls <= 2) {
      rs.status = 429;
      return;
    }
    rs.set_content(R"({"content":[{"type":"text","text":"fine"}],"stop_reason":"end_turn"})",
                   "application/json");
  });
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend backend(stub_config(server, Provider::kAnthropic, &slept));
  EXPECT_EQ(backend.complete(req("x")).content, "fine");
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{std::chrono::seconds(1),
                                                          std::chrono::seconds(4)}));
}

TEST(Http, GivesUpAfterThreeRetries) {
  std::atomic<int> calls = 0;
  StubServer server([&](const httplib::Request&, httplib::Response& rs) {
    ++calls;
    rs.status = 429;
  });
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend backend(stub_config(server, Provider::kOpenAI, &slept));
  EXPECT_THROW(backend.complete(req("x")), RateLimited);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(slept.size(), 3u);
  EXPECT_EQ(slept.back(), std::chrono::seconds(16));
}

TEST(Http, UnauthorizedIsNotRetried) {
  std::atomic<int> calls = 0;
  StubServer server([&](const httplib::Request&, httplib::Response& rs) {
    ++calls;
    rs.status = 401;
  });
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend backend(stub_config(server, Provider::kOpenAI, &slept));
  EXPECT_THROW(backend.complete(req("x")), AuthError);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(slept.empty());
}

TEST(Http, BaseUrlPrefixIsKept) {
  std::string seen_path;
  StubServer server([&](const httplib::Request& rq, httplib::Response& rs) {
    seen_path = rq.path;
    rs.set_content(R"({"choices":[{"message":{"content":"x"},"finish_reason":"stop"}]})",
                   "application/json");
  });
  std::vector<std::chrono::milliseconds> slept;
  auto cfg = stub_config(server, Provider::kOpenAI, &slept);
  cfg.base_url += "/proxy/";
  HttpBackend(cfg).complete(req("x"));
  EXPECT_EQ(seen_path, "/proxy/v1/chat/completions");
}
