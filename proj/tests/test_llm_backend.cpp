#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "llmnas/error.hpp"
#include "llmnas/llm_backend.hpp"
#include "llmnas/space.hpp"
#include "oracles.hpp"

using namespace llmnas;

namespace {

ChatRequest req(std::string channel, std::string text = "hi") {
  ChatRequest r;
  r.messages = {{Role::system, "sys"}, {Role::user, std::move(text)}};
  r.channel = std::move(channel);
  return r;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::EmptyInput;
}

/// Local chat-completions stub. The handler sees every request body.
class Stub {
 public:
  explicit Stub(httplib::Server::Handler handler) {
    svr_.Post("/v1/chat/completions", std::move(handler));
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  ~Stub() {
    svr_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

RetryPolicy no_sleep(int attempts, std::vector<long>* slept = nullptr) {
  RetryPolicy p;
  p.attempts = attempts;
  p.sleep = [slept](std::chrono::milliseconds d) {
    if (slept) slept->push_back(d.count());
  };
  return p;
}

}  // namespace

TEST(Thinking, Strip) {
  EXPECT_EQ(strip_thinking("<think>plan</think>answer"), "answer");
  EXPECT_EQ(strip_thinking("a<think>x</think>b<think>y</think>c"), "abc");
  EXPECT_EQ(strip_thinking("reasoning only</think>\n final"), "final");
  EXPECT_EQ(strip_thinking("answer<think>never closed"), "answer");
  EXPECT_EQ(strip_thinking("  plain  "), "plain");
  EXPECT_EQ(strip_thinking("[[r]]x[[/r]]y", "[[r]]", "[[/r]]"), "y");
}

TEST(Scripted, QueueOrderAndExhaustion) {
  ScriptedBackend b({"one", "two"});
  EXPECT_EQ(b.chat(req("navigator")).text, "one");
  EXPECT_EQ(b.chat(req("generator")).text, "two");
  EXPECT_EQ(code_of([&] { b.chat(req("generator")); }), ErrorCode::ScriptExhausted);
}

TEST(Scripted, ChannelQueuesBeforeShared) {
  ScriptedBackend b;
  b.push("shared");
  b.push("nav", "navigator");
  EXPECT_EQ(b.chat(req("generator")).text, "shared");
  EXPECT_EQ(b.chat(req("navigator")).text, "nav");
  EXPECT_EQ(b.pending(), 0u);
}

TEST(Scripted, ReplaysTranscriptFile) {
  TranscriptLog log;
  ScriptedBackend a({"<think>t</think>S0", "Candidate 1: x"});
  a.set_transcript(&log);
  a.chat(req("navigator"));
  log.note({{"note", "ignored on replay"}});
  a.chat(req("generator"));
  const auto text = log.to_jsonl();
  auto b = ScriptedBackend::from_jsonl(text);
  EXPECT_EQ(b.pending(), 2u);
  EXPECT_EQ(b.chat(req("navigator")).raw, "<think>t</think>S0");
  EXPECT_EQ(b.chat(req("generator")).text, "Candidate 1: x");
  EXPECT_EQ(code_of([] { ScriptedBackend::from_jsonl("{\"nothing\": 1}\n"); }), ErrorCode::ParseError);
}

TEST(Transcript, RecordsRequestAndResponse) {
  TranscriptLog log;
  ScriptedBackend b({"<think>r</think>ok"});
  b.set_transcript(&log);
  auto r = req("generator", "make 5");
  r.iteration = 3;
  r.params.temperature = 0.9;
  b.chat(r);
  ASSERT_EQ(log.entries().size(), 1u);
  const auto& e = log.entries()[0];
  EXPECT_EQ(e["channel"], "generator");
  EXPECT_EQ(e["iteration"], 3);
  EXPECT_EQ(e["params"]["temperature"], 0.9);
  EXPECT_EQ(e["messages"][1]["content"], "make 5");
  EXPECT_EQ(e["response"], "<think>r</think>ok");
  EXPECT_EQ(e["text"], "ok");
}

TEST(Request, Validation) {
  ScriptedBackend b({"x", "y"});
  ChatRequest empty;
  EXPECT_EQ(code_of([&] { b.chat(empty); }), ErrorCode::InvalidConfig);
  ChatRequest late;
  late.messages = {{Role::user, "u"}, {Role::system, "s"}};
  EXPECT_EQ(code_of([&] { b.chat(late); }), ErrorCode::InvalidConfig);
}

TEST(Retry, Classification) {
  EXPECT_TRUE(RetryPolicy::retryable(BackendError(ErrorCode::Timeout, "")));
  EXPECT_TRUE(RetryPolicy::retryable(BackendError(ErrorCode::HttpError, "", 503)));
  EXPECT_TRUE(RetryPolicy::retryable(BackendError(ErrorCode::HttpError, "", 429)));
  EXPECT_TRUE(RetryPolicy::retryable(BackendError(ErrorCode::HttpError, "", 0)));
  EXPECT_FALSE(RetryPolicy::retryable(BackendError(ErrorCode::HttpError, "", 400)));
  EXPECT_FALSE(RetryPolicy::retryable(BackendError(ErrorCode::HttpError, "", 401)));
  EXPECT_FALSE(RetryPolicy::retryable(BackendError(ErrorCode::ScriptExhausted, "")));
}

TEST(Remote, ConfigFromEnv) {
  ::unsetenv("NAS_LLM_ENDPOINT");
  ::setenv("NAS_LLM_MODEL", "m", 1);
  EXPECT_EQ(code_of([] { RemoteConfig::from_env(); }), ErrorCode::InvalidConfig);
  ::setenv("NAS_LLM_ENDPOINT", "http://localhost:1/v1", 1);
  ::setenv("NAS_LLM_TIMEOUT", "7", 1);
  const auto c = RemoteConfig::from_env();
  EXPECT_EQ(c.endpoint, "http://localhost:1/v1");
  EXPECT_EQ(c.timeout.count(), 7);
  ::unsetenv("NAS_LLM_ENDPOINT");
  ::unsetenv("NAS_LLM_MODEL");
  ::unsetenv("NAS_LLM_TIMEOUT");
}

TEST(Remote, WireFormat) {
  nlohmann::json seen;
  std::string auth;
  Stub stub([&](const httplib::Request& rq, httplib::Response& rs) {
    seen = nlohmann::json::parse(rq.body);
    auth = rq.get_header_value("Authorization");
    nlohmann::json body = {
        {"choices", {{{"message", {{"content", "Strategy: go"}, {"reasoning_content", "hmm"}}}}}}};
    rs.set_content(body.dump(), "application/json");
  });
  RemoteBackend b({stub.url(), "test-model", "k3y", std::chrono::seconds(5)});
  TranscriptLog log;
  b.set_transcript(&log);
  auto r = req("navigator", "plan");
  r.params = {0.25, 1024, false};
  const auto reply = b.chat(r);
  EXPECT_EQ(reply.text, "Strategy: go");
  EXPECT_EQ(reply.raw, "<think>hmm</think>Strategy: go");
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["temperature"], 0.25);
  EXPECT_EQ(seen["max_tokens"], 1024);
  EXPECT_EQ(seen["stream"], false);
  EXPECT_EQ(seen["chat_template_kwargs"]["enable_thinking"], false);
  EXPECT_EQ(seen["messages"].size(), 2u);
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][1]["content"], "plan");
  EXPECT_EQ(auth, "Bearer k3y");
  EXPECT_EQ(seen, b.payload(r));
  EXPECT_EQ(log.entries().size(), 1u);
}

TEST(Remote, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> hits{0};
  Stub stub([&](const httplib::Request&, httplib::Response& rs) {
    if (++hits < 3) {
      rs.status = 503;
      return;
    }
    rs.set_content(completion("fine"), "application/json");
  });
  RemoteBackend b({stub.url(), "m", "", std::chrono::seconds(5)});
  std::vector<long> slept;
  b.set_retry(no_sleep(3, &slept));
  EXPECT_EQ(b.chat(req("generator")).text, "fine");
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(slept, (std::vector<long>{500, 1000}));
}

TEST(Remote, ClientErrorsAreNotRetried) {
  std::atomic<int> hits{0};
  Stub stub([&](const httplib::Request&, httplib::Response& rs) {
    ++hits;
    rs.status = 400;
    rs.set_content("bad request", "text/plain");
  });
  RemoteBackend b({stub.url(), "m", "", std::chrono::seconds(5)});
  b.set_retry(no_sleep(3));
  try {
    b.chat(req("generator"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), ErrorCode::HttpError);
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(hits.load(), 1);
}

TEST(Remote, MalformedBodyExhaustsRetries) {
  std::atomic<int> hits{0};
  Stub stub([&](const httplib::Request&, httplib::Response& rs) {
    ++hits;
    rs.set_content("{\"choices\": []}", "application/json");
  });
  RemoteBackend b({stub.url(), "m", "", std::chrono::seconds(5)});
  b.set_retry(no_sleep(2));
  EXPECT_EQ(code_of([&] { b.chat(req("generator")); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(hits.load(), 2);
}

TEST(Remote, Timeout) {
  Stub stub([&](const httplib::Request&, httplib::Response& rs) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2500));
    rs.set_content(completion("late"), "application/json");
  });
  RemoteBackend b({stub.url(), "m", "", std::chrono::seconds(1)});
  b.set_retry(no_sleep(1));
  EXPECT_EQ(code_of([&] { b.chat(req("generator")); }), ErrorCode::Timeout);
}

TEST(Remote, UnreachableIsHttpErrorStatusZero) {
  RemoteBackend b({"http://127.0.0.1:9/v1", "m", "", std::chrono::seconds(1)});
  b.set_retry(no_sleep(1));
  try {
    b.chat(req("generator"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.code() == ErrorCode::HttpError || e.code() == ErrorCode::Timeout);
    EXPECT_EQ(e.status(), 0);
  }
}

TEST(Oracle, Deterministic) {
  const auto table = synthetic_table(3);
  auto run = [&](std::uint64_t seed, OracleMode mode) {
    OracleBackend b(table, {}, mode, seed);
    auto r = req("generator");
    r.n_candidates = 7;
    return b.chat(r).text + b.chat(r).text;
  };
  for (auto mode : {OracleMode::random, OracleMode::greedy, OracleMode::epsilon_greedy}) {
    EXPECT_EQ(run(1, mode), run(1, mode));
    EXPECT_NE(run(1, mode), run(2, mode));
  }
}

TEST(Oracle, CandidatesAreAllLegal) {
  const auto table = synthetic_table(3);
  OracleBackend b(table, {}, OracleMode::epsilon_greedy, 4);
  auto r = req("generator");
  r.n_candidates = 20;
  const auto found = extract_nb201(b.chat(r).text);
  ASSERT_EQ(found.size(), 20u);
  for (const auto& x : found) EXPECT_TRUE(x.arch) << x.text;
}

TEST(Oracle, GreedyClimbsAndStopsAtOptimum) {
  // conv3 landscape is unimodal: one edge at a time reaches all-conv3 in at
  // most six steps from anywhere, then the proposal repeats.
  const auto table = oracle::conv3_table();
  OracleBackend b(table, {}, OracleMode::greedy, 9);
  auto r = req("generator");
  r.n_candidates = 12;
  const auto found = extract_nb201(b.chat(r).text);
  ASSERT_EQ(found.size(), 12u);
  int prev = -1;
  for (const auto& x : found) {
    const int v = oracle::conv3_count(std::get<Nb201Arch>(*x.arch));
    EXPECT_GE(v, prev);
    EXPECT_LE(v - std::max(prev, 0), prev < 0 ? 6 : 1);
    prev = v;
  }
  EXPECT_EQ(prev, 6);
  EXPECT_EQ(found[10].text, found[11].text);
}

TEST(Oracle, RankerOrdersByTruth) {
  const auto table = synthetic_table(3);
  OracleBackend b(table, {}, OracleMode::greedy, 1);
  std::string prompt;
  std::vector<double> acc;
  for (std::uint32_t i : {100u, 2000u, 7000u, 15000u}) {
    const auto a = nb201_from_index(i);
    prompt += "\nArchitecture " + std::to_string(acc.size() + 1) + ": " + serialize_nb201(a);
    acc.push_back(table.lookup(a, {}));
  }
  const auto text = b.chat(req("ranker", prompt)).text;
  std::vector<std::size_t> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return acc[x] > acc[y]; });
  std::string want = "Predicted ranking:\n";
  for (std::size_t r = 0; r < 4; ++r) want += std::to_string(r + 1) + ". Architecture " + std::to_string(order[r] + 1) + "\n";
  EXPECT_EQ(text + "\n", want);
}

TEST(Oracle, ModeNames) {
  EXPECT_EQ(oracle_mode_from_name("greedy"), OracleMode::greedy);
  EXPECT_EQ(oracle_mode_from_name("epsilon"), OracleMode::epsilon_greedy);
  EXPECT_EQ(oracle_mode_from_name("epsilon-greedy"), OracleMode::epsilon_greedy);
  EXPECT_FALSE(oracle_mode_from_name("smart"));
}
