#pragma once

// Chat-completion contract shared by the live client, transcript replay and
// the table-driven mock used in tests.

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmnas/bench.hpp"
#include "llmnas/error.hpp"

namespace llmnas {

enum class Role { system, user, assistant };

std::string_view role_name(Role r) noexcept;

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct SamplingParams {
  double temperature = 0.6;
  int max_tokens = 8192;
  bool reasoning = true;
};

/// Who is asking; lets scripted and mock backends answer per role.
inline constexpr std::string_view kNavigator = "navigator";
inline constexpr std::string_view kGenerator = "generator";
inline constexpr std::string_view kRanker = "ranker";

struct ChatRequest {
  std::vector<ChatMessage> messages;
  SamplingParams params;
  std::string channel;
  int iteration = 0;
  int n_candidates = 0;  // generator requests only; a hint for mock backends
};

struct ChatReply {
  std::string raw;
  std::string text;  // thinking segment removed
};

/// Removes every `open ... close` span. An unterminated opening delimiter
/// drops the rest of the text; a dangling closing delimiter drops everything
/// before it (some servers omit the opening tag).
std::string strip_thinking(std::string_view text, std::string_view open = "<think>",
                           std::string_view close = "</think>");

/// Append-only JSON-lines transcript. Each line holds channel, iteration,
/// request messages, sampling params and the raw and stripped responses, so
/// the file can be fed back to ScriptedBackend.
class TranscriptLog {
 public:
  TranscriptLog() = default;
  explicit TranscriptLog(const std::filesystem::path& path);

  void append(const ChatRequest& request, const ChatReply& reply);
  void note(const nlohmann::json& event);
  const std::vector<nlohmann::json>& entries() const { return entries_; }
  std::string to_jsonl() const;

 private:
  void write(const nlohmann::json& line);

  std::mutex mu_;
  std::optional<std::ofstream> out_;
  std::vector<nlohmann::json> entries_;
};

nlohmann::json request_to_json(const ChatRequest& request);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for

  static bool retryable(const Error& e) noexcept;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// Validates the request, calls complete() under the retry policy, strips
  /// the thinking segment and appends the exchange to the transcript.
  /// Throws BackendError.
  ChatReply chat(const ChatRequest& request);

  virtual std::string identity() const = 0;

  void set_transcript(TranscriptLog* log) { log_ = log; }
  TranscriptLog* transcript() const { return log_; }
  void set_retry(RetryPolicy policy) { retry_ = std::move(policy); }
  void set_thinking_delimiters(std::string open, std::string close) {
    think_open_ = std::move(open);
    think_close_ = std::move(close);
  }
  int calls() const { return calls_; }

 protected:
  virtual std::string complete(const ChatRequest& request) = 0;

 private:
  TranscriptLog* log_ = nullptr;
  RetryPolicy retry_;
  std::string think_open_ = "<think>";
  std::string think_close_ = "</think>";
  int calls_ = 0;
};

/// Replays canned responses. Records with a "channel" field feed that
/// channel's queue; the rest feed a shared queue used when a channel queue is
/// empty. Throws BackendError{ScriptExhausted} once both are drained.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> responses);

  /// JSON-lines with a "response" (or "raw") string per line.
  static ScriptedBackend from_jsonl(std::string_view text);
  static ScriptedBackend load(const std::filesystem::path& path);

  void push(std::string response, std::string channel = {});
  std::size_t pending() const;
  std::string identity() const override { return "scripted"; }

 protected:
  std::string complete(const ChatRequest& request) override;

 private:
  std::deque<std::string> shared_;
  std::map<std::string, std::deque<std::string>, std::less<>> by_channel_;
};

struct RemoteConfig {
  std::string endpoint;  // base URL, e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{600};

  /// NAS_LLM_ENDPOINT, NAS_LLM_MODEL, NAS_LLM_API_KEY, NAS_LLM_TIMEOUT.
  /// Throws Error{InvalidConfig} when the endpoint or model is missing.
  static RemoteConfig from_env();
};

/// OpenAI-compatible /chat/completions client.
class RemoteBackend final : public ChatBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string identity() const override;

  /// Serialized request body, exposed for wire tests.
  nlohmann::json payload(const ChatRequest& request) const;

 protected:
  std::string complete(const ChatRequest& request) override;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::mutex mu_;
};

enum class OracleMode { random, greedy, epsilon_greedy };

std::string_view oracle_mode_name(OracleMode m) noexcept;
std::optional<OracleMode> oracle_mode_from_name(std::string_view name) noexcept;

/// Deterministic mock that answers from a benchmark table. As Navigator it
/// returns a fixed strategy sentence. As Generator it proposes cell strings:
/// random mode samples uniformly; greedy mode walks a steepest-ascent path of
/// single-edge changes from the best cell it has proposed so far; epsilon
/// mode mixes the two. As Ranker it orders the listed cells by true accuracy
/// (random mode shuffles instead).
class OracleBackend final : public ChatBackend {
 public:
  OracleBackend(const BenchTable& table, DatasetId dataset, OracleMode mode, std::uint64_t seed,
                double epsilon = 0.2);
  std::string identity() const override;

 protected:
  std::string complete(const ChatRequest& request) override;

 private:
  std::vector<Nb201Arch> propose(int n);
  Nb201Arch best_neighbor(const Nb201Arch& from, bool two_edges) const;
  double acc(const Nb201Arch& a) const { return table_->lookup(a, dataset_); }
  std::string rank(const std::string& prompt);

  const BenchTable* table_;
  DatasetId dataset_;
  OracleMode mode_;
  double epsilon_;
  std::mt19937_64 rng_;
  std::optional<Nb201Arch> current_;
};

}  // namespace llmnas
