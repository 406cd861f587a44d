#include "llmnas/llm_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "llmnas/space.hpp"

namespace llmnas {

std::string_view role_name(Role r) noexcept {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string strip_thinking(std::string_view text, std::string_view open, std::string_view close) {
  std::string out;
  std::size_t pos = 0;
  // Dangling close tag with no opener anywhere before it.
  const auto first_open = text.find(open);
  const auto first_close = text.find(close);
  if (first_close != std::string_view::npos && (first_open == std::string_view::npos || first_close < first_open)) {
    pos = first_close + close.size();
  }
  while (pos < text.size()) {
    const auto o = text.find(open, pos);
    if (o == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, o - pos));
    const auto c = text.find(close, o + open.size());
    if (c == std::string_view::npos) break;
    pos = c + close.size();
  }
  const auto b = out.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \t\r\n");
  return out.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------

nlohmann::json request_to_json(const ChatRequest& request) {
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return nlohmann::json::parse(messages.dump());
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path) : out_(std::in_place, path, std::ios::binary) {
  if (!*out_) throw Error(ErrorCode::InvalidConfig, "cannot write transcript " + path.string());
}

void TranscriptLog::write(const nlohmann::json& line) {
  std::lock_guard lock(mu_);
  entries_.push_back(line);
  if (out_) {
    *out_ << line.dump() << '\n';
    out_->flush();
  }
}

void TranscriptLog::append(const ChatRequest& request, const ChatReply& reply) {
  nlohmann::ordered_json line;
  line["channel"] = request.channel;
  line["iteration"] = request.iteration;
  line["params"] = {{"temperature", request.params.temperature},
                    {"max_tokens", request.params.max_tokens},
                    {"reasoning", request.params.reasoning}};
  line["messages"] = request_to_json(request);
  line["response"] = reply.raw;
  line["text"] = reply.text;
  write(nlohmann::json::parse(line.dump()));
}

void TranscriptLog::note(const nlohmann::json& event) { write({{"event", event}}); }

std::string TranscriptLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) out += e.dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------

bool RetryPolicy::retryable(const Error& e) noexcept {
  switch (e.code()) {
    case ErrorCode::Timeout:
    case ErrorCode::MalformedResponse:
      return true;
    case ErrorCode::HttpError: {
      const auto* be = dynamic_cast<const BackendError*>(&e);
      const int status = be ? be->status() : 0;
      return status == 0 || status == 408 || status == 429 || status >= 500;
    }
    default:
      return false;
  }
}

ChatReply ChatBackend::chat(const ChatRequest& request) {
  if (request.messages.empty()) throw Error(ErrorCode::InvalidConfig, "chat request without messages");
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (request.messages[i].role == Role::system && i != 0) {
      throw Error(ErrorCode::InvalidConfig, "system message must come first");
    }
  }

  auto backoff = retry_.initial_backoff;
  const int attempts = std::max(1, retry_.attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      ++calls_;
      ChatReply reply;
      reply.raw = complete(request);
      reply.text = strip_thinking(reply.raw, think_open_, think_close_);
      if (log_) log_->append(request, reply);
      return reply;
    } catch (const Error& e) {
      if (!RetryPolicy::retryable(e) || attempt >= attempts) {
        if (dynamic_cast<const BackendError*>(&e)) throw;
        throw BackendError(e.code(), e.what());
      }
      if (log_) log_->note({{"retry", attempt}, {"channel", request.channel}, {"error", e.what()}});
      if (retry_.sleep) {
        retry_.sleep(backoff);
      } else {
        std::this_thread::sleep_for(backoff);
      }
      backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * retry_.multiplier));
    }
  }
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses)
    : shared_(std::make_move_iterator(responses.begin()), std::make_move_iterator(responses.end())) {}

ScriptedBackend ScriptedBackend::from_jsonl(std::string_view text) {
  ScriptedBackend backend;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "script line " + std::to_string(line_no) + ": " + e.what());
    }
    if (row.contains("event")) continue;  // retry notes and other bookkeeping
    const char* field = row.contains("response") ? "response" : "raw";
    if (!row.contains(field) || !row.at(field).is_string()) {
      throw Error(ErrorCode::ParseError, "script line " + std::to_string(line_no) + ": missing 'response'");
    }
    backend.push(row.at(field).get<std::string>(), row.value("channel", std::string{}));
  }
  return backend;
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

void ScriptedBackend::push(std::string response, std::string channel) {
  if (channel.empty()) {
    shared_.push_back(std::move(response));
  } else {
    by_channel_[channel].push_back(std::move(response));
  }
}

std::size_t ScriptedBackend::pending() const {
  std::size_t n = shared_.size();
  for (const auto& [_, q] : by_channel_) n += q.size();
  return n;
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  if (auto it = by_channel_.find(request.channel); it != by_channel_.end() && !it->second.empty()) {
    auto r = std::move(it->second.front());
    it->second.pop_front();
    return r;
  }
  if (shared_.empty()) {
    throw BackendError(ErrorCode::ScriptExhausted, "no scripted response left for " + request.channel);
  }
  auto r = std::move(shared_.front());
  shared_.pop_front();
  return r;
}

// ---------------------------------------------------------------------------

RemoteConfig RemoteConfig::from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  RemoteConfig c;
  c.endpoint = env("NAS_LLM_ENDPOINT");
  c.model = env("NAS_LLM_MODEL");
  c.api_key = env("NAS_LLM_API_KEY");
  if (auto t = env("NAS_LLM_TIMEOUT"); !t.empty()) {
    try {
      c.timeout = std::chrono::seconds(std::stoi(t));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "NAS_LLM_TIMEOUT is not an integer: " + t);
    }
  }
  if (c.endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "NAS_LLM_ENDPOINT is not set");
  if (c.model.empty()) throw Error(ErrorCode::InvalidConfig, "NAS_LLM_MODEL is not set");
  return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidConfig, "endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string RemoteBackend::identity() const { return "remote:" + config_.model + "@" + config_.endpoint; }

nlohmann::json RemoteBackend::payload(const ChatRequest& request) const {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = request_to_json(request);
  body["temperature"] = request.params.temperature;
  body["max_tokens"] = request.params.max_tokens;
  body["stream"] = false;
  body["chat_template_kwargs"] = {{"enable_thinking", request.params.reasoning}};
  return body;
}

std::string RemoteBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = cli.Post(path_prefix_ + "/chat/completions", headers, payload(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw BackendError(ErrorCode::Timeout, httplib::to_string(err));
    }
    throw BackendError(ErrorCode::HttpError, httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(ErrorCode::HttpError, "status " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                       res->status);
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto& msg = body.at("choices").at(0).at("message");
    std::string text = msg.at("content").is_null() ? "" : msg.at("content").get<std::string>();
    if (msg.contains("reasoning_content") && msg.at("reasoning_content").is_string()) {
      text = "<think>" + msg.at("reasoning_content").get<std::string>() + "</think>" + text;
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorCode::MalformedResponse, e.what(), res->status);
  }
}

// ---------------------------------------------------------------------------

std::string_view oracle_mode_name(OracleMode m) noexcept {
  switch (m) {
    case OracleMode::random: return "random";
    case OracleMode::greedy: return "greedy";
    case OracleMode::epsilon_greedy: return "epsilon-greedy";
  }
  return "?";
}

std::optional<OracleMode> oracle_mode_from_name(std::string_view name) noexcept {
  for (auto m : {OracleMode::random, OracleMode::greedy, OracleMode::epsilon_greedy}) {
    if (oracle_mode_name(m) == name) return m;
  }
  if (name == "epsilon") return OracleMode::epsilon_greedy;
  return std::nullopt;
}

OracleBackend::OracleBackend(const BenchTable& table, DatasetId dataset, OracleMode mode, std::uint64_t seed,
                             double epsilon)
    : table_(&table), dataset_(dataset), mode_(mode), epsilon_(epsilon), rng_(seed) {}

std::string OracleBackend::identity() const { return "oracle:" + std::string(oracle_mode_name(mode_)); }

Nb201Arch OracleBackend::best_neighbor(const Nb201Arch& from, bool two_edges) const {
  Nb201Arch best = from;
  double best_acc = acc(from);
  auto consider = [&](const Nb201Arch& a) {
    const double v = acc(a);
    if (v > best_acc) {
      best = a;
      best_acc = v;
    }
  };
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    for (auto op : kAllOps) {
      if (op == from.ops[e]) continue;
      auto a = from;
      a.ops[e] = op;
      if (!two_edges) {
        consider(a);
        continue;
      }
      for (std::size_t f = e + 1; f < kNumEdges; ++f) {
        for (auto op2 : kAllOps) {
          if (op2 == from.ops[f]) continue;
          auto b = a;
          b.ops[f] = op2;
          consider(b);
        }
      }
    }
  }
  return best;
}

std::vector<Nb201Arch> OracleBackend::propose(int n) {
  std::uniform_int_distribution<std::uint32_t> any(0, kNb201Size - 1);
  std::bernoulli_distribution explore(epsilon_);
  std::vector<Nb201Arch> out;
  for (int i = 0; i < n; ++i) {
    if (mode_ == OracleMode::random || (mode_ == OracleMode::epsilon_greedy && explore(rng_))) {
      out.push_back(nb201_from_index(any(rng_)));
      continue;
    }
    if (!current_) {
      current_ = nb201_from_index(any(rng_));
    } else {
      auto next = best_neighbor(*current_, false);
      if (next == *current_) next = best_neighbor(*current_, true);
      current_ = next;  // unchanged at a local optimum: repeat it
    }
    out.push_back(*current_);
  }
  return out;
}

std::string OracleBackend::rank(const std::string& prompt) {
  std::vector<std::pair<std::size_t, double>> order;
  std::size_t id = 0;
  for (const auto& x : extract_nb201(prompt)) {
    ++id;
    if (x.arch) order.emplace_back(id, acc(std::get<Nb201Arch>(*x.arch)));
  }
  if (mode_ == OracleMode::random) {
    std::shuffle(order.begin(), order.end(), rng_);
  } else {
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  }
  std::string out = "Predicted ranking:\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    out += std::to_string(r + 1) + ". Architecture " + std::to_string(order[r].first) + "\n";
  }
  return out;
}

std::string OracleBackend::complete(const ChatRequest& request) {
  if (request.channel == kNavigator) {
    return "Strategy: Keep the best cell found so far and change one or two edges at a time, "
           "preferring convolutions over pooling and none.";
  }
  if (request.channel == kRanker) return rank(request.messages.back().content);

  std::string out;
  int k = 0;
  for (const auto& a : propose(request.n_candidates > 0 ? request.n_candidates : 5)) {
    out += "Candidate " + std::to_string(++k) + ": " + serialize_nb201(a) + "\n";
  }
  return out;
}

}  // namespace llmnas
