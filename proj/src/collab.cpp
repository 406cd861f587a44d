#include "llmnas/collab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "llmnas/error.hpp"

namespace llmnas {

int CandidatePolicy::count(int remaining_budget, int remaining_iterations) const {
  if (fixed) return *fixed;
  const int its = std::max(1, remaining_iterations);
  const int share = (std::max(0, remaining_budget) + its - 1) / its;
  return std::max(floor, share);
}

void CollmConfig::validate() const {
  search.validate();
  if (candidates.floor < 1) throw Error(ErrorCode::InvalidConfig, "candidate floor must be >= 1");
  if (candidates.fixed && *candidates.fixed < 1) throw Error(ErrorCode::InvalidConfig, "candidates must be >= 1");
  if (history_window < 1) throw Error(ErrorCode::InvalidConfig, "history_window must be >= 1");
  for (const auto* p : {&navigator_params, &generator_params}) {
    if (p->temperature < 0.0) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  }
}

nlohmann::json CollmConfig::to_json() const {
  auto params = [](const SamplingParams& p) {
    return nlohmann::json{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"reasoning", p.reasoning}};
  };
  nlohmann::json j = search.to_json();
  j["navigator_retains"] = memory.navigator_retains;
  j["generator_retains"] = memory.generator_retains;
  j["candidates_floor"] = candidates.floor;
  j["candidates_fixed"] = candidates.fixed ? nlohmann::json(*candidates.fixed) : nlohmann::json(nullptr);
  j["navigator_params"] = params(navigator_params);
  j["generator_params"] = params(generator_params);
  j["history_window"] = history_window;
  return j;
}

std::string extract_strategy(std::string_view reply) {
  std::string lower(reply);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  constexpr std::string_view kTag = "strategy:";
  if (auto p = lower.find(kTag); p != std::string::npos) reply.remove_prefix(p + kTag.size());
  const auto b = reply.find_first_not_of(" \t\r\n*");
  if (b == std::string_view::npos) throw Error(ErrorCode::EmptyStrategy, "navigator reply has no strategy");
  const auto e = reply.find_last_not_of(" \t\r\n");
  return std::string(reply.substr(b, e - b + 1));
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string format_cost(const std::optional<CostEstimate>& c) {
  if (!c) return "-";
  return fmt("%.2f", c->flops) + " MFLOPs / " + fmt("%.3f", c->params) + " M params";
}

std::string format_target(const std::optional<double>& t) { return t ? fmt("%.2f%%", *t) : "none"; }

std::string format_constraint(const Constraint& c) {
  switch (c.metric) {
    case CostMetric::none: return "none";
    case CostMetric::flops: return "FLOPs <= " + fmt("%g", c.bound) + " M";
    case CostMetric::params: return "parameters <= " + fmt("%g", c.bound) + " M";
  }
  return "none";
}

}  // namespace

std::string render_results(const std::vector<EvalRecord>& results, const Archive& archive) {
  std::string out = "| architecture | accuracy | cost | status |\n";
  bool any_legal = false;
  for (const auto& r : results) {
    const EvalRecord* shown = r.duplicate ? archive.find(r.arch) : &r;
    const std::string acc = shown && shown->accuracy ? fmt("%.2f", *shown->accuracy) : "-";
    const std::string cost = format_cost(shown ? shown->cost : std::nullopt);
    std::string status(r.status());
    if (!r.legal && !r.note.empty()) status += " (" + r.note + ")";
    if (r.evaluated() && !r.feasible) status += " (over constraint)";
    out += "| " + r.arch + " | " + acc + " | " + cost + " | " + status + " |\n";
    any_legal = any_legal || r.legal;
  }
  if (!any_legal) out += "(no valid candidates this round)\n";
  return out;
}

std::string render_history(const std::vector<HistoryEntry>& history, const Archive& archive, int window,
                           bool* truncated) {
  const std::size_t keep = std::min(history.size(), static_cast<std::size_t>(window));
  const std::size_t skip = history.size() - keep;
  if (truncated) *truncated = skip > 0;
  std::string out;
  if (skip > 0) {
    int evaluated = 0;
    for (std::size_t i = 0; i < skip; ++i) {
      for (const auto& r : history[i].results) evaluated += r.evaluated();
    }
    out += "(" + std::to_string(skip) + " earlier rounds omitted; " + std::to_string(evaluated) +
           " architectures were evaluated in them)\n\n";
  }
  for (std::size_t i = skip; i < history.size(); ++i) {
    const auto& h = history[i];
    out += "Round " + std::to_string(h.iteration) + "\nStrategy: " + h.strategy + "\n";
    out += render_results(h.results, archive);
    if (i + 1 < history.size()) out += "\n";
  }
  return out;
}

nlohmann::json history_to_json(const std::vector<HistoryEntry>& history) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& h : history) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : h.results) results.push_back(record_to_json(r));
    out.push_back({{"iteration", h.iteration}, {"strategy", h.strategy}, {"results", results}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Roles

namespace {

/// Context the roles need to fill templates.
struct LoopView {
  const CollmConfig* config;
  const SearchSession* session;
  const std::vector<HistoryEntry>* history;
  std::string space_description;
};

PromptVars base_vars(const LoopView& v) {
  PromptVars vars;
  vars["search_space_description"] = v.space_description;
  vars["target"] = format_target(v.config->search.target);
  vars["constraint"] = format_constraint(v.config->search.constraint);
  vars["remaining"] = std::to_string(v.session->remaining_budget());
  vars["best"] = v.session->best_arch()
                     ? fmt("%.2f", v.session->best_accuracy()) + " (" + *v.session->best_arch() + ")"
                     : std::string("none yet");
  return vars;
}

class Roles {
 public:
  virtual ~Roles() = default;
  virtual std::string init(const LoopView& v) = 0;
  virtual std::string refine(const LoopView& v) = 0;
  virtual std::string generate(const LoopView& v, const std::string& strategy, int n, int t) = 0;
};

ChatRequest make_request(std::vector<ChatMessage> messages, const SamplingParams& params, std::string_view channel,
                         int iteration, int n = 0) {
  ChatRequest r;
  r.messages = std::move(messages);
  r.params = params;
  r.channel = std::string(channel);
  r.iteration = iteration;
  r.n_candidates = n;
  return r;
}

class CollabRoles final : public Roles {
 public:
  CollabRoles(ChatBackend& nav, ChatBackend& gen, const PromptSet& prompts)
      : nav_(nav), gen_(gen), prompts_(prompts) {}

  std::string init(const LoopView& v) override {
    auto vars = base_vars(v);
    std::vector<ChatMessage> msgs = {{Role::system, render(prompts_.get("navigator_system"), vars)},
                                     {Role::user, render(prompts_.get("navigator_init"), vars)}};
    const auto reply = nav_.chat(make_request(msgs, v.config->navigator_params, kNavigator, 0));
    if (v.config->memory.navigator_retains) {
      nav_session_ = std::move(msgs);
      nav_session_.push_back({Role::assistant, reply.text});
    }
    return extract_strategy(reply.text);
  }

  std::string refine(const LoopView& v) override {
    auto vars = base_vars(v);
    const int t = v.history->back().iteration;
    if (v.config->memory.navigator_retains) {
      vars["history"] = render_results(v.history->back().results, v.session->archive());
      nav_session_.push_back({Role::user, render(prompts_.get("navigator_feedback"), vars)});
      const auto reply = nav_.chat(make_request(nav_session_, v.config->navigator_params, kNavigator, t));
      nav_session_.push_back({Role::assistant, reply.text});
      return extract_strategy(reply.text);
    }
    bool truncated = false;
    vars["history"] = render_history(*v.history, v.session->archive(), v.config->history_window, &truncated);
    if (truncated && nav_.transcript()) nav_.transcript()->note({{"history_truncated", v.history->size()}, {"iteration", t}});
    std::vector<ChatMessage> msgs = {{Role::system, render(prompts_.get("navigator_system"), vars)},
                                     {Role::user, render(prompts_.get("navigator_refine"), vars)}};
    return extract_strategy(nav_.chat(make_request(msgs, v.config->navigator_params, kNavigator, t)).text);
  }

  std::string generate(const LoopView& v, const std::string& strategy, int n, int t) override {
    auto vars = base_vars(v);
    vars["strategy"] = strategy;
    vars["n_candidates"] = std::to_string(n);
    ChatMessage user{Role::user, render(prompts_.get("generator_user"), vars)};
    if (!v.config->memory.generator_retains) {
      std::vector<ChatMessage> msgs = {{Role::system, render(prompts_.get("generator_system"), vars)}, user};
      return gen_.chat(make_request(std::move(msgs), v.config->generator_params, kGenerator, t, n)).text;
    }
    if (gen_session_.empty()) gen_session_.push_back({Role::system, render(prompts_.get("generator_system"), vars)});
    gen_session_.push_back(std::move(user));
    auto reply = gen_.chat(make_request(gen_session_, v.config->generator_params, kGenerator, t, n));
    gen_session_.push_back({Role::assistant, reply.text});
    return reply.text;
  }

 private:
  ChatBackend& nav_;
  ChatBackend& gen_;
  const PromptSet& prompts_;
  std::vector<ChatMessage> nav_session_;
  std::vector<ChatMessage> gen_session_;
};

class SingleRoles final : public Roles {
 public:
  SingleRoles(ChatBackend& backend, const PromptSet& prompts) : backend_(backend), prompts_(prompts) {}

  std::string init(const LoopView& v) override {
    auto vars = base_vars(v);
    session_ = {{Role::system, render(prompts_.get("single_system"), vars)},
                {Role::user, render(prompts_.get("navigator_init"), vars)}};
    return ask(v.config->navigator_params, kNavigator, 0, 0, true);
  }

  std::string refine(const LoopView& v) override {
    auto vars = base_vars(v);
    vars["history"] = render_results(v.history->back().results, v.session->archive());
    session_.push_back({Role::user, render(prompts_.get("navigator_feedback"), vars)});
    return ask(v.config->navigator_params, kNavigator, v.history->back().iteration, 0, true);
  }

  std::string generate(const LoopView& v, const std::string& strategy, int n, int t) override {
    auto vars = base_vars(v);
    vars["strategy"] = strategy;
    vars["n_candidates"] = std::to_string(n);
    session_.push_back({Role::user, render(prompts_.get("generator_user"), vars)});
    return ask(v.config->generator_params, kGenerator, t, n, false);
  }

 private:
  std::string ask(const SamplingParams& params, std::string_view channel, int t, int n, bool strategy) {
    auto reply = backend_.chat(make_request(session_, params, channel, t, n));
    session_.push_back({Role::assistant, reply.text});
    return strategy ? extract_strategy(reply.text) : reply.text;
  }

  ChatBackend& backend_;
  const PromptSet& prompts_;
  std::vector<ChatMessage> session_;
};

bool aborts_run(const Error& e) {
  return category_of(e.code()) == ErrorCategory::Backend || e.code() == ErrorCode::EmptyStrategy;
}

CollmOutcome run_loop(const SearchSpace& space, const Evaluator& evaluator, const CollmConfig& config,
                      const PromptSet& prompts, Roles& roles, std::string method) {
  config.validate();
  SearchSession session(space, evaluator, config.search);
  CollmOutcome out;
  LoopView view{&config, &session, &out.history, prompts.space_description(space.kind())};

  const int T = config.search.iteration_limit;
  try {
    ++out.navigator_calls;
    out.strategies.push_back(roles.init(view));

    for (int t = 1; t <= T && !session.exhausted(); ++t) {
      const int n = config.candidates.count(session.remaining_budget(), T - t + 1);
      ++out.generator_calls;
      const auto reply = roles.generate(view, out.strategies.back(), n, t);

      HistoryEntry entry{t, out.strategies.back(), {}};
      auto found = space.extract(reply);
      if (found.size() > static_cast<std::size_t>(n)) found.resize(static_cast<std::size_t>(n));
      for (auto& x : found) {
        if (!x.arch) {
          entry.results.push_back(session.reject(x.text, x.error, t));
        } else if (!session.exhausted()) {
          entry.results.push_back(session.submit(*x.arch, t));
        }
      }
      out.history.push_back(std::move(entry));

      if (session.target_reached()) break;
      if (session.exhausted()) break;
      ++out.navigator_calls;
      out.strategies.push_back(roles.refine(view));
    }
  } catch (const Error& e) {
    if (!aborts_run(e)) throw;
    auto result = session.finish(method, out.generator_calls);
    result.aborted = true;
    result.abort_reason = e.what();
    result.config["collm"] = config.to_json();
    out.result = std::move(result);
    return out;
  }

  out.result = session.finish(std::move(method), out.generator_calls);
  out.result.early_stopped = session.target_reached();
  out.result.config["collm"] = config.to_json();
  return out;
}

}  // namespace

CollmOutcome collm_search(const SearchSpace& space, const Evaluator& evaluator, const CollmConfig& config,
                          ChatBackend& navigator, ChatBackend& generator, const PromptSet& prompts) {
  CollabRoles roles(navigator, generator, prompts);
  return run_loop(space, evaluator, config, prompts, roles, "collm");
}

CollmOutcome sillm_search(const SearchSpace& space, const Evaluator& evaluator, const CollmConfig& config,
                          ChatBackend& backend, const PromptSet& prompts) {
  SingleRoles roles(backend, prompts);
  return run_loop(space, evaluator, config, prompts, roles, "sillm");
}

}  // namespace llmnas
