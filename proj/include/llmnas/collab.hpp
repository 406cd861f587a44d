#pragma once

// The two-model search loop: a stateful Navigator turns the history into a
// strategy, a stateless Generator turns the strategy into candidates, and the
// coordinator (SearchSession) validates, deduplicates and evaluates them.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmnas/llm_backend.hpp"
#include "llmnas/prompts.hpp"
#include "llmnas/search_core.hpp"

namespace llmnas {

struct MemoryPolicy {
  bool navigator_retains = true;
  bool generator_retains = false;
};

/// Candidates requested per iteration: max(floor, ceil(remaining budget /
/// remaining iterations)) unless `fixed` is set.
struct CandidatePolicy {
  int floor = 5;
  std::optional<int> fixed;

  int count(int remaining_budget, int remaining_iterations) const;
};

struct CollmConfig {
  SearchConfig search;  // 100 architectures, 20 iterations
  MemoryPolicy memory;
  CandidatePolicy candidates;
  SamplingParams navigator_params;
  SamplingParams generator_params;
  /// Rounds rendered verbatim into a fresh Navigator prompt; older rounds
  /// collapse into one summary line.
  int history_window = 10;

  void validate() const;
  nlohmann::json to_json() const;
};

struct HistoryEntry {
  int iteration = 0;
  std::string strategy;              // the strategy the round was generated from
  std::vector<EvalRecord> results;   // every candidate, rejected ones included
};

struct CollmOutcome {
  SearchResult result;
  std::vector<std::string> strategies;  // S_0, S_1, ...
  std::vector<HistoryEntry> history;
  int navigator_calls = 0;
  int generator_calls = 0;
};

/// "Strategy:" prefix removed when present, whitespace trimmed.
/// Throws Error{EmptyStrategy}.
std::string extract_strategy(std::string_view reply);

/// Fixed table: architecture, accuracy (2 decimals), cost, status.
std::string render_results(const std::vector<EvalRecord>& results, const Archive& archive);
std::string render_history(const std::vector<HistoryEntry>& history, const Archive& archive, int window,
                           bool* truncated = nullptr);

CollmOutcome collm_search(const SearchSpace& space, const Evaluator& evaluator, const CollmConfig& config,
                          ChatBackend& navigator, ChatBackend& generator,
                          const PromptSet& prompts = PromptSet::builtin());

/// One session plays both roles; call order and channels match collm_search.
CollmOutcome sillm_search(const SearchSpace& space, const Evaluator& evaluator, const CollmConfig& config,
                          ChatBackend& backend, const PromptSet& prompts = PromptSet::builtin());

nlohmann::json history_to_json(const std::vector<HistoryEntry>& history);

}  // namespace llmnas
