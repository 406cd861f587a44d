#pragma once

// Blind ranking trials: show a model a handful of cells, parse the order it
// returns and score it against the table with Kendall's tau.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llmnas/bench.hpp"
#include "llmnas/llm_backend.hpp"
#include "llmnas/prompts.hpp"
#include "llmnas/search_core.hpp"

namespace llmnas {

/// Tau between two rankings of the same labels (no ties), O(n log n).
/// Throws Error{LengthMismatch} for unequal lengths or n < 2 and
/// Error{NotAPermutation} when the label sets differ or repeat.
double kendall_tau(std::span<const std::size_t> order_a, std::span<const std::size_t> order_b);

struct RankingSample {
  std::vector<Nb201Arch> archs;
  std::vector<double> accuracy;

  /// Indices sorted best first.
  std::vector<std::size_t> true_order() const;
};

/// n distinct cells with pairwise distinct accuracies.
RankingSample sample_for_ranking(const BenchTable& table, DatasetId dataset, std::size_t n, Rng& rng);

/// "Architecture 1: <cell>" lines, numbered from 1.
std::string render_sample(const RankingSample& sample);

/// 0-based indices best first. Tries, in order: "Architecture N" style
/// mentions, re-emitted cell strings, then bare integers per line. Throws
/// Error{UnparseableRanking} when none yields a full permutation.
std::vector<std::size_t> parse_ranking(std::string_view reply, const RankingSample& sample);

struct RankingTrial {
  int trial_id = 0;
  std::uint64_t seed = 0;
  double temperature = 0.6;
  RankingSample sample;
  std::vector<std::size_t> predicted;
  double tau = 0.0;
  bool top1_correct = false;
  bool failed = false;
  std::string error;
  std::string reply_digest;
};

RankingTrial run_trial(const RankingSample& sample, ChatBackend& backend, const PromptSet& prompts,
                       const SamplingParams& params, int trial_id = 0, std::uint64_t seed = 0);

struct PocConfig {
  DatasetId dataset;
  std::size_t n_archs = 10;
  int trials = 40;
  std::vector<std::uint64_t> seeds;      // trial i uses seeds[i % size]; empty means seed = i
  std::vector<double> temperatures{0.6};  // cycled the same way

  void validate() const;
};

struct PocReport {
  std::vector<RankingTrial> trials;
  MeanStd tau;  // over trials that parsed
  int failed = 0;
  double top1_rate = 0.0;

  /// trial_id,seed,tau,top1_correct,raw_reply_digest
  std::string to_csv() const;
};

PocReport run_poc(const BenchTable& table, const PocConfig& config, ChatBackend& backend,
                  const PromptSet& prompts = PromptSet::builtin());

}  // namespace llmnas
