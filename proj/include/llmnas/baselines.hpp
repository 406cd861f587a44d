#pragma once

// Conventional comparators: random search, evolution with elite
// preservation, and a REINFORCE policy over categorical dimensions.

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "llmnas/search_core.hpp"

namespace llmnas {

/// Uniform sampling without replacement. Enumerable spaces (NB201) draw from
/// the remaining index set; the others use rejection against the archive.
SearchResult random_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config);

struct EaConfig {
  int population = 10;
  int iterations = 10;  // generations, the initial population included
  double elite_fraction = 0.5;
  double mutation_rate = 0.1;
  double crossover_prob = 0.5;
  int duplicate_retries = 10;
  /// Children per generation. Unset means `population`, so every generation
  /// spends `population` evaluations and the budget is population x iterations.
  /// population - elites gives the refill variant.
  std::optional<int> offspring;

  int children() const { return offspring.value_or(population); }
  void validate() const;
  nlohmann::json to_json() const;
};

/// Generation 1 is `population` random architectures. Every later generation
/// breeds `children()` new architectures from uniformly chosen elites
/// (crossover with probability crossover_prob, otherwise mutation); the next
/// elites are the top ceil(elite_fraction * population) of the current elites
/// plus those children. A child that keeps colliding with the archive after
/// `duplicate_retries` resamples is admitted as a duplicate.
SearchResult evolutionary_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config,
                                 const EaConfig& ea = {});

// ---------------------------------------------------------------------------

/// Independent softmax over the logits of each dimension.
class CategoricalPolicy {
 public:
  explicit CategoricalPolicy(const std::vector<std::size_t>& dimension_sizes);

  std::vector<double> probabilities(std::size_t dim) const;
  Genome sample(Rng& rng) const;
  double log_prob(const Genome& g) const;
  /// d log pi(g) / d logits = onehot(g_d) - softmax(logits_d), per dimension.
  std::vector<std::vector<double>> log_prob_gradient(const Genome& g) const;

  std::vector<std::vector<double>>& logits() { return logits_; }
  const std::vector<std::vector<double>>& logits() const { return logits_; }

 private:
  std::vector<std::vector<double>> logits_;
};

/// Exact expected reward sum_g pi(g) R(g) by enumeration (small spaces only).
double expected_reward(const CategoricalPolicy& policy, const std::function<double(const Genome&)>& reward);
/// Exact score-function gradient sum_g pi(g) R(g) grad log pi(g).
std::vector<std::vector<double>> expected_reward_gradient(const CategoricalPolicy& policy,
                                                          const std::function<double(const Genome&)>& reward);

/// Exponential moving average with the usual zero-start bias correction, so
/// the first value equals the first observation.
class EmaBaseline {
 public:
  explicit EmaBaseline(double momentum) : momentum_(momentum) {}
  void update(double value);
  double value() const { return denominator_ == 0.0 ? 0.0 : numerator_ / denominator_; }

 private:
  double momentum_;
  double numerator_ = 0.0;
  double denominator_ = 0.0;
};

enum class PolicyOptimizer { adam, sgd };

struct RlConfig {
  double learning_rate = 0.01;
  double ema_momentum = 0.9;
  int batch = 1;
  PolicyOptimizer optimizer = PolicyOptimizer::adam;
  /// Hard cap on samples (evaluated + duplicates) as a multiple of the budget.
  int max_samples_factor = 20;

  void validate() const;
  nlohmann::json to_json() const;
};

/// REINFORCE with an EMA reward baseline: for each batch, update the baseline
/// with every reward, then ascend sum (R - b) grad log pi.
class PolicyTrainer {
 public:
  PolicyTrainer(const std::vector<std::size_t>& dimension_sizes, const RlConfig& config);

  CategoricalPolicy& policy() { return policy_; }
  const CategoricalPolicy& policy() const { return policy_; }
  double baseline() const { return baseline_.value(); }

  void step(const std::vector<std::pair<Genome, double>>& batch);

 private:
  RlConfig config_;
  CategoricalPolicy policy_;
  EmaBaseline baseline_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

/// Reward is the accuracy of feasible candidates, 0 otherwise. Archive hits
/// reuse the stored accuracy without charging the budget.
SearchResult rl_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config,
                       const RlConfig& rl = {});

}  // namespace llmnas
