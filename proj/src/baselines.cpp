#include "llmnas/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llmnas/error.hpp"

namespace llmnas {

namespace {

/// Mixed-radix decoding of an enumeration index.
Genome genome_from_index(std::uint64_t index, const std::vector<std::size_t>& dims) {
  Genome g(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    g[i] = static_cast<std::size_t>(index % dims[i]);
    index /= dims[i];
  }
  return g;
}

bool cost_feasible(const SearchSpace& space, const Arch& arch, const Constraint& c) {
  return c.metric == CostMetric::none || check_constraint(space.cost(arch), c);
}

double fitness(const SearchSession& session, const EvalRecord& rec) {
  const EvalRecord* stored = rec.evaluated() ? &rec : session.archive().find(rec.arch);
  if (!stored || !stored->feasible) return -1.0;
  return *stored->accuracy;
}

constexpr int kRejectionTries = 1000;

}  // namespace

SearchResult random_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config) {
  SearchSession session(space, evaluator, config);
  Rng rng(config.seed);
  int iteration = 0;

  if (const auto total = space.size()) {
    const auto dims = space.dimension_sizes();
    std::vector<std::uint64_t> order(*total);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < order.size() && !session.exhausted(); ++k) {
      const auto j = std::uniform_int_distribution<std::size_t>(k, order.size() - 1)(rng);
      std::swap(order[k], order[j]);
      const auto arch = space.decode(genome_from_index(order[k], dims));
      if (!cost_feasible(space, arch, config.constraint)) continue;
      session.submit(arch, ++iteration);
      if (session.target_reached()) break;
    }
  } else {
    while (!session.exhausted()) {
      Arch arch = space.random(rng);
      for (int tries = 0; tries < kRejectionTries; ++tries) {
        if (!session.archive().contains(space.key(arch)) && cost_feasible(space, arch, config.constraint)) break;
        arch = space.random(rng);
      }
      session.submit(arch, ++iteration);
      if (session.target_reached()) break;
    }
  }
  auto result = session.finish("rs", iteration);
  result.early_stopped = session.target_reached();
  return result;
}

// ---------------------------------------------------------------------------

void EaConfig::validate() const {
  if (population < 1) throw Error(ErrorCode::InvalidConfig, "population must be >= 1");
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "elite_fraction must be in (0, 1]");
  }
  if (mutation_rate < 0.0 || mutation_rate > 1.0) throw Error(ErrorCode::InvalidConfig, "mutation_rate in [0, 1]");
  if (crossover_prob < 0.0 || crossover_prob > 1.0) throw Error(ErrorCode::InvalidConfig, "crossover_prob in [0, 1]");
  if (duplicate_retries < 0) throw Error(ErrorCode::InvalidConfig, "duplicate_retries must be >= 0");
  if (offspring && *offspring < 0) throw Error(ErrorCode::InvalidConfig, "offspring must be >= 0");
}

nlohmann::json EaConfig::to_json() const {
  return {{"population", population},         {"iterations", iterations},
          {"elite_fraction", elite_fraction}, {"mutation_rate", mutation_rate},
          {"crossover_prob", crossover_prob}, {"duplicate_retries", duplicate_retries},
          {"offspring", children()}};
}

SearchResult evolutionary_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config,
                                 const EaConfig& ea) {
  ea.validate();
  SearchSession session(space, evaluator, config);
  Rng rng(config.seed);

  struct Member {
    Arch arch;
    double fitness;
  };
  std::vector<Member> population;
  int generation = 1;

  for (int i = 0; i < ea.population && !session.exhausted(); ++i) {
    Arch arch = space.random(rng);
    for (int tries = 0; tries < kRejectionTries; ++tries) {
      if (!session.archive().contains(space.key(arch)) && cost_feasible(space, arch, config.constraint)) break;
      arch = space.random(rng);
    }
    const auto rec = session.submit(arch, generation);
    population.push_back({arch, fitness(session, rec)});
  }

  const int elites = std::clamp(static_cast<int>(std::ceil(ea.elite_fraction * ea.population - 1e-9)), 1,
                                ea.population);
  std::bernoulli_distribution use_crossover(ea.crossover_prob);

  while (generation < ea.iterations && !session.exhausted() && !session.target_reached()) {
    ++generation;
    std::stable_sort(population.begin(), population.end(),
                     [](const Member& a, const Member& b) { return a.fitness > b.fitness; });
    population.resize(std::min<std::size_t>(population.size(), static_cast<std::size_t>(elites)));
    const auto parents = population;
    std::uniform_int_distribution<std::size_t> pick(0, parents.size() - 1);

    for (int c = 0; c < ea.children() && !session.exhausted(); ++c) {
      Arch child = parents[pick(rng)].arch;
      for (int attempt = 0; attempt <= ea.duplicate_retries; ++attempt) {
        if (use_crossover(rng)) {
          child = space.crossover(parents[pick(rng)].arch, parents[pick(rng)].arch, rng);
        } else {
          child = space.mutate(parents[pick(rng)].arch, rng, ea.mutation_rate);
        }
        if (!session.archive().contains(space.key(child)) && cost_feasible(space, child, config.constraint)) break;
      }
      const auto rec = session.submit(child, generation);
      population.push_back({child, fitness(session, rec)});
    }
  }

  auto result = session.finish("ea", generation);
  result.early_stopped = session.target_reached();
  result.config["ea"] = ea.to_json();
  return result;
}

// ---------------------------------------------------------------------------

CategoricalPolicy::CategoricalPolicy(const std::vector<std::size_t>& dims) {
  for (auto n : dims) logits_.emplace_back(n, 0.0);
}

std::vector<double> CategoricalPolicy::probabilities(std::size_t dim) const {
  const auto& z = logits_.at(dim);
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += p[i] = std::exp(z[i] - zmax);
  for (auto& x : p) x /= total;
  return p;
}

Genome CategoricalPolicy::sample(Rng& rng) const {
  Genome g(logits_.size());
  for (std::size_t d = 0; d < logits_.size(); ++d) {
    const auto p = probabilities(d);
    g[d] = std::discrete_distribution<std::size_t>(p.begin(), p.end())(rng);
  }
  return g;
}

double CategoricalPolicy::log_prob(const Genome& g) const {
  double lp = 0.0;
  for (std::size_t d = 0; d < logits_.size(); ++d) lp += std::log(probabilities(d)[g[d]]);
  return lp;
}

std::vector<std::vector<double>> CategoricalPolicy::log_prob_gradient(const Genome& g) const {
  std::vector<std::vector<double>> grad(logits_.size());
  for (std::size_t d = 0; d < logits_.size(); ++d) {
    grad[d] = probabilities(d);
    for (auto& x : grad[d]) x = -x;
    grad[d][g[d]] += 1.0;
  }
  return grad;
}

namespace {

void for_each_genome(const CategoricalPolicy& policy, const std::function<void(const Genome&)>& fn) {
  const auto& z = policy.logits();
  Genome g(z.size(), 0);
  while (true) {
    fn(g);
    std::size_t d = 0;
    while (d < g.size() && ++g[d] == z[d].size()) g[d++] = 0;
    if (d == g.size()) return;
  }
}

}  // namespace

double expected_reward(const CategoricalPolicy& policy, const std::function<double(const Genome&)>& reward) {
  double total = 0.0;
  for_each_genome(policy, [&](const Genome& g) { total += std::exp(policy.log_prob(g)) * reward(g); });
  return total;
}

std::vector<std::vector<double>> expected_reward_gradient(const CategoricalPolicy& policy,
                                                          const std::function<double(const Genome&)>& reward) {
  std::vector<std::vector<double>> total;
  for (const auto& z : policy.logits()) total.emplace_back(z.size(), 0.0);
  for_each_genome(policy, [&](const Genome& g) {
    const double w = std::exp(policy.log_prob(g)) * reward(g);
    const auto grad = policy.log_prob_gradient(g);
    for (std::size_t d = 0; d < grad.size(); ++d) {
      for (std::size_t k = 0; k < grad[d].size(); ++k) total[d][k] += w * grad[d][k];
    }
  });
  return total;
}

void EmaBaseline::update(double value) {
  numerator_ = momentum_ * numerator_ + (1.0 - momentum_) * value;
  denominator_ = momentum_ * denominator_ + (1.0 - momentum_);
}

void RlConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be >= 0");
  if (!(ema_momentum >= 0.0 && ema_momentum < 1.0)) throw Error(ErrorCode::InvalidConfig, "ema_momentum in [0, 1)");
  if (batch < 1) throw Error(ErrorCode::InvalidConfig, "batch must be >= 1");
  if (max_samples_factor < 1) throw Error(ErrorCode::InvalidConfig, "max_samples_factor must be >= 1");
}

nlohmann::json RlConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"ema_momentum", ema_momentum},
          {"batch", batch},
          {"optimizer", optimizer == PolicyOptimizer::adam ? "adam" : "sgd"},
          {"max_samples_factor", max_samples_factor}};
}

PolicyTrainer::PolicyTrainer(const std::vector<std::size_t>& dims, const RlConfig& config)
    : config_(config), policy_(dims), baseline_(config.ema_momentum) {
  config_.validate();
  for (auto n : dims) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void PolicyTrainer::step(const std::vector<std::pair<Genome, double>>& batch) {
  if (batch.empty()) return;
  for (const auto& [g, r] : batch) baseline_.update(r);
  const double b = baseline_.value();

  auto& logits = policy_.logits();
  std::vector<std::vector<double>> grad;
  for (const auto& z : logits) grad.emplace_back(z.size(), 0.0);
  for (const auto& [g, r] : batch) {
    const auto score = policy_.log_prob_gradient(g);
    for (std::size_t d = 0; d < score.size(); ++d) {
      for (std::size_t k = 0; k < score[d].size(); ++k) {
        grad[d][k] += (r - b) * score[d][k] / static_cast<double>(batch.size());
      }
    }
  }

  ++t_;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  for (std::size_t d = 0; d < logits.size(); ++d) {
    for (std::size_t k = 0; k < logits[d].size(); ++k) {
      const double g = grad[d][k];
      if (config_.optimizer == PolicyOptimizer::sgd) {
        logits[d][k] += config_.learning_rate * g;
        continue;
      }
      m_[d][k] = kBeta1 * m_[d][k] + (1 - kBeta1) * g;
      v_[d][k] = kBeta2 * v_[d][k] + (1 - kBeta2) * g * g;
      const double mhat = m_[d][k] / (1 - std::pow(kBeta1, t_));
      const double vhat = v_[d][k] / (1 - std::pow(kBeta2, t_));
      logits[d][k] += config_.learning_rate * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

SearchResult rl_search(const SearchSpace& space, const Evaluator& evaluator, const SearchConfig& config,
                       const RlConfig& rl) {
  rl.validate();
  SearchSession session(space, evaluator, config);
  PolicyTrainer trainer(space.dimension_sizes(), rl);
  Rng rng(config.seed);

  const long max_samples = static_cast<long>(rl.max_samples_factor) * config.arch_budget;
  long samples = 0;
  int step = 0;
  while (!session.exhausted() && samples < max_samples && !session.target_reached()) {
    ++step;
    std::vector<std::pair<Genome, double>> batch;
    for (int b = 0; b < rl.batch && !session.exhausted(); ++b, ++samples) {
      auto genome = trainer.policy().sample(rng);
      const auto rec = session.submit(space.decode(genome), step);
      batch.emplace_back(std::move(genome), std::max(0.0, fitness(session, rec)));
    }
    trainer.step(batch);
  }

  auto result = session.finish("rl", step);
  result.early_stopped = session.target_reached();
  result.config["rl"] = rl.to_json();
  return result;
}

}  // namespace llmnas
