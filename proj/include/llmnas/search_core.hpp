#pragma once

// Shared search substrate: evaluator contract, resource constraint, visited
// archive, budget accounting, best tracking and run statistics.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "llmnas/bench.hpp"
#include "llmnas/space.hpp"

namespace llmnas {

struct Evaluation {
  double accuracy = 0.0;  // percent
  CostEstimate cost;
};

/// Deterministic per (implementation, arch).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const Arch& arch) const = 0;
  virtual std::string describe() const = 0;
};

/// Ground-truth lookups in a NAS-Bench-201 table; cost from the NB201 model.
class TableEvaluator final : public Evaluator {
 public:
  TableEvaluator(const BenchTable& table, DatasetId dataset) : table_(&table), dataset_(dataset) {}
  Evaluation evaluate(const Arch& arch) const override;
  std::string describe() const override;

 private:
  const BenchTable* table_;
  DatasetId dataset_;
};

/// Surrogate accuracy for macro spaces: a saturating function of analytic
/// MACs plus a seeded per-architecture perturbation. Not a real accuracy.
class SurrogateEvaluator final : public Evaluator {
 public:
  SurrogateEvaluator(SpaceKind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}
  Evaluation evaluate(const Arch& arch) const override;
  std::string describe() const override;

 private:
  SpaceKind kind_;
  std::uint64_t seed_;
};

/// Wraps an arbitrary accuracy function; cost from the analytic models.
class FunctionEvaluator final : public Evaluator {
 public:
  FunctionEvaluator(SpaceKind kind, std::function<double(const Arch&)> fn, std::string name = "function")
      : kind_(kind), fn_(std::move(fn)), name_(std::move(name)) {}
  Evaluation evaluate(const Arch& arch) const override { return {fn_(arch), estimate_cost(arch, kind_)}; }
  std::string describe() const override { return name_; }

 private:
  SpaceKind kind_;
  std::function<double(const Arch&)> fn_;
  std::string name_;
};

// ---------------------------------------------------------------------------

enum class CostMetric { none, flops, params };

struct Constraint {
  CostMetric metric = CostMetric::none;
  double bound = 0.0;  // mega-units, inclusive

  /// "none", "flops:660", "params:6.5". Throws Error{InvalidConfig}.
  static Constraint parse(std::string_view text);
  std::string to_string() const;
};

bool check_constraint(const CostEstimate& cost, const Constraint& constraint) noexcept;

// ---------------------------------------------------------------------------

struct EvalRecord {
  std::string arch;  // canonical key, or the raw fragment when unparseable
  std::optional<double> accuracy;
  std::optional<CostEstimate> cost;
  int iteration = 0;
  bool legal = true;
  bool duplicate = false;
  bool feasible = false;  // evaluated and within the constraint
  std::string note;       // why an illegal candidate was rejected

  bool evaluated() const { return accuracy.has_value(); }
  std::string_view status() const;  // "LEGAL" | "ILLEGAL" | "DUPLICATE"
};

struct Counters {
  int generated = 0;
  int invalid = 0;
  int duplicate = 0;
  int evaluated = 0;
};

struct SearchConfig {
  int arch_budget = 100;
  int iteration_limit = 20;
  std::optional<double> target;  // P_target; disabled when empty
  Constraint constraint;
  DatasetId dataset;
  std::uint64_t seed = 0;

  /// Throws Error{InvalidConfig}.
  void validate() const;
  nlohmann::json to_json() const;
};

struct SearchResult {
  std::string method;
  SpaceKind space = SpaceKind::nb201;
  std::optional<std::string> best_arch;
  double best_accuracy = 0.0;
  std::optional<CostEstimate> best_cost;
  int evaluations = 0;
  int iterations = 0;
  Counters counters;
  std::vector<EvalRecord> trajectory;
  bool early_stopped = false;
  bool aborted = false;
  std::string abort_reason;
  nlohmann::json config;  // every knob used for the run

  /// Best feasible accuracy after each iteration 1..iterations.
  std::vector<double> best_curve() const;
};

/// Visited set V and the append-only list of evaluated records.
class Archive {
 public:
  bool contains(const std::string& key) const { return index_.count(key) > 0; }
  void insert(const EvalRecord& record);
  const EvalRecord* find(const std::string& key) const;
  const std::vector<EvalRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<EvalRecord> records_;
};

/// The coordinator state of one run: every candidate goes through submit()
/// (or reject() when it could not be parsed), which applies the visited-set
/// and legality guards, charges the budget, and tracks the best feasible
/// architecture.
class SearchSession {
 public:
  SearchSession(const SearchSpace& space, const Evaluator& evaluator, SearchConfig config);

  /// Throws Error{BudgetExhausted} once the budget is spent.
  EvalRecord submit(const Arch& arch, int iteration);
  /// Records an unparseable fragment as an illegal candidate.
  EvalRecord reject(std::string text, std::string reason, int iteration);

  int remaining_budget() const { return config_.arch_budget - static_cast<int>(archive_.size()); }
  bool exhausted() const { return remaining_budget() <= 0; }
  bool target_reached() const;

  const Archive& archive() const { return archive_; }
  const Counters& counters() const { return counters_; }
  double best_accuracy() const { return best_accuracy_; }
  const std::optional<std::string>& best_arch() const { return best_arch_; }
  const SearchConfig& config() const { return config_; }
  const SearchSpace& space() const { return *space_; }
  const std::vector<EvalRecord>& trajectory() const { return trajectory_; }

  SearchResult finish(std::string method, int iterations) const;

 private:
  const SearchSpace* space_;
  const Evaluator* evaluator_;
  SearchConfig config_;
  Archive archive_;
  Counters counters_;
  std::vector<EvalRecord> trajectory_;
  double best_accuracy_ = 0.0;
  std::optional<std::string> best_arch_;
  std::optional<CostEstimate> best_cost_;
};

// ---------------------------------------------------------------------------
// Statistics and exports

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation (divide by n)
};

/// Throws Error{EmptyInput}.
MeanStd summarize(std::span<const double> values);
/// std / mean, as a fraction. Throws Error{EmptyInput}.
double coefficient_of_variation(std::span<const double> values);

/// Table-3 style row: mean/std of the best architecture's valid and test
/// accuracy on each dataset, looked up in `table`. Throws Error{EmptyInput}.
struct BenchSummary {
  std::array<MeanStd, 3> valid;
  std::array<MeanStd, 3> test;
  int runs = 0;
};
BenchSummary summarize_runs(std::span<const SearchResult> results, const BenchTable& table);
std::string format_summary_row(std::string_view label, const BenchSummary& summary);
std::string summary_header();

nlohmann::json record_to_json(const EvalRecord& record);
nlohmann::json result_to_json(const SearchResult& result);
/// One EvalRecord per line.
std::string trajectory_jsonl(const SearchResult& result);
/// iteration,evaluations,best_accuracy
std::string best_curve_csv(const SearchResult& result);

}  // namespace llmnas
