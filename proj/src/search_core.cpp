#include "llmnas/search_core.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "llmnas/error.hpp"

namespace llmnas {

Evaluation TableEvaluator::evaluate(const Arch& arch) const {
  const auto* cell = std::get_if<Nb201Arch>(&arch);
  if (!cell) throw Error(ErrorCode::UnsupportedSpace, "table evaluator only serves nb201 cells");
  return {table_->lookup(*cell, dataset_), estimate_cost(*cell)};
}

std::string TableEvaluator::describe() const {
  return "table:" + to_string(dataset_) + ":" + hex_digest(table_->digest());
}

Evaluation SurrogateEvaluator::evaluate(const Arch& arch) const {
  const auto cost = estimate_cost(arch, kind_);
  // Saturating in compute; ceilings roughly follow the published range of
  // each space so constraint trade-offs look plausible.
  double lo = 60.0, hi = 80.0, scale = 300.0;
  switch (kind_) {
    case SpaceKind::mobilenet: lo = 65.0, hi = 81.0, scale = 250.0; break;
    case SpaceKind::shufflenet: lo = 66.0, hi = 76.0, scale = 300.0; break;
    case SpaceKind::autoformer_t: lo = 68.0, hi = 78.0, scale = 1300.0; break;
    case SpaceKind::autoformer_s: lo = 76.0, hi = 84.0, scale = 4800.0; break;
    case SpaceKind::autoformer_b: lo = 78.0, hi = 85.0, scale = 11000.0; break;
    case SpaceKind::nb201: lo = 10.0, hi = 94.0, scale = 100.0; break;
  }
  const double saturation = 1.0 - std::exp(-cost.macs() / scale);
  const auto h = fnv1a64(arch_key(arch, kind_) + "#" + std::to_string(seed_));
  const double jitter = static_cast<double>(h % 1000003) / 1000003.0 - 0.5;  // [-0.5, 0.5)
  return {lo + (hi - lo) * saturation + jitter, cost};
}

std::string SurrogateEvaluator::describe() const {
  return "surrogate:" + std::string(space_name(kind_)) + ":" + std::to_string(seed_);
}

// ---------------------------------------------------------------------------

Constraint Constraint::parse(std::string_view text) {
  if (text.empty() || text == "none") return {};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidConfig, "constraint must be 'none' or <metric>:<value>");
  }
  const auto metric = text.substr(0, colon);
  Constraint c;
  if (metric == "flops") {
    c.metric = CostMetric::flops;
  } else if (metric == "params") {
    c.metric = CostMetric::params;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown constraint metric '" + std::string(metric) + "'");
  }
  try {
    std::size_t used = 0;
    const std::string value(text.substr(colon + 1));
    c.bound = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad constraint value in '" + std::string(text) + "'");
  }
  if (!(c.bound > 0.0)) throw Error(ErrorCode::InvalidConfig, "constraint bound must be > 0");
  return c;
}

std::string Constraint::to_string() const {
  if (metric == CostMetric::none) return "none";
  std::ostringstream os;
  os << (metric == CostMetric::flops ? "flops:" : "params:") << bound;
  return os.str();
}

bool check_constraint(const CostEstimate& cost, const Constraint& constraint) noexcept {
  switch (constraint.metric) {
    case CostMetric::none: return true;
    case CostMetric::flops: return cost.flops <= constraint.bound;
    case CostMetric::params: return cost.params <= constraint.bound;
  }
  return false;
}

// ---------------------------------------------------------------------------

std::string_view EvalRecord::status() const {
  if (!legal) return "ILLEGAL";
  if (duplicate) return "DUPLICATE";
  return "LEGAL";
}

void SearchConfig::validate() const {
  if (arch_budget < 1) throw Error(ErrorCode::InvalidConfig, "arch_budget must be >= 1");
  if (iteration_limit < 1) throw Error(ErrorCode::InvalidConfig, "iteration_limit must be >= 1");
  if (constraint.metric != CostMetric::none && !(constraint.bound > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "constraint bound must be > 0");
  }
}

nlohmann::json SearchConfig::to_json() const {
  nlohmann::json j;
  j["arch_budget"] = arch_budget;
  j["iteration_limit"] = iteration_limit;
  j["target"] = target ? nlohmann::json(*target) : nlohmann::json(nullptr);
  j["constraint"] = constraint.to_string();
  j["dataset"] = std::string(dataset_name(dataset.dataset));
  j["split"] = std::string(split_name(dataset.split));
  j["seed"] = seed;
  return j;
}

std::vector<double> SearchResult::best_curve() const {
  std::vector<double> curve(static_cast<std::size_t>(std::max(iterations, 0)), 0.0);
  double best = 0.0;
  std::size_t ri = 0;
  for (std::size_t it = 1; it <= curve.size(); ++it) {
    while (ri < trajectory.size() && trajectory[ri].iteration <= static_cast<int>(it)) {
      const auto& r = trajectory[ri++];
      if (r.feasible && *r.accuracy > best) best = *r.accuracy;
    }
    curve[it - 1] = best;
  }
  return curve;
}

// ---------------------------------------------------------------------------

void Archive::insert(const EvalRecord& record) {
  if (index_.count(record.arch)) return;
  index_.emplace(record.arch, records_.size());
  records_.push_back(record);
}

const EvalRecord* Archive::find(const std::string& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &records_[it->second];
}

SearchSession::SearchSession(const SearchSpace& space, const Evaluator& evaluator, SearchConfig config)
    : space_(&space), evaluator_(&evaluator), config_(std::move(config)) {
  config_.validate();
}

EvalRecord SearchSession::submit(const Arch& arch, int iteration) {
  if (exhausted()) {
    throw Error(ErrorCode::BudgetExhausted, std::to_string(config_.arch_budget) + " evaluations used");
  }
  ++counters_.generated;

  EvalRecord rec;
  rec.iteration = iteration;
  const auto legality = space_->validate(arch);
  if (!legality.legal) {
    // Illegal archs may not serialize canonically; fall back to JSON text.
    rec.arch = space_->key(arch);
    rec.legal = false;
    rec.note = legality.dimension;
    ++counters_.invalid;
    trajectory_.push_back(rec);
    return rec;
  }

  rec.arch = space_->key(arch);
  if (archive_.contains(rec.arch)) {
    rec.duplicate = true;
    ++counters_.duplicate;
    trajectory_.push_back(rec);
    return rec;
  }

  const auto result = evaluator_->evaluate(arch);
  rec.accuracy = result.accuracy;
  rec.cost = result.cost;
  rec.feasible = check_constraint(result.cost, config_.constraint);
  ++counters_.evaluated;
  archive_.insert(rec);
  trajectory_.push_back(rec);

  if (rec.feasible && (!best_arch_ || result.accuracy > best_accuracy_)) {
    best_accuracy_ = result.accuracy;
    best_arch_ = rec.arch;
    best_cost_ = result.cost;
  }
  return rec;
}

EvalRecord SearchSession::reject(std::string text, std::string reason, int iteration) {
  ++counters_.generated;
  ++counters_.invalid;
  EvalRecord rec;
  rec.arch = std::move(text);
  rec.iteration = iteration;
  rec.legal = false;
  rec.note = std::move(reason);
  trajectory_.push_back(rec);
  return rec;
}

bool SearchSession::target_reached() const {
  return config_.target && best_arch_ && best_accuracy_ >= *config_.target;
}

SearchResult SearchSession::finish(std::string method, int iterations) const {
  SearchResult r;
  r.method = std::move(method);
  r.space = space_->kind();
  r.best_arch = best_arch_;
  r.best_accuracy = best_accuracy_;
  r.best_cost = best_cost_;
  r.evaluations = static_cast<int>(archive_.size());
  r.iterations = iterations;
  r.counters = counters_;
  r.trajectory = trajectory_;
  r.config = config_.to_json();
  r.config["evaluator"] = evaluator_->describe();
  r.config["space"] = std::string(space_->name());
  return r;
}

// ---------------------------------------------------------------------------

MeanStd summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to summarize");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

double coefficient_of_variation(std::span<const double> values) {
  const auto s = summarize(values);
  return s.mean == 0.0 ? 0.0 : s.std / s.mean;
}

BenchSummary summarize_runs(std::span<const SearchResult> results, const BenchTable& table) {
  if (results.empty()) throw Error(ErrorCode::EmptyInput, "no runs to summarize");
  BenchSummary out;
  out.runs = static_cast<int>(results.size());
  for (auto d : kAllDatasets) {
    for (auto split : {Split::valid, Split::test}) {
      std::vector<double> values;
      for (const auto& r : results) {
        if (!r.best_arch) {
          values.push_back(0.0);
          continue;
        }
        values.push_back(table.lookup(parse_nb201(*r.best_arch), {d, split}));
      }
      auto& slot = split == Split::valid ? out.valid : out.test;
      slot[static_cast<std::size_t>(d)] = summarize(values);
    }
  }
  return out;
}

std::string summary_header() {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s | %-15s %-15s | %-15s %-15s | %-15s %-15s", "Method", "C10 valid",
                "C10 test", "C100 valid", "C100 test", "IN16 valid", "IN16 test");
  return buf;
}

std::string format_summary_row(std::string_view label, const BenchSummary& s) {
  auto cell = [](const MeanStd& m) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.std);
    return std::string(buf);
  };
  char buf[320];
  std::snprintf(buf, sizeof buf, "%-10.*s | %-16s %-16s | %-16s %-16s | %-16s %-16s", static_cast<int>(label.size()),
                label.data(), cell(s.valid[0]).c_str(), cell(s.test[0]).c_str(), cell(s.valid[1]).c_str(),
                cell(s.test[1]).c_str(), cell(s.valid[2]).c_str(), cell(s.test[2]).c_str());
  return buf;
}

nlohmann::json record_to_json(const EvalRecord& r) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["arch"] = r.arch;
  j["status"] = std::string(r.status());
  j["accuracy"] = r.accuracy ? nlohmann::ordered_json(*r.accuracy) : nlohmann::ordered_json(nullptr);
  if (r.cost) {
    j["flops"] = r.cost->flops;
    j["params"] = r.cost->params;
  } else {
    j["flops"] = nullptr;
    j["params"] = nullptr;
  }
  j["legal"] = r.legal;
  j["duplicate"] = r.duplicate;
  j["feasible"] = r.feasible;
  if (!r.note.empty()) j["note"] = r.note;
  return nlohmann::json::parse(j.dump());
}

nlohmann::json result_to_json(const SearchResult& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["space"] = std::string(space_name(r.space));
  j["best_arch"] = r.best_arch ? nlohmann::json(*r.best_arch) : nlohmann::json(nullptr);
  j["best_accuracy"] = r.best_accuracy;
  if (r.best_cost) j["best_cost"] = {{"flops", r.best_cost->flops}, {"params", r.best_cost->params}};
  j["evaluations"] = r.evaluations;
  j["iterations"] = r.iterations;
  j["counters"] = {{"generated", r.counters.generated},
                   {"invalid", r.counters.invalid},
                   {"duplicate", r.counters.duplicate},
                   {"evaluated", r.counters.evaluated}};
  j["early_stopped"] = r.early_stopped;
  j["aborted"] = r.aborted;
  if (r.aborted) j["abort_reason"] = r.abort_reason;
  j["config"] = r.config;
  j["best_curve"] = r.best_curve();
  auto& traj = j["trajectory"] = nlohmann::json::array();
  for (const auto& rec : r.trajectory) traj.push_back(record_to_json(rec));
  return j;
}

std::string trajectory_jsonl(const SearchResult& result) {
  std::string out;
  for (const auto& rec : result.trajectory) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

std::string best_curve_csv(const SearchResult& result) {
  std::string out = "iteration,evaluations,best_accuracy\n";
  const auto curve = result.best_curve();
  int evaluated = 0;
  std::size_t ri = 0;
  for (std::size_t it = 1; it <= curve.size(); ++it) {
    while (ri < result.trajectory.size() && result.trajectory[ri].iteration <= static_cast<int>(it)) {
      if (result.trajectory[ri].evaluated()) ++evaluated;
      ++ri;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu,%d,%.4f\n", it, evaluated, curve[it - 1]);
    out += buf;
  }
  return out;
}

}  // namespace llmnas
