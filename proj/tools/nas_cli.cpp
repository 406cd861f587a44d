// nas: ingest benchmark tables, run searches and ablations, run the blind
// ranking experiment.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmnas/baselines.hpp"
#include "llmnas/bench.hpp"
#include "llmnas/collab.hpp"
#include "llmnas/error.hpp"
#include "llmnas/llm_backend.hpp"
#include "llmnas/prompts.hpp"
#include "llmnas/ranking.hpp"
#include "llmnas/search_core.hpp"

namespace fs = std::filesystem;
using namespace llmnas;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Options {
  std::string table;
  std::string space = "nb201";
  std::string dataset = "cifar10";
  std::string split = "test";
  int budget = 100;
  int iters = 0;  // 0: method default
  int seeds = 1;
  std::uint64_t seed_base = 0;
  std::string constraint = "none";
  std::optional<double> target;
  std::string backend;
  double temperature = 0.6;
  std::optional<double> nav_temperature;
  std::optional<double> gen_temperature;
  bool nav_memory = true;
  bool gen_memory = false;
  std::optional<int> candidates;
  std::string prompts_dir;
  std::string out = "runs";
  int workers = 1;
  // baselines
  int population = 10;
  double elite_fraction = 0.5;
  double mutation_rate = 0.1;
  std::optional<int> offspring;
  double lr = 0.01;
  std::string optimizer = "adam";
};

void write_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  out << text;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

DatasetId dataset_id(const Options& o) {
  auto d = dataset_from_name(o.dataset);
  auto s = split_from_name(o.split);
  if (!d) throw Error(ErrorCode::InvalidConfig, "unknown dataset " + o.dataset);
  if (!s) throw Error(ErrorCode::InvalidConfig, "unknown split " + o.split);
  return {*d, *s};
}

SpaceKind space_kind(const Options& o) {
  auto k = space_from_name(o.space);
  if (!k) throw Error(ErrorCode::InvalidConfig, "unknown space " + o.space);
  return *k;
}

PromptSet prompt_set(const Options& o) {
  return o.prompts_dir.empty() ? PromptSet::builtin() : PromptSet::load(o.prompts_dir);
}

/// Shared state for one invocation: table, space and the output directory.
struct Context {
  Options opt;
  SpaceKind kind = SpaceKind::nb201;
  DatasetId dataset;
  std::optional<BenchTable> table;
  std::unique_ptr<SearchSpace> space;
  fs::path out;

  explicit Context(const Options& o) : opt(o), kind(space_kind(o)), dataset(dataset_id(o)), out(o.out) {
    if (kind == SpaceKind::nb201) {
      if (o.table.empty()) throw Error(ErrorCode::InvalidConfig, "--table is required for the nb201 space");
      table = load_benchmark(o.table);
    }
    space = make_space(kind);
    if (!o.backend.empty()) check_backend_spec(o.backend);
    fs::create_directories(out);
  }

  static void check_backend_spec(const std::string& spec) {
    if (spec == "remote" || (spec.rfind("scripted:", 0) == 0 && spec.size() > 9)) return;
    if (spec.rfind("oracle:", 0) == 0 && oracle_mode_from_name(spec.substr(7))) return;
    throw Error(ErrorCode::InvalidConfig, "backend must be remote, scripted:<path> or oracle:<mode>, got " + spec);
  }

  std::unique_ptr<Evaluator> evaluator(std::uint64_t seed) const {
    if (table) return std::make_unique<TableEvaluator>(*table, dataset);
    return std::make_unique<SurrogateEvaluator>(kind, seed);
  }

  std::unique_ptr<ChatBackend> backend(std::uint64_t seed) const {
    const auto& spec = opt.backend;
    if (spec.empty()) throw Error(ErrorCode::InvalidConfig, "--backend is required for LLM methods");
    if (spec == "remote") return std::make_unique<RemoteBackend>(RemoteConfig::from_env());
    if (spec.rfind("scripted:", 0) == 0) {
      auto path = spec.substr(9);
      if (auto p = path.find("{seed}"); p != std::string::npos) path.replace(p, 6, std::to_string(seed));
      return std::make_unique<ScriptedBackend>(ScriptedBackend::load(path));
    }
    if (spec.rfind("oracle:", 0) == 0) {
      auto mode = oracle_mode_from_name(spec.substr(7));
      if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown oracle mode in " + spec);
      if (!table) throw Error(ErrorCode::InvalidConfig, "oracle backends need an nb201 table");
      return std::make_unique<OracleBackend>(*table, dataset, *mode, seed);
    }
    throw Error(ErrorCode::InvalidConfig, "backend must be remote, scripted:<path> or oracle:<mode>");
  }

  std::vector<std::uint64_t> seed_list() const {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < opt.seeds; ++i) s.push_back(opt.seed_base + static_cast<std::uint64_t>(i));
    return s;
  }

  SearchConfig search_config(std::uint64_t seed, int default_iters) const {
    SearchConfig c;
    c.arch_budget = opt.budget;
    c.iteration_limit = opt.iters > 0 ? opt.iters : default_iters;
    c.target = opt.target;
    c.constraint = Constraint::parse(opt.constraint);
    c.dataset = dataset;
    c.seed = seed;
    c.validate();
    return c;
  }

  CollmConfig collm_config(std::uint64_t seed) const {
    CollmConfig c;
    c.search = search_config(seed, 20);
    c.memory = {opt.nav_memory, opt.gen_memory};
    c.candidates.fixed = opt.candidates;
    c.navigator_params.temperature = opt.nav_temperature.value_or(opt.temperature);
    c.generator_params.temperature = opt.gen_temperature.value_or(opt.temperature);
    c.validate();
    return c;
  }

  void write_manifest(std::string_view command, const nlohmann::json& config) const {
    nlohmann::ordered_json m;
    m["tool"] = "nas";
    m["version"] = kVersion;
    m["command"] = command;
    m["space"] = space_name(kind);
    m["dataset"] = to_string(dataset);
    m["table"] = opt.table;
    m["benchmark_digest"] = table ? hex_digest(table->digest()) : "";
    m["backend"] = opt.backend;
    m["seeds"] = seed_list();
    m["out"] = out.string();
    m["config"] = config;
    write_file(out / "manifest.json", m.dump(2) + "\n");
  }
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads; the first error
/// is rethrown after all threads finish.
template <typename Fn>
void parallel_for(int n, int workers, Fn fn) {
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto loop = [&] {
    for (int i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min(workers, n); ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

struct SeedRun {
  SearchResult result;
  nlohmann::json extra;  // history for LLM methods
};

SeedRun run_method(const Context& ctx, const std::string& method, std::uint64_t seed, const CollmConfig* override_cfg,
                   const fs::path& transcript) {
  auto eval = ctx.evaluator(seed);
  if (method == "rs") return {random_search(*ctx.space, *eval, ctx.search_config(seed, 1)), {}};
  if (method == "ea") {
    EaConfig ea;
    ea.population = ctx.opt.population;
    ea.iterations = ctx.opt.iters > 0 ? ctx.opt.iters : 10;
    ea.elite_fraction = ctx.opt.elite_fraction;
    ea.mutation_rate = ctx.opt.mutation_rate;
    ea.offspring = ctx.opt.offspring;
    return {evolutionary_search(*ctx.space, *eval, ctx.search_config(seed, 1), ea), {}};
  }
  if (method == "rl") {
    RlConfig rl;
    rl.learning_rate = ctx.opt.lr;
    if (ctx.opt.optimizer == "sgd") {
      rl.optimizer = PolicyOptimizer::sgd;
    } else if (ctx.opt.optimizer != "adam") {
      throw Error(ErrorCode::InvalidConfig, "optimizer must be adam or sgd");
    }
    return {rl_search(*ctx.space, *eval, ctx.search_config(seed, 1), rl), {}};
  }
  if (method == "collm" || method == "sillm") {
    const auto cfg = override_cfg ? *override_cfg : ctx.collm_config(seed);
    auto backend = ctx.backend(seed);
    TranscriptLog log(transcript);
    backend->set_transcript(&log);
    const auto prompts = prompt_set(ctx.opt);
    auto outcome = method == "collm" ? collm_search(*ctx.space, *eval, cfg, *backend, *backend, prompts)
                                     : sillm_search(*ctx.space, *eval, cfg, *backend, prompts);
    outcome.result.config["backend"] = backend->identity();
    return {std::move(outcome.result), history_to_json(outcome.history)};
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method " + method);
}

void write_run(const Context& ctx, const std::string& stem, const SeedRun& run) {
  auto j = result_to_json(run.result);
  if (!run.extra.is_null()) j["history"] = run.extra;
  write_file(ctx.out / (stem + ".json"), j.dump(2) + "\n");
  write_file(ctx.out / (stem + "_trajectory.jsonl"), trajectory_jsonl(run.result));
  write_file(ctx.out / (stem + "_curve.csv"), best_curve_csv(run.result));
}

std::vector<SearchResult> run_seeds(const Context& ctx, const std::string& method, const std::string& prefix,
                                    const std::function<std::optional<CollmConfig>(std::uint64_t)>& cfg = {}) {
  const auto seeds = ctx.seed_list();
  std::vector<SearchResult> results(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), ctx.opt.workers, [&](int i) {
    const auto seed = seeds[static_cast<std::size_t>(i)];
    const auto stem = prefix + "_seed" + std::to_string(seed);
    const auto c = cfg ? cfg(seed) : std::nullopt;
    auto run = run_method(ctx, method, seed, c ? &*c : nullptr, ctx.out / (stem + "_transcript.jsonl"));
    write_run(ctx, stem, run);
    results[static_cast<std::size_t>(i)] = std::move(run.result);
  });
  return results;
}

/// Partial results are still written; the exit code says a backend failed.
int report_aborts(const std::vector<SearchResult>& results) {
  int rc = 0;
  for (const auto& r : results) {
    if (!r.aborted) continue;
    std::cerr << "warning: seed " << r.config.value("seed", 0) << " aborted: " << r.abort_reason << "\n";
    rc = 3;
  }
  return rc;
}

std::string summary_block(const Context& ctx, const std::string& label, const std::vector<SearchResult>& results) {
  if (ctx.table) return summary_header() + "\n" + format_summary_row(label, summarize_runs(results, *ctx.table)) + "\n";
  std::vector<double> best;
  for (const auto& r : results) best.push_back(r.best_accuracy);
  const auto s = summarize(best);
  return "method  best surrogate accuracy (not a real accuracy)\n" + label + "  " + fixed(s.mean) + " ± " +
         fixed(s.std) + "\n";
}

// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& in, const std::string& out) {
  const auto table = load_benchmark(in);
  write_file(out, table.to_jsonl());
  std::cout << table.size() << " entries, digest " << hex_digest(table.digest()) << "\n";
  for (auto d : kAllDatasets) {
    const auto [arch, acc] = table.optimal({d, Split::test});
    std::cout << "  optimal " << dataset_name(d) << "/test " << fixed(acc) << "  " << serialize_nb201(arch) << "\n";
  }
  return 0;
}

int cmd_synth(const std::string& out, std::uint64_t seed) {
  const auto table = synthetic_table(seed);
  write_file(out, table.to_jsonl());
  std::cout << table.size() << " entries, digest " << hex_digest(table.digest()) << "\n";
  return 0;
}

int cmd_search(const Options& opt, const std::string& method) {
  Context ctx(opt);
  nlohmann::json cfg = ctx.search_config(opt.seed_base, method == "collm" || method == "sillm" ? 20 : 1).to_json();
  cfg["method"] = method;
  if (method == "collm" || method == "sillm") cfg["collm"] = ctx.collm_config(opt.seed_base).to_json();
  ctx.write_manifest("search " + method, cfg);

  const auto results = run_seeds(ctx, method, method);
  const int rc = report_aborts(results);
  const auto block = summary_block(ctx, method, results);
  write_file(ctx.out / (method + "_summary.txt"), block);
  std::cout << block;
  for (const auto& r : results) {
    std::cout << "  seed " << r.config.value("seed", 0) << ": best " << fixed(r.best_accuracy) << " after "
              << r.evaluations << " evaluations  " << r.best_arch.value_or("-") << "\n";
  }
  return rc;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad grid value '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty grid");
  return out;
}

int cmd_ablate(const Options& opt, const std::string& kind, const std::string& grid_text, const std::string& method) {
  Context ctx(opt);
  std::ostringstream report;
  int rc = 0;
  nlohmann::json cfg = ctx.collm_config(opt.seed_base).to_json();
  cfg["ablation"] = kind;

  if (kind == "memory") {
    ctx.write_manifest("ablate memory", cfg);
    report << "navigator_memory,generator_memory,mean_best,std_best,mean_evaluations\n";
    for (bool nav : {true, false}) {
      for (bool gen : {true, false}) {
        const std::string tag = std::string("mem_n") + (nav ? "1" : "0") + "_g" + (gen ? "1" : "0");
        auto results = run_seeds(ctx, method, tag, [&](std::uint64_t seed) {
          auto c = ctx.collm_config(seed);
          c.memory = {nav, gen};
          return std::optional(c);
        });
        rc = std::max(rc, report_aborts(results));
        std::vector<double> best, evals;
        for (const auto& r : results) {
          best.push_back(r.best_accuracy);
          evals.push_back(r.evaluations);
        }
        const auto s = summarize(best);
        report << (nav ? "on" : "off") << "," << (gen ? "on" : "off") << "," << fixed(s.mean) << "," << fixed(s.std)
               << "," << fixed(summarize(evals).mean, 1) << "\n";
      }
    }
  } else if (kind == "temperature") {
    const auto grid = parse_grid(grid_text);
    cfg["grid"] = grid;
    ctx.write_manifest("ablate temperature", cfg);
    report << "navigator_temperature,generator_temperature,mean_best,std_best\n";
    std::vector<double> finals;
    for (double tn : grid) {
      for (double tg : grid) {
        const std::string tag = "temp_n" + fixed(tn, 1) + "_g" + fixed(tg, 1);
        auto results = run_seeds(ctx, method, tag, [&](std::uint64_t seed) {
          auto c = ctx.collm_config(seed);
          c.navigator_params.temperature = tn;
          c.generator_params.temperature = tg;
          return std::optional(c);
        });
        rc = std::max(rc, report_aborts(results));
        std::vector<double> best;
        for (const auto& r : results) best.push_back(r.best_accuracy);
        const auto s = summarize(best);
        finals.push_back(s.mean);
        report << fixed(tn, 1) << "," << fixed(tg, 1) << "," << fixed(s.mean) << "," << fixed(s.std) << "\n";
      }
    }
    report << "# coefficient of variation over the grid: " << fixed(100.0 * coefficient_of_variation(finals), 4)
           << "%\n";
  } else {
    throw Error(ErrorCode::InvalidConfig, "ablation must be memory or temperature");
  }
  write_file(ctx.out / ("ablate_" + kind + ".csv"), report.str());
  std::cout << report.str();
  return rc;
}

int cmd_compare(const Options& opt) {
  Context ctx(opt);
  nlohmann::json cfg = ctx.collm_config(opt.seed_base).to_json();
  ctx.write_manifest("compare", cfg);
  const auto a = run_seeds(ctx, "collm", "collm");
  const auto b = run_seeds(ctx, "sillm", "sillm");
  const int rc = std::max(report_aborts(a), report_aborts(b));

  auto mean_curve = [](const std::vector<SearchResult>& rs, std::size_t len) {
    std::vector<double> out(len, 0.0);
    for (const auto& r : rs) {
      const auto c = r.best_curve();
      for (std::size_t i = 0; i < len; ++i) {
        out[i] += (c.empty() ? 0.0 : c[std::min(i, c.size() - 1)]) / static_cast<double>(rs.size());
      }
    }
    return out;
  };
  std::size_t len = 0;
  for (const auto* rs : {&a, &b}) {
    for (const auto& r : *rs) len = std::max(len, r.best_curve().size());
  }
  const auto ca = mean_curve(a, len), cb = mean_curve(b, len);
  std::string csv = "iteration,collm_best,sillm_best\n";
  for (std::size_t i = 0; i < len; ++i) csv += std::to_string(i + 1) + "," + fixed(ca[i]) + "," + fixed(cb[i]) + "\n";
  write_file(ctx.out / "compare_curve.csv", csv);
  std::cout << csv;
  return rc;
}

int cmd_poc(const Options& opt, std::size_t n, int trials, const std::string& temps) {
  Context ctx(opt);
  if (!ctx.table) throw Error(ErrorCode::InvalidConfig, "poc runs on the nb201 space");
  PocConfig cfg;
  cfg.dataset = ctx.dataset;
  cfg.n_archs = n;
  cfg.trials = trials;
  cfg.temperatures = parse_grid(temps);
  for (int i = 0; i < trials; ++i) cfg.seeds.push_back(opt.seed_base + static_cast<std::uint64_t>(i));
  ctx.write_manifest("poc", {{"n_archs", n}, {"trials", trials}, {"temperatures", cfg.temperatures}});

  auto backend = ctx.backend(opt.seed_base);
  TranscriptLog log(ctx.out / "poc_transcript.jsonl");
  backend->set_transcript(&log);
  const auto report = run_poc(*ctx.table, cfg, *backend, prompt_set(opt));
  write_file(ctx.out / "poc.csv", report.to_csv());
  std::cout << "kendall tau " << fixed(report.tau.mean, 3) << " ± " << fixed(report.tau.std, 3) << " over "
            << report.trials.size() - static_cast<std::size_t>(report.failed) << " trials, " << report.failed
            << " unparseable, top-1 " << fixed(100.0 * report.top1_rate, 1) << "%\n";
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool llm) {
  cmd->add_option("--table", o.table, "benchmark table (JSON lines)");
  cmd->add_option("--space", o.space, "nb201, mobilenet, shufflenet, autoformer-t|s|b")->capture_default_str();
  cmd->add_option("--dataset", o.dataset, "cifar10, cifar100, imagenet16-120")->capture_default_str();
  cmd->add_option("--split", o.split, "valid or test")->capture_default_str();
  cmd->add_option("--budget", o.budget, "architecture budget per run")->capture_default_str();
  cmd->add_option("--iters", o.iters, "iteration limit (0: method default)");
  cmd->add_option("--seeds", o.seeds, "number of seeds")->capture_default_str();
  cmd->add_option("--seed-base", o.seed_base, "first seed")->capture_default_str();
  cmd->add_option("--constraint", o.constraint, "none, flops:<M>, params:<M>")->capture_default_str();
  cmd->add_option("--target", o.target, "stop once this accuracy is reached");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", o.workers, "seeds run in parallel")->capture_default_str();
  if (!llm) {
    cmd->add_option("--population", o.population)->capture_default_str();
    cmd->add_option("--elite-fraction", o.elite_fraction)->capture_default_str();
    cmd->add_option("--mutation-rate", o.mutation_rate)->capture_default_str();
    cmd->add_option("--offspring", o.offspring, "EA children per generation (default: population)");
    cmd->add_option("--lr", o.lr)->capture_default_str();
    cmd->add_option("--optimizer", o.optimizer, "adam or sgd")->capture_default_str();
  }
  cmd->add_option("--backend", o.backend, "remote, scripted:<path>, oracle:<random|greedy|epsilon-greedy>");
  cmd->add_option("--temperature", o.temperature)->capture_default_str();
  cmd->add_option("--nav-temperature", o.nav_temperature);
  cmd->add_option("--gen-temperature", o.gen_temperature);
  cmd->add_option("--nav-memory", o.nav_memory, "navigator keeps its session")->capture_default_str();
  cmd->add_option("--gen-memory", o.gen_memory, "generator keeps its session")->capture_default_str();
  cmd->add_option("--candidates", o.candidates, "fixed candidates per iteration");
  cmd->add_option("--prompts", o.prompts_dir, "directory overriding prompt templates");
}

int exit_code(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::Config: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Backend: return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Architecture search driver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Options opt;
  std::string in_path, out_path, method, ablation, grid = "0,0.2,0.4,0.6,0.8,1.0", temps = "0.6";
  std::uint64_t synth_seed = 0;
  std::size_t poc_n = 10;
  int poc_trials = 40;

  auto* ingest = app.add_subcommand("ingest", "validate a benchmark table and print its digest");
  ingest->add_option("input", in_path)->required();
  ingest->add_option("output", out_path)->required();

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic 15,625-entry table");
  synth->add_option("output", out_path)->required();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  auto* search = app.add_subcommand("search", "run one search method over several seeds");
  search->add_option("method", method, "rs, rl, ea, collm, sillm")
      ->required()
      ->check(CLI::IsMember({"rs", "rl", "ea", "collm", "sillm"}));
  add_common(search, opt, false);

  auto* ablate = app.add_subcommand("ablate", "memory or temperature grid for the LLM loop");
  ablate->add_option("kind", ablation, "memory or temperature")
      ->required()
      ->check(CLI::IsMember({"memory", "temperature"}));
  ablate->add_option("--grid", grid, "temperature values, comma separated")->capture_default_str();
  std::string ablate_method = "collm";
  ablate->add_option("--method", ablate_method, "collm or sillm")->check(CLI::IsMember({"collm", "sillm"}));
  add_common(ablate, opt, true);

  auto* compare = app.add_subcommand("compare", "paired best-vs-iteration curves for collm and sillm");
  add_common(compare, opt, true);

  auto* poc = app.add_subcommand("poc", "blind ranking trials scored with Kendall's tau");
  poc->add_option("--n", poc_n, "architectures per trial")->capture_default_str();
  poc->add_option("--trials", poc_trials)->capture_default_str();
  poc->add_option("--temperatures", temps, "comma separated, cycled over trials")->capture_default_str();
  add_common(poc, opt, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*ingest) return cmd_ingest(in_path, out_path);
    if (*synth) return cmd_synth(out_path, synth_seed);
    if (*search) return cmd_search(opt, method);
    if (*ablate) return cmd_ablate(opt, ablation, grid, ablate_method);
    if (*compare) return cmd_compare(opt);
    if (*poc) return cmd_poc(opt, poc_n, poc_trials, temps);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
