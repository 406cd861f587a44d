#include "llmnas/ranking.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include "llmnas/error.hpp"

namespace llmnas {

namespace {

// Counts inversions of v by merge sort.
std::uint64_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& tmp, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

}  // namespace

double kendall_tau(std::span<const std::size_t> order_a, std::span<const std::size_t> order_b) {
  const std::size_t n = order_a.size();
  if (order_b.size() != n) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(n) + " vs " + std::to_string(order_b.size()));
  }
  if (n < 2) throw Error(ErrorCode::LengthMismatch, "need at least 2 items");

  std::unordered_map<std::size_t, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pos_b.emplace(order_b[i], i).second) throw Error(ErrorCode::NotAPermutation, "repeated label in second order");
  }
  std::vector<std::size_t> seq(n);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = pos_b.find(order_a[i]);
    if (it == pos_b.end()) throw Error(ErrorCode::NotAPermutation, "label sets differ");
    if (seen[it->second]) throw Error(ErrorCode::NotAPermutation, "repeated label in first order");
    seen[it->second] = true;
    seq[i] = it->second;
  }
  std::vector<std::size_t> tmp(n);
  const auto discordant = static_cast<double>(count_inversions(seq, tmp, 0, n));
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return (pairs - 2.0 * discordant) / pairs;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> RankingSample::true_order() const {
  std::vector<std::size_t> order(accuracy.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return accuracy[a] > accuracy[b]; });
  return order;
}

RankingSample sample_for_ranking(const BenchTable& table, DatasetId dataset, std::size_t n, Rng& rng) {
  if (n < 2 || n > kNb201Size) throw Error(ErrorCode::InvalidConfig, "sample size must be in [2, 15625]");
  std::uniform_int_distribution<std::uint32_t> any(0, kNb201Size - 1);
  std::set<std::uint32_t> indices;
  std::set<double> accs;
  RankingSample s;
  int tries = 0;
  while (s.archs.size() < n) {
    if (++tries > 1000 * static_cast<int>(n)) {
      throw Error(ErrorCode::InvalidConfig, "cannot find enough architectures with distinct accuracies");
    }
    const auto i = any(rng);
    const auto arch = nb201_from_index(i);
    const double acc = table.lookup(arch, dataset);
    if (indices.count(i) || accs.count(acc)) continue;
    indices.insert(i);
    accs.insert(acc);
    s.archs.push_back(arch);
    s.accuracy.push_back(acc);
  }
  return s;
}

std::string render_sample(const RankingSample& sample) {
  std::string out;
  for (std::size_t i = 0; i < sample.archs.size(); ++i) {
    out += "\nArchitecture " + std::to_string(i + 1) + ": " + serialize_nb201(sample.archs[i]);
  }
  return out;
}

namespace {

// Keeps first occurrences of 1-based ids; a full permutation or nothing.
std::optional<std::vector<std::size_t>> as_permutation(const std::vector<std::size_t>& ids, std::size_t n) {
  std::vector<std::size_t> out;
  std::vector<bool> seen(n + 1, false);
  for (auto id : ids) {
    if (id < 1 || id > n || seen[id]) continue;
    seen[id] = true;
    out.push_back(id - 1);
  }
  if (out.size() != n) return std::nullopt;
  return out;
}

}  // namespace

std::vector<std::size_t> parse_ranking(std::string_view reply, const RankingSample& sample) {
  const std::size_t n = sample.archs.size();
  const std::string text(reply);

  static const std::regex kMention(R"((?:architecture|arch|id)\s*(?:number|no\.?|#)?\s*[:#]?\s*(\d+))",
                                   std::regex::icase);
  std::vector<std::size_t> ids;
  for (std::sregex_iterator it(text.begin(), text.end(), kMention), end; it != end; ++it) {
    ids.push_back(std::stoul((*it)[1].str()));
  }
  if (auto p = as_permutation(ids, n)) return *p;

  ids.clear();
  for (const auto& x : extract_nb201(text)) {
    if (!x.arch) continue;
    const auto& a = std::get<Nb201Arch>(*x.arch);
    for (std::size_t i = 0; i < n; ++i) {
      if (sample.archs[i] == a) ids.push_back(i + 1);
    }
  }
  if (auto p = as_permutation(ids, n)) return *p;

  ids.clear();
  static const std::regex kInt(R"(\d+)");
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::size_t> nums;
    for (std::sregex_iterator it(line.begin(), line.end(), kInt), end; it != end; ++it) {
      if (it->str().size() < 6) nums.push_back(std::stoul(it->str()));
    }
    if (nums.size() == 2) {
      ids.push_back(nums.back());  // "1. 7" is rank then id
    } else {
      ids.insert(ids.end(), nums.begin(), nums.end());
    }
  }
  if (auto p = as_permutation(ids, n)) return *p;

  throw Error(ErrorCode::UnparseableRanking, "no complete ranking of " + std::to_string(n) + " architectures");
}

RankingTrial run_trial(const RankingSample& sample, ChatBackend& backend, const PromptSet& prompts,
                       const SamplingParams& params, int trial_id, std::uint64_t seed) {
  RankingTrial trial;
  trial.trial_id = trial_id;
  trial.seed = seed;
  trial.temperature = params.temperature;
  trial.sample = sample;

  PromptVars vars{{"search_space_description", prompts.space_description(SpaceKind::nb201)},
                  {"archs", render_sample(sample)}};
  ChatRequest req;
  req.messages = {{Role::system, render(prompts.get("ranker_system"), vars)},
                  {Role::user, render(prompts.get("ranker_user"), vars)}};
  req.params = params;
  req.channel = std::string(kRanker);
  req.iteration = trial_id;
  const auto reply = backend.chat(req);
  trial.reply_digest = hex_digest(fnv1a64(reply.raw));

  try {
    trial.predicted = parse_ranking(reply.text, sample);
  } catch (const Error& e) {
    trial.failed = true;
    trial.error = e.what();
    return trial;
  }
  const auto truth = sample.true_order();
  trial.tau = kendall_tau(trial.predicted, truth);
  trial.top1_correct = trial.predicted.front() == truth.front();
  return trial;
}

void PocConfig::validate() const {
  if (n_archs < 2) throw Error(ErrorCode::InvalidConfig, "n_archs must be >= 2");
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (temperatures.empty()) throw Error(ErrorCode::InvalidConfig, "temperature list is empty");
  for (double t : temperatures) {
    if (t < 0.0) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  }
}

PocReport run_poc(const BenchTable& table, const PocConfig& config, ChatBackend& backend, const PromptSet& prompts) {
  config.validate();
  PocReport report;
  std::vector<double> taus;
  int top1 = 0;
  for (int i = 0; i < config.trials; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::uint64_t seed = config.seeds.empty() ? idx : config.seeds[idx % config.seeds.size()];
    SamplingParams params;
    params.temperature = config.temperatures[idx % config.temperatures.size()];
    Rng rng(seed);
    auto sample = sample_for_ranking(table, config.dataset, config.n_archs, rng);
    auto trial = run_trial(sample, backend, prompts, params, i, seed);
    if (trial.failed) {
      ++report.failed;
    } else {
      taus.push_back(trial.tau);
      top1 += trial.top1_correct;
    }
    report.trials.push_back(std::move(trial));
  }
  if (!taus.empty()) {
    report.tau = summarize(taus);
    report.top1_rate = static_cast<double>(top1) / static_cast<double>(taus.size());
  }
  return report;
}

std::string PocReport::to_csv() const {
  std::string out = "trial_id,seed,tau,top1_correct,raw_reply_digest\n";
  char buf[32];
  for (const auto& t : trials) {
    std::string tau;
    if (!t.failed) {
      std::snprintf(buf, sizeof buf, "%.6f", t.tau);
      tau = buf;
    }
    out += std::to_string(t.trial_id) + "," + std::to_string(t.seed) + "," + tau + "," +
           (t.failed ? "" : (t.top1_correct ? "1" : "0")) + "," + t.reply_digest + "\n";
  }
  return out;
}

}  // namespace llmnas
