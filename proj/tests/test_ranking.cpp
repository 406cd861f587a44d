#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "llmnas/error.hpp"
#include "llmnas/ranking.hpp"
#include "oracles.hpp"

using namespace llmnas;

namespace {

using Perm = std::vector<std::size_t>;

Perm iota(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

ErrorCode tau_error(const Perm& a, const Perm& b) {
  try {
    kendall_tau(a, b);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE();
  return ErrorCode::EmptyInput;
}

RankingSample ranked_sample() {
  RankingSample s;
  for (const auto& r : oracle::ranked_cells()) {
    s.archs.push_back(parse_nb201(r.arch));
    s.accuracy.push_back(r.top1);
  }
  return s;
}

std::string ids_reply(const Perm& order) {
  std::string out = "Predicted ranking:\n";
  for (std::size_t r = 0; r < order.size(); ++r)
    out += std::to_string(r + 1) + ". Architecture " + std::to_string(order[r] + 1) + "\n";
  return out;
}

}  // namespace

TEST(Tau, IdentityAndReverse) {
  for (std::size_t n : {2u, 3u, 10u, 1000u}) {
    auto a = iota(n), r = a;
    std::reverse(r.begin(), r.end());
    EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(a, r), -1.0);
  }
}

TEST(Tau, ExhaustiveSmallPermutationsMatchBruteForce) {
  for (std::size_t n = 2; n <= 6; ++n) {
    auto a = iota(n);
    do {
      auto b = iota(n);
      do {
        ASSERT_NEAR(kendall_tau(a, b), oracle::brute_tau(a, b), 1e-12);
      } while (std::next_permutation(b.begin(), b.end()));
    } while (std::next_permutation(a.begin(), a.end()) && n <= 4);
  }
}

TEST(Tau, RandomPairsMatchBruteForce) {
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 5 + static_cast<std::size_t>(i % 60);
    auto a = iota(n), b = iota(n);
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    ASSERT_NEAR(kendall_tau(a, b), oracle::brute_tau(a, b), 1e-12) << n;
  }
}

TEST(Tau, AntisymmetryAndRelabeling) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 20);
    auto a = iota(n), b = iota(n), label = iota(n);
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    std::shuffle(label.begin(), label.end(), rng);
    auto rb = b;
    std::reverse(rb.begin(), rb.end());
    EXPECT_NEAR(kendall_tau(a, rb), -kendall_tau(a, b), 1e-12);
    Perm la(n), lb(n);
    for (std::size_t k = 0; k < n; ++k) {
      la[k] = label[a[k]];
      lb[k] = label[b[k]];
    }
    EXPECT_NEAR(kendall_tau(la, lb), kendall_tau(a, b), 1e-12);
    EXPECT_NEAR(kendall_tau(a, b), kendall_tau(b, a), 1e-12);
  }
}

TEST(Tau, Errors) {
  EXPECT_EQ(tau_error({0, 1}, {0, 1, 2}), ErrorCode::LengthMismatch);
  EXPECT_EQ(tau_error({0}, {0}), ErrorCode::LengthMismatch);
  EXPECT_EQ(tau_error({0, 0, 1}, {0, 1, 2}), ErrorCode::NotAPermutation);
  EXPECT_EQ(tau_error({0, 1, 3}, {0, 1, 2}), ErrorCode::NotAPermutation);
}

TEST(Sample, DistinctCellsAndAccuracies) {
  // On conv3 accuracies take only 7 values, so n = 7 forces resampling.
  const auto table = oracle::conv3_table();
  Rng rng(3);
  const auto s = sample_for_ranking(table, {}, 7, rng);
  ASSERT_EQ(s.archs.size(), 7u);
  std::set<double> acc(s.accuracy.begin(), s.accuracy.end());
  EXPECT_EQ(acc.size(), 7u);
  const auto order = s.true_order();
  for (std::size_t i = 1; i < order.size(); ++i) EXPECT_GT(s.accuracy[order[i - 1]], s.accuracy[order[i]]);
}

TEST(Sample, RenderNumbersFromOne) {
  const auto s = ranked_sample();
  const auto text = render_sample(s);
  EXPECT_NE(text.find("\nArchitecture 1: " + std::string(oracle::ranked_cells()[0].arch)), std::string::npos);
  EXPECT_NE(text.find("\nArchitecture 10: " + std::string(oracle::ranked_cells()[9].arch)), std::string::npos);
}

TEST(RankedCells, GroundTruthRankingScoresOne) {
  const auto s = ranked_sample();
  Perm reply;
  for (int id : oracle::ranked_cells_order()) reply.push_back(static_cast<std::size_t>(id - 1));
  EXPECT_EQ(s.true_order(), reply);
  // The ranking column agrees with the ID order.
  for (const auto& r : oracle::ranked_cells()) EXPECT_EQ(reply[static_cast<std::size_t>(r.rank - 1)] + 1, static_cast<std::size_t>(r.id));

  ScriptedBackend b({ids_reply(reply)});
  const auto t = run_trial(s, b, PromptSet::builtin(), {});
  EXPECT_FALSE(t.failed);
  EXPECT_DOUBLE_EQ(t.tau, 1.0);
  EXPECT_TRUE(t.top1_correct);
}

TEST(Parse, AcceptsSeveralReplyShapes) {
  const auto s = ranked_sample();
  const auto truth = s.true_order();
  std::string bare, cells, arrow = "Final answer: ";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bare += std::to_string(i + 1) + ". " + std::to_string(truth[i] + 1) + "\n";
    cells += "- " + serialize_nb201(s.archs[truth[i]]) + "\n";
    arrow += (i ? " > " : "") + std::string("Arch #") + std::to_string(truth[i] + 1);
  }
  for (const auto& reply : {ids_reply(truth), bare, cells, arrow, "<think>arch 1 looks bad</think>" + ids_reply(truth)}) {
    ScriptedBackend b({reply});
    const auto t = run_trial(s, b, PromptSet::builtin(), {});
    ASSERT_FALSE(t.failed) << reply << t.error;
    EXPECT_EQ(t.predicted, truth) << reply;
  }
}

TEST(Parse, IncompleteRankingFails) {
  const auto s = ranked_sample();
  try {
    parse_ranking("Architecture 3, Architecture 4", s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnparseableRanking);
  }
  ScriptedBackend b({"I cannot rank these."});
  const auto t = run_trial(s, b, PromptSet::builtin(), {});
  EXPECT_TRUE(t.failed);
}

TEST(Trial, PromptPairRendered) {
  const auto s = ranked_sample();
  ScriptedBackend b({ids_reply(s.true_order())});
  TranscriptLog log;
  b.set_transcript(&log);
  SamplingParams p;
  p.temperature = 0.3;
  run_trial(s, b, PromptSet::builtin(), p, 4, 99);
  const auto& e = log.entries().at(0);
  EXPECT_EQ(e["channel"], "ranker");
  EXPECT_EQ(e["params"]["temperature"], 0.3);
  const std::string user = e["messages"][1]["content"];
  EXPECT_NE(user.find(render_sample(s)), std::string::npos);
  const std::string sys = e["messages"][0]["content"];
  EXPECT_NE(sys.find("nor_conv_3x3"), std::string::npos);
}

TEST(Poc, OracleRankerIsPerfect) {
  const auto table = synthetic_table(8);
  OracleBackend b(table, {}, OracleMode::greedy, 1);
  PocConfig cfg;
  cfg.trials = 10;
  const auto r = run_poc(table, cfg, b);
  EXPECT_EQ(r.failed, 0);
  EXPECT_DOUBLE_EQ(r.tau.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.tau.std, 0.0);
  EXPECT_DOUBLE_EQ(r.top1_rate, 1.0);
}

TEST(Poc, RandomRankerCentersOnZero) {
  const auto table = synthetic_table(8);
  OracleBackend b(table, {}, OracleMode::random, 1);
  PocConfig cfg;  // n = 10, 40 trials
  const auto r = run_poc(table, cfg, b);
  EXPECT_EQ(r.trials.size(), 40u);
  EXPECT_EQ(r.failed, 0);
  EXPECT_LT(std::abs(r.tau.mean), 0.15) << r.tau.mean;
  std::vector<double> taus;
  for (const auto& t : r.trials) taus.push_back(t.tau);
  const auto [m, sd] = oracle::mean_std(taus);
  EXPECT_NEAR(r.tau.mean, m, 1e-12);
  EXPECT_NEAR(r.tau.std, sd, 1e-12);
}

TEST(Poc, FailedTrialsExcludedAndCsv) {
  const auto table = synthetic_table(8);
  PocConfig cfg;
  cfg.trials = 3;
  cfg.n_archs = 4;
  cfg.seeds = {11, 12};
  cfg.temperatures = {0.2, 0.8};
  ScriptedBackend b;
  for (int i = 0; i < 3; ++i) {
    Rng rng(cfg.seeds[static_cast<std::size_t>(i) % 2]);
    const auto s = sample_for_ranking(table, {}, 4, rng);
    b.push(i == 1 ? "no idea" : ids_reply(s.true_order()));
  }
  const auto r = run_poc(table, cfg, b);
  EXPECT_EQ(r.failed, 1);
  EXPECT_DOUBLE_EQ(r.tau.mean, 1.0);
  EXPECT_EQ(r.trials[1].temperature, 0.8);
  EXPECT_EQ(r.trials[2].seed, 11u);
  const auto csv = r.to_csv();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial_id,seed,tau,top1_correct,raw_reply_digest");
  std::getline(in, line);
  EXPECT_EQ(line, "0,11,1.000000,1," + hex_digest(fnv1a64(ids_reply(r.trials[0].sample.true_order()))));
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 6), "1,12,,") << line;
}

TEST(Poc, ConfigValidation) {
  PocConfig c;
  c.temperatures.clear();
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_archs = 1;
  EXPECT_THROW(c.validate(), Error);
}
