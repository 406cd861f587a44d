#pragma once

// Independent reference implementations and fixtures used by the unit tests
// and the acceptance binary. Nothing here calls the code it checks.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "llmnas/bench.hpp"

namespace oracle {

/// Tau from an explicit pair count over rank positions.
inline double brute_tau(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> ra(n), rb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ra[a[i]] = i;
    rb[b[i]] = i;
  }
  long conc = 0, disc = 0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const long da = static_cast<long>(ra[x]) - static_cast<long>(ra[y]);
      const long db = static_cast<long>(rb[x]) - static_cast<long>(rb[y]);
      (da * db > 0 ? conc : disc) += 1;
    }
  }
  return static_cast<double>(conc - disc) / (static_cast<double>(n) * (n - 1) / 2.0);
}

/// Base-5 digits written out by hand, edge 0 least significant.
inline std::uint32_t manual_index(const std::array<int, 6>& ops) {
  return ops[0] + 5 * ops[1] + 25 * ops[2] + 125 * ops[3] + 625 * ops[4] + 3125 * ops[5];
}

inline int conv3_count(const llmnas::Nb201Arch& a) {
  int n = 0;
  for (auto op : a.ops) n += op == llmnas::OpKind::nor_conv_3x3;
  return n;
}

/// Accuracy = number of nor_conv_3x3 edges, on every dataset and split.
inline llmnas::BenchTable conv3_table() {
  return llmnas::BenchTable::from_function([](const llmnas::Nb201Arch& a) {
    const double v = conv3_count(a);
    llmnas::BenchEntry e;
    for (auto& p : e.accuracy) p = {v, v};
    return e;
  });
}

/// Ten cells with known cifar10/test top-1 and their rank among them.
struct RankedCell {
  int id;
  const char* arch;
  double top1;
  int rank;
};

inline const std::array<RankedCell, 10>& ranked_cells() {
  static const std::array<RankedCell, 10> rows = {{
      {1, "|none~0|+|none~0|none~1|+|none~0|none~1|skip_connect~2|", 10.00, 10},
      {2, "|none~0|+|none~0|none~1|+|nor_conv_1x1~0|nor_conv_1x1~1|skip_connect~2|", 88.67, 7},
      {3, "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|+|skip_connect~0|nor_conv_3x3~1|nor_conv_1x1~2|", 94.37, 1},
      {4, "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|+|nor_conv_3x3~0|nor_conv_1x1~1|nor_conv_3x3~2|", 92.98, 2},
      {5, "|avg_pool_3x3~0|+|none~0|none~1|+|skip_connect~0|none~1|none~2|", 86.63, 8},
      {6, "|none~0|+|nor_conv_1x1~0|avg_pool_3x3~1|+|nor_conv_1x1~0|nor_conv_3x3~1|nor_conv_1x1~2|", 89.53, 6},
      {7, "|nor_conv_1x1~0|+|nor_conv_3x3~0|nor_conv_1x1~1|+|nor_conv_1x1~0|skip_connect~1|skip_connect~2|", 92.36, 3},
      {8, "|avg_pool_3x3~0|+|none~0|avg_pool_3x3~1|+|skip_connect~0|avg_pool_3x3~1|none~2|", 78.71, 9},
      {9, "|nor_conv_3x3~0|+|none~0|avg_pool_3x3~1|+|nor_conv_3x3~0|skip_connect~1|avg_pool_3x3~2|", 92.03, 4},
      {10, "|nor_conv_3x3~0|+|avg_pool_3x3~0|avg_pool_3x3~1|+|nor_conv_3x3~0|none~1|skip_connect~2|", 90.75, 5},
  }};
  return rows;
}

/// IDs best first, read off the ranking column.
inline std::vector<int> ranked_cells_order() { return {3, 4, 7, 9, 10, 6, 2, 5, 8, 1}; }

/// Mean and population std recomputed with a two-pass sum.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {static_cast<double>(m), static_cast<double>(std::sqrt(static_cast<double>(ss / v.size())))};
}

/// Per-tensor-op MAC tally for a ViT with the given per-layer heads and MLP
/// ratios (head width 64), written as a flat list of matmul shapes.
struct Matmul {
  double m, k, n;  // (m x k) @ (k x n)
};

inline double vit_macs(int image, int patch, int in_ch, int embed, const std::vector<int>& heads,
                       const std::vector<double>& ratios, int classes) {
  const double tokens_no_cls = (image / patch) * (image / patch);
  const double N = tokens_no_cls + 1;
  std::vector<Matmul> ops;
  ops.push_back({tokens_no_cls, static_cast<double>(in_ch * patch * patch), static_cast<double>(embed)});
  for (std::size_t l = 0; l < heads.size(); ++l) {
    const double hd = heads[l] * 64.0;
    ops.push_back({N, static_cast<double>(embed), hd});  // q
    ops.push_back({N, static_cast<double>(embed), hd});  // k
    ops.push_back({N, static_cast<double>(embed), hd});  // v
    for (int h = 0; h < heads[l]; ++h) {
      ops.push_back({N, 64.0, N});  // q k^T
      ops.push_back({N, N, 64.0});  // attn v
    }
    ops.push_back({N, hd, static_cast<double>(embed)});  // proj
    const double hidden = static_cast<int>(embed * ratios[l]);
    ops.push_back({N, static_cast<double>(embed), hidden});
    ops.push_back({N, hidden, static_cast<double>(embed)});
  }
  ops.push_back({1, static_cast<double>(embed), static_cast<double>(classes)});
  double macs = 0;
  for (const auto& op : ops) macs += op.m * op.k * op.n;
  return macs;
}

}  // namespace oracle
