#include "llmnas/cost.hpp"

#include <array>
#include <cmath>

#include "llmnas/error.hpp"

namespace llmnas {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct Conv {
  int out_size;  // output spatial side
  int in_channels;
  int out_channels;
  int kernel;
  int groups = 1;
  bool bias = false;
  bool bn = true;
};

OpTally conv(const Conv& c) {
  const double per_pos = static_cast<double>(c.in_channels / c.groups) * c.out_channels * c.kernel * c.kernel;
  OpTally t;
  t.macs = static_cast<double>(c.out_size) * c.out_size * per_pos;
  t.params = per_pos + (c.bias ? c.out_channels : 0) + (c.bn ? 2.0 * c.out_channels : 0.0);
  return t;
}

OpTally depthwise(int out_size, int channels, int kernel) {
  return conv({out_size, channels, channels, kernel, channels});
}

OpTally linear(double tokens, int in, int out, bool bias = true) {
  return {tokens * in * out, static_cast<double>(in) * out + (bias ? out : 0)};
}

}  // namespace

// ---------------------------------------------------------------------------

CostEstimate estimate_cost(const Nb201Arch& arch, const Nb201Layout& layout) {
  OpTally total;
  int size = layout.image_size;
  int channels = layout.stem_channels;
  total += conv({size, 3, channels, 3});

  for (int stage = 0; stage < 3; ++stage) {
    if (stage > 0) {
      const int out_channels = channels * 2;
      const int out_size = ceil_div(size, 2);
      total += conv({out_size, channels, out_channels, 3});                // conv_a, stride 2
      total += conv({out_size, out_channels, out_channels, 3});            // conv_b
      total += conv({out_size, channels, out_channels, 1, 1, false, false});  // shortcut
      channels = out_channels;
      size = out_size;
    }
    OpTally cell;
    for (auto op : arch.ops) {
      if (op == OpKind::nor_conv_1x1) cell += conv({size, channels, channels, 1});
      if (op == OpKind::nor_conv_3x3) cell += conv({size, channels, channels, 3});
    }
    for (int i = 0; i < layout.cells_per_stage; ++i) total += cell;
  }

  total.params += 2.0 * channels;  // final BN
  total += linear(1, channels, layout.num_classes);
  return total.to_estimate();
}

// ---------------------------------------------------------------------------

int make_divisible(double value, int divisor) {
  int v = std::max(divisor, static_cast<int>(value + divisor / 2.0) / divisor * divisor);
  if (v < 0.9 * value) v += divisor;
  return v;
}

CostEstimate estimate_cost(const MobileNetArch& arch, const MobileNetLayout& layout) {
  static constexpr std::array<int, kMobileNetStages> kWidths = {24, 40, 80, 112, 160};
  static constexpr std::array<int, kMobileNetStages> kStrides = {2, 2, 2, 1, 2};
  static constexpr std::array<bool, kMobileNetStages> kSqueeze = {false, true, false, true, true};
  const auto width = [&](int base) { return make_divisible(base * layout.width_mult, 8); };

  OpTally total;
  int size = ceil_div(arch.resolution, 2);
  int channels = width(16);
  total += conv({size, 3, channels, 3});
  total += depthwise(size, channels, 3);
  total += conv({size, channels, channels, 1});

  for (std::size_t stage = 0; stage < kMobileNetStages; ++stage) {
    const int depth = stage < arch.depths.size() ? arch.depths[stage] : 0;
    for (int b = 0; b < depth && b < static_cast<int>(kMobileNetBlocksPerStage); ++b) {
      const auto slot = stage * kMobileNetBlocksPerStage + static_cast<std::size_t>(b);
      const int kernel = arch.kernels.at(slot);
      const int expand = arch.expands.at(slot);
      const int out_channels = width(kWidths[stage]);
      const int stride = b == 0 ? kStrides[stage] : 1;
      const int out_size = ceil_div(size, stride);
      const int mid = make_divisible(static_cast<double>(channels) * expand, 8);

      total += conv({size, channels, mid, 1});
      total += depthwise(out_size, mid, kernel);
      if (kSqueeze[stage]) {
        const int reduced = make_divisible(mid / 4.0, 8);
        total += conv({1, mid, reduced, 1, 1, true, false});
        total += conv({1, reduced, mid, 1, 1, true, false});
      }
      total += conv({out_size, mid, out_channels, 1});

      channels = out_channels;
      size = out_size;
    }
  }

  const int expand_width = width(960);
  const int last_width = width(1280);
  total += conv({size, channels, expand_width, 1});
  total += conv({1, expand_width, last_width, 1, 1, false, false});
  total += linear(1, last_width, layout.num_classes);
  return total.to_estimate();
}

// ---------------------------------------------------------------------------

namespace {

OpTally shuffle_block(int choice, int in_size, int input_channels, int out_channels, int stride) {
  const int out_size = ceil_div(in_size, stride);
  // Stride-1 blocks see half the channels after the split.
  const int inp = stride == 1 ? input_channels / 2 : input_channels;
  const int mid = out_channels / 2;
  const int outputs = out_channels - inp;

  OpTally t;
  if (choice == 3) {  // Xception: three depthwise-separable pairs
    t += depthwise(out_size, inp, 3);
    t += conv({out_size, inp, mid, 1});
    t += depthwise(out_size, mid, 3);
    t += conv({out_size, mid, mid, 1});
    t += depthwise(out_size, mid, 3);
    t += conv({out_size, mid, outputs, 1});
  } else {
    const int kernel = 3 + 2 * choice;
    t += conv({in_size, inp, mid, 1});
    t += depthwise(out_size, mid, kernel);
    t += conv({out_size, mid, outputs, 1});
  }
  if (stride == 2) {
    const int kernel = choice == 3 ? 3 : 3 + 2 * choice;
    t += depthwise(out_size, inp, kernel);
    t += conv({out_size, inp, inp, 1});
  }
  return t;
}

}  // namespace

CostEstimate estimate_cost(const ShuffleNetArch& arch) {
  static constexpr std::array<int, 4> kWidths = {64, 160, 320, 640};
  static constexpr std::array<int, 4> kRepeats = {4, 4, 8, 4};

  OpTally total;
  int size = 112;
  int channels = 16;
  total += conv({size, 3, channels, 3});

  std::size_t block = 0;
  for (std::size_t stage = 0; stage < kWidths.size(); ++stage) {
    for (int r = 0; r < kRepeats[stage]; ++r, ++block) {
      const int stride = r == 0 ? 2 : 1;
      total += shuffle_block(arch.blocks.at(block), size, channels, kWidths[stage], stride);
      size = ceil_div(size, stride);
      channels = kWidths[stage];
    }
  }

  total += conv({size, channels, 1024, 1});
  total += linear(1, 1024, 1000, false);
  return total.to_estimate();
}

// ---------------------------------------------------------------------------

CostEstimate estimate_cost(const TransformerLayout& layout) {
  const int grid = layout.image_size / layout.patch_size;
  const double patches = static_cast<double>(grid) * grid;
  const double tokens = patches + 1;
  const int e = layout.embed_dim;

  OpTally total;
  total += conv({grid, layout.in_channels, e, layout.patch_size, 1, true, false});
  total.params += e + tokens * e;  // class token + position embeddings

  for (std::size_t l = 0; l < layout.heads.size(); ++l) {
    const int inner = layout.heads[l] * layout.head_dim;
    const int hidden = static_cast<int>(e * layout.mlp_ratios.at(l));
    total.params += 2.0 * e;  // LN before attention
    total += linear(tokens, e, 3 * inner);
    total.macs += 2.0 * layout.heads[l] * tokens * tokens * layout.head_dim;  // QK^T and AV
    total += linear(tokens, inner, e);
    total.params += 2.0 * e;  // LN before MLP
    total += linear(tokens, e, hidden);
    total += linear(tokens, hidden, e);
  }

  total.params += 2.0 * e;  // final LN
  total += linear(1, e, layout.num_classes);
  return total.to_estimate();
}

CostEstimate estimate_cost(const AutoFormerArch& arch) {
  TransformerLayout layout;
  layout.embed_dim = arch.embed_dim;
  layout.heads.assign(arch.heads.begin(), arch.heads.begin() + std::min<std::size_t>(arch.heads.size(), arch.depth));
  layout.mlp_ratios = arch.mlp_ratios;
  return estimate_cost(layout);
}

CostEstimate estimate_cost(const Arch& arch, SpaceKind kind) {
  return std::visit(
      [&](const auto& a) -> CostEstimate {
        using T = std::decay_t<decltype(a)>;
        bool ok = false;
        if constexpr (std::is_same_v<T, Nb201Arch>) ok = kind == SpaceKind::nb201;
        if constexpr (std::is_same_v<T, MobileNetArch>) ok = kind == SpaceKind::mobilenet;
        if constexpr (std::is_same_v<T, ShuffleNetArch>) ok = kind == SpaceKind::shufflenet;
        if constexpr (std::is_same_v<T, AutoFormerArch>) ok = is_autoformer(kind);
        if (!ok) {
          throw Error(ErrorCode::UnsupportedSpace,
                      "no cost model for this arch in " + std::string(space_name(kind)));
        }
        return estimate_cost(a);
      },
      arch);
}

}  // namespace llmnas
