#include <gtest/gtest.h>

#include "llmnas/cost.hpp"
#include "llmnas/error.hpp"
#include "llmnas/space.hpp"
#include "oracles.hpp"

using namespace llmnas;

TEST(Cost, AutoFormerTParamsNearSixMillion) {
  AutoFormerArch a{13, 192, {3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 4, 3, 4},
                   {3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 4.0, 3.5, 4.0, 3.5}};
  const auto c = estimate_cost(a);
  EXPECT_NEAR(c.params, 6.0, 0.6);
  // The published 1366 is a MAC count; our flops are 2x MACs.
  EXPECT_NEAR(c.macs(), 1366.0, 0.1 * 1366.0);
}

TEST(Cost, ToyTransformerMatchesMatmulTally) {
  TransformerLayout t;
  t.image_size = 32;
  t.patch_size = 8;
  t.in_channels = 3;
  t.num_classes = 10;
  t.embed_dim = 48;
  t.heads = {2, 3};
  t.mlp_ratios = {2.0, 3.5};
  const double want = oracle::vit_macs(32, 8, 3, 48, {2, 3}, {2.0, 3.5}, 10);
  EXPECT_DOUBLE_EQ(estimate_cost(t).flops, 2.0 * want / 1e6);
}

TEST(Cost, ToyTransformerParamsByHand) {
  TransformerLayout t;
  t.image_size = 16;
  t.patch_size = 8;
  t.num_classes = 5;
  t.embed_dim = 8;
  t.heads = {1};
  t.mlp_ratios = {2.0};
  // patch conv 3*8*8*8 + 8 bias; cls 8; pos 5*8; LN 16; qkv 8*192+192;
  // proj 64*8+8; LN 16; fc1 8*16+16; fc2 16*8+8; final LN 16; head 8*5+5.
  const double want = (1536 + 8) + 8 + 40 + 16 + (1536 + 192) + (512 + 8) + 16 + (128 + 16) + (128 + 8) + 16 + 45;
  EXPECT_DOUBLE_EQ(estimate_cost(t).params * 1e6, want);
}

TEST(Cost, ZeroDepthStagesLeaveStemAndHead) {
  MobileNetArch a{224, {0, 0, 0, 0, 0}, std::vector<int>(20, 3), std::vector<int>(20, 3)};
  // 224 -> 112 after the stride-2 first conv.
  const double s = 112.0 * 112.0;
  const double first_conv = s * 3 * 16 * 9;
  const double first_block = s * 16 * 9 + s * 16 * 16;
  // final expand from the first block's 16 channels (no stage ran), at 112 px.
  const double final_expand = s * 16 * 960;
  const double feature_mix = 960.0 * 1280;
  const double classifier = 1280.0 * 1000;
  const double macs = first_conv + first_block + final_expand + feature_mix + classifier;
  EXPECT_NEAR(estimate_cost(a, MobileNetLayout{.width_mult = 1.0}).macs() * 1e6, macs, 1e-6 * macs);
}

TEST(Cost, WidthMultiplierRoundsToEight) {
  MobileNetArch a{224, {0, 0, 0, 0, 0}, std::vector<int>(20, 3), std::vector<int>(20, 3)};
  // 16 * 1.2 = 19.2 rounds to 16, which is under 90% of 19.2, so 24.
  // 960 * 1.2 = 1152, 1280 * 1.2 = 1536.
  const double s = 112.0 * 112.0;
  const double macs = s * 3 * 24 * 9 + s * 24 * 9 + s * 24 * 24 + s * 24 * 1152 + 1152.0 * 1536 + 1536.0 * 1000;
  EXPECT_NEAR(estimate_cost(a).macs() * 1e6, macs, 1e-6 * macs);
}

TEST(Cost, OfaTNearReferenceMacs) {
  MobileNetArch a{176,
                  {2, 2, 3, 3, 4},
                  {5, 3, 3, 3, 5, 3, 3, 3, 3, 3, 7, 3, 3, 7, 3, 3, 3, 3, 3, 3},
                  {3, 4, 3, 3, 3, 4, 3, 3, 4, 4, 3, 3, 4, 4, 3, 3, 6, 6, 6, 4}};
  EXPECT_NEAR(estimate_cost(a).macs(), 199.0, 0.15 * 199.0);
}

TEST(Cost, InactiveSlotsIgnored) {
  MobileNetArch a{192, {2, 2, 2, 2, 2}, std::vector<int>(20, 3), std::vector<int>(20, 3)};
  auto b = a;
  for (int slot : {2, 3, 6, 7, 10, 11, 14, 15, 18, 19}) {
    b.kernels[slot] = 7;
    b.expands[slot] = 6;
  }
  EXPECT_EQ(estimate_cost(a).flops, estimate_cost(b).flops);
  EXPECT_EQ(estimate_cost(a).params, estimate_cost(b).params);
}

TEST(Cost, Nb201NoneCellIsBackboneOnly) {
  const auto none = estimate_cost(nb201_from_index(0));
  const auto conv = estimate_cost(parse_nb201("|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|+"
                                              "|nor_conv_3x3~0|nor_conv_3x3~1|nor_conv_3x3~2|"));
  EXPECT_GT(conv.flops, none.flops);
  // One 3x3 C->C conv with BN per edge: 6 edges x 5 cells x 3 stages.
  double params = 0;
  for (int c : {16, 32, 64}) params += 5 * 6 * (9.0 * c * c + 2 * c);
  EXPECT_NEAR((conv.params - none.params) * 1e6, params, 1e-6);
  // Largest NB201 cell is ~1.53M params in the benchmark's own count.
  EXPECT_NEAR(conv.params, 1.53, 0.05);
}

TEST(Cost, MonotoneInSizeDimensions) {
  Rng rng(9);
  auto mb = make_space(SpaceKind::mobilenet);
  const auto def = MacroSpaceDef::mobilenet();
  for (int i = 0; i < 200; ++i) {
    auto a = std::get<MobileNetArch>(mb->random(rng));
    const auto base = estimate_cost(a);
    for (std::size_t slot = 0; slot < 20; ++slot) {
      auto b = a;
      if (b.kernels[slot] < 7) {
        b.kernels[slot] += 2;
        EXPECT_GE(estimate_cost(b).flops, base.flops);
        EXPECT_GE(estimate_cost(b).params, base.params);
      }
      b = a;
      if (b.expands[slot] < 6) {
        b.expands[slot] = b.expands[slot] == 3 ? 4 : 6;
        EXPECT_GE(estimate_cost(b).flops, base.flops);
        EXPECT_GE(estimate_cost(b).params, base.params);
      }
    }
    for (std::size_t s = 0; s < 5; ++s) {
      auto b = a;
      if (b.depths[s] < 4) {
        ++b.depths[s];
        EXPECT_GE(estimate_cost(b).flops, base.flops);
        EXPECT_GE(estimate_cost(b).params, base.params);
      }
    }
    auto b = a;
    if (b.resolution < 224) {
      b.resolution += 16;
      EXPECT_GE(estimate_cost(b).flops, base.flops);
    }
  }

  auto af = make_space(SpaceKind::autoformer_s);
  for (int i = 0; i < 200; ++i) {
    auto a = std::get<AutoFormerArch>(af->random(rng));
    const auto base = estimate_cost(a);
    auto b = a;
    if (b.embed_dim < 448) {
      b.embed_dim += 64;
      EXPECT_GE(estimate_cost(b).flops, base.flops);
      EXPECT_GE(estimate_cost(b).params, base.params);
    }
    b = a;
    if (b.depth < 14) {
      ++b.depth;
      b.heads.push_back(5);
      b.mlp_ratios.push_back(3.0);
      EXPECT_GE(estimate_cost(b).flops, base.flops);
    }
  }
}

TEST(Cost, DispatchRejectsWrongSpace) {
  try {
    estimate_cost(Arch{nb201_from_index(5)}, SpaceKind::mobilenet);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedSpace);
  }
}

TEST(Cost, MakeDivisible) {
  EXPECT_EQ(make_divisible(16 * 3, 8), 48);
  EXPECT_EQ(make_divisible(20, 8), 24);
  EXPECT_EQ(make_divisible(4, 8), 8);
  EXPECT_EQ(make_divisible(30, 8), 32);
}

TEST(Cost, SposSubnetNearReferenceMacs) {
  ShuffleNetArch a{{0, 0, 3, 3, 3, 2, 1, 3, 3, 1, 1, 1, 1, 3, 3, 3, 3, 3, 3, 3}};
  EXPECT_NEAR(estimate_cost(a).macs(), 325.0, 0.15 * 325.0);
}
