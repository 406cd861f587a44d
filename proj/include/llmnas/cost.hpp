#pragma once

// Analytic FLOPs / parameter counts over fixed backbone layouts.
//
// Counting conventions (shared by every estimator in this file):
//   * Only multiply-accumulates of convolutions, linear layers and attention
//     matmuls are counted. Normalization, activations, pooling, softmax, bias
//     adds and residual additions contribute no FLOPs.
//   * One MAC is two FLOPs: `flops = 2 * macs`. Note that published MobileNet /
//     ShuffleNet / ViT "FLOPs" figures are usually MAC counts; compare against
//     `macs` (or halve `flops`) when reading them.
//   * Parameters count conv/linear weights and biases, BatchNorm/LayerNorm
//     affine pairs (2 per channel), and learned tokens/position embeddings.
//   * Spatial sizes after a stride-s layer are ceil(size / s).
//   * `flops` and `params` are reported in mega-units (1e6).

#include <vector>

#include "llmnas/archspace.hpp"

namespace llmnas {

struct CostEstimate {
  double flops = 0.0;   // mega-FLOPs (2 x MACs)
  double params = 0.0;  // mega-parameters

  double macs() const { return flops / 2.0; }
};

/// Raw integer tally before the mega-unit conversion.
struct OpTally {
  double macs = 0.0;
  double params = 0.0;

  OpTally& operator+=(const OpTally& o) {
    macs += o.macs;
    params += o.params;
    return *this;
  }
  CostEstimate to_estimate() const { return {2.0 * macs / 1e6, params / 1e6}; }
};

// --- NAS-Bench-201 -------------------------------------------------------------
//
// Backbone: 3x3 stem (3 -> 16, BN) at 32x32; three stages of 5 cells at
// C = 16/32/64 and 32/16/8 px, joined by stride-2 residual blocks; BN, global
// pooling and a linear classifier. Cell conv edges are ReLU-Conv-BN C -> C.

struct Nb201Layout {
  int image_size = 32;
  int num_classes = 10;
  int stem_channels = 16;
  int cells_per_stage = 5;
};

CostEstimate estimate_cost(const Nb201Arch& arch, const Nb201Layout& layout = {});

// --- MobileNet (OFA MobileNetV3 backbone) ---------------------------------------
//
// Widths below are at width_mult 1.0; the default layout scales them by 1.2.
//   first conv 3x3/2, 3 -> 16, BN
//   first block: depthwise 3x3 16 + pointwise 16 -> 16 (no expansion, no SE)
//   5 stages, out channels 24/40/80/112/160, first-block stride 2/2/2/1/2,
//     squeeze-excite in stages 2, 4, 5; MBConv = 1x1 expand (mid =
//     make_divisible(in * e, 8)), k x k depthwise, optional SE (reduce =
//     make_divisible(mid / 4, 8), with biases), 1x1 project; all with BN.
//   final expand 1x1 160 -> 960 (BN), global pool, 1x1 960 -> 1280 (no BN,
//     no bias), linear 1280 -> 1000.
// Depth 0 for a stage is accepted here (the stage is skipped) although it is
// not a legal architecture.

struct MobileNetLayout {
  int num_classes = 1000;
  /// Every width (stem, stages, head) is make_divisible(w * width_mult, 8).
  /// 1.2 is the supernet the published OFA subnets were drawn from.
  double width_mult = 1.2;
};

CostEstimate estimate_cost(const MobileNetArch& arch, const MobileNetLayout& layout = {});
int make_divisible(double value, int divisor);

// --- ShuffleNet (SPOS one-shot ShuffleNetV2 backbone) ---------------------------
//
//   224 px input, first conv 3x3/2 3 -> 16 (BN); 4 stages with out channels
//   64/160/320/640 and 4/4/8/4 blocks, first block of each stage stride 2;
//   conv_last 1x1 640 -> 1024 (BN); global pool; linear 1024 -> 1000 (no bias).
//   Stride-1 blocks process half the channels (channel split); stride-2 blocks
//   add a projection branch (k x k depthwise + 1x1) on the full input.

CostEstimate estimate_cost(const ShuffleNetArch& arch);

// --- Transformers (AutoFormer ViT backbone) --------------------------------------
//
//   patch embedding conv (patch x patch, stride patch) in_channels -> E;
//   class token + position embeddings; per layer: LN, qkv linear E -> 3*h*d,
//   scores Q K^T and A V (h * N * N * d MACs each), projection h*d -> E, LN,
//   MLP E -> int(E * r) -> E; final LN and a linear head on the class token.
//   d is the per-head dimension (64 in AutoFormer).

struct TransformerLayout {
  int image_size = 224;
  int patch_size = 16;
  int in_channels = 3;
  int num_classes = 1000;
  int embed_dim = 192;
  int head_dim = 64;
  std::vector<int> heads;          // per layer
  std::vector<double> mlp_ratios;  // per layer
};

CostEstimate estimate_cost(const TransformerLayout& layout);
CostEstimate estimate_cost(const AutoFormerArch& arch);

/// Dispatches on the variant. Throws Error{UnsupportedSpace} if the arch does
/// not belong to `kind`.
CostEstimate estimate_cost(const Arch& arch, SpaceKind kind);

}  // namespace llmnas
