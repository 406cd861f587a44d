#pragma once

// Architecture encodings for the NAS-Bench-201 cell space and the three macro
// spaces (MobileNet / ShuffleNet / AutoFormer), with the cell-string grammar,
// canonical indexing, legality checks and JSON (de)serialization.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace llmnas {

// ---------------------------------------------------------------------------
// NAS-Bench-201 cell
// ---------------------------------------------------------------------------

/// Opcode values are the base-5 digits of the canonical index.
enum class OpKind : std::uint8_t {
  none = 0,
  skip_connect = 1,
  nor_conv_1x1 = 2,
  nor_conv_3x3 = 3,
  avg_pool_3x3 = 4,
};

inline constexpr std::size_t kNumOps = 5;
inline constexpr std::size_t kNumEdges = 6;
inline constexpr std::uint32_t kNb201Size = 15625;  // 5^6

inline constexpr std::array<OpKind, kNumOps> kAllOps = {
    OpKind::none, OpKind::skip_connect, OpKind::nor_conv_1x1, OpKind::nor_conv_3x3,
    OpKind::avg_pool_3x3};

std::string_view op_name(OpKind op) noexcept;
std::optional<OpKind> op_from_name(std::string_view name) noexcept;

/// Edge i connects kEdgeSource[i] -> kEdgeTarget[i]; order is
/// (0->1), (0->2), (1->2), (0->3), (1->3), (2->3).
inline constexpr std::array<int, kNumEdges> kEdgeSource = {0, 0, 1, 0, 1, 2};
inline constexpr std::array<int, kNumEdges> kEdgeTarget = {1, 2, 2, 3, 3, 3};

struct Nb201Arch {
  std::array<OpKind, kNumEdges> ops{};

  friend bool operator==(const Nb201Arch&, const Nb201Arch&) = default;
};

/// Parses `|op~0|+|op~0|op~1|+|op~0|op~1|op~2|`. Surrounding whitespace is
/// ignored. Throws Error{MalformedString | UnknownOp | WrongSourceIndex}.
Nb201Arch parse_nb201(std::string_view text);
std::string serialize_nb201(const Nb201Arch& arch);

std::uint32_t nb201_index(const Nb201Arch& arch) noexcept;
/// Throws Error{IndexOutOfRange} for index >= 15625.
Nb201Arch nb201_from_index(std::uint32_t index);
std::vector<Nb201Arch> enumerate_nb201();

// ---------------------------------------------------------------------------
// Macro spaces
// ---------------------------------------------------------------------------

enum class SpaceKind { nb201, mobilenet, shufflenet, autoformer_t, autoformer_s, autoformer_b };

std::string_view space_name(SpaceKind kind) noexcept;
/// Accepts the names produced by space_name ("nb201", "mobilenet", "autoformer-t", ...).
std::optional<SpaceKind> space_from_name(std::string_view name) noexcept;
bool is_autoformer(SpaceKind kind) noexcept;

inline constexpr std::size_t kMobileNetStages = 5;
inline constexpr std::size_t kMobileNetBlocksPerStage = 4;
inline constexpr std::size_t kMobileNetSlots = kMobileNetStages * kMobileNetBlocksPerStage;
inline constexpr std::size_t kShuffleNetBlocks = 20;

/// Fixed-length OFA encoding. Stage i activates the first depths[i] of its
/// four slots; the remaining kernel/expansion entries are carried but unused.
struct MobileNetArch {
  int resolution = 224;
  std::vector<int> depths;   // 5 entries
  std::vector<int> kernels;  // 20 entries
  std::vector<int> expands;  // 20 entries

  friend bool operator==(const MobileNetArch&, const MobileNetArch&) = default;
};

/// Block choices: 0/1/2 = shuffle unit with 3x3/5x5/7x7 kernel, 3 = Xception.
struct ShuffleNetArch {
  std::vector<int> blocks;  // 20 entries

  friend bool operator==(const ShuffleNetArch&, const ShuffleNetArch&) = default;
};

struct AutoFormerArch {
  int depth = 12;
  int embed_dim = 192;
  std::vector<int> heads;          // one per layer
  std::vector<double> mlp_ratios;  // one per layer

  friend bool operator==(const AutoFormerArch&, const AutoFormerArch&) = default;
};

using MacroArch = std::variant<MobileNetArch, ShuffleNetArch, AutoFormerArch>;
using Arch = std::variant<Nb201Arch, MobileNetArch, ShuffleNetArch, AutoFormerArch>;

/// Allowed value sets for one macro space.
struct MacroSpaceDef {
  SpaceKind kind = SpaceKind::mobilenet;
  // MobileNet
  std::vector<int> resolutions;
  std::vector<int> stage_depths;
  std::vector<int> kernel_sizes;
  std::vector<int> expand_ratios;
  // ShuffleNet
  std::vector<int> block_choices;
  // AutoFormer
  std::vector<int> depths;
  std::vector<int> embed_dims;
  std::vector<int> head_counts;
  std::vector<double> mlp_ratios;

  static MacroSpaceDef mobilenet();
  static MacroSpaceDef shufflenet();
  static MacroSpaceDef autoformer(SpaceKind scale);
  static MacroSpaceDef for_kind(SpaceKind kind);

  int max_depth() const;
};

struct Legality {
  bool legal = true;
  std::string dimension;  // first offending dimension, empty when legal

  static Legality ok() { return {}; }
  static Legality illegal(std::string dim) { return {false, std::move(dim)}; }
};

/// Throws Error{VariantMismatch} when the arch is not of the space's variant.
Legality validate_macro(const MacroArch& arch, const MacroSpaceDef& space);

/// Indices of the active MobileNet slots in ascending order.
std::vector<int> active_mobilenet_slots(const std::vector<int>& depths);

// ---------------------------------------------------------------------------
// JSON form: {"space": <name>, fields...}
// ---------------------------------------------------------------------------

nlohmann::json arch_to_json(const Arch& arch, SpaceKind kind);
/// Parses the JSON form; the "space" field must name `kind` (AutoFormer scales
/// must match exactly). Throws Error{MalformedString | VariantMismatch}.
Arch arch_from_json(const nlohmann::json& j, SpaceKind kind);

/// Canonical text key: the cell string for NB201, compact JSON otherwise.
std::string arch_key(const Arch& arch, SpaceKind kind);

}  // namespace llmnas
