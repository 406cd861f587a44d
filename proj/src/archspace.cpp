#include "llmnas/archspace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "llmnas/error.hpp"

namespace llmnas {

namespace {

constexpr std::array<std::string_view, kNumOps> kOpNames = {
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedString, why); }

template <typename T>
bool contains(const std::vector<T>& values, const T& v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

std::string slot_name(std::string_view what, std::size_t i) {
  return std::string(what) + " slot " + std::to_string(i);
}

}  // namespace

std::string_view op_name(OpKind op) noexcept { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<OpKind> op_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumOps; ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

Nb201Arch parse_nb201(std::string_view text) {
  const auto body = trim(text);
  const auto sections = split(body, '+');
  if (sections.size() != 3) {
    malformed("expected 3 '+'-separated sections, got " + std::to_string(sections.size()));
  }

  // Structure first, then tokens left to right.
  std::array<std::vector<std::string_view>, 3> tokens;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto sec = sections[s];
    if (sec.size() < 2 || sec.front() != '|' || sec.back() != '|') {
      malformed("section " + std::to_string(s + 1) + " must be delimited by '|'");
    }
    tokens[s] = split(sec.substr(1, sec.size() - 2), '|');
    if (tokens[s].size() != s + 1) {
      malformed("section " + std::to_string(s + 1) + " must hold " + std::to_string(s + 1) +
                " edge(s), got " + std::to_string(tokens[s].size()));
    }
  }

  Nb201Arch arch;
  std::size_t edge = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t pos = 0; pos < tokens[s].size(); ++pos, ++edge) {
      const auto tok = tokens[s][pos];
      const auto tilde = tok.find('~');
      if (tilde == std::string_view::npos || tok.find('~', tilde + 1) != std::string_view::npos) {
        malformed("edge token '" + std::string(tok) + "' must have the form op~index");
      }
      const auto name = tok.substr(0, tilde);
      const auto suffix = tok.substr(tilde + 1);
      if (suffix.empty() ||
          !std::all_of(suffix.begin(), suffix.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
        malformed("edge token '" + std::string(tok) + "' must have the form op~index");
      }
      const auto op = op_from_name(name);
      if (!op) throw Error(ErrorCode::UnknownOp, "'" + std::string(name) + "'");
      std::size_t source = 0;
      const auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), source);
      if (ec != std::errc{} || source != pos) {
        throw Error(ErrorCode::WrongSourceIndex,
                    "edge " + std::to_string(pos + 1) + " into node " + std::to_string(s + 1) +
                        " must come from node " + std::to_string(pos) + ", got ~" +
                        std::string(suffix));
      }
      arch.ops[edge] = *op;
    }
  }
  return arch;
}

std::string serialize_nb201(const Nb201Arch& arch) {
  std::string out;
  out.reserve(96);
  std::size_t edge = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (s > 0) out += '+';
    out += '|';
    for (std::size_t pos = 0; pos <= s; ++pos, ++edge) {
      out += op_name(arch.ops[edge]);
      out += '~';
      out += static_cast<char>('0' + pos);
      out += '|';
    }
  }
  return out;
}

std::uint32_t nb201_index(const Nb201Arch& arch) noexcept {
  std::uint32_t index = 0;
  std::uint32_t place = 1;
  for (auto op : arch.ops) {
    index += static_cast<std::uint32_t>(op) * place;
    place *= kNumOps;
  }
  return index;
}

Nb201Arch nb201_from_index(std::uint32_t index) {
  if (index >= kNb201Size) {
    throw Error(ErrorCode::IndexOutOfRange, std::to_string(index) + " not in [0, 15624]");
  }
  Nb201Arch arch;
  for (auto& op : arch.ops) {
    op = static_cast<OpKind>(index % kNumOps);
    index /= kNumOps;
  }
  return arch;
}

std::vector<Nb201Arch> enumerate_nb201() {
  std::vector<Nb201Arch> all;
  all.reserve(kNb201Size);
  for (std::uint32_t i = 0; i < kNb201Size; ++i) all.push_back(nb201_from_index(i));
  return all;
}

// ---------------------------------------------------------------------------

std::string_view space_name(SpaceKind kind) noexcept {
  switch (kind) {
    case SpaceKind::nb201: return "nb201";
    case SpaceKind::mobilenet: return "mobilenet";
    case SpaceKind::shufflenet: return "shufflenet";
    case SpaceKind::autoformer_t: return "autoformer-t";
    case SpaceKind::autoformer_s: return "autoformer-s";
    case SpaceKind::autoformer_b: return "autoformer-b";
  }
  return "?";
}

std::optional<SpaceKind> space_from_name(std::string_view name) noexcept {
  for (auto k : {SpaceKind::nb201, SpaceKind::mobilenet, SpaceKind::shufflenet,
                 SpaceKind::autoformer_t, SpaceKind::autoformer_s, SpaceKind::autoformer_b}) {
    if (space_name(k) == name) return k;
  }
  return std::nullopt;
}

bool is_autoformer(SpaceKind kind) noexcept {
  return kind == SpaceKind::autoformer_t || kind == SpaceKind::autoformer_s ||
         kind == SpaceKind::autoformer_b;
}

MacroSpaceDef MacroSpaceDef::mobilenet() {
  MacroSpaceDef d;
  d.kind = SpaceKind::mobilenet;
  d.resolutions = {160, 176, 192, 208, 224};
  d.stage_depths = {2, 3, 4};
  d.kernel_sizes = {3, 5, 7};
  d.expand_ratios = {3, 4, 6};
  return d;
}

MacroSpaceDef MacroSpaceDef::shufflenet() {
  MacroSpaceDef d;
  d.kind = SpaceKind::shufflenet;
  d.block_choices = {0, 1, 2, 3};
  return d;
}

MacroSpaceDef MacroSpaceDef::autoformer(SpaceKind scale) {
  MacroSpaceDef d;
  d.kind = scale;
  d.mlp_ratios = {3.0, 3.5, 4.0};
  switch (scale) {
    case SpaceKind::autoformer_t:
      d.depths = {12, 13, 14};
      d.embed_dims = {192, 216, 240};
      d.head_counts = {3, 4};
      break;
    case SpaceKind::autoformer_s:
      d.depths = {12, 13, 14};
      d.embed_dims = {320, 384, 448};
      d.head_counts = {5, 6, 7};
      break;
    case SpaceKind::autoformer_b:
      d.depths = {14, 15, 16};
      d.embed_dims = {528, 576, 624};
      d.head_counts = {8, 9, 10};
      break;
    default:
      throw Error(ErrorCode::UnsupportedSpace, std::string(space_name(scale)) + " is not an AutoFormer scale");
  }
  return d;
}

MacroSpaceDef MacroSpaceDef::for_kind(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::mobilenet: return mobilenet();
    case SpaceKind::shufflenet: return shufflenet();
    case SpaceKind::nb201:
      throw Error(ErrorCode::UnsupportedSpace, "nb201 is not a macro space");
    default: return autoformer(kind);
  }
}

int MacroSpaceDef::max_depth() const {
  return depths.empty() ? 0 : *std::max_element(depths.begin(), depths.end());
}

std::vector<int> active_mobilenet_slots(const std::vector<int>& depths) {
  std::vector<int> slots;
  for (std::size_t stage = 0; stage < depths.size() && stage < kMobileNetStages; ++stage) {
    const int d = std::clamp(depths[stage], 0, static_cast<int>(kMobileNetBlocksPerStage));
    for (int b = 0; b < d; ++b) {
      slots.push_back(static_cast<int>(stage * kMobileNetBlocksPerStage) + b);
    }
  }
  return slots;
}

namespace {

Legality validate_mobilenet(const MobileNetArch& a, const MacroSpaceDef& s) {
  if (!contains(s.resolutions, a.resolution)) return Legality::illegal("resolution");
  if (a.depths.size() != kMobileNetStages) return Legality::illegal("depth length");
  for (std::size_t i = 0; i < a.depths.size(); ++i) {
    if (!contains(s.stage_depths, a.depths[i])) return Legality::illegal(slot_name("depth", i));
  }
  if (a.kernels.size() != kMobileNetSlots) return Legality::illegal("kernel length");
  for (std::size_t i = 0; i < a.kernels.size(); ++i) {
    if (!contains(s.kernel_sizes, a.kernels[i])) return Legality::illegal(slot_name("kernel", i));
  }
  if (a.expands.size() != kMobileNetSlots) return Legality::illegal("expand length");
  for (std::size_t i = 0; i < a.expands.size(); ++i) {
    if (!contains(s.expand_ratios, a.expands[i])) return Legality::illegal(slot_name("expand", i));
  }
  return Legality::ok();
}

Legality validate_shufflenet(const ShuffleNetArch& a, const MacroSpaceDef& s) {
  if (a.blocks.size() != kShuffleNetBlocks) return Legality::illegal("length");
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    if (!contains(s.block_choices, a.blocks[i])) return Legality::illegal(slot_name("block", i));
  }
  return Legality::ok();
}

Legality validate_autoformer(const AutoFormerArch& a, const MacroSpaceDef& s) {
  if (!contains(s.depths, a.depth)) return Legality::illegal("depth");
  if (!contains(s.embed_dims, a.embed_dim)) return Legality::illegal("embed_dim");
  if (a.heads.size() != static_cast<std::size_t>(a.depth)) return Legality::illegal("heads length");
  for (std::size_t i = 0; i < a.heads.size(); ++i) {
    if (!contains(s.head_counts, a.heads[i])) return Legality::illegal(slot_name("heads", i));
  }
  if (a.mlp_ratios.size() != static_cast<std::size_t>(a.depth)) {
    return Legality::illegal("mlp_ratio length");
  }
  for (std::size_t i = 0; i < a.mlp_ratios.size(); ++i) {
    if (!contains(s.mlp_ratios, a.mlp_ratios[i])) return Legality::illegal(slot_name("mlp_ratio", i));
  }
  return Legality::ok();
}

}  // namespace

Legality validate_macro(const MacroArch& arch, const MacroSpaceDef& space) {
  return std::visit(
      [&](const auto& a) -> Legality {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, MobileNetArch>) {
          if (space.kind != SpaceKind::mobilenet) {
            throw Error(ErrorCode::VariantMismatch, "MobileNet arch against " + std::string(space_name(space.kind)));
          }
          return validate_mobilenet(a, space);
        } else if constexpr (std::is_same_v<T, ShuffleNetArch>) {
          if (space.kind != SpaceKind::shufflenet) {
            throw Error(ErrorCode::VariantMismatch, "ShuffleNet arch against " + std::string(space_name(space.kind)));
          }
          return validate_shufflenet(a, space);
        } else {
          if (!is_autoformer(space.kind)) {
            throw Error(ErrorCode::VariantMismatch, "AutoFormer arch against " + std::string(space_name(space.kind)));
          }
          return validate_autoformer(a, space);
        }
      },
      arch);
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> json_array(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    malformed(std::string("missing array field '") + field + "'");
  }
  std::vector<T> out;
  for (const auto& v : j.at(field)) {
    if (!v.is_number()) malformed(std::string("non-numeric entry in '") + field + "'");
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) malformed(std::string("non-integer entry in '") + field + "'");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

int json_int(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number_integer()) {
    malformed(std::string("missing integer field '") + field + "'");
  }
  return j.at(field).get<int>();
}

bool same_variant(const Arch& arch, SpaceKind kind) {
  switch (kind) {
    case SpaceKind::nb201: return std::holds_alternative<Nb201Arch>(arch);
    case SpaceKind::mobilenet: return std::holds_alternative<MobileNetArch>(arch);
    case SpaceKind::shufflenet: return std::holds_alternative<ShuffleNetArch>(arch);
    default: return std::holds_alternative<AutoFormerArch>(arch);
  }
}

}  // namespace

nlohmann::json arch_to_json(const Arch& arch, SpaceKind kind) {
  if (!same_variant(arch, kind)) {
    throw Error(ErrorCode::VariantMismatch, "arch does not belong to " + std::string(space_name(kind)));
  }
  nlohmann::json j;
  j["space"] = space_name(kind);
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Nb201Arch>) {
          j["arch"] = serialize_nb201(a);
        } else if constexpr (std::is_same_v<T, MobileNetArch>) {
          j["resolution"] = a.resolution;
          j["depths"] = a.depths;
          j["kernels"] = a.kernels;
          j["expands"] = a.expands;
        } else if constexpr (std::is_same_v<T, ShuffleNetArch>) {
          j["blocks"] = a.blocks;
        } else {
          j["depth"] = a.depth;
          j["embed_dim"] = a.embed_dim;
          j["heads"] = a.heads;
          j["mlp_ratios"] = a.mlp_ratios;
        }
      },
      arch);
  return j;
}

Arch arch_from_json(const nlohmann::json& j, SpaceKind kind) {
  if (!j.is_object()) malformed("architecture must be a JSON object");
  if (j.contains("space")) {
    if (!j.at("space").is_string()) malformed("'space' must be a string");
    const auto named = space_from_name(j.at("space").get<std::string>());
    if (!named) malformed("unknown space '" + j.at("space").get<std::string>() + "'");
    if (*named != kind) {
      throw Error(ErrorCode::VariantMismatch,
                  std::string(space_name(*named)) + " arch where " + std::string(space_name(kind)) + " expected");
    }
  }
  switch (kind) {
    case SpaceKind::nb201: {
      if (!j.contains("arch") || !j.at("arch").is_string()) malformed("missing string field 'arch'");
      return parse_nb201(j.at("arch").get<std::string>());
    }
    case SpaceKind::mobilenet: {
      MobileNetArch a;
      a.resolution = json_int(j, "resolution");
      a.depths = json_array<int>(j, "depths");
      a.kernels = json_array<int>(j, "kernels");
      a.expands = json_array<int>(j, "expands");
      return a;
    }
    case SpaceKind::shufflenet: {
      ShuffleNetArch a;
      a.blocks = json_array<int>(j, "blocks");
      return a;
    }
    default: {
      AutoFormerArch a;
      a.depth = json_int(j, "depth");
      a.embed_dim = json_int(j, "embed_dim");
      a.heads = json_array<int>(j, "heads");
      a.mlp_ratios = json_array<double>(j, "mlp_ratios");
      return a;
    }
  }
}

std::string arch_key(const Arch& arch, SpaceKind kind) {
  if (const auto* cell = std::get_if<Nb201Arch>(&arch)) return serialize_nb201(*cell);
  return arch_to_json(arch, kind).dump();
}

}  // namespace llmnas
