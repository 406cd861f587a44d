#include "llmnas/space.hpp"

#include <algorithm>
#include <regex>

#include "llmnas/error.hpp"

namespace llmnas {

namespace {

std::size_t index_of(const std::vector<int>& values, int v) {
  const auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) throw Error(ErrorCode::MalformedString, "value " + std::to_string(v) + " not in space");
  return static_cast<std::size_t>(it - values.begin());
}

std::size_t index_of(const std::vector<double>& values, double v) {
  const auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) throw Error(ErrorCode::MalformedString, "value " + std::to_string(v) + " not in space");
  return static_cast<std::size_t>(it - values.begin());
}

template <typename T>
const T& expect(const Arch& arch, SpaceKind kind) {
  const auto* a = std::get_if<T>(&arch);
  if (!a) throw Error(ErrorCode::VariantMismatch, "arch does not belong to " + std::string(space_name(kind)));
  return *a;
}

class Nb201Space final : public SearchSpace {
 public:
  SpaceKind kind() const override { return SpaceKind::nb201; }

  std::vector<std::size_t> dimension_sizes() const override {
    return std::vector<std::size_t>(kNumEdges, kNumOps);
  }

  Arch decode(std::span<const std::size_t> genome) const override {
    Nb201Arch a;
    for (std::size_t i = 0; i < kNumEdges; ++i) a.ops[i] = static_cast<OpKind>(genome[i]);
    return a;
  }

  Genome encode(const Arch& arch) const override {
    const auto& a = expect<Nb201Arch>(arch, kind());
    Genome g(kNumEdges);
    for (std::size_t i = 0; i < kNumEdges; ++i) g[i] = static_cast<std::size_t>(a.ops[i]);
    return g;
  }

  Legality validate(const Arch& arch) const override {
    if (!std::holds_alternative<Nb201Arch>(arch)) {
      throw Error(ErrorCode::VariantMismatch, "arch does not belong to nb201");
    }
    return Legality::ok();
  }

  std::vector<Extraction> extract(std::string_view text) const override { return extract_nb201(text); }

  std::optional<std::uint64_t> size() const override { return kNb201Size; }
};

/// Shared JSON-object extraction for the macro spaces.
class MacroSpace : public SearchSpace {
 public:
  explicit MacroSpace(MacroSpaceDef def) : def_(std::move(def)) {}

  SpaceKind kind() const override { return def_.kind; }

  Legality validate(const Arch& arch) const override {
    return std::visit(
        [&](const auto& a) -> Legality {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Nb201Arch>) {
            throw Error(ErrorCode::VariantMismatch, "NB201 cell against a macro space");
          } else {
            return validate_macro(MacroArch{a}, def_);
          }
        },
        arch);
  }

  std::vector<Extraction> extract(std::string_view text) const override {
    std::vector<Extraction> out;
    for (auto& fragment : find_json_objects(text)) {
      Extraction e;
      e.text = fragment;
      try {
        const auto j = nlohmann::json::parse(fragment);
        e.arch = arch_from_json(j, kind());
        e.text = arch_key(*e.arch, kind());
      } catch (const nlohmann::json::exception& ex) {
        e.error = std::string("invalid JSON: ") + ex.what();
      } catch (const Error& ex) {
        e.error = ex.what();
      }
      out.push_back(std::move(e));
    }
    return out;
  }

 protected:
  MacroSpaceDef def_;
};

class MobileNetSpace final : public MacroSpace {
 public:
  MobileNetSpace() : MacroSpace(MacroSpaceDef::mobilenet()) {}

  // resolution | 5 depths | 20 kernels | 20 expansion ratios
  std::vector<std::size_t> dimension_sizes() const override {
    std::vector<std::size_t> dims;
    dims.push_back(def_.resolutions.size());
    dims.insert(dims.end(), kMobileNetStages, def_.stage_depths.size());
    dims.insert(dims.end(), kMobileNetSlots, def_.kernel_sizes.size());
    dims.insert(dims.end(), kMobileNetSlots, def_.expand_ratios.size());
    return dims;
  }

  Arch decode(std::span<const std::size_t> g) const override {
    MobileNetArch a;
    std::size_t i = 0;
    a.resolution = def_.resolutions.at(g[i++]);
    for (std::size_t s = 0; s < kMobileNetStages; ++s) a.depths.push_back(def_.stage_depths.at(g[i++]));
    for (std::size_t s = 0; s < kMobileNetSlots; ++s) a.kernels.push_back(def_.kernel_sizes.at(g[i++]));
    for (std::size_t s = 0; s < kMobileNetSlots; ++s) a.expands.push_back(def_.expand_ratios.at(g[i++]));
    return a;
  }

  Genome encode(const Arch& arch) const override {
    const auto& a = expect<MobileNetArch>(arch, kind());
    Genome g;
    g.push_back(index_of(def_.resolutions, a.resolution));
    for (int d : a.depths) g.push_back(index_of(def_.stage_depths, d));
    for (int k : a.kernels) g.push_back(index_of(def_.kernel_sizes, k));
    for (int e : a.expands) g.push_back(index_of(def_.expand_ratios, e));
    return g;
  }
};

class ShuffleNetSpace final : public MacroSpace {
 public:
  ShuffleNetSpace() : MacroSpace(MacroSpaceDef::shufflenet()) {}

  std::vector<std::size_t> dimension_sizes() const override {
    return std::vector<std::size_t>(kShuffleNetBlocks, def_.block_choices.size());
  }

  Arch decode(std::span<const std::size_t> g) const override {
    ShuffleNetArch a;
    for (std::size_t i = 0; i < kShuffleNetBlocks; ++i) a.blocks.push_back(def_.block_choices.at(g[i]));
    return a;
  }

  Genome encode(const Arch& arch) const override {
    const auto& a = expect<ShuffleNetArch>(arch, kind());
    Genome g;
    for (int b : a.blocks) g.push_back(index_of(def_.block_choices, b));
    return g;
  }
};

class AutoFormerSpace final : public MacroSpace {
 public:
  explicit AutoFormerSpace(SpaceKind scale) : MacroSpace(MacroSpaceDef::autoformer(scale)) {}

  // depth | embed dim | heads x max_depth | mlp ratio x max_depth
  std::vector<std::size_t> dimension_sizes() const override {
    const auto slots = static_cast<std::size_t>(def_.max_depth());
    std::vector<std::size_t> dims = {def_.depths.size(), def_.embed_dims.size()};
    dims.insert(dims.end(), slots, def_.head_counts.size());
    dims.insert(dims.end(), slots, def_.mlp_ratios.size());
    return dims;
  }

  Arch decode(std::span<const std::size_t> g) const override {
    const auto slots = static_cast<std::size_t>(def_.max_depth());
    AutoFormerArch a;
    a.depth = def_.depths.at(g[0]);
    a.embed_dim = def_.embed_dims.at(g[1]);
    for (int l = 0; l < a.depth; ++l) {
      a.heads.push_back(def_.head_counts.at(g[2 + l]));
      a.mlp_ratios.push_back(def_.mlp_ratios.at(g[2 + slots + l]));
    }
    return a;
  }

  Genome encode(const Arch& arch) const override {
    const auto& a = expect<AutoFormerArch>(arch, kind());
    const auto slots = static_cast<std::size_t>(def_.max_depth());
    Genome g(2 + 2 * slots, 0);
    g[0] = index_of(def_.depths, a.depth);
    g[1] = index_of(def_.embed_dims, a.embed_dim);
    for (std::size_t l = 0; l < a.heads.size() && l < slots; ++l) g[2 + l] = index_of(def_.head_counts, a.heads[l]);
    for (std::size_t l = 0; l < a.mlp_ratios.size() && l < slots; ++l) {
      g[2 + slots + l] = index_of(def_.mlp_ratios, a.mlp_ratios[l]);
    }
    return g;
  }
};

}  // namespace

Arch SearchSpace::random(Rng& rng) const {
  const auto dims = dimension_sizes();
  Genome g(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    g[i] = std::uniform_int_distribution<std::size_t>(0, dims[i] - 1)(rng);
  }
  return decode(g);
}

Arch SearchSpace::mutate(const Arch& arch, Rng& rng, double rate) const {
  const auto dims = dimension_sizes();
  auto g = encode(arch);
  std::bernoulli_distribution flip(std::clamp(rate, 0.0, 1.0));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 2 || !flip(rng)) continue;
    // Uniform over the other dims[i] - 1 values.
    auto v = std::uniform_int_distribution<std::size_t>(0, dims[i] - 2)(rng);
    if (v >= g[i]) ++v;
    g[i] = v;
  }
  return decode(g);
}

Arch SearchSpace::crossover(const Arch& a, const Arch& b, Rng& rng) const {
  auto ga = encode(a);
  const auto gb = encode(b);
  std::bernoulli_distribution take_b(0.5);
  for (std::size_t i = 0; i < ga.size(); ++i) {
    if (take_b(rng)) ga[i] = gb[i];
  }
  return decode(ga);
}

std::unique_ptr<SearchSpace> make_space(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::nb201: return std::make_unique<Nb201Space>();
    case SpaceKind::mobilenet: return std::make_unique<MobileNetSpace>();
    case SpaceKind::shufflenet: return std::make_unique<ShuffleNetSpace>();
    default: return std::make_unique<AutoFormerSpace>(kind);
  }
}

std::vector<Extraction> extract_nb201(std::string_view text) {
  // Maximal runs of non-space characters bounded by '|' that contain both an
  // edge suffix and a section separator.
  static const std::regex kFragment(R"(\|[^\s`'"<>,;]*\|)");
  std::vector<Extraction> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kFragment); it != std::sregex_iterator(); ++it) {
    const auto fragment = it->str();
    if (fragment.find('~') == std::string::npos || fragment.find('+') == std::string::npos) continue;
    Extraction e;
    e.text = fragment;
    try {
      e.arch = parse_nb201(fragment);
    } catch (const Error& ex) {
      e.error = ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> find_json_objects(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) out.emplace_back(text.substr(start, i - start + 1));
    }
  }
  return out;
}

}  // namespace llmnas
