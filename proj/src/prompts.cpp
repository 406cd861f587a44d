#include "llmnas/prompts.hpp"

#include <fstream>
#include <sstream>

#include "llmnas/error.hpp"
#include "prompts_embedded.hpp"

namespace llmnas {

std::string render(std::string_view tmpl, const PromptVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const auto name = tmpl.substr(open + 1, close - open - 1);
    if (auto it = vars.find(name); it != vars.end()) {
      out += it->second;
      pos = close + 1;
    } else {
      out += '{';
      pos = open + 1;
    }
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

PromptSet PromptSet::builtin() {
  PromptSet set;
  for (const auto& [name, text] : detail::kEmbeddedPrompts) set.set(std::string(name), std::string(text));
  return set;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  auto set = builtin();
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::InvalidConfig, "no prompt directory " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    set.set(entry.path().stem().string(), ss.str());
  }
  return set;
}

const std::string& PromptSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorCode::InvalidConfig, "unknown prompt template " + std::string(name));
  return it->second;
}

std::vector<std::string> PromptSet::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : templates_) out.push_back(k);
  return out;
}

namespace {

template <typename T>
std::string braces(const std::vector<T>& values) {
  std::ostringstream ss;
  ss << '{';
  for (std::size_t i = 0; i < values.size(); ++i) ss << (i ? ", " : "") << values[i];
  ss << '}';
  return ss.str();
}

}  // namespace

std::string PromptSet::space_description(SpaceKind kind) const {
  if (kind == SpaceKind::nb201) return get("space_nb201");
  const auto def = MacroSpaceDef::for_kind(kind);
  PromptVars vars;
  switch (kind) {
    case SpaceKind::mobilenet:
      vars = {{"resolutions", braces(def.resolutions)},
              {"stage_depths", braces(def.stage_depths)},
              {"kernel_sizes", braces(def.kernel_sizes)},
              {"expand_ratios", braces(def.expand_ratios)}};
      return render(get("space_mobilenet"), vars);
    case SpaceKind::shufflenet:
      return render(get("space_shufflenet"), {{"block_choices", braces(def.block_choices)}});
    default: {
      AutoFormerArch example;
      example.depth = def.depths.front();
      example.embed_dim = def.embed_dims.front();
      example.heads.assign(static_cast<std::size_t>(example.depth), def.head_counts.front());
      example.mlp_ratios.assign(static_cast<std::size_t>(example.depth), def.mlp_ratios.back());
      vars = {{"depths", braces(def.depths)},
              {"embed_dims", braces(def.embed_dims)},
              {"head_counts", braces(def.head_counts)},
              {"mlp_ratios", braces(def.mlp_ratios)},
              {"space", std::string(space_name(kind))},
              {"example_depth", std::to_string(example.depth)},
              {"example", arch_key(example, kind)}};
      return render(get("space_autoformer"), vars);
    }
  }
}

}  // namespace llmnas
