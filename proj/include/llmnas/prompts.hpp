#pragma once

// Named prompt templates with {placeholder} substitution. The built-in set
// is compiled from the files under prompts/; a directory of .txt files can
// override any of them.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "llmnas/archspace.hpp"

namespace llmnas {

using PromptVars = std::map<std::string, std::string, std::less<>>;

/// Replaces {name} for every name in `vars`. Braces around anything else
/// (JSON examples, unknown names) are left untouched.
std::string render(std::string_view tmpl, const PromptVars& vars);

class PromptSet {
 public:
  static PromptSet builtin();
  /// Built-ins overridden by every <name>.txt in `dir`.
  static PromptSet load(const std::filesystem::path& dir);

  /// Throws Error{InvalidConfig} for an unknown template.
  const std::string& get(std::string_view name) const;
  void set(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }
  bool has(std::string_view name) const { return templates_.find(name) != templates_.end(); }
  std::vector<std::string> names() const;

  /// The space_* template with its value sets filled in.
  std::string space_description(SpaceKind kind) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace llmnas
