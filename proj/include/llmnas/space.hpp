#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmnas/archspace.hpp"
#include "llmnas/cost.hpp"

namespace llmnas {

using Rng = std::mt19937_64;

/// Categorical choice indices, one per dimension of a space.
using Genome = std::vector<std::size_t>;

/// One architecture-looking fragment pulled out of free text.
struct Extraction {
  std::string text;
  std::optional<Arch> arch;  // empty when parsing failed
  std::string error;
};

/// A search space factorized into independent categorical dimensions. Every
/// space maps architectures to and from genomes; the variation operators work
/// on genomes and are therefore closed over legality.
class SearchSpace {
 public:
  virtual ~SearchSpace() = default;

  virtual SpaceKind kind() const = 0;
  std::string_view name() const { return space_name(kind()); }

  /// Number of choices per dimension.
  virtual std::vector<std::size_t> dimension_sizes() const = 0;
  virtual Arch decode(std::span<const std::size_t> genome) const = 0;
  /// Throws Error{VariantMismatch} for archs of another space. Unused slots
  /// (inactive AutoFormer layers) encode as choice 0.
  virtual Genome encode(const Arch& arch) const = 0;

  virtual Legality validate(const Arch& arch) const = 0;
  CostEstimate cost(const Arch& arch) const { return estimate_cost(arch, kind()); }

  /// Canonical key used for deduplication and logs.
  std::string key(const Arch& arch) const { return arch_key(arch, kind()); }
  /// Text form used in prompts (cell string or compact JSON).
  std::string to_text(const Arch& arch) const { return key(arch); }

  /// Scans free text for candidate architectures in order of appearance.
  /// Fragments that look like architectures but fail to parse are returned
  /// with `arch` empty and an error message.
  virtual std::vector<Extraction> extract(std::string_view text) const = 0;

  /// Total number of architectures when small enough to enumerate.
  virtual std::optional<std::uint64_t> size() const { return std::nullopt; }

  Arch random(Rng& rng) const;
  /// Each dimension independently, with probability `rate`, moves to a
  /// uniformly chosen different value.
  Arch mutate(const Arch& arch, Rng& rng, double rate = 0.1) const;
  /// Each dimension taken from `a` or `b` with probability 1/2.
  Arch crossover(const Arch& a, const Arch& b, Rng& rng) const;
};

std::unique_ptr<SearchSpace> make_space(SpaceKind kind);

/// Lenient NB201 extraction shared by the generator and ranking parsers.
std::vector<Extraction> extract_nb201(std::string_view text);

/// Returns every balanced top-level `{...}` span in the text.
std::vector<std::string> find_json_objects(std::string_view text);

}  // namespace llmnas
