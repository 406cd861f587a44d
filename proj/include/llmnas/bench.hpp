#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmnas/archspace.hpp"

namespace llmnas {

enum class Dataset : std::uint8_t { cifar10 = 0, cifar100 = 1, imagenet16_120 = 2 };
enum class Split : std::uint8_t { valid = 0, test = 1 };

inline constexpr std::array<Dataset, 3> kAllDatasets = {Dataset::cifar10, Dataset::cifar100,
                                                        Dataset::imagenet16_120};

struct DatasetId {
  Dataset dataset = Dataset::cifar10;
  Split split = Split::test;

  friend bool operator==(const DatasetId&, const DatasetId&) = default;
};

/// "cifar10", "cifar100", "imagenet16-120".
std::string_view dataset_name(Dataset d) noexcept;
/// Field name used in the ingest file ("imagenet16_120" for the last one).
std::string_view dataset_field(Dataset d) noexcept;
/// Accepts both the display and the field spelling.
std::optional<Dataset> dataset_from_name(std::string_view name) noexcept;
std::string_view split_name(Split s) noexcept;
std::optional<Split> split_from_name(std::string_view name) noexcept;
std::string to_string(DatasetId id);

struct AccuracyPair {
  double valid = 0.0;
  double test = 0.0;
};

struct BenchEntry {
  std::array<AccuracyPair, 3> accuracy{};  // indexed by Dataset

  double get(DatasetId id) const {
    const auto& p = accuracy[static_cast<std::size_t>(id.dataset)];
    return id.split == Split::valid ? p.valid : p.test;
  }
};

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex_digest(std::uint64_t digest);

struct LoadOptions {
  bool allow_partial = false;
};

/// Precomputed NAS-Bench-201 accuracies keyed by canonical cell index.
/// Immutable after construction.
class BenchTable {
 public:
  BenchTable();

  /// Parses the JSON-lines ingest format. Throws Error{ParseError (with line
  /// number) | DuplicateArch | IncompleteTable}.
  static BenchTable parse(std::string_view bytes, LoadOptions options = {});
  static BenchTable load(const std::filesystem::path& path, LoadOptions options = {});
  /// Builds a complete table from a function of the cell; digest is taken over
  /// the serialized form.
  static BenchTable from_function(const std::function<BenchEntry(const Nb201Arch&)>& fn);

  /// Throws Error{MissingEntry}.
  double lookup(const Nb201Arch& arch, DatasetId id) const;
  /// Argmax over present entries, ties to the smallest index.
  std::pair<Nb201Arch, double> optimal(DatasetId id) const;

  const std::optional<BenchEntry>& entry(std::uint32_t index) const { return entries_.at(index); }
  std::size_t size() const noexcept { return count_; }
  bool complete() const noexcept { return count_ == kNb201Size; }
  std::uint64_t digest() const noexcept { return digest_; }

  /// Serializes to the ingest format in index order.
  std::string to_jsonl() const;

 private:
  std::vector<std::optional<BenchEntry>> entries_;
  std::size_t count_ = 0;
  std::uint64_t digest_ = 0;
};

inline BenchTable load_benchmark(const std::filesystem::path& path, LoadOptions options = {}) {
  return BenchTable::load(path, options);
}

/// Seeded synthetic landscape with NB201-like structure: additive per-edge op
/// effects plus pairwise interactions, disconnected cells pinned near 10%, and
/// distinct accuracies. Used for tests and demos when the real table is absent.
BenchTable synthetic_table(std::uint64_t seed);

}  // namespace llmnas
