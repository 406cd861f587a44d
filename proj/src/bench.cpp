#include "llmnas/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "llmnas/error.hpp"

namespace llmnas {

std::string_view dataset_name(Dataset d) noexcept {
  switch (d) {
    case Dataset::cifar10: return "cifar10";
    case Dataset::cifar100: return "cifar100";
    case Dataset::imagenet16_120: return "imagenet16-120";
  }
  return "?";
}

std::string_view dataset_field(Dataset d) noexcept {
  return d == Dataset::imagenet16_120 ? "imagenet16_120" : dataset_name(d);
}

std::optional<Dataset> dataset_from_name(std::string_view name) noexcept {
  for (auto d : kAllDatasets) {
    if (dataset_name(d) == name || dataset_field(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view split_name(Split s) noexcept { return s == Split::valid ? "valid" : "test"; }

std::optional<Split> split_from_name(std::string_view name) noexcept {
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  return std::nullopt;
}

std::string to_string(DatasetId id) {
  return std::string(dataset_name(id.dataset)) + "/" + std::string(split_name(id.split));
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

BenchTable::BenchTable() : entries_(kNb201Size) {}

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + why);
}

AccuracyPair read_pair(const nlohmann::json& row, Dataset d, std::size_t line) {
  const auto field = std::string(dataset_field(d));
  if (!row.contains(field) || !row.at(field).is_object()) parse_error(line, "missing object '" + field + "'");
  const auto& obj = row.at(field);
  AccuracyPair p;
  for (auto [name, dst] : {std::pair{"valid", &p.valid}, std::pair{"test", &p.test}}) {
    if (!obj.contains(name) || !obj.at(name).is_number()) {
      parse_error(line, "missing number '" + field + "." + name + "'");
    }
    *dst = obj.at(name).get<double>();
    if (!(*dst >= 0.0 && *dst <= 100.0)) {
      parse_error(line, field + "." + name + " outside [0, 100]");
    }
  }
  return p;
}

}  // namespace

BenchTable BenchTable::parse(std::string_view bytes, LoadOptions options) {
  BenchTable table;
  table.digest_ = fnv1a64(bytes);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    auto line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      parse_error(line_no, ex.what());
    }
    if (!row.is_object() || !row.contains("arch") || !row.at("arch").is_string()) {
      parse_error(line_no, "missing string field 'arch'");
    }
    Nb201Arch arch;
    try {
      arch = parse_nb201(row.at("arch").get<std::string>());
    } catch (const Error& ex) {
      parse_error(line_no, ex.what());
    }
    BenchEntry entry;
    for (auto d : kAllDatasets) entry.accuracy[static_cast<std::size_t>(d)] = read_pair(row, d, line_no);

    auto& slot = table.entries_[nb201_index(arch)];
    if (slot) {
      throw Error(ErrorCode::DuplicateArch, "line " + std::to_string(line_no) + ": " + serialize_nb201(arch));
    }
    slot = entry;
    ++table.count_;
  }

  if (!table.complete() && !options.allow_partial) {
    throw Error(ErrorCode::IncompleteTable,
                std::to_string(table.count_) + " of " + std::to_string(kNb201Size) + " entries");
  }
  return table;
}

BenchTable BenchTable::load(const std::filesystem::path& path, LoadOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), options);
}

BenchTable BenchTable::from_function(const std::function<BenchEntry(const Nb201Arch&)>& fn) {
  BenchTable table;
  for (std::uint32_t i = 0; i < kNb201Size; ++i) table.entries_[i] = fn(nb201_from_index(i));
  table.count_ = kNb201Size;
  table.digest_ = fnv1a64(table.to_jsonl());
  return table;
}

double BenchTable::lookup(const Nb201Arch& arch, DatasetId id) const {
  const auto& e = entries_[nb201_index(arch)];
  if (!e) throw Error(ErrorCode::MissingEntry, serialize_nb201(arch));
  return e->get(id);
}

std::pair<Nb201Arch, double> BenchTable::optimal(DatasetId id) const {
  std::optional<std::uint32_t> best;
  double best_acc = 0.0;
  for (std::uint32_t i = 0; i < kNb201Size; ++i) {
    if (!entries_[i]) continue;
    const double acc = entries_[i]->get(id);
    if (!best || acc > best_acc) {
      best = i;
      best_acc = acc;
    }
  }
  if (!best) throw Error(ErrorCode::IncompleteTable, "table is empty");
  return {nb201_from_index(*best), best_acc};
}

std::string BenchTable::to_jsonl() const {
  std::string out;
  for (std::uint32_t i = 0; i < kNb201Size; ++i) {
    if (!entries_[i]) continue;
    nlohmann::ordered_json row;
    row["arch"] = serialize_nb201(nb201_from_index(i));
    for (auto d : kAllDatasets) {
      const auto& p = entries_[i]->accuracy[static_cast<std::size_t>(d)];
      row[std::string(dataset_field(d))] = {{"valid", p.valid}, {"test", p.test}};
    }
    out += row.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool reaches_output(const Nb201Arch& a) {
  auto on = [&](std::size_t e) { return a.ops[e] != OpKind::none; };
  const bool n1 = on(0);
  const bool n2 = on(1) || (n1 && on(2));
  return on(3) || (n1 && on(4)) || (n2 && on(5));
}

}  // namespace

BenchTable synthetic_table(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Mean effect per op: none, skip, conv1x1, conv3x3, pool.
  constexpr std::array<double, kNumOps> kOpMean = {0.0, 0.6, 1.0, 1.6, 0.4};
  std::array<std::array<double, kNumOps>, kNumEdges> unary{};
  for (auto& edge : unary) {
    for (std::size_t op = 0; op < kNumOps; ++op) edge[op] = kOpMean[op] + 0.3 * gauss(rng);
  }
  std::vector<double> pairwise(kNumEdges * kNumEdges * kNumOps * kNumOps);
  for (auto& v : pairwise) v = 0.12 * gauss(rng);

  // Per-dataset ceilings and floors (test split); valid sits slightly lower.
  constexpr std::array<double, 3> kCeil = {94.4, 73.5, 47.3};
  constexpr std::array<double, 3> kFloor = {55.0, 20.0, 12.0};

  std::vector<std::array<double, 4>> jitter(kNb201Size);
  for (auto& j : jitter) {
    for (auto& x : j) x = unit(rng);
  }

  return BenchTable::from_function([&](const Nb201Arch& a) {
    const auto idx = nb201_index(a);
    double score = 0.0;
    for (std::size_t e = 0; e < kNumEdges; ++e) {
      const auto oe = static_cast<std::size_t>(a.ops[e]);
      score += unary[e][oe];
      for (std::size_t f = e + 1; f < kNumEdges; ++f) {
        const auto of = static_cast<std::size_t>(a.ops[f]);
        score += pairwise[((e * kNumEdges + f) * kNumOps + oe) * kNumOps + of];
      }
    }
    const double quality = 1.0 / (1.0 + std::exp(-(score - 5.0) / 1.4));  // (0, 1)
    const bool connected = reaches_output(a);

    BenchEntry entry;
    for (std::size_t d = 0; d < 3; ++d) {
      double test;
      if (connected) {
        test = kFloor[d] + (kCeil[d] - kFloor[d]) * quality + 0.01 * jitter[idx][d];
      } else {
        const double chance = d == 0 ? 10.0 : (d == 1 ? 1.0 : 0.83);
        test = chance + 0.01 * jitter[idx][d];
      }
      const double valid = std::max(0.0, test - (connected ? 2.5 : 0.0) - 0.3 * jitter[idx][3]);
      entry.accuracy[d] = {valid, std::min(100.0, test)};
    }
    return entry;
  });
}

}  // namespace llmnas
