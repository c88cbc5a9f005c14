#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gnas/accuracy.hpp"
#include "gnas/search_space.hpp"

namespace gnas {

/// One benchmark row: the trained metrics for a single architecture.
struct BenchmarkRecord {
  std::string arch_key;
  Accuracy val_accuracy;
  Accuracy test_accuracy;
  std::optional<std::uint64_t> params;
  std::optional<double> latency_ms;
};

/// Precomputed lookup table standing in for actual training: every
/// architecture of a space maps to its validation/test accuracy. Immutable
/// after construction; concurrent readers need no coordination.
class BenchmarkTable {
 public:
  BenchmarkTable(std::string dataset, std::vector<BenchmarkRecord> records);

  const std::string& dataset() const { return dataset_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<BenchmarkRecord>& records() const { return records_; }

  /// Keys ordered by validation accuracy descending (ties keep file order).
  const std::vector<std::string>& rank_index() const { return rank_index_; }

  /// nullptr when the key is absent. The table never fabricates values; the
  /// search layer decides what a miss means.
  const BenchmarkRecord* find(const std::string& arch_key) const;

  /// Throwing lookup (NotFoundError carries the key).
  const BenchmarkRecord& query(const std::string& arch_key) const;
  const BenchmarkRecord& query(const Architecture& arch) const { return query(arch.key()); }

  /// Competition rank: 1 + count of records with strictly greater validation
  /// accuracy; tied values share the minimal rank.
  int rank(const std::string& arch_key) const;
  int rank(const Architecture& arch) const { return rank(arch.key()); }

  /// Same ranking rule over test accuracy.
  int test_rank(const std::string& arch_key) const;

 private:
  std::string dataset_;
  std::vector<BenchmarkRecord> records_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::vector<std::string> rank_index_;
  std::unordered_map<std::string, int> val_rank_;
  std::unordered_map<std::string, int> test_rank_;
};

/// The first k entries of the rank index with their records.
std::vector<std::pair<Architecture, BenchmarkRecord>> top_k(const BenchmarkTable& table,
                                                            const SearchSpace& space, int k);

/// Benchmark document I/O. Schema:
///   { "dataset": string, "records": [ { "arch": "topo|op1,op2,op3,op4",
///     "val_acc": number, "test_acc": number, "params"?: integer,
///     "latency_ms"?: number } ] }
/// Keys must resolve against the registry/topologies; duplicates are
/// rejected. Canonical file extension: .gnasbench.json.
BenchmarkTable load_benchmark(const std::string& path, const OperationRegistry& registry,
                              std::span<const MacroTopology> topologies);
BenchmarkTable load_benchmark_text(std::string_view text, const OperationRegistry& registry,
                                   std::span<const MacroTopology> topologies);
std::string benchmark_to_json(const BenchmarkTable& table);
void save_benchmark(const BenchmarkTable& table, const std::string& path);

/// Synthetic landscape with a known unique optimum: every slot matching the
/// planted ops adds slot_bonus points, a full match adds full_bonus more.
/// full_bonus exceeds the noise span, so the planted architecture is the
/// strict argmax. All fields are centipoints.
struct PlantedOptimum {
  std::array<std::string, kOpSlots> ops;
  std::int32_t base_centi = 6000;
  std::int32_t slot_bonus_centi = 200;
  std::int32_t full_bonus_centi = 600;
  std::int32_t noise_steps = 401;  // val noise uniform over [0, 4.00]
};

/// Deterministic function of (space, seed, planted): two processes generate
/// byte-identical tables. Without a planted optimum, validation accuracy is
/// hash-uniform over [50, 95]. Test accuracy adds hash noise in [-2, +2].
BenchmarkTable synth_benchmark(const SearchSpace& space, const std::string& dataset_name,
                               std::uint64_t seed,
                               const std::optional<PlantedOptimum>& planted = std::nullopt,
                               std::uint64_t generation_cap = 1000000);

}  // namespace gnas
