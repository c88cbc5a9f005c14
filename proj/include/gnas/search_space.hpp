#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnas/errors.hpp"
#include "gnas/rng.hpp"

namespace gnas {

inline constexpr int kTopologyNodes = 6;  // input, op1..op4, output
inline constexpr int kOpSlots = 4;

/// One selectable layer type. The description is free text shown to the LLM
/// (for attention-style operations it carries the aggregation formulas).
struct OperationKind {
  std::string name;
  std::vector<std::string> aliases;
  std::string description;
};

/// The canonical operation set plus a deterministic alias table
/// (case-insensitive). Canonical names may not contain '|' or ',' — those
/// are reserved by the architecture key format.
class OperationRegistry {
 public:
  OperationRegistry() = default;
  explicit OperationRegistry(std::vector<OperationKind> kinds);

  /// Parses a registry config document: [{name, aliases[], description}].
  static OperationRegistry from_json_text(std::string_view text);

  /// The nine built-in operations: GCN, GAT, GraphSAGE, GIN, ChebNet, ARMA,
  /// k-GNN, Skip-Connection, Fully-Connected.
  static const OperationRegistry& builtin();

  const std::vector<OperationKind>& kinds() const { return kinds_; }
  std::size_t size() const { return kinds_.size(); }

  const OperationKind* try_resolve(std::string_view token) const;
  const OperationKind& resolve(std::string_view token) const;

 private:
  std::vector<OperationKind> kinds_;
  std::map<std::string, std::size_t> lookup_;  // normalized token -> index
};

/// Lowercased, whitespace-trimmed form used for alias lookups.
std::string normalize_op_token(std::string_view token);

/// The fixed connection pattern: a 6-node DAG over
/// [input, op1, op2, op3, op4, output]. Adjacency must be strictly
/// upper-triangular in that node order, and every op node must lie on at
/// least one input-to-output path.
class MacroTopology {
 public:
  using Adjacency = std::array<std::array<bool, kTopologyNodes>, kTopologyNodes>;

  MacroTopology(std::string id, const Adjacency& adjacency);

  const std::string& id() const { return id_; }
  const Adjacency& adjacency() const { return adjacency_; }
  bool edge(int from, int to) const { return adjacency_[from][to]; }

  static std::string node_name(int index);

 private:
  std::string id_;
  Adjacency adjacency_;
};

/// Parses a topology config document: [{id, adjacency: 6 rows of 6 0/1}].
/// Structural problems (wrong matrix shape) name the entry; invariant
/// violations (cycle, unreachable node) name the offending node.
std::vector<MacroTopology> load_topologies(std::string_view json_text);
std::vector<MacroTopology> load_topologies_file(const std::string& path);

/// The nine bundled connection patterns, ids "space-1" .. "space-9".
const std::vector<MacroTopology>& builtin_topologies();

/// Bundled config documents as shipped text (mirrored under data/).
std::string_view builtin_topology_config_json();
std::string_view builtin_operation_config_json();

/// One point of the search space: a topology plus one operation name per op
/// slot. Equality is key equality.
class Architecture {
 public:
  Architecture(std::string topology_id, std::array<std::string, kOpSlots> ops);

  const std::string& topology_id() const { return topology_id_; }
  const std::array<std::string, kOpSlots>& ops() const { return ops_; }
  const std::string& key() const { return key_; }

  friend bool operator==(const Architecture& a, const Architecture& b) {
    return a.key_ == b.key_;
  }

 private:
  std::string topology_id_;
  std::array<std::string, kOpSlots> ops_;
  std::string key_;
};

/// Canonical key form "topology_id|op1,op2,op3,op4".
std::string encode_architecture(const Architecture& arch);

/// Inverse of encode_architecture. Op tokens are alias-normalized against
/// the registry; the topology id must appear in `topologies`.
Architecture decode_architecture(std::string_view key, const OperationRegistry& registry,
                                 std::span<const MacroTopology> topologies);

/// A topology with the operations admissible in its slots. Immutable after
/// construction; enumeration order is the lexicographic order of op indices.
class SearchSpace {
 public:
  SearchSpace(MacroTopology topology, std::vector<OperationKind> operations);

  static SearchSpace full(MacroTopology topology,
                          const OperationRegistry& registry = OperationRegistry::builtin());

  const MacroTopology& topology() const { return topology_; }
  const std::vector<OperationKind>& operations() const { return operations_; }
  std::uint64_t cardinality() const;

  const OperationKind* try_resolve(std::string_view token) const;
  int op_index(std::string_view canonical_name) const;  // -1 when absent

  Architecture at(std::uint64_t index) const;
  Architecture make(const std::array<int, kOpSlots>& op_indices) const;

 private:
  MacroTopology topology_;
  std::vector<OperationKind> operations_;
  std::map<std::string, std::size_t> lookup_;
};

/// Every architecture exactly once, in enumeration order.
std::vector<Architecture> enumerate_architectures(const SearchSpace& space);

/// Uniform draw; consumes one engine output per op slot so policy-based
/// samplers over the same space can share an RNG stream draw-for-draw.
Architecture random_architecture(const SearchSpace& space, Rng& rng);

/// Per-slot point mutation: each slot flips with probability `rate` to a
/// uniformly chosen different operation.
Architecture mutate(const Architecture& arch, const SearchSpace& space, Rng& rng, double rate);

/// Uniform crossover; both parents must share a topology.
Architecture crossover(const Architecture& a, const Architecture& b, Rng& rng);

}  // namespace gnas
