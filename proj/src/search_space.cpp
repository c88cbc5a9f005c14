#include "gnas/search_space.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gnas {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json parse_json(std::string_view text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StructuralError(what + ": invalid JSON");
  return doc;
}

// Reachability over the 6-node DAG by simple propagation.
std::array<bool, kTopologyNodes> reachable_from(const MacroTopology::Adjacency& adj, int start,
                                                bool forward) {
  std::array<bool, kTopologyNodes> seen{};
  seen[start] = true;
  for (int pass = 0; pass < kTopologyNodes; ++pass) {
    for (int i = 0; i < kTopologyNodes; ++i) {
      for (int j = 0; j < kTopologyNodes; ++j) {
        const bool edge = forward ? adj[i][j] : adj[j][i];
        if (edge && seen[i]) seen[j] = true;
      }
    }
  }
  return seen;
}

}  // namespace

std::string normalize_op_token(std::string_view token) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(token[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(token[i]))));
  return out;
}

OperationRegistry::OperationRegistry(std::vector<OperationKind> kinds) : kinds_(std::move(kinds)) {
  if (kinds_.empty()) throw ValidationError("operation registry is empty");
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    const OperationKind& kind = kinds_[i];
    if (kind.name.empty()) throw ValidationError("operation with empty name");
    if (kind.name.find('|') != std::string::npos || kind.name.find(',') != std::string::npos)
      throw ValidationError("operation name contains reserved key separator: " + kind.name);
    auto add = [&](const std::string& token) {
      const std::string norm = normalize_op_token(token);
      if (norm.empty()) throw ValidationError("empty alias for operation " + kind.name);
      auto [it, inserted] = lookup_.emplace(norm, i);
      if (!inserted && it->second != i)
        throw ValidationError("alias '" + token + "' maps to both " + kinds_[it->second].name +
                              " and " + kind.name);
    };
    add(kind.name);
    for (const std::string& alias : kind.aliases) add(alias);
  }
}

OperationRegistry OperationRegistry::from_json_text(std::string_view text) {
  const json doc = parse_json(text, "operation registry");
  if (!doc.is_array()) throw StructuralError("operation registry: expected a top-level array");
  std::vector<OperationKind> kinds;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
      throw StructuralError("operation registry: entry " + std::to_string(i) +
                            " must be an object with a string 'name'");
    OperationKind kind;
    kind.name = entry["name"].get<std::string>();
    if (entry.contains("aliases")) {
      for (const json& alias : entry["aliases"]) {
        if (!alias.is_string())
          throw StructuralError("operation registry: non-string alias in entry '" + kind.name + "'");
        kind.aliases.push_back(alias.get<std::string>());
      }
    }
    if (entry.contains("description")) kind.description = entry["description"].get<std::string>();
    kinds.push_back(std::move(kind));
  }
  return OperationRegistry(std::move(kinds));
}

const OperationRegistry& OperationRegistry::builtin() {
  static const OperationRegistry registry =
      OperationRegistry::from_json_text(builtin_operation_config_json());
  return registry;
}

const OperationKind* OperationRegistry::try_resolve(std::string_view token) const {
  auto it = lookup_.find(normalize_op_token(token));
  return it == lookup_.end() ? nullptr : &kinds_[it->second];
}

const OperationKind& OperationRegistry::resolve(std::string_view token) const {
  const OperationKind* kind = try_resolve(token);
  if (!kind) throw ResolutionError("unknown operation name: '" + std::string(token) + "'");
  return *kind;
}

MacroTopology::MacroTopology(std::string id, const Adjacency& adjacency)
    : id_(std::move(id)), adjacency_(adjacency) {
  if (id_.empty()) throw ValidationError("topology with empty id");
  if (id_.find('|') != std::string::npos)
    throw ValidationError("topology id contains reserved separator '|': " + id_);
  for (int i = 0; i < kTopologyNodes; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (adjacency_[i][j])
        throw ValidationError("topology '" + id_ + "': edge " + node_name(i) + "->" + node_name(j) +
                              " violates the strict input,op1..op4,output order");
    }
  }
  const auto from_input = reachable_from(adjacency_, 0, /*forward=*/true);
  const auto to_output = reachable_from(adjacency_, kTopologyNodes - 1, /*forward=*/false);
  for (int k = 1; k < kTopologyNodes - 1; ++k) {
    if (!from_input[k] || !to_output[k])
      throw ValidationError("topology '" + id_ + "': node " + node_name(k) +
                            " is not on any input->output path");
  }
}

std::string MacroTopology::node_name(int index) {
  if (index == 0) return "input";
  if (index == kTopologyNodes - 1) return "output";
  return "op" + std::to_string(index);
}

std::vector<MacroTopology> load_topologies(std::string_view json_text) {
  const json doc = parse_json(json_text, "topology config");
  if (!doc.is_array()) throw StructuralError("topology config: expected a top-level array");
  std::vector<MacroTopology> out;
  std::vector<std::string> seen_ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    const std::string label =
        entry.is_object() && entry.contains("id") && entry["id"].is_string()
            ? entry["id"].get<std::string>()
            : "#" + std::to_string(i);
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("adjacency"))
      throw StructuralError("topology entry " + label + ": requires 'id' and 'adjacency'");
    const json& rows = entry["adjacency"];
    if (!rows.is_array() || rows.size() != kTopologyNodes)
      throw StructuralError("topology entry " + label + ": adjacency must have " +
                            std::to_string(kTopologyNodes) + " rows");
    MacroTopology::Adjacency adj{};
    for (int r = 0; r < kTopologyNodes; ++r) {
      const json& row = rows[r];
      if (!row.is_array() || row.size() != kTopologyNodes)
        throw StructuralError("topology entry " + label + ": adjacency row " + std::to_string(r) +
                              " must have " + std::to_string(kTopologyNodes) + " entries");
      for (int c = 0; c < kTopologyNodes; ++c) {
        const json& cell = row[c];
        if (cell.is_boolean()) {
          adj[r][c] = cell.get<bool>();
        } else if (cell.is_number_integer() &&
                   (cell.get<int>() == 0 || cell.get<int>() == 1)) {
          adj[r][c] = cell.get<int>() == 1;
        } else {
          throw StructuralError("topology entry " + label + ": adjacency cell (" +
                                std::to_string(r) + "," + std::to_string(c) + ") must be 0 or 1");
        }
      }
    }
    if (std::find(seen_ids.begin(), seen_ids.end(), label) != seen_ids.end())
      throw ValidationError("duplicate topology id: " + label);
    seen_ids.push_back(label);
    out.emplace_back(label, adj);
  }
  if (out.empty()) throw ValidationError("topology config contains no entries");
  return out;
}

std::vector<MacroTopology> load_topologies_file(const std::string& path) {
  return load_topologies(read_file(path));
}

const std::vector<MacroTopology>& builtin_topologies() {
  static const std::vector<MacroTopology> topologies =
      load_topologies(builtin_topology_config_json());
  return topologies;
}

Architecture::Architecture(std::string topology_id, std::array<std::string, kOpSlots> ops)
    : topology_id_(std::move(topology_id)), ops_(std::move(ops)) {
  if (topology_id_.empty()) throw ValidationError("architecture with empty topology id");
  if (topology_id_.find('|') != std::string::npos)
    throw ValidationError("topology id contains reserved separator '|': " + topology_id_);
  for (const std::string& op : ops_) {
    if (op.empty()) throw ValidationError("architecture with empty op name");
    if (op.find('|') != std::string::npos || op.find(',') != std::string::npos)
      throw ValidationError("op name contains reserved key separator: " + op);
  }
  key_ = topology_id_ + "|" + ops_[0] + "," + ops_[1] + "," + ops_[2] + "," + ops_[3];
}

std::string encode_architecture(const Architecture& arch) { return arch.key(); }

Architecture decode_architecture(std::string_view key, const OperationRegistry& registry,
                                 std::span<const MacroTopology> topologies) {
  const std::size_t bar = key.find('|');
  if (bar == std::string_view::npos || key.find('|', bar + 1) != std::string_view::npos)
    throw StructuralError("architecture key must be 'topology_id|op1,op2,op3,op4': '" +
                          std::string(key) + "'");
  const std::string_view topo_id = key.substr(0, bar);
  const auto topo = std::find_if(topologies.begin(), topologies.end(),
                                 [&](const MacroTopology& t) { return t.id() == topo_id; });
  if (topo == topologies.end())
    throw ResolutionError("unknown topology id: '" + std::string(topo_id) + "'");

  std::vector<std::string_view> tokens;
  std::string_view rest = key.substr(bar + 1);
  while (true) {
    const std::size_t comma = rest.find(',');
    tokens.push_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (tokens.size() != kOpSlots)
    throw StructuralError("architecture key '" + std::string(key) + "': expected " +
                          std::to_string(kOpSlots) + " ops, got " + std::to_string(tokens.size()));

  std::array<std::string, kOpSlots> ops;
  for (int i = 0; i < kOpSlots; ++i) ops[i] = registry.resolve(tokens[i]).name;
  return Architecture(std::string(topo_id), std::move(ops));
}

SearchSpace::SearchSpace(MacroTopology topology, std::vector<OperationKind> operations)
    : topology_(std::move(topology)), operations_(std::move(operations)) {
  if (operations_.empty()) throw ValidationError("search space with no operations");
  for (std::size_t i = 0; i < operations_.size(); ++i) {
    auto add = [&](const std::string& token) {
      const std::string norm = normalize_op_token(token);
      auto [it, inserted] = lookup_.emplace(norm, i);
      if (!inserted && it->second != i)
        throw ValidationError("ambiguous op token in search space: '" + token + "'");
    };
    add(operations_[i].name);
    for (const std::string& alias : operations_[i].aliases) add(alias);
  }
}

SearchSpace SearchSpace::full(MacroTopology topology, const OperationRegistry& registry) {
  return SearchSpace(std::move(topology), registry.kinds());
}

std::uint64_t SearchSpace::cardinality() const {
  std::uint64_t n = 1;
  for (int i = 0; i < kOpSlots; ++i) n *= operations_.size();
  return n;
}

const OperationKind* SearchSpace::try_resolve(std::string_view token) const {
  auto it = lookup_.find(normalize_op_token(token));
  return it == lookup_.end() ? nullptr : &operations_[it->second];
}

int SearchSpace::op_index(std::string_view canonical_name) const {
  for (std::size_t i = 0; i < operations_.size(); ++i)
    if (operations_[i].name == canonical_name) return static_cast<int>(i);
  return -1;
}

Architecture SearchSpace::at(std::uint64_t index) const {
  if (index >= cardinality()) throw ContractError("architecture index out of range");
  const std::uint64_t n = operations_.size();
  std::array<int, kOpSlots> digits{};
  for (int slot = kOpSlots - 1; slot >= 0; --slot) {
    digits[slot] = static_cast<int>(index % n);
    index /= n;
  }
  return make(digits);
}

Architecture SearchSpace::make(const std::array<int, kOpSlots>& op_indices) const {
  std::array<std::string, kOpSlots> ops;
  for (int i = 0; i < kOpSlots; ++i) {
    if (op_indices[i] < 0 || op_indices[i] >= static_cast<int>(operations_.size()))
      throw ContractError("op index out of range");
    ops[i] = operations_[op_indices[i]].name;
  }
  return Architecture(topology_.id(), std::move(ops));
}

std::vector<Architecture> enumerate_architectures(const SearchSpace& space) {
  std::vector<Architecture> out;
  const std::uint64_t n = space.cardinality();
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(space.at(i));
  return out;
}

Architecture random_architecture(const SearchSpace& space, Rng& rng) {
  const std::size_t n = space.operations().size();
  const std::vector<double> probs(n, 1.0 / static_cast<double>(n));
  std::array<int, kOpSlots> digits{};
  for (int slot = 0; slot < kOpSlots; ++slot) digits[slot] = sample_categorical(rng, probs);
  return space.make(digits);
}

Architecture mutate(const Architecture& arch, const SearchSpace& space, Rng& rng, double rate) {
  if (rate < 0.0 || rate > 1.0) throw ContractError("mutation rate must be in [0, 1]");
  const int n = static_cast<int>(space.operations().size());
  std::array<int, kOpSlots> digits{};
  for (int slot = 0; slot < kOpSlots; ++slot) {
    const int cur = space.op_index(arch.ops()[slot]);
    if (cur < 0)
      throw ContractError("architecture op '" + arch.ops()[slot] + "' is not in the search space");
    digits[slot] = cur;
    const double u = uniform_unit(rng);
    if (u < rate && n > 1) {
      const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 1)));
      digits[slot] = j >= cur ? j + 1 : j;
    }
  }
  return space.make(digits);
}

Architecture crossover(const Architecture& a, const Architecture& b, Rng& rng) {
  if (a.topology_id() != b.topology_id())
    throw ContractError("crossover parents have different topologies: " + a.topology_id() +
                        " vs " + b.topology_id());
  std::array<std::string, kOpSlots> ops;
  for (int slot = 0; slot < kOpSlots; ++slot)
    ops[slot] = uniform_unit(rng) < 0.5 ? a.ops()[slot] : b.ops()[slot];
  return Architecture(a.topology_id(), std::move(ops));
}

}  // namespace gnas
