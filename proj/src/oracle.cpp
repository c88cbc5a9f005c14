#include "gnas/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gnas {
namespace {

using ordered_json = nlohmann::ordered_json;

// Competition ranks for one metric: sorted[i] gets rank i+1 unless tied with
// its predecessor, in which case it inherits the predecessor's rank.
std::unordered_map<std::string, int> build_ranks(
    const std::vector<BenchmarkRecord>& records,
    Accuracy (*metric)(const BenchmarkRecord&)) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return metric(records[a]) > metric(records[b]);
  });
  std::unordered_map<std::string, int> ranks;
  ranks.reserve(records.size());
  int rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || metric(records[order[i]]) != metric(records[order[i - 1]]))
      rank = static_cast<int>(i) + 1;
    ranks.emplace(records[order[i]].arch_key, rank);
  }
  return ranks;
}

}  // namespace

BenchmarkTable::BenchmarkTable(std::string dataset, std::vector<BenchmarkRecord> records)
    : dataset_(std::move(dataset)), records_(std::move(records)) {
  if (dataset_.empty()) throw ValidationError("benchmark has an empty dataset name");
  if (records_.empty()) throw ValidationError("empty benchmark: no records");
  by_key_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto [it, inserted] = by_key_.emplace(records_[i].arch_key, i);
    if (!inserted)
      throw ValidationError("duplicate architecture key in benchmark: " + records_[i].arch_key);
  }
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records_[a].val_accuracy > records_[b].val_accuracy;
  });
  rank_index_.reserve(records_.size());
  for (std::size_t i : order) rank_index_.push_back(records_[i].arch_key);
  val_rank_ = build_ranks(records_, [](const BenchmarkRecord& r) { return r.val_accuracy; });
  test_rank_ = build_ranks(records_, [](const BenchmarkRecord& r) { return r.test_accuracy; });
}

const BenchmarkRecord* BenchmarkTable::find(const std::string& arch_key) const {
  auto it = by_key_.find(arch_key);
  return it == by_key_.end() ? nullptr : &records_[it->second];
}

const BenchmarkRecord& BenchmarkTable::query(const std::string& arch_key) const {
  const BenchmarkRecord* record = find(arch_key);
  if (!record) throw NotFoundError(arch_key);
  return *record;
}

int BenchmarkTable::rank(const std::string& arch_key) const {
  auto it = val_rank_.find(arch_key);
  if (it == val_rank_.end()) throw NotFoundError(arch_key);
  return it->second;
}

int BenchmarkTable::test_rank(const std::string& arch_key) const {
  auto it = test_rank_.find(arch_key);
  if (it == test_rank_.end()) throw NotFoundError(arch_key);
  return it->second;
}

std::vector<std::pair<Architecture, BenchmarkRecord>> top_k(const BenchmarkTable& table,
                                                            const SearchSpace& space, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > table.size())
    throw ContractError("top_k: k must be in [1, " + std::to_string(table.size()) + "], got " +
                        std::to_string(k));
  std::vector<std::pair<Architecture, BenchmarkRecord>> out;
  out.reserve(k);
  const OperationRegistry registry(space.operations());
  const std::vector<MacroTopology> topo{space.topology()};
  for (int i = 0; i < k; ++i) {
    const std::string& key = table.rank_index()[i];
    out.emplace_back(decode_architecture(key, registry, topo), *table.find(key));
  }
  return out;
}

BenchmarkTable load_benchmark_text(std::string_view text, const OperationRegistry& registry,
                                   std::span<const MacroTopology> topologies) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StructuralError("benchmark document: invalid JSON");
  if (!doc.is_object() || !doc.contains("dataset") || !doc["dataset"].is_string() ||
      !doc.contains("records") || !doc["records"].is_array())
    throw StructuralError("benchmark document: expected { dataset: string, records: [...] }");

  std::vector<BenchmarkRecord> records;
  const auto& rows = doc["records"];
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string at = "record " + std::to_string(i);
    if (!row.is_object() || !row.contains("arch") || !row["arch"].is_string() ||
        !row.contains("val_acc") || !row["val_acc"].is_number() || !row.contains("test_acc") ||
        !row["test_acc"].is_number())
      throw StructuralError("benchmark document: " + at +
                            " must have arch (string), val_acc and test_acc (numbers)");
    BenchmarkRecord record;
    record.arch_key = row["arch"].get<std::string>();
    try {
      // normalizes aliases/case so lookups use canonical keys
      record.arch_key = decode_architecture(record.arch_key, registry, topologies).key();
      record.val_accuracy = Accuracy::from_percent(row["val_acc"].get<double>());
      record.test_accuracy = Accuracy::from_percent(row["test_acc"].get<double>());
    } catch (const Error& e) {
      throw ValidationError("benchmark document: " + at + ": " + e.what());
    }
    if (row.contains("params")) {
      if (!row["params"].is_number_unsigned())
        throw StructuralError("benchmark document: " + at + ": params must be a non-negative integer");
      record.params = row["params"].get<std::uint64_t>();
    }
    if (row.contains("latency_ms")) {
      if (!row["latency_ms"].is_number())
        throw StructuralError("benchmark document: " + at + ": latency_ms must be a number");
      record.latency_ms = row["latency_ms"].get<double>();
    }
    records.push_back(std::move(record));
  }
  return BenchmarkTable(doc["dataset"].get<std::string>(), std::move(records));
}

BenchmarkTable load_benchmark(const std::string& path, const OperationRegistry& registry,
                              std::span<const MacroTopology> topologies) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open benchmark file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_benchmark_text(buf.str(), registry, topologies);
}

std::string benchmark_to_json(const BenchmarkTable& table) {
  ordered_json doc;
  doc["dataset"] = table.dataset();
  ordered_json rows = ordered_json::array();
  for (const BenchmarkRecord& record : table.records()) {
    ordered_json row;
    row["arch"] = record.arch_key;
    row["val_acc"] = record.val_accuracy.percent();
    row["test_acc"] = record.test_accuracy.percent();
    if (record.params) row["params"] = *record.params;
    if (record.latency_ms) row["latency_ms"] = *record.latency_ms;
    rows.push_back(std::move(row));
  }
  doc["records"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void save_benchmark(const BenchmarkTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write benchmark file: " + path);
  out << benchmark_to_json(table);
  if (!out) throw IoError("write failed: " + path);
}

BenchmarkTable synth_benchmark(const SearchSpace& space, const std::string& dataset_name,
                               std::uint64_t seed, const std::optional<PlantedOptimum>& planted,
                               std::uint64_t generation_cap) {
  const std::uint64_t count = space.cardinality();
  if (count > generation_cap)
    throw ResourceError("synthetic benchmark would need " + std::to_string(count) +
                        " records, above the cap of " + std::to_string(generation_cap));

  std::array<std::string, kOpSlots> planted_ops;
  if (planted) {
    for (int i = 0; i < kOpSlots; ++i) {
      const OperationKind* kind = space.try_resolve(planted->ops[i]);
      if (!kind)
        throw ResolutionError("planted op '" + planted->ops[i] + "' is not in the search space");
      planted_ops[i] = kind->name;
    }
    if (planted->full_bonus_centi <= planted->noise_steps - 1 - planted->slot_bonus_centi)
      throw ContractError("planted full bonus too small to guarantee a unique optimum");
  }

  std::vector<BenchmarkRecord> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Architecture arch = space.at(i);
    const std::uint64_t h = splitmix64(seed ^ fnv1a(arch.key()));
    const std::uint64_t h2 = splitmix64(h);
    std::int32_t val_centi;
    if (planted) {
      int matches = 0;
      for (int s = 0; s < kOpSlots; ++s)
        if (arch.ops()[s] == planted_ops[s]) ++matches;
      val_centi = planted->base_centi + planted->slot_bonus_centi * matches +
                  (matches == kOpSlots ? planted->full_bonus_centi : 0) +
                  static_cast<std::int32_t>(h % static_cast<std::uint64_t>(planted->noise_steps));
    } else {
      val_centi = 5000 + static_cast<std::int32_t>(h % 4501);  // [50.00, 95.00]
    }
    val_centi = std::clamp(val_centi, 5000, 9500);
    std::int32_t test_centi = val_centi + static_cast<std::int32_t>(h2 % 401) - 200;
    test_centi = std::clamp(test_centi, 5000, 9500);

    BenchmarkRecord record;
    record.arch_key = arch.key();
    record.val_accuracy = Accuracy::from_centi(val_centi);
    record.test_accuracy = Accuracy::from_centi(test_centi);
    record.params = 1000 + splitmix64(h2) % 500000;
    record.latency_ms = static_cast<double>(splitmix64(h2 ^ 0x5a5a5a5aULL) % 20000 + 100) / 100.0;
    records.push_back(std::move(record));
  }
  return BenchmarkTable(dataset_name, std::move(records));
}

}  // namespace gnas
