#include "gnas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace gnas {
namespace {

using ordered_json = nlohmann::ordered_json;

std::atomic<bool> g_stop_requested{false};

std::string format2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string sanitize_token(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '-');
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// One executable lane: a strategy config plus its prompt variant.
struct Lane {
  StrategyConfig cfg;
  AblationVariant variant = AblationVariant::kFull;
  std::string label;    // machine label used in all artifacts
  std::string display;  // summary.md row label
};

std::string lane_machine_label(StrategyKind kind, AblationVariant variant) {
  std::string label(strategy_name(kind));
  if (kind == StrategyKind::kGpt4Gnas && variant != AblationVariant::kFull)
    label += "-" + std::string(ablation_slug(variant));
  return label;
}

struct TableStore {
  // file datasets share one table across topologies; synthetic ones get a
  // table per (dataset, topology)
  std::vector<std::optional<BenchmarkTable>> file_tables;
  std::vector<std::vector<std::optional<BenchmarkTable>>> synth_tables;

  const BenchmarkTable& at(std::size_t dataset, std::size_t topology, bool synthetic) const {
    return synthetic ? *synth_tables[dataset][topology] : *file_tables[dataset];
  }
};

double sample_stdev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double sum_sq = 0.0;
  for (double v : values) sum_sq += (v - mean) * (v - mean);
  return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

/// The inputs of one summary.md row, shared by emission and verification so
/// both render through the same code path.
struct SummaryRow {
  std::string display_label;
  bool absent = false;
  std::string val_acc, test_acc;
  int val_rank = 0, test_rank = 0;
  std::string mean, stdev;
};

struct SummaryGroup {
  std::string dataset;
  std::string topology;
  std::vector<SummaryRow> rows;
};

std::string render_summary_md(const std::string& backend, double temperature, bool ablation_mode,
                              const std::vector<SummaryGroup>& groups) {
  std::string out = "# Search report\n\nbackend: " + backend + "\n";
  if (temperature != 0.0)
    out += "\n> Note: LLM temperature " + format2(temperature) +
           " is nonzero; sampled responses are not reproducible from the seed.\n";
  if (ablation_mode && (backend == "mock-greedy" || backend == "mock-random"))
    out += "\n> Note: the " + backend +
           " backend ignores prompt text; ablation variants coincide by construction.\n";
  for (const SummaryGroup& group : groups) {
    out += "\n## dataset: " + group.dataset + " — topology: " + group.topology + "\n\n";
    out += "| Method | Val | Test | Val mean ± stdev |\n";
    out += "| --- | --- | --- | --- |\n";
    for (const SummaryRow& row : group.rows) {
      if (row.absent) {
        out += "| " + row.display_label + " | — | — | — |\n";
      } else {
        out += "| " + row.display_label + " | " + row.val_acc + " (" +
               std::to_string(row.val_rank) + ") | " + row.test_acc + " (" +
               std::to_string(row.test_rank) + ") | " + row.mean + " ± " + row.stdev + " |\n";
      }
    }
  }
  return out;
}

std::vector<SummaryGroup> summary_groups_from_cells(const ExperimentReport& report) {
  std::vector<SummaryGroup> groups;
  for (const DatasetSpec& dataset : report.datasets) {
    for (const std::string& topology : report.topology_ids) {
      SummaryGroup group;
      group.dataset = dataset.name;
      group.topology = topology;
      for (const CellSummary& cell : report.cells) {
        if (cell.dataset != dataset.name || cell.topology != topology) continue;
        SummaryRow row;
        row.display_label = cell.display_label;
        row.absent = cell.absent;
        if (!cell.absent) {
          row.val_acc = cell.val_accuracy.str();
          row.test_acc = cell.test_accuracy.str();
          row.val_rank = cell.val_rank;
          row.test_rank = cell.test_rank;
          row.mean = format2(cell.mean_final_val);
          row.stdev = format2(cell.stdev_final_val);
        }
        group.rows.push_back(std::move(row));
      }
      groups.push_back(std::move(group));
    }
  }
  return groups;
}

std::string display_label_for(const std::string& machine_label, bool ablation_mode) {
  if (!ablation_mode) return machine_label;
  for (AblationVariant v : {AblationVariant::kFull, AblationVariant::kNoConnections,
                            AblationVariant::kNoOperations, AblationVariant::kNoStrategy}) {
    if (machine_label == lane_machine_label(StrategyKind::kGpt4Gnas, v))
      return std::string(ablation_label(v));
  }
  return machine_label;
}

ExperimentReport execute_lanes(const ExperimentSpec& spec, const std::vector<Lane>& lanes,
                               bool ablation_mode) {
  spec.validate();

  // Resolve every resource up front; nothing runs if anything is missing.
  std::vector<const MacroTopology*> topologies;
  for (const std::string& id : spec.topology_ids) {
    const auto it =
        std::find_if(spec.known_topologies.begin(), spec.known_topologies.end(),
                     [&](const MacroTopology& t) { return t.id() == id; });
    if (it == spec.known_topologies.end())
      throw ConfigError("topology id not found in the topology config: '" + id + "'");
    topologies.push_back(&*it);
  }
  std::vector<SearchSpace> spaces;
  spaces.reserve(topologies.size());
  for (const MacroTopology* topo : topologies)
    spaces.push_back(SearchSpace::full(*topo, spec.registry));

  TableStore tables;
  tables.file_tables.resize(spec.datasets.size());
  tables.synth_tables.resize(spec.datasets.size());
  for (std::size_t d = 0; d < spec.datasets.size(); ++d) {
    const DatasetSpec& dataset = spec.datasets[d];
    if (dataset.synthetic) {
      tables.synth_tables[d].resize(spaces.size());
      for (std::size_t t = 0; t < spaces.size(); ++t) {
        std::optional<PlantedOptimum> planted;
        if (dataset.planted) planted = PlantedOptimum{*dataset.planted};
        tables.synth_tables[d][t] =
            synth_benchmark(spaces[t], dataset.name, dataset.synth_seed, planted);
      }
    } else {
      tables.file_tables[d] = load_benchmark(dataset.benchmark_path.string(), spec.registry,
                                             spec.known_topologies);
    }
  }
  if (spec.backend == BackendKind::kScripted && !std::filesystem::exists(spec.script_path))
    throw ConfigError("playback script not found: " + spec.script_path.string());

  struct Task {
    std::size_t dataset, topology, lane;
    int repetition;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < spec.datasets.size(); ++d)
    for (std::size_t t = 0; t < spaces.size(); ++t)
      for (std::size_t l = 0; l < lanes.size(); ++l)
        for (int rep = 0; rep < spec.repetitions; ++rep)
          tasks.push_back(Task{d, t, l, rep,
                               lanes[l].cfg.seed + static_cast<std::uint64_t>(rep)});

  std::vector<RunRecord> records(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    records[i].dataset = spec.datasets[task.dataset].name;
    records[i].topology = spec.topology_ids[task.topology];
    records[i].strategy = lanes[task.lane].label;
    records[i].seed = task.seed;
    records[i].repetition = task.repetition;
  }

  auto run_one = [&](std::size_t i) {
    const Task& task = tasks[i];
    const Lane& lane = lanes[task.lane];
    const SearchSpace& space = spaces[task.topology];
    const BenchmarkTable& table =
        tables.at(task.dataset, task.topology, spec.datasets[task.dataset].synthetic);
    StrategyConfig cfg = lane.cfg;
    cfg.seed = task.seed;
    try {
      if (cfg.kind == StrategyKind::kGpt4Gnas) {
        std::unique_ptr<LLMBackend> backend;
        switch (spec.backend) {
          case BackendKind::kHttp: backend = make_http_backend(spec.llm); break;
          case BackendKind::kScripted: backend = make_scripted_backend(spec.script_path); break;
          case BackendKind::kMockGreedy:
            backend = make_mock_greedy(table, space, cfg.batch_size);
            break;
          case BackendKind::kMockRandom:
            backend = make_mock_random(space, sampling_stream_seed(cfg.seed), cfg.batch_size);
            break;
        }
        LLMClient client(*backend, spec.llm);
        GptRunOptions options;
        options.ablation = ablation_flags(lane.variant);
        options.feedback = spec.feedback;
        records[i].result = run_gpt4gnas(space, table, cfg, client, options);
      } else {
        records[i].result = run_strategy(space, table, cfg, nullptr);
      }
    } catch (const std::exception& e) {
      records[i].result.failure = e.what();
    }
    records[i].result.strategy_label = lane.label;  // keep the variant suffix
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      if (stop_requested()) {
        records[i].result.failure = "shutdown requested; run not started";
        continue;
      }
      run_one(i);
    }
  };
  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ExperimentReport report;
  report.datasets = spec.datasets;
  report.topology_ids = spec.topology_ids;
  report.effective_config = spec.effective_config;
  report.backend = std::string(backend_name(spec.backend));
  report.llm_temperature = spec.llm.temperature;
  report.ablation_mode = ablation_mode;
  for (const Lane& lane : lanes) report.strategy_labels.push_back(lane.label);

  for (std::size_t d = 0; d < spec.datasets.size(); ++d) {
    for (std::size_t t = 0; t < spaces.size(); ++t) {
      for (std::size_t l = 0; l < lanes.size(); ++l) {
        CellSummary cell;
        cell.dataset = spec.datasets[d].name;
        cell.topology = spec.topology_ids[t];
        cell.strategy = lanes[l].label;
        cell.display_label = lanes[l].display;

        const BenchmarkTable& table = tables.at(d, t, spec.datasets[d].synthetic);
        const RunRecord* selected = nullptr;
        std::vector<double> finals;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          if (tasks[i].dataset != d || tasks[i].topology != t || tasks[i].lane != l) continue;
          const RunRecord& record = records[i];
          if (record.failed() || record.result.state.empty()) continue;
          finals.push_back(record.result.state.best().val_accuracy.percent());
          // best-of-R on validation accuracy; ties keep the earliest repetition
          if (!selected || record.result.state.best().val_accuracy >
                               selected->result.state.best().val_accuracy)
            selected = &record;
        }
        if (!selected) {
          cell.absent = true;
        } else {
          const EvaluatedArch& best = selected->result.state.best();
          cell.selected_repetition = selected->repetition;
          cell.best_key = best.arch.key();
          cell.val_accuracy = best.val_accuracy;
          const BenchmarkRecord& record = table.query(cell.best_key);
          cell.test_accuracy = record.test_accuracy;
          cell.val_rank = table.rank(cell.best_key);
          cell.test_rank = table.test_rank(cell.best_key);
          cell.mean_final_val =
              std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
          cell.stdev_final_val = sample_stdev(finals, cell.mean_final_val);

          // top ten of the selected run by validation accuracy
          std::vector<const EvaluatedArch*> by_val;
          for (const EvaluatedArch& e : selected->result.state.history()) by_val.push_back(&e);
          std::stable_sort(by_val.begin(), by_val.end(),
                           [](const EvaluatedArch* a, const EvaluatedArch* b) {
                             return a->val_accuracy > b->val_accuracy;
                           });
          const std::size_t k = std::min<std::size_t>(10, by_val.size());
          for (std::size_t r = 0; r < k; ++r) {
            const BenchmarkRecord& rec = table.query(by_val[r]->arch.key());
            cell.top10.push_back(
                Top10Row{by_val[r]->arch.key(), rec.val_accuracy, rec.test_accuracy});
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!records[i].failed()) continue;
    report.failures.push_back(FailureNote{records[i].dataset, records[i].topology,
                                          records[i].strategy, records[i].seed,
                                          records[i].repetition, *records[i].result.failure});
  }
  report.runs = std::move(records);
  return report;
}

}  // namespace

std::string_view backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttp: return "http";
    case BackendKind::kScripted: return "scripted";
    case BackendKind::kMockGreedy: return "mock-greedy";
    case BackendKind::kMockRandom: return "mock-random";
  }
  return "mock-random";
}

BackendKind backend_from_name(std::string_view name) {
  if (name == "http") return BackendKind::kHttp;
  if (name == "scripted") return BackendKind::kScripted;
  if (name == "mock-greedy") return BackendKind::kMockGreedy;
  if (name == "mock-random") return BackendKind::kMockRandom;
  throw ConfigError("unknown backend: '" + std::string(name) +
                    "' (expected http|scripted|mock-greedy|mock-random)");
}

ExperimentSpec::ExperimentSpec()
    : known_topologies(builtin_topologies()), registry(OperationRegistry::builtin()) {}

void ExperimentSpec::validate() const {
  if (datasets.empty()) throw ConfigError("experiment needs at least one dataset");
  if (topology_ids.empty()) throw ConfigError("experiment needs at least one topology");
  if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (const StrategyConfig& cfg : strategies) cfg.validate();
  for (const DatasetSpec& dataset : datasets) {
    if (dataset.name.empty()) throw ConfigError("dataset with empty name");
    if (!dataset.synthetic && dataset.benchmark_path.empty())
      throw ConfigError("dataset '" + dataset.name + "' has no benchmark path");
  }
  llm.validate();
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  std::vector<Lane> lanes;
  for (const StrategyConfig& cfg : spec.strategies) {
    Lane lane;
    lane.cfg = cfg;
    lane.variant = cfg.kind == StrategyKind::kGpt4Gnas ? spec.ablation : AblationVariant::kFull;
    lane.label = lane_machine_label(cfg.kind, lane.variant);
    lane.display = lane.label;
    lanes.push_back(std::move(lane));
  }
  return execute_lanes(spec, lanes, /*ablation_mode=*/false);
}

ExperimentReport run_ablation(const ExperimentSpec& spec) {
  const auto it = std::find_if(spec.strategies.begin(), spec.strategies.end(),
                               [](const StrategyConfig& cfg) {
                                 return cfg.kind == StrategyKind::kGpt4Gnas;
                               });
  if (it == spec.strategies.end())
    throw ContractError("the ablation sweep needs the gpt4gnas strategy");
  std::vector<Lane> lanes;
  for (AblationVariant variant : {AblationVariant::kFull, AblationVariant::kNoConnections,
                                  AblationVariant::kNoOperations, AblationVariant::kNoStrategy}) {
    Lane lane;
    lane.cfg = *it;
    lane.variant = variant;
    lane.label = lane_machine_label(StrategyKind::kGpt4Gnas, variant);
    lane.display = std::string(ablation_label(variant));
    lanes.push_back(std::move(lane));
  }
  return execute_lanes(spec, lanes, /*ablation_mode=*/true);
}

std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (out_dir.empty()) throw IoError("report output directory is empty");
  const fs::path tmp = out_dir.string() + ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  if (!fs::create_directories(tmp, ec) || ec)
    throw IoError("cannot create report directory: " + tmp.string());

  std::vector<std::string> files;
  try {
    // summary.md
    write_file(tmp / "summary.md",
               render_summary_md(report.backend, report.llm_temperature, report.ablation_mode,
                                 summary_groups_from_cells(report)));
    files.push_back("summary.md");

    // curves.csv
    std::string curves = "dataset,topology,strategy,seed,iteration,best_so_far_acc,unique_queries\n";
    for (const RunRecord& run : report.runs) {
      for (const IterationRow& row : run.result.rows) {
        curves += run.dataset + "," + run.topology + "," + run.strategy + "," +
                  std::to_string(run.seed) + "," + std::to_string(row.iteration) + "," +
                  row.best_so_far_val.str() + "," + std::to_string(row.unique_queries) + "\n";
      }
    }
    write_file(tmp / "curves.csv", curves);
    files.push_back("curves.csv");

    // top10.csv (arch keys contain commas, so that field is quoted)
    std::string top10 = "strategy,rank_within_strategy,arch_key,val_acc,test_acc\n";
    for (const CellSummary& cell : report.cells) {
      for (std::size_t r = 0; r < cell.top10.size(); ++r) {
        top10 += cell.strategy + "," + std::to_string(r + 1) + ",\"" + cell.top10[r].arch_key +
                 "\"," + cell.top10[r].val_accuracy.str() + "," +
                 cell.top10[r].test_accuracy.str() + "\n";
      }
    }
    write_file(tmp / "top10.csv", top10);
    files.push_back("top10.csv");

    // evolution.jsonl: best-so-far op assignments per iteration per run
    std::string evolution;
    for (const RunRecord& run : report.runs) {
      for (const IterationRow& row : run.result.rows) {
        if (row.best_so_far_key.empty()) continue;
        ordered_json line;
        line["dataset"] = run.dataset;
        line["topology"] = run.topology;
        line["strategy"] = run.strategy;
        line["seed"] = run.seed;
        line["iteration"] = row.iteration;
        line["best_key"] = row.best_so_far_key;
        const std::size_t bar = row.best_so_far_key.find('|');
        line["ops"] = split_list(row.best_so_far_key.substr(bar + 1));
        evolution += line.dump() + "\n";
      }
    }
    write_file(tmp / "evolution.jsonl", evolution);
    files.push_back("evolution.jsonl");

    // iterations.jsonl: the complete iteration rows (curves.csv is the
    // compact projection of the same data)
    std::string iterations;
    for (const RunRecord& run : report.runs) {
      for (const IterationRow& row : run.result.rows) {
        ordered_json line;
        line["dataset"] = run.dataset;
        line["topology"] = run.topology;
        line["strategy"] = run.strategy;
        line["seed"] = run.seed;
        line["iteration"] = row.iteration;
        line["batch_keys"] = row.batch_keys;
        ordered_json accs = ordered_json::array();
        for (const Accuracy& acc : row.batch_accuracies) accs.push_back(acc.percent());
        line["batch_accuracies"] = std::move(accs);
        line["best_so_far_key"] = row.best_so_far_key;
        line["best_so_far_acc"] = row.best_so_far_val.percent();
        line["diagnostics"] = {
            {"raw_blocks_found", row.diagnostics.raw_blocks_found},
            {"raw_candidates", row.diagnostics.raw_candidates},
            {"valid", row.diagnostics.valid},
            {"dropped_invalid_op", row.diagnostics.dropped_invalid_op},
            {"dropped_invalid_op_entries", row.diagnostics.dropped_invalid_op_entries},
            {"dropped_wrong_arity", row.diagnostics.dropped_wrong_arity},
            {"dropped_malformed", row.diagnostics.dropped_malformed},
            {"dropped_duplicates", row.diagnostics.dropped_duplicates},
            {"dropped_already_evaluated", row.diagnostics.dropped_already_evaluated},
            {"dropped_excess", row.diagnostics.dropped_excess},
        };
        line["dropped_not_in_benchmark"] = row.dropped_not_in_benchmark;
        line["topped_up"] = row.topped_up;
        line["unique_queries"] = row.unique_queries;
        iterations += line.dump() + "\n";
      }
    }
    write_file(tmp / "iterations.jsonl", iterations);
    files.push_back("iterations.jsonl");

    // transcripts/
    fs::create_directories(tmp / "transcripts");
    files.push_back("transcripts/");
    for (const RunRecord& run : report.runs) {
      if (run.result.transcripts.empty()) continue;
      ordered_json arr = ordered_json::array();
      for (const CompletionTranscript& t : run.result.transcripts) {
        ordered_json entry;
        entry["backend"] = t.backend;
        entry["attempt_count"] = t.attempt_count;
        entry["latency_ms"] = t.latency_ms;
        entry["request"] = {
            {"system_text", t.request_prompt.system_text},
            {"user_text", t.request_prompt.user_text},
            {"token_estimate", t.request_prompt.token_estimate},
            {"ablation",
             {{"include_connections", t.request_prompt.ablation.include_connections},
              {"include_operations", t.request_prompt.ablation.include_operations},
              {"include_strategy", t.request_prompt.ablation.include_strategy}}},
        };
        entry["response_text"] = t.response_text;
        arr.push_back(std::move(entry));
      }
      const std::string name = sanitize_token(run.dataset) + "__" + sanitize_token(run.topology) +
                               "__" + sanitize_token(run.strategy) + "__seed" +
                               std::to_string(run.seed) + ".json";
      write_file(tmp / "transcripts" / name, arr.dump(2) + "\n");
      files.push_back("transcripts/" + name);
    }

    // manifest.json
    ordered_json manifest;
    manifest["format_version"] = "1";
    manifest["backend"] = report.backend;
    manifest["llm_temperature"] = report.llm_temperature;
    manifest["ablation_mode"] = report.ablation_mode;
    ordered_json datasets = ordered_json::array();
    for (const DatasetSpec& dataset : report.datasets) {
      ordered_json d;
      d["name"] = dataset.name;
      d["source"] = dataset.synthetic ? "synthetic" : "file";
      if (dataset.synthetic) {
        d["synth_seed"] = dataset.synth_seed;
        if (dataset.planted) d["planted"] = *dataset.planted;
      } else {
        d["path"] = dataset.benchmark_path.string();
      }
      datasets.push_back(std::move(d));
    }
    manifest["datasets"] = std::move(datasets);
    manifest["topologies"] = report.topology_ids;
    manifest["strategies"] = report.strategy_labels;
    manifest["effective_config"] = report.effective_config;
    ordered_json failures = ordered_json::array();
    for (const FailureNote& failure : report.failures) {
      failures.push_back(ordered_json{{"dataset", failure.dataset},
                                      {"topology", failure.topology},
                                      {"strategy", failure.strategy},
                                      {"seed", failure.seed},
                                      {"repetition", failure.repetition},
                                      {"error", failure.error}});
    }
    manifest["failures"] = std::move(failures);
    files.push_back("manifest.json");
    manifest["files"] = files;
    write_file(tmp / "manifest.json", manifest.dump(2) + "\n");
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }

  // atomic swap: the output directory holds either the old or the new report
  const fs::path old = out_dir.string() + ".old";
  fs::remove_all(old, ec);
  if (fs::exists(out_dir)) fs::rename(out_dir, old);
  fs::rename(tmp, out_dir);
  fs::remove_all(old, ec);
  return files;
}

VerifyResult verify_report_dir(const std::filesystem::path& report_dir) {
  namespace fs = std::filesystem;
  VerifyResult result;

  const ordered_json manifest =
      ordered_json::parse(read_file_or_throw(report_dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded())
    throw StructuralError("manifest.json is not valid JSON: " + report_dir.string());

  ConfigMap config;
  for (const auto& [key, value] : manifest.at("effective_config").items())
    config[key] = value.get<std::string>();

  // Rebuild the resolution universe the run used.
  OperationRegistry registry = OperationRegistry::builtin();
  if (const std::string path = get_string(config, "experiment.operations_config", "");
      !path.empty())
    registry = OperationRegistry::from_json_text(read_file_or_throw(path));
  std::vector<MacroTopology> known = builtin_topologies();
  if (const std::string path = get_string(config, "experiment.topology_config", ""); !path.empty())
    known = load_topologies_file(path);

  const bool ablation_mode = manifest.at("ablation_mode").get<bool>();
  const std::string backend = manifest.at("backend").get<std::string>();
  const double temperature = manifest.at("llm_temperature").get<double>();

  std::vector<std::string> topology_ids;
  for (const auto& id : manifest.at("topologies")) topology_ids.push_back(id.get<std::string>());
  std::vector<std::string> strategy_labels;
  for (const auto& s : manifest.at("strategies")) strategy_labels.push_back(s.get<std::string>());

  // Benchmark tables per dataset (and per topology for synthetic fixtures).
  struct DatasetTables {
    std::string name;
    std::vector<std::optional<BenchmarkTable>> per_topology;  // synthetic
    std::optional<BenchmarkTable> file_table;
  };
  std::vector<DatasetTables> tables;
  for (const auto& d : manifest.at("datasets")) {
    DatasetTables slot;
    slot.name = d.at("name").get<std::string>();
    if (d.at("source").get<std::string>() == "synthetic") {
      std::optional<PlantedOptimum> planted;
      if (d.contains("planted")) {
        PlantedOptimum p;
        const auto& ops = d.at("planted");
        for (int i = 0; i < kOpSlots; ++i) p.ops[i] = ops.at(i).get<std::string>();
        planted = p;
      }
      const std::uint64_t seed = d.at("synth_seed").get<std::uint64_t>();
      for (const std::string& id : topology_ids) {
        const auto it = std::find_if(known.begin(), known.end(),
                                     [&](const MacroTopology& t) { return t.id() == id; });
        if (it == known.end()) throw ConfigError("manifest topology not resolvable: " + id);
        slot.per_topology.emplace_back(
            synth_benchmark(SearchSpace::full(*it, registry), slot.name, seed, planted));
      }
    } else {
      slot.file_table = load_benchmark(d.at("path").get<std::string>(), registry, known);
    }
    tables.push_back(std::move(slot));
  }

  // Failed runs are excluded from recomputation, mirroring emission.
  std::unordered_set<std::string> failed_runs;
  for (const auto& f : manifest.at("failures"))
    failed_runs.insert(f.at("dataset").get<std::string>() + "\x1f" +
                       f.at("topology").get<std::string>() + "\x1f" +
                       f.at("strategy").get<std::string>() + "\x1f" +
                       std::to_string(f.at("seed").get<std::uint64_t>()));

  // curves.csv: final best-so-far per run, in file (= repetition) order.
  struct RunAgg {
    std::string final_acc;
    int final_iteration = -1;
  };
  std::map<std::string, RunAgg> run_finals;
  std::map<std::string, std::vector<std::string>> cell_runs;  // cell key -> run keys in order
  {
    std::istringstream curves(read_file_or_throw(report_dir / "curves.csv"));
    std::string line;
    std::getline(curves, line);  // header
    while (std::getline(curves, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields = split_list(line);
      if (fields.size() != 7)
        throw StructuralError("curves.csv row with " + std::to_string(fields.size()) +
                              " fields: " + line);
      const std::string run_key =
          fields[0] + "\x1f" + fields[1] + "\x1f" + fields[2] + "\x1f" + fields[3];
      const std::string cell_key = fields[0] + "\x1f" + fields[1] + "\x1f" + fields[2];
      auto [it, inserted] = run_finals.try_emplace(run_key);
      if (inserted) cell_runs[cell_key].push_back(run_key);
      const int iteration = std::stoi(fields[4]);
      if (iteration >= it->second.final_iteration) {
        it->second.final_iteration = iteration;
        it->second.final_acc = fields[5];
      }
    }
  }

  // evolution.jsonl: final best key per run.
  std::map<std::string, std::string> run_best_key;
  {
    std::istringstream evo(read_file_or_throw(report_dir / "evolution.jsonl"));
    std::string line;
    while (std::getline(evo, line)) {
      if (line.empty()) continue;
      const ordered_json row = ordered_json::parse(line);
      const std::string run_key = row.at("dataset").get<std::string>() + "\x1f" +
                                  row.at("topology").get<std::string>() + "\x1f" +
                                  row.at("strategy").get<std::string>() + "\x1f" +
                                  std::to_string(row.at("seed").get<std::uint64_t>());
      run_best_key[run_key] = row.at("best_key").get<std::string>();
    }
  }

  // Recompute the summary cells in manifest order.
  std::vector<SummaryGroup> groups;
  for (std::size_t d = 0; d < tables.size(); ++d) {
    for (std::size_t t = 0; t < topology_ids.size(); ++t) {
      SummaryGroup group;
      group.dataset = tables[d].name;
      group.topology = topology_ids[t];
      const BenchmarkTable& table = tables[d].file_table ? *tables[d].file_table
                                                         : *tables[d].per_topology[t];
      for (const std::string& label : strategy_labels) {
        SummaryRow row;
        row.display_label = display_label_for(label, ablation_mode);
        const std::string cell_key = tables[d].name + "\x1f" + topology_ids[t] + "\x1f" + label;

        std::vector<double> finals;
        std::string best_run_key;
        Accuracy best_val;
        bool have_best = false;
        const auto runs_it = cell_runs.find(cell_key);
        if (runs_it != cell_runs.end()) {
          for (const std::string& run_key : runs_it->second) {
            if (failed_runs.count(run_key)) continue;
            // runs that evaluated nothing have no evolution entry; emission
            // skipped them too
            if (!run_best_key.count(run_key)) continue;
            const RunAgg& agg = run_finals.at(run_key);
            const Accuracy val = Accuracy::from_percent(std::stod(agg.final_acc));
            finals.push_back(val.percent());
            if (!have_best || val > best_val) {
              have_best = true;
              best_val = val;
              best_run_key = run_key;
            }
          }
        }
        if (!have_best) {
          row.absent = true;
        } else {
          const std::string& best_key = run_best_key.at(best_run_key);
          const BenchmarkRecord& record = table.query(best_key);
          row.val_acc = record.val_accuracy.str();
          row.test_acc = record.test_accuracy.str();
          row.val_rank = table.rank(best_key);
          row.test_rank = table.test_rank(best_key);
          const double mean =
              std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
          row.mean = format2(mean);
          row.stdev = format2(sample_stdev(finals, mean));
        }
        group.rows.push_back(std::move(row));
      }
      groups.push_back(std::move(group));
    }
  }

  const std::string recomputed = render_summary_md(backend, temperature, ablation_mode, groups);
  const std::string on_disk = read_file_or_throw(report_dir / "summary.md");
  if (recomputed == on_disk) {
    result.ok = true;
    return result;
  }
  result.ok = false;
  std::istringstream a(recomputed), b(on_disk);
  std::string la, lb;
  int line_no = 0;
  while (true) {
    const bool more_a = static_cast<bool>(std::getline(a, la));
    const bool more_b = static_cast<bool>(std::getline(b, lb));
    ++line_no;
    if (!more_a && !more_b) break;
    if (la != lb || more_a != more_b) {
      result.diff = "summary.md line " + std::to_string(line_no) + " differs\n  recomputed: " +
                    (more_a ? la : "<eof>") + "\n  on disk:    " + (more_b ? lb : "<eof>") + "\n";
      break;
    }
    la.clear();
    lb.clear();
  }
  if (result.diff.empty()) result.diff = "summary.md differs (length mismatch)\n";
  return result;
}

void request_stop() { g_stop_requested.store(true); }
bool stop_requested() { return g_stop_requested.load(); }
void reset_stop() { g_stop_requested.store(false); }

ExperimentSpec spec_from_config(const ConfigMap& config) {
  static const std::unordered_set<std::string> known_keys = {
      "experiment.dataset", "experiment.benchmark", "experiment.synth_seed", "experiment.planted",
      "experiment.topology", "experiment.topology_config", "experiment.operations_config",
      "experiment.repetitions", "experiment.workers", "experiment.out",
      "strategy.kind", "strategy.iterations", "strategy.batch_size", "strategy.seed",
      "strategy.explore_iterations", "strategy.evo.population_size", "strategy.evo.parent_count",
      "strategy.evo.mutation_rate", "strategy.evo.crossover_rate", "strategy.rl.learning_rate",
      "strategy.rl.baseline_decay", "strategy.rl.entropy_coef",
      "llm.backend", "llm.script", "llm.endpoint", "llm.api_path", "llm.model", "llm.api_key_env",
      "llm.temperature", "llm.max_tokens", "llm.timeout_ms", "llm.retries", "llm.backoff_ms",
      "llm.min_request_interval_ms",
      "prompt.ablation", "prompt.feedback_budget_tokens", "prompt.reattach_space_sections",
  };
  for (const auto& [key, value] : config)
    if (!known_keys.count(key)) throw ConfigError("unknown config key: '" + key + "'");

  ExperimentSpec spec;
  ConfigMap echo;
  auto echo_str = [&](const std::string& key, const std::string& fallback) {
    const std::string v = get_string(config, key, fallback);
    echo[key] = v;
    return v;
  };

  if (const std::string path = echo_str("experiment.operations_config", ""); !path.empty())
    spec.registry = OperationRegistry::from_json_text(read_file_or_throw(path));
  if (const std::string path = echo_str("experiment.topology_config", ""); !path.empty())
    spec.known_topologies = load_topologies_file(path);

  DatasetSpec dataset;
  dataset.name = echo_str("experiment.dataset", "synthetic-fixture");
  const std::string benchmark = echo_str("experiment.benchmark", "synthetic");
  if (benchmark == "synthetic") {
    dataset.synthetic = true;
    dataset.synth_seed = get_u64(config, "experiment.synth_seed", 0);
    echo["experiment.synth_seed"] = std::to_string(dataset.synth_seed);
    const std::string planted = echo_str("experiment.planted", "");
    if (!planted.empty()) {
      const std::vector<std::string> ops = split_list(planted);
      if (ops.size() != kOpSlots)
        throw ConfigError("experiment.planted needs exactly 4 comma-separated ops");
      std::array<std::string, kOpSlots> arr;
      std::copy(ops.begin(), ops.end(), arr.begin());
      dataset.planted = arr;
    }
  } else {
    if (!std::filesystem::exists(benchmark))
      throw ConfigError("benchmark file not found: " + benchmark);
    dataset.benchmark_path = std::filesystem::absolute(benchmark);
    echo["experiment.benchmark"] = dataset.benchmark_path.string();
    echo["experiment.synth_seed"] = "0";
    echo["experiment.planted"] = "";
  }
  spec.datasets.push_back(std::move(dataset));

  const std::string topology = echo_str("experiment.topology", "space-1");
  if (topology == "all") {
    for (const MacroTopology& t : spec.known_topologies) spec.topology_ids.push_back(t.id());
  } else {
    spec.topology_ids = split_list(topology);
  }

  spec.repetitions = get_int(config, "experiment.repetitions", 3);
  echo["experiment.repetitions"] = std::to_string(spec.repetitions);
  spec.workers = get_int(config, "experiment.workers", 1);
  echo["experiment.workers"] = std::to_string(spec.workers);
  echo["experiment.out"] = get_string(config, "experiment.out", "gnas-out");

  StrategyConfig base;
  base.iterations = get_int(config, "strategy.iterations", 15);
  base.batch_size = get_int(config, "strategy.batch_size", 10);
  base.seed = get_u64(config, "strategy.seed", 0);
  base.explore_iterations = get_int(config, "strategy.explore_iterations", 3);
  base.evo.population_size = get_int(config, "strategy.evo.population_size", 50);
  base.evo.parent_count = get_int(config, "strategy.evo.parent_count", 15);
  base.evo.mutation_rate = get_double(config, "strategy.evo.mutation_rate", 0.15);
  base.evo.crossover_rate = get_double(config, "strategy.evo.crossover_rate", 0.8);
  base.rl.learning_rate = get_double(config, "strategy.rl.learning_rate", 0.00035);
  base.rl.baseline_decay = get_double(config, "strategy.rl.baseline_decay", 0.9);
  base.rl.entropy_coef = get_double(config, "strategy.rl.entropy_coef", 0.0);
  echo["strategy.iterations"] = std::to_string(base.iterations);
  echo["strategy.batch_size"] = std::to_string(base.batch_size);
  echo["strategy.seed"] = std::to_string(base.seed);
  echo["strategy.explore_iterations"] = std::to_string(base.explore_iterations);
  echo["strategy.evo.population_size"] = std::to_string(base.evo.population_size);
  echo["strategy.evo.parent_count"] = std::to_string(base.evo.parent_count);
  echo["strategy.evo.mutation_rate"] = get_string(config, "strategy.evo.mutation_rate", "0.15");
  echo["strategy.evo.crossover_rate"] = get_string(config, "strategy.evo.crossover_rate", "0.8");
  echo["strategy.rl.learning_rate"] = get_string(config, "strategy.rl.learning_rate", "0.00035");
  echo["strategy.rl.baseline_decay"] = get_string(config, "strategy.rl.baseline_decay", "0.9");
  echo["strategy.rl.entropy_coef"] = get_string(config, "strategy.rl.entropy_coef", "0");

  const std::string kinds = echo_str("strategy.kind", "gpt4gnas");
  for (const std::string& kind : split_list(kinds)) {
    StrategyConfig cfg = base;
    cfg.kind = strategy_from_name(kind);
    spec.strategies.push_back(cfg);
  }

  spec.backend = backend_from_name(echo_str("llm.backend", "mock-random"));
  if (const std::string script = get_string(config, "llm.script", ""); !script.empty()) {
    spec.script_path = std::filesystem::absolute(script);
    echo["llm.script"] = spec.script_path.string();
  } else {
    echo["llm.script"] = "";
    if (spec.backend == BackendKind::kScripted)
      throw ConfigError("the scripted backend needs llm.script");
  }
  spec.llm.endpoint_url = echo_str("llm.endpoint", spec.llm.endpoint_url);
  spec.llm.api_path = echo_str("llm.api_path", spec.llm.api_path);
  spec.llm.model_name = echo_str("llm.model", spec.llm.model_name);
  spec.llm.api_key_env_var = echo_str("llm.api_key_env", spec.llm.api_key_env_var);
  spec.llm.temperature = get_double(config, "llm.temperature", 0.0);
  echo["llm.temperature"] = get_string(config, "llm.temperature", "0");
  spec.llm.max_tokens = get_int(config, "llm.max_tokens", 0);
  echo["llm.max_tokens"] = std::to_string(spec.llm.max_tokens);
  spec.llm.timeout = std::chrono::milliseconds(get_int(config, "llm.timeout_ms", 60000));
  echo["llm.timeout_ms"] = std::to_string(spec.llm.timeout.count());
  spec.llm.retries = get_int(config, "llm.retries", 3);
  echo["llm.retries"] = std::to_string(spec.llm.retries);
  spec.llm.backoff = std::chrono::milliseconds(get_int(config, "llm.backoff_ms", 500));
  echo["llm.backoff_ms"] = std::to_string(spec.llm.backoff.count());
  spec.llm.min_request_interval =
      std::chrono::milliseconds(get_int(config, "llm.min_request_interval_ms", 0));
  echo["llm.min_request_interval_ms"] = std::to_string(spec.llm.min_request_interval.count());

  spec.ablation = ablation_from_slug(echo_str("prompt.ablation", "none"));
  spec.feedback.budget_tokens = get_int(config, "prompt.feedback_budget_tokens", 6000);
  echo["prompt.feedback_budget_tokens"] = std::to_string(spec.feedback.budget_tokens);
  spec.feedback.reattach_space_sections =
      get_bool(config, "prompt.reattach_space_sections", true);
  echo["prompt.reattach_space_sections"] =
      spec.feedback.reattach_space_sections ? "true" : "false";

  spec.effective_config = std::move(echo);
  return spec;
}

}  // namespace gnas
