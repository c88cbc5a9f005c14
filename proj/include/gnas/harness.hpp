#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnas/config.hpp"
#include "gnas/strategies.hpp"

namespace gnas {

enum class BackendKind { kHttp, kScripted, kMockGreedy, kMockRandom };
std::string_view backend_name(BackendKind kind);
BackendKind backend_from_name(std::string_view name);

/// One benchmark source: a converted benchmark file, or a synthetic fixture
/// generated per topology from (seed, planted ops).
struct DatasetSpec {
  std::string name;
  bool synthetic = false;
  std::filesystem::path benchmark_path;  // file datasets
  std::uint64_t synth_seed = 0;
  std::optional<std::array<std::string, kOpSlots>> planted;
};

/// The full sweep request: datasets x topologies x strategies x repetitions.
struct ExperimentSpec {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> topology_ids;
  std::vector<MacroTopology> known_topologies;  // resolution universe
  OperationRegistry registry;
  std::vector<StrategyConfig> strategies;
  int repetitions = 3;

  BackendKind backend = BackendKind::kMockRandom;
  std::filesystem::path script_path;  // scripted backend playback file
  LLMConfig llm;
  AblationVariant ablation = AblationVariant::kFull;
  FeedbackOptions feedback;

  int workers = 1;
  ConfigMap effective_config;  // echoed verbatim into the manifest

  ExperimentSpec();
  void validate() const;
};

/// Builds a spec from a flat config map (all defaults resolved). The
/// returned spec's effective_config echoes every known key.
ExperimentSpec spec_from_config(const ConfigMap& config);

struct RunRecord {
  std::string dataset;
  std::string topology;
  std::string strategy;  // machine label, includes the ablation suffix
  std::uint64_t seed = 0;
  int repetition = 0;
  RunResult result;

  bool failed() const { return result.failure.has_value(); }
};

struct Top10Row {
  std::string arch_key;
  Accuracy val_accuracy;
  Accuracy test_accuracy;
};

/// One (dataset, topology, strategy) cell: the best-of-R selection plus
/// aggregates. Selection uses validation accuracy only; test accuracy is
/// read off the selected run, never maximized independently.
struct CellSummary {
  std::string dataset;
  std::string topology;
  std::string strategy;
  std::string display_label;
  bool absent = false;  // every repetition failed
  int selected_repetition = -1;
  std::string best_key;
  Accuracy val_accuracy;
  Accuracy test_accuracy;
  int val_rank = 0;
  int test_rank = 0;
  double mean_final_val = 0.0;
  double stdev_final_val = 0.0;
  std::vector<Top10Row> top10;
};

struct FailureNote {
  std::string dataset;
  std::string topology;
  std::string strategy;
  std::uint64_t seed = 0;
  int repetition = 0;
  std::string error;
};

/// Derived data only: every summary value is recomputable from the iteration
/// histories plus the benchmark tables.
struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::vector<CellSummary> cells;
  std::vector<FailureNote> failures;
  std::vector<DatasetSpec> datasets;       // provenance for verification
  std::vector<std::string> topology_ids;   // emission order
  std::vector<std::string> strategy_labels;
  ConfigMap effective_config;
  std::string backend;
  double llm_temperature = 0.0;
  bool ablation_mode = false;
};

/// Runs every cell of the experiment. Per-run failures are isolated; a
/// fully failed cell is marked absent, never zero-filled. Unresolvable
/// resources fail before any run starts.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// The prompt-ablation sweep: the full prompt plus each single-flag variant,
/// rows keyed GPT4GNAS / ¬Connections / ¬Operations / ¬Strategy.
ExperimentReport run_ablation(const ExperimentSpec& spec);

/// Writes summary.md, curves.csv, top10.csv, evolution.jsonl, transcripts/
/// and manifest.json. Emission is atomic: the directory holds either its
/// previous content or the complete new report. Returns the emitted file
/// list (manifest order).
std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::filesystem::path& out_dir);

struct VerifyResult {
  bool ok = false;
  std::string diff;  // human-readable mismatch description
};

/// Recomputes summary.md from curves.csv + evolution.jsonl + the benchmark
/// tables named in the manifest and compares byte-for-byte.
VerifyResult verify_report_dir(const std::filesystem::path& report_dir);

/// Cooperative shutdown: finish in-flight runs, skip the rest, still emit.
void request_stop();
bool stop_requested();
void reset_stop();

}  // namespace gnas
