#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gnas/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

void handle_signal(int) { gnas::request_stop(); }

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
};

gnas::ConfigMap assemble_config(const CommonFlags& flags) {
  gnas::ConfigMap config;
  if (!flags.config_path.empty()) config = gnas::load_config_file(flags.config_path);
  for (const std::string& kv : flags.overrides) gnas::apply_override(config, kv);
  return config;
}

// Overrides land after the file so dedicated flags win.
void set_if(gnas::ConfigMap& config, const std::string& key, const std::string& value) {
  if (!value.empty()) config[key] = value;
}

int cmd_search(const gnas::ConfigMap& config, bool ablation_sweep, bool live) {
  const gnas::ExperimentSpec spec = gnas::spec_from_config(config);
  if (spec.backend == gnas::BackendKind::kHttp && !live)
    throw gnas::ConfigError("the http backend sends live requests; pass --live to confirm");

  const gnas::ExperimentReport report =
      ablation_sweep ? gnas::run_ablation(spec) : gnas::run_experiment(spec);
  const std::string out_dir = gnas::get_string(spec.effective_config, "experiment.out", "gnas-out");
  gnas::emit_report(report, out_dir);

  for (const gnas::CellSummary& cell : report.cells) {
    if (cell.absent) {
      std::cout << cell.display_label << ": no completed run (see " << out_dir
                << "/manifest.json)\n";
      continue;
    }
    std::cout << cell.display_label << ": m* = " << cell.best_key
              << "  val = " << cell.val_accuracy.str() << " (rank " << cell.val_rank << ")"
              << "  test = " << cell.test_accuracy.str() << " (rank " << cell.test_rank << ")\n";
  }
  std::cout << "report written to " << out_dir << "\n";
  return report.failures.empty() ? kExitOk : kExitRunFailure;
}

int cmd_benchmark_gen(const std::string& out, const std::string& dataset,
                      const std::string& topology, std::uint64_t seed, const std::string& planted,
                      const std::string& topology_config, const std::string& operations_config) {
  gnas::OperationRegistry registry = gnas::OperationRegistry::builtin();
  if (!operations_config.empty()) {
    std::ifstream in(operations_config, std::ios::binary);
    if (!in) throw gnas::IoError("cannot open operations config: " + operations_config);
    std::ostringstream buf;
    buf << in.rdbuf();
    registry = gnas::OperationRegistry::from_json_text(buf.str());
  }
  std::vector<gnas::MacroTopology> known = gnas::builtin_topologies();
  if (!topology_config.empty()) known = gnas::load_topologies_file(topology_config);
  const auto it = std::find_if(known.begin(), known.end(),
                               [&](const gnas::MacroTopology& t) { return t.id() == topology; });
  if (it == known.end()) throw gnas::ConfigError("unknown topology id: " + topology);

  const gnas::SearchSpace space = gnas::SearchSpace::full(*it, registry);
  std::optional<gnas::PlantedOptimum> planted_cfg;
  if (!planted.empty()) {
    const std::vector<std::string> ops = gnas::split_list(planted);
    if (ops.size() != gnas::kOpSlots)
      throw gnas::ConfigError("--planted needs exactly 4 comma-separated ops");
    gnas::PlantedOptimum p;
    std::copy(ops.begin(), ops.end(), p.ops.begin());
    planted_cfg = p;
  }
  const gnas::BenchmarkTable table = gnas::synth_benchmark(space, dataset, seed, planted_cfg);
  gnas::save_benchmark(table, out);
  std::cout << "wrote " << table.size() << " records to " << out << "\n"
            << "rank-1 architecture: " << table.rank_index().front() << "\n";
  return kExitOk;
}

int cmd_rank(const std::string& benchmark, const std::string& arch,
             const std::string& topology_config, const std::string& operations_config) {
  gnas::OperationRegistry registry = gnas::OperationRegistry::builtin();
  if (!operations_config.empty()) {
    std::ifstream in(operations_config, std::ios::binary);
    if (!in) throw gnas::IoError("cannot open operations config: " + operations_config);
    std::ostringstream buf;
    buf << in.rdbuf();
    registry = gnas::OperationRegistry::from_json_text(buf.str());
  }
  std::vector<gnas::MacroTopology> known = gnas::builtin_topologies();
  if (!topology_config.empty()) known = gnas::load_topologies_file(topology_config);

  const gnas::BenchmarkTable table = gnas::load_benchmark(benchmark, registry, known);
  const gnas::Architecture decoded = gnas::decode_architecture(arch, registry, known);
  const gnas::BenchmarkRecord& record = table.query(decoded.key());
  std::cout << "(" << record.val_accuracy.str() << ", " << table.rank(decoded.key()) << ")\n";
  return kExitOk;
}

int cmd_verify(const std::string& report_dir) {
  const gnas::VerifyResult result = gnas::verify_report_dir(report_dir);
  if (result.ok) {
    std::cout << "verify ok: summary.md matches the recomputation\n";
    return kExitOk;
  }
  std::cout << "verify FAILED:\n" << result.diff;
  return kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  CLI::App app{"Graph neural architecture search over tabular benchmarks"};
  app.require_subcommand(1);

  CommonFlags common;

  // search
  auto* search = app.add_subcommand("search", "Run a search experiment and emit reports");
  std::string strategy, backend, dataset, benchmark, topology, ablation, out, script;
  std::string seed_str, iterations_str, batch_str, reps_str, workers_str;
  bool live = false, ablation_sweep = false;
  search->add_option("--config", common.config_path, "Sectioned config file or manifest.json");
  search->add_option("--set", common.overrides, "Override a dotted config key (key=value)");
  search->add_option("--strategy", strategy, "gpt4gnas|random|evolutionary|rl (comma list)");
  search->add_option("--backend", backend, "http|scripted|mock-greedy|mock-random");
  search->add_option("--dataset", dataset, "Dataset name");
  search->add_option("--benchmark", benchmark, "Benchmark file, or 'synthetic'");
  search->add_option("--topology", topology, "Topology id, comma list, or 'all'");
  search->add_option("--seed", seed_str, "Base seed (repetition r uses seed+r)");
  search->add_option("--iterations", iterations_str, "Search iterations per run");
  search->add_option("--batch-size", batch_str, "Architectures per iteration");
  search->add_option("--repetitions", reps_str, "Repetitions per cell (best-of-R)");
  search->add_option("--ablation", ablation, "none|no-connections|no-operations|no-strategy");
  search->add_flag("--ablation-sweep", ablation_sweep, "Run the full prompt-ablation sweep");
  search->add_option("--out", out, "Report output directory");
  search->add_option("--script", script, "Playback file for the scripted backend");
  search->add_option("--workers", workers_str, "Parallel runs");
  search->add_flag("--live", live, "Allow live requests with the http backend");

  // benchmark-gen
  auto* gen = app.add_subcommand("benchmark-gen", "Generate a synthetic benchmark fixture");
  std::string gen_out, gen_dataset = "synthetic-fixture", gen_topology = "space-1";
  std::string gen_planted, gen_topo_cfg, gen_ops_cfg;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output .gnasbench.json path")->required();
  gen->add_option("--dataset", gen_dataset, "Dataset name to embed");
  gen->add_option("--topology", gen_topology, "Topology id");
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--planted", gen_planted, "Planted optimum ops, e.g. \"GCN,GAT,GCN,skip\"");
  gen->add_option("--topology-config", gen_topo_cfg, "Custom topology config");
  gen->add_option("--operations-config", gen_ops_cfg, "Custom operations config");

  // rank
  auto* rank = app.add_subcommand("rank", "Print (accuracy, rank) for an architecture key");
  std::string rank_benchmark, rank_arch, rank_topo_cfg, rank_ops_cfg;
  rank->add_option("--benchmark", rank_benchmark, "Benchmark file")->required();
  rank->add_option("--arch", rank_arch, "Architecture key")->required();
  rank->add_option("--topology-config", rank_topo_cfg, "Custom topology config");
  rank->add_option("--operations-config", rank_ops_cfg, "Custom operations config");

  // verify
  auto* verify = app.add_subcommand("verify", "Recompute summary.md from raw report data");
  std::string verify_dir;
  verify->add_option("report_dir", verify_dir, "Report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (search->parsed()) {
      gnas::ConfigMap config = assemble_config(common);
      set_if(config, "strategy.kind", strategy);
      set_if(config, "llm.backend", backend);
      set_if(config, "experiment.dataset", dataset);
      set_if(config, "experiment.benchmark", benchmark);
      set_if(config, "experiment.topology", topology);
      set_if(config, "strategy.seed", seed_str);
      set_if(config, "strategy.iterations", iterations_str);
      set_if(config, "strategy.batch_size", batch_str);
      set_if(config, "experiment.repetitions", reps_str);
      set_if(config, "prompt.ablation", ablation);
      set_if(config, "experiment.out", out);
      set_if(config, "llm.script", script);
      set_if(config, "experiment.workers", workers_str);
      return cmd_search(config, ablation_sweep, live);
    }
    if (gen->parsed())
      return cmd_benchmark_gen(gen_out, gen_dataset, gen_topology, gen_seed, gen_planted,
                               gen_topo_cfg, gen_ops_cfg);
    if (rank->parsed()) return cmd_rank(rank_benchmark, rank_arch, rank_topo_cfg, rank_ops_cfg);
    if (verify->parsed()) return cmd_verify(verify_dir);
  } catch (const gnas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gnas::StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gnas::ResolutionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gnas::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gnas::NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfigError;
}
