#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gnas/harness.hpp"

using namespace gnas;
namespace fs = std::filesystem;

namespace {

fs::path test_root() {
  const fs::path dir = fs::temp_directory_path() / "gnas-harness-test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

ConfigMap fixture_config() {
  ConfigMap config;
  config["experiment.dataset"] = "cora-fixture";
  config["experiment.benchmark"] = "synthetic";
  config["experiment.planted"] = "GCN,GAT,GCN,Skip-Connection";
  config["experiment.topology"] = "space-1";
  config["experiment.repetitions"] = "2";
  config["strategy.kind"] = "gpt4gnas,random,evolutionary,rl";
  config["strategy.iterations"] = "4";
  config["strategy.batch_size"] = "5";
  config["strategy.evo.population_size"] = "10";
  config["strategy.evo.parent_count"] = "3";
  config["llm.backend"] = "mock-greedy";
  return config;
}

bool dirs_equal(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<fs::path> rel_a, rel_b;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  if (rel_a != rel_b) {
    *why = "file sets differ";
    return false;
  }
  for (const fs::path& rel : rel_a) {
    if (slurp(a / rel) != slurp(b / rel)) {
      *why = "content differs: " + rel.string();
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("spec_from_config applies defaults and rejects unknown keys") {
  const ExperimentSpec spec = spec_from_config(fixture_config());
  CHECK(spec.datasets.size() == 1);
  CHECK(spec.datasets[0].synthetic);
  CHECK(spec.strategies.size() == 4);
  CHECK(spec.repetitions == 2);
  CHECK(spec.backend == BackendKind::kMockGreedy);
  CHECK(spec.strategies[0].iterations == 4);
  CHECK(spec.effective_config.at("strategy.rl.learning_rate") == "0.00035");
  CHECK(spec.effective_config.at("llm.temperature") == "0");

  ConfigMap bad = fixture_config();
  bad["experiment.typo"] = "x";
  CHECK_THROWS_WITH_AS(spec_from_config(bad), doctest::Contains("experiment.typo"), ConfigError);

  ConfigMap bad_planted = fixture_config();
  bad_planted["experiment.planted"] = "GCN,GAT";
  CHECK_THROWS_AS(spec_from_config(bad_planted), ConfigError);
}

TEST_CASE("config file parsing and overrides") {
  const fs::path dir = test_root();
  spit(dir / "exp.cfg",
       "# fixture experiment\n"
       "[experiment]\n"
       "dataset = cora-fixture\n"
       "benchmark = synthetic\n"
       "topology = space-1\n"
       "[strategy]\n"
       "kind = random\n"
       "iterations = 3\n");
  ConfigMap config = load_config_file(dir / "exp.cfg");
  CHECK(config.at("experiment.dataset") == "cora-fixture");
  CHECK(config.at("strategy.iterations") == "3");
  apply_override(config, "strategy.iterations=5");
  CHECK(config.at("strategy.iterations") == "5");
  CHECK_THROWS_AS(apply_override(config, "no-equals-sign"), ConfigError);
  CHECK_THROWS_AS(load_config_file(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("run_experiment compares the four strategies on the fixture") {
  ConfigMap config = fixture_config();
  const ExperimentSpec spec = spec_from_config(config);
  const ExperimentReport report = run_experiment(spec);

  REQUIRE(report.cells.size() == 4);
  CHECK(report.failures.empty());
  CHECK(report.runs.size() == 4 * 2);

  const CellSummary& gpt = report.cells[0];
  CHECK(gpt.strategy == "gpt4gnas");
  CHECK(!gpt.absent);
  // the greedy mock finds the planted optimum immediately
  CHECK(gpt.val_rank == 1);
  CHECK(gpt.best_key == "space-1|GCN,GAT,GCN,Skip-Connection");
  CHECK(gpt.top10.size() == 10);

  for (const CellSummary& cell : report.cells) {
    CHECK(!cell.absent);
    CHECK(cell.val_rank >= 1);
    CHECK(cell.test_rank >= 1);
  }
}

TEST_CASE("best-of-R selects on validation accuracy, earliest repetition wins ties") {
  ConfigMap config = fixture_config();
  config["strategy.kind"] = "random";
  config["experiment.repetitions"] = "3";
  config["strategy.seed"] = "100";
  const ExperimentSpec spec = spec_from_config(config);
  const ExperimentReport report = run_experiment(spec);
  REQUIRE(report.cells.size() == 1);
  const CellSummary& cell = report.cells[0];

  // recompute the selection by hand from the per-run results
  const RunRecord* expected = nullptr;
  for (const RunRecord& run : report.runs) {
    if (!expected || run.result.state.best().val_accuracy >
                         expected->result.state.best().val_accuracy)
      expected = &run;
  }
  REQUIRE(expected);
  CHECK(cell.best_key == expected->result.state.best().arch.key());
  CHECK(cell.selected_repetition == expected->repetition);
  // test accuracy is read off the selected run's architecture, never maximized
  CHECK(cell.test_accuracy ==
        synth_benchmark(SearchSpace::full(builtin_topologies()[0]), "cora-fixture", 0,
                        PlantedOptimum{{"GCN", "GAT", "GCN", "Skip-Connection"}})
            .query(cell.best_key)
            .test_accuracy);
  SUBCASE("R=1 best-of-1 equals that run's final best") {
    config["experiment.repetitions"] = "1";
    const ExperimentReport single = run_experiment(spec_from_config(config));
    CHECK(single.cells[0].best_key ==
          single.runs[0].result.state.best().arch.key());
  }
}

TEST_CASE("nine-topology sweep produces one row per topology") {
  ConfigMap config = fixture_config();
  config["experiment.topology"] = "all";
  config["strategy.kind"] = "random";
  config["experiment.repetitions"] = "1";
  config["strategy.iterations"] = "2";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  REQUIRE(report.cells.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(report.cells[i].topology == "space-" + std::to_string(i + 1));
    CHECK(!report.cells[i].absent);
    // per-topology fixtures differ, so the bests are topology-specific
    CHECK(report.cells[i].best_key.rfind(report.cells[i].topology + "|", 0) == 0);
  }
}

TEST_CASE("ablation sweep emits four variant rows") {
  ConfigMap config = fixture_config();
  config["strategy.kind"] = "gpt4gnas";
  config["experiment.repetitions"] = "1";
  const ExperimentSpec spec = spec_from_config(config);
  const ExperimentReport report = run_ablation(spec);

  REQUIRE(report.cells.size() == 4);
  CHECK(report.cells[0].display_label == "GPT4GNAS");
  CHECK(report.cells[1].display_label == "¬Connections");
  CHECK(report.cells[2].display_label == "¬Operations");
  CHECK(report.cells[3].display_label == "¬Strategy");
  CHECK(report.ablation_mode);

  // the greedy mock ignores prompt text, so all variants coincide
  for (const CellSummary& cell : report.cells) {
    CHECK(cell.val_accuracy == report.cells[0].val_accuracy);
    CHECK(cell.best_key == report.cells[0].best_key);
  }

  // the prompts themselves do differ per variant (transcript check)
  const RunRecord* full = nullptr;
  const RunRecord* no_conn = nullptr;
  for (const RunRecord& run : report.runs) {
    if (run.strategy == "gpt4gnas") full = &run;
    if (run.strategy == "gpt4gnas-no-connections") no_conn = &run;
  }
  REQUIRE(full);
  REQUIRE(no_conn);
  CHECK(full->result.transcripts[0].request_prompt.user_text !=
        no_conn->result.transcripts[0].request_prompt.user_text);

  SUBCASE("ablation sweep without gpt4gnas is a contract error") {
    ConfigMap random_only = fixture_config();
    random_only["strategy.kind"] = "random";
    CHECK_THROWS_AS(run_ablation(spec_from_config(random_only)), ContractError);
  }
}

TEST_CASE("scripted backend pinned across variants yields identical accuracies") {
  const fs::path dir = test_root();
  // enough scripted batches for 4 variants x 2 iterations
  const SearchSpace space = SearchSpace::full(builtin_topologies()[0]);
  std::vector<std::string> responses;
  for (int call = 0; call < 8; ++call) {
    std::vector<Architecture> batch;
    for (std::uint64_t i = 0; i < 5; ++i)
      batch.push_back(space.at((call % 2) * 5 + i));  // same cycle for every variant
    responses.push_back(format_architectures_for_llm(batch));
  }
  nlohmann::json arr = responses;
  spit(dir / "pinned.json", arr.dump());

  ConfigMap config = fixture_config();
  config["strategy.kind"] = "gpt4gnas";
  config["experiment.repetitions"] = "1";
  config["strategy.iterations"] = "2";
  config["llm.backend"] = "scripted";
  config["llm.script"] = (dir / "pinned.json").string();
  const ExperimentReport report = run_ablation(spec_from_config(config));
  REQUIRE(report.cells.size() == 4);
  for (const CellSummary& cell : report.cells) {
    CHECK(cell.val_accuracy == report.cells[0].val_accuracy);
    CHECK(cell.best_key == report.cells[0].best_key);
  }
}

TEST_CASE("emit_report writes all artifact classes and re-emits byte-identically") {
  const fs::path dir = test_root();
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "1";
  const ExperimentReport report = run_experiment(spec_from_config(config));

  const fs::path out = dir / "report-a";
  const auto files = emit_report(report, out);

  for (const char* name : {"summary.md", "curves.csv", "top10.csv", "evolution.jsonl",
                           "iterations.jsonl", "manifest.json"}) {
    CHECK(fs::exists(out / name));
    CHECK(std::find(files.begin(), files.end(), name) != files.end());
  }
  CHECK(fs::is_directory(out / "transcripts"));
  CHECK(std::find(files.begin(), files.end(), "transcripts/") != files.end());

  SUBCASE("iterations.jsonl carries the complete row schema") {
    std::istringstream lines(slurp(out / "iterations.jsonl"));
    std::string line;
    REQUIRE(std::getline(lines, line));
    const nlohmann::json row = nlohmann::json::parse(line);
    for (const char* field : {"dataset", "topology", "strategy", "seed", "iteration",
                              "batch_keys", "batch_accuracies", "best_so_far_key",
                              "best_so_far_acc", "diagnostics", "topped_up", "unique_queries"})
      CHECK(row.contains(field));
  }

  SUBCASE("manifest lists the files and echoes the config") {
    const nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["files"].size() >= 6);
    CHECK(manifest["effective_config"]["strategy.batch_size"] == "5");
    CHECK(manifest["failures"].empty());
    CHECK(manifest["datasets"][0]["source"] == "synthetic");
  }
  SUBCASE("re-emission of the same report is byte-identical") {
    const fs::path out_b = dir / "report-b";
    emit_report(report, out_b);
    std::string why;
    CHECK_MESSAGE(dirs_equal(out, out_b, &why), why);
  }
  SUBCASE("emitting over an existing directory replaces it atomically") {
    spit(out / "stale-file.txt", "stale");
    emit_report(report, out);
    CHECK(!fs::exists(out / "stale-file.txt"));
    CHECK(fs::exists(out / "summary.md"));
    CHECK(!fs::exists(dir / "report-a.tmp"));
    CHECK(!fs::exists(dir / "report-a.old"));
  }
  SUBCASE("curves.csv carries one row per iteration with the fixed columns") {
    const std::string curves = slurp(out / "curves.csv");
    CHECK(curves.rfind("dataset,topology,strategy,seed,iteration,best_so_far_acc,unique_queries",
                       0) == 0);
    CHECK(curves.find("cora-fixture,space-1,gpt4gnas,0,1,") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("emission failure leaves no partial output") {
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "1";
  config["strategy.kind"] = "random";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  CHECK_THROWS_AS(emit_report(report, "/proc/definitely-unwritable/report"), std::exception);
}

TEST_CASE("verify recomputes summary.md and detects tampering") {
  const fs::path dir = test_root();
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "2";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  const fs::path out = dir / "verify-report";
  emit_report(report, out);

  SUBCASE("untampered report verifies") {
    const VerifyResult result = verify_report_dir(out);
    CHECK_MESSAGE(result.ok, result.diff);
  }
  SUBCASE("edited number fails with a diff") {
    std::string summary = slurp(out / "summary.md");
    const std::size_t pos = summary.find("(1)");
    REQUIRE(pos != std::string::npos);
    summary.replace(pos, 3, "(2)");
    spit(out / "summary.md", summary);
    const VerifyResult result = verify_report_dir(out);
    CHECK(!result.ok);
    CHECK(result.diff.find("differs") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("failed cells are isolated and marked absent, not zero-filled") {
  const fs::path dir = test_root();
  // a script that immediately runs dry: every gpt4gnas run fails, the other
  // strategies still complete
  spit(dir / "empty-script.json", "[]");
  ConfigMap config = fixture_config();
  config["strategy.kind"] = "gpt4gnas,random";
  config["experiment.repetitions"] = "2";
  config["llm.backend"] = "scripted";
  config["llm.script"] = (dir / "empty-script.json").string();
  const ExperimentReport report = run_experiment(spec_from_config(config));

  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].absent);       // gpt4gnas: every repetition failed
  CHECK(!report.cells[1].absent);      // random is unaffected
  CHECK(report.failures.size() == 2);  // one note per failed repetition
  CHECK(report.failures[0].strategy == "gpt4gnas");

  const fs::path out = dir / "failed-report";
  emit_report(report, out);
  const std::string summary = slurp(out / "summary.md");
  CHECK(summary.find("| gpt4gnas | — | — | — |") != std::string::npos);
  const VerifyResult verified = verify_report_dir(out);
  CHECK_MESSAGE(verified.ok, verified.diff);
  fs::remove_all(out);
}

TEST_CASE("manifest replay reproduces the run byte-identically") {
  const fs::path dir = test_root();
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "1";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  const fs::path out_a = dir / "replay-a";
  emit_report(report, out_a);

  // replay from the manifest alone
  const ConfigMap replay = load_config_file(out_a / "manifest.json");
  const ExperimentReport again = run_experiment(spec_from_config(replay));
  const fs::path out_b = dir / "replay-b";
  emit_report(again, out_b);

  std::string why;
  CHECK_MESSAGE(dirs_equal(out_a, out_b, &why), why);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("parallel workers produce the same report as a single worker") {
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "2";
  config["experiment.workers"] = "4";
  const ExperimentReport parallel = run_experiment(spec_from_config(config));
  config["experiment.workers"] = "1";
  const ExperimentReport serial = run_experiment(spec_from_config(config));

  const fs::path dir = test_root();
  emit_report(parallel, dir / "par");
  // worker count is part of the echoed config; align it before comparing
  ExperimentReport serial_patched = serial;
  serial_patched.effective_config["experiment.workers"] = "4";
  emit_report(serial_patched, dir / "ser");
  std::string why;
  CHECK_MESSAGE(dirs_equal(dir / "par", dir / "ser", &why), why);
  fs::remove_all(dir / "par");
  fs::remove_all(dir / "ser");
}

TEST_CASE("no secret material reaches any emitted file") {
  setenv("GNAS_LLM_API_KEY", "sk-super-secret-value", 1);
  const fs::path dir = test_root();
  ConfigMap config = fixture_config();
  config["experiment.repetitions"] = "1";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  const fs::path out = dir / "secret-scan";
  emit_report(report, out);
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file()) continue;
    const std::string message = "secret leaked into " + entry.path().string();
    CHECK_MESSAGE(slurp(entry.path()).find("sk-super-secret-value") == std::string::npos, message);
  }
  fs::remove_all(out);
  unsetenv("GNAS_LLM_API_KEY");
}

TEST_CASE("shutdown request skips pending runs but still reports") {
  ConfigMap config = fixture_config();
  config["strategy.kind"] = "random";
  config["experiment.repetitions"] = "2";
  request_stop();
  const ExperimentReport report = run_experiment(spec_from_config(config));
  reset_stop();
  CHECK(report.failures.size() == 2);
  CHECK(report.failures[0].error.find("shutdown") != std::string::npos);
  CHECK(report.cells[0].absent);

  const fs::path out = test_root() / "stopped";
  emit_report(report, out);  // partial report still emits
  CHECK(fs::exists(out / "manifest.json"));
  fs::remove_all(out);
}

TEST_CASE("file-backed benchmark datasets resolve before any run starts") {
  const fs::path dir = test_root();
  ConfigMap config = fixture_config();
  config["experiment.benchmark"] = (dir / "missing.gnasbench.json").string();
  CHECK_THROWS_AS(spec_from_config(config), ConfigError);

  // a real file round-trips through the harness
  const SearchSpace space = SearchSpace::full(builtin_topologies()[0]);
  save_benchmark(synth_benchmark(space, "filed", 9), (dir / "filed.gnasbench.json").string());
  config["experiment.benchmark"] = (dir / "filed.gnasbench.json").string();
  config["experiment.dataset"] = "filed";
  config["strategy.kind"] = "random";
  config["experiment.repetitions"] = "1";
  const ExperimentReport report = run_experiment(spec_from_config(config));
  CHECK(!report.cells[0].absent);

  const fs::path out = dir / "file-backed";
  emit_report(report, out);
  const VerifyResult verified = verify_report_dir(out);
  CHECK_MESSAGE(verified.ok, verified.diff);
  fs::remove_all(out);
}
