// Acceptance suite: one check per engine-level guarantee, one pass/fail line
// each. Run directly or through ctest.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <regex>

#include <nlohmann/json.hpp>

#include "gnas/harness.hpp"

using namespace gnas;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

SearchSpace full_space() { return SearchSpace::full(builtin_topologies()[0]); }

SearchSpace toy_space() {
  const OperationRegistry& reg = OperationRegistry::builtin();
  std::vector<OperationKind> ops = {reg.resolve("GCN"), reg.resolve("GAT"), reg.resolve("GIN")};
  return SearchSpace(builtin_topologies()[0], std::move(ops));
}

PlantedOptimum planted_cfg() {
  PlantedOptimum planted;
  planted.ops = {"GCN", "GAT", "GCN", "Skip-Connection"};
  return planted;
}

BenchmarkTable fixture_table(const SearchSpace& space) {
  return synth_benchmark(space, "cora-fixture", 0, planted_cfg());
}

int count_regex(const std::string& text, const std::regex& re) {
  return static_cast<int>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "gnas-acceptance";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------------------
// 1. Prompt fidelity
// ---------------------------------------------------------------------------
void criterion_prompt_fidelity(Check& check) {
  const SearchSpace space = full_space();
  StrategyConfig cfg;

  const PromptBundle full = build_gnas_prompt("Cora", space, cfg);
  const std::string& text = full.user_text;
  check.require(text.find("The task is to choose the best GNN architecture") != std::string::npos,
                "P_D task sentence missing");
  check.require(text.find("[Cora]") != std::string::npos, "P_D dataset name missing");
  check.require(text.find("maximize model accuracy") != std::string::npos,
                "P_D objective missing");
  const std::regex row_re(R"(\[[01](, [01]){5}\])");
  check.require(count_regex(text, row_re) == 6, "P_D must render exactly 6 adjacency rows");
  for (const OperationKind& op : space.operations())
    check.require(text.find(op.name) != std::string::npos, "P_D missing op " + op.name);
  check.require(text.find("exploration strategy") != std::string::npos &&
                    text.find("exploitation") != std::string::npos &&
                    text.find("Randomly select a batch of operations") != std::string::npos,
                "P_D strategy text missing");

  const PromptBundle no_conn =
      build_gnas_prompt("Cora", space, cfg, ablation_flags(AblationVariant::kNoConnections));
  check.require(count_regex(no_conn.user_text, row_re) == 0,
                "¬Connections must remove the adjacency rows");
  check.require(no_conn.user_text.find("operations that can be selected") != std::string::npos,
                "¬Connections must keep the operations");
  check.require(no_conn.user_text.find("exploration strategy") != std::string::npos,
                "¬Connections must keep the strategy");

  const PromptBundle no_ops =
      build_gnas_prompt("Cora", space, cfg, ablation_flags(AblationVariant::kNoOperations));
  check.require(no_ops.user_text.find("GraphSAGE") == std::string::npos,
                "¬Operations must remove the op listing");
  check.require(count_regex(no_ops.user_text, row_re) == 6,
                "¬Operations must keep the adjacency rows");

  const PromptBundle no_strat =
      build_gnas_prompt("Cora", space, cfg, ablation_flags(AblationVariant::kNoStrategy));
  check.require(no_strat.user_text.find("exploration strategy") == std::string::npos &&
                    no_strat.user_text.find("exploitation") == std::string::npos,
                "¬Strategy must remove the strategy text");
  check.require(no_strat.user_text.find("// Output Format") != std::string::npos,
                "¬Strategy must keep the output contract");

  // P_F line format
  SearchState state;
  Rng rng(1);
  for (int i = 0; i < 12; ++i) {
    Architecture arch = random_architecture(space, rng);
    while (state.contains(arch.key())) arch = random_architecture(space, rng);
    state.record(std::move(arch), Accuracy::from_centi(7000 + i * 13), 1 + i / 10);
  }
  const PromptBundle feedback = build_feedback_prompt(state, space, cfg);
  const std::regex line_re(R"(Model \[[^\]]+\] achieves an accuracy of [0-9.]+)");
  check.require(count_regex(feedback.user_text, line_re) == 12,
                "P_F must report one template line per model");
}

// ---------------------------------------------------------------------------
// 2. Parser round-trip + robustness corpus
// ---------------------------------------------------------------------------
void criterion_parser_round_trip(Check& check) {
  const SearchSpace space = toy_space();
  check.require(space.cardinality() == 81, "toy space must have 81 architectures");

  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Architecture> batch;
    std::unordered_set<std::string> used;
    while (batch.size() < 10) {
      Architecture arch = space.at(uniform_index(rng, 81));
      if (used.insert(arch.key()).second) batch.push_back(std::move(arch));
    }
    const ParseResult parsed =
        parse_architectures(format_architectures_for_llm(batch), space, 10, {});
    bool exact = parsed.architectures.size() == batch.size();
    for (std::size_t i = 0; exact && i < batch.size(); ++i)
      exact = parsed.architectures[i] == batch[i];
    check.require(exact, "round-trip failed on trial " + std::to_string(trial));
    if (!exact) return;
  }

  // robustness corpus: each malformed response yields its contracted
  // diagnostics, never a crash
  struct Case {
    const char* name;
    std::string text;
    std::function<bool(const ParseResult&)> expect;
  };
  const std::unordered_set<std::string> seen = {"space-1|GCN,GCN,GCN,GCN"};
  const std::vector<Case> corpus = {
      {"unknown op",
       "```json\n[{\"ops\": [\"GCN\", \"GAT\", \"FooNet\", \"GIN\"]}]\n```",
       [](const ParseResult& r) {
         return r.architectures.empty() && r.diagnostics.dropped_invalid_op_entries == 1 &&
                r.diagnostics.dropped_invalid_op.size() == 1 &&
                r.diagnostics.dropped_invalid_op[0] == "FooNet";
       }},
      {"arity 3", "```json\n[{\"ops\": [\"GCN\", \"GAT\", \"GIN\"]}]\n```",
       [](const ParseResult& r) { return r.diagnostics.dropped_wrong_arity == 1; }},
      {"arity 5",
       "```json\n[{\"ops\": [\"GCN\", \"GAT\", \"GIN\", \"GCN\", \"GAT\"]}]\n```",
       [](const ParseResult& r) { return r.diagnostics.dropped_wrong_arity == 1; }},
      {"in-batch duplicate",
       "```json\n[{\"ops\": [\"GCN\",\"GAT\",\"GIN\",\"GCN\"]}, {\"ops\": "
       "[\"gcn\",\"gat\",\"gin\",\"gcn\"]}]\n```",
       [](const ParseResult& r) {
         return r.architectures.size() == 1 && r.diagnostics.dropped_duplicates == 1;
       }},
      {"already evaluated",
       "```json\n[{\"ops\": [\"GCN\",\"GCN\",\"GCN\",\"GCN\"]}]\n```",
       [](const ParseResult& r) {
         return r.architectures.empty() && r.diagnostics.dropped_already_evaluated == 1;
       }},
      {"prose-wrapped", "Here are my picks:\n```json\n[{\"ops\": "
                        "[\"GIN\",\"GIN\",\"GIN\",\"GIN\"]}]\n```\nEnjoy!",
       [](const ParseResult& r) { return r.architectures.size() == 1; }},
      {"unfenced array",
       "I suggest [{\"ops\": [\"GAT\",\"GAT\",\"GAT\",\"GAT\"]}] for the next round.",
       [](const ParseResult& r) {
         return r.architectures.size() == 1 && r.diagnostics.raw_blocks_found == 0;
       }},
      {"empty text", "",
       [](const ParseResult& r) { return r.empty_batch() && r.diagnostics.raw_candidates == 0; }},
      {"no json at all", "Sorry, I cannot help with that.",
       [](const ParseResult& r) { return r.empty_batch(); }},
      {"broken json in fence", "```json\n[{\"ops\": [\"GCN\",\n```",
       [](const ParseResult& r) { return r.empty_batch(); }},
      {"non-string ops", "```json\n[{\"ops\": [1, 2, 3, 4]}]\n```",
       [](const ParseResult& r) { return r.diagnostics.dropped_malformed == 1; }},
      {"missing ops key", "```json\n[{\"architecture\": \"GCN GCN GCN GCN\"}]\n```",
       [](const ParseResult& r) { return r.diagnostics.dropped_malformed == 1; }},
  };
  check.require(corpus.size() >= 10, "robustness corpus must hold at least 10 cases");
  for (const Case& c : corpus) {
    const ParseResult parsed = parse_architectures(c.text, space, 10, seen);
    check.require(c.expect(parsed), std::string("diagnostics contract broken for: ") + c.name);
    check.require(parsed.diagnostics.valid + parsed.diagnostics.total_dropped() ==
                      parsed.diagnostics.raw_candidates,
                  std::string("diagnostics accounting broken for: ") + c.name);
  }
}

// ---------------------------------------------------------------------------
// 3. Oracle correctness
// ---------------------------------------------------------------------------
void criterion_oracle_correctness(Check& check) {
  const SearchSpace space = full_space();
  const BenchmarkTable table = fixture_table(space);
  check.require(table.size() == 6561, "fixture must have 6561 records");

  // bit-exact against the generating function
  const BenchmarkTable regen = synth_benchmark(space, "cora-fixture", 0, planted_cfg());
  bool exact = true;
  for (const BenchmarkRecord& rec : table.records()) {
    const BenchmarkRecord& other = regen.query(rec.arch_key);
    exact = exact && rec.val_accuracy == other.val_accuracy &&
            rec.test_accuracy == other.test_accuracy;
  }
  check.require(exact, "query is not bit-exact against the regenerated table");

  // rank vs linear scan on 100 random architectures
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Architecture arch = random_architecture(space, rng);
    const Accuracy val = table.query(arch.key()).val_accuracy;
    int brute = 1;
    for (const BenchmarkRecord& rec : table.records())
      if (rec.val_accuracy > val) ++brute;
    if (table.rank(arch.key()) != brute) {
      check.require(false, "rank mismatch vs linear scan at " + arch.key());
      break;
    }
  }
  check.require(table.rank(table.rank_index().front()) == 1, "rank(argmax) must be 1");

  // regeneration with the same seed is byte-identical
  check.require(benchmark_to_json(table) == benchmark_to_json(regen),
                "regeneration is not byte-identical");
}

// ---------------------------------------------------------------------------
// 4. Loop correctness (greedy-oracle mock)
// ---------------------------------------------------------------------------
void criterion_loop_correctness(Check& check) {
  const SearchSpace space = full_space();
  const BenchmarkTable table = fixture_table(space);
  StrategyConfig cfg;
  cfg.kind = StrategyKind::kGpt4Gnas;
  cfg.iterations = 15;
  cfg.batch_size = 10;

  std::uint64_t oracle_calls = 0;
  OracleFn counting = [&table, &oracle_calls](const std::string& key) {
    ++oracle_calls;
    return table.find(key);
  };
  auto backend = make_mock_greedy(table, space, cfg.batch_size);
  LLMClient client(*backend, LLMConfig{});
  const RunResult result =
      run_gpt4gnas_with_oracle(space, "cora-fixture", counting, cfg, client, {});

  check.require(!result.failure, "run aborted: " + result.failure.value_or(""));
  check.require(result.state.best().arch.key() == table.rank_index().front(),
                "m* must be the fixture's global best");
  check.require(!result.rows.empty() &&
                    result.rows[0].best_so_far_key == table.rank_index().front(),
                "the global best must be found at iteration 1");
  check.require(oracle_calls == 150, "expected exactly 150 oracle queries, got " +
                                         std::to_string(oracle_calls));
  check.require(result.state.evaluated_count() == 150,
                "expected 150 unique evaluations, got " +
                    std::to_string(result.state.evaluated_count()));
  check.require(result.feedback_prompts_built == 14,
                "expected 14 feedback prompts, got " +
                    std::to_string(result.feedback_prompts_built));
  check.require(result.gnas_prompts_built == 1, "expected exactly one GNAS prompt");
}

// ---------------------------------------------------------------------------
// 5. Strategy comparison at desk scale
// ---------------------------------------------------------------------------
void criterion_strategy_comparison(Check& check) {
  const SearchSpace space = full_space();
  const BenchmarkTable table = fixture_table(space);

  // analytic expectation of the max of 150 iid uniform draws, from the
  // fixture's empirical distribution
  std::vector<int> centis;
  centis.reserve(table.size());
  for (const BenchmarkRecord& rec : table.records()) centis.push_back(rec.val_accuracy.centi());
  std::sort(centis.begin(), centis.end());
  const double n = static_cast<double>(centis.size());
  const int k = 150;
  double expectation = 0.0;
  for (std::size_t i = 0; i < centis.size();) {
    std::size_t j = i;
    while (j < centis.size() && centis[j] == centis[i]) ++j;
    const double cdf = static_cast<double>(j) / n;
    const double cdf_prev = static_cast<double>(i) / n;
    expectation +=
        (centis[i] / 100.0) * (std::pow(cdf, k) - std::pow(cdf_prev, k));
    i = j;
  }

  StrategyConfig rnd;
  rnd.kind = StrategyKind::kRandom;
  rnd.iterations = 15;
  rnd.batch_size = 10;  // budget 150
  StrategyConfig evo;
  evo.kind = StrategyKind::kEvolutionary;
  evo.iterations = 10;
  evo.batch_size = 10;
  evo.evo.population_size = 50;  // 50 + 100 = equal 150-query budget
  evo.evo.parent_count = 15;

  double random_sum = 0.0, evo_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    rnd.seed = seed;
    evo.seed = seed;
    const RunResult r = run_random(space, table, rnd);
    const RunResult e = run_evolutionary(space, table, evo);
    check.require(r.oracle_queries <= 150, "random run exceeded the query budget");
    check.require(e.oracle_queries <= 150, "evolutionary run exceeded the query budget");
    random_sum += r.state.best().val_accuracy.percent();
    evo_sum += e.state.best().val_accuracy.percent();
  }
  const double random_mean = random_sum / 20.0;
  const double evo_mean = evo_sum / 20.0;

  check.require(evo_mean > random_mean,
                "evolutionary mean " + std::to_string(evo_mean) +
                    " must strictly exceed random mean " + std::to_string(random_mean));
  check.require(std::abs(random_mean - expectation) <= 0.5,
                "random mean " + std::to_string(random_mean) +
                    " deviates more than 0.5 from the analytic expectation " +
                    std::to_string(expectation));
}

// ---------------------------------------------------------------------------
// 6. RL sanity
// ---------------------------------------------------------------------------
void criterion_rl_sanity(Check& check) {
  // gradient vs central finite differences
  Rng rng(271828);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 7));
    Eigen::ArrayXd logits(n);
    for (int i = 0; i < n; ++i) logits[i] = 2.0 * uniform_unit(rng) - 1.0;
    const int action = static_cast<int>(uniform_index(rng, n));
    const double advantage = 2.0 * uniform_unit(rng) - 1.0;
    const Eigen::ArrayXd grad = reinforce_gradient(logits, action, advantage);
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      Eigen::ArrayXd up = logits, down = logits;
      up[j] += h;
      down[j] -= h;
      const double numeric =
          advantage * (std::log(softmax(up)[action]) - std::log(softmax(down)[action])) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(grad[j]), 1e-9});
      if (std::abs(numeric - grad[j]) / denom >= 1e-5) {
        check.require(false, "gradient/finite-difference mismatch at trial " +
                                 std::to_string(trial));
        return;
      }
    }
  }

  // a dominant op in slot 1 (+10 accuracy) must reach probability > 0.9
  // within 200 iterations on at least 18 of 20 seeds
  const SearchSpace space = full_space();
  const int gat = space.op_index("GAT");
  std::vector<BenchmarkRecord> records;
  for (const Architecture& arch : enumerate_architectures(space)) {
    const bool dominant = arch.ops()[1] == "GAT";
    const int centi =
        6000 + (dominant ? 1000 : 0) + static_cast<int>(splitmix64(fnv1a(arch.key())) % 100);
    records.push_back(BenchmarkRecord{arch.key(), Accuracy::from_centi(centi),
                                      Accuracy::from_centi(centi), std::nullopt, std::nullopt});
  }
  const BenchmarkTable dominant_table("dominant", std::move(records));

  StrategyConfig cfg;
  cfg.kind = StrategyKind::kRl;
  cfg.iterations = 200;
  cfg.batch_size = 10;
  // adaptive-moment steps bound total logit motion by lr x updates, so the
  // shipped default of 0.00035 cannot reach 0.9 inside this budget; the
  // drive test uses a step size sized for it
  cfg.rl.learning_rate = 0.05;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const RunResult result = run_rl(space, dominant_table, cfg);
    if (result.rl_policy_probs[1][gat] > 0.9) ++successes;
  }
  check.require(successes >= 18, "dominant op reached p>0.9 on only " +
                                     std::to_string(successes) + "/20 seeds");

  // zero learning rate reproduces random search exactly
  const BenchmarkTable table = fixture_table(space);
  StrategyConfig zero;
  zero.iterations = 15;
  zero.batch_size = 10;
  zero.seed = 33;
  zero.kind = StrategyKind::kRl;
  zero.rl.learning_rate = 0.0;
  const RunResult rl = run_rl(space, table, zero);
  zero.kind = StrategyKind::kRandom;
  const RunResult rnd = run_random(space, table, zero);
  bool same = rl.state.evaluated_count() == rnd.state.evaluated_count();
  for (std::size_t i = 0; same && i < rl.state.history().size(); ++i)
    same = rl.state.history()[i].arch.key() == rnd.state.history()[i].arch.key();
  check.require(same, "zero-lr reinforce must reproduce random search's trajectory");
}

// ---------------------------------------------------------------------------
// 7. Determinism and budget
// ---------------------------------------------------------------------------
void criterion_determinism_and_budget(Check& check) {
  const fs::path dir = scratch_dir();
  const SearchSpace space = full_space();

  // a playback script with duplicates and an invalid entry mixed in
  std::vector<std::string> responses;
  {
    std::vector<Architecture> first, second, third;
    for (std::uint64_t i = 0; i < 10; ++i) first.push_back(space.at(i));
    for (std::uint64_t i = 5; i < 15; ++i) second.push_back(space.at(i));  // 5 repeats
    for (std::uint64_t i = 15; i < 25; ++i) third.push_back(space.at(i));
    responses.push_back(format_architectures_for_llm(first));
    std::string tainted = format_architectures_for_llm(second);
    tainted += "\nAlso consider: ```json\n[{\"ops\": [\"FooNet\",\"GCN\",\"GCN\",\"GCN\"]}]\n```";
    responses.push_back(tainted);
    responses.push_back(format_architectures_for_llm(third));
  }
  const fs::path script = dir / "dup-script.json";
  {
    nlohmann::json arr = responses;
    std::ofstream out(script, std::ios::binary | std::ios::trunc);
    out << arr.dump();
  }

  ConfigMap config;
  config["experiment.dataset"] = "cora-fixture";
  config["experiment.benchmark"] = "synthetic";
  config["experiment.planted"] = "GCN,GAT,GCN,Skip-Connection";
  config["experiment.topology"] = "space-1";
  config["experiment.repetitions"] = "1";
  config["strategy.kind"] = "gpt4gnas";
  config["strategy.iterations"] = "3";
  config["strategy.batch_size"] = "10";
  config["strategy.seed"] = "5";
  config["llm.backend"] = "scripted";
  config["llm.script"] = script.string();

  const ExperimentReport report_a = run_experiment(spec_from_config(config));
  const ExperimentReport report_b = run_experiment(spec_from_config(config));
  const fs::path out_a = dir / "det-a";
  const fs::path out_b = dir / "det-b";
  emit_report(report_a, out_a);
  emit_report(report_b, out_b);
  for (const char* name :
       {"summary.md", "curves.csv", "top10.csv", "evolution.jsonl", "manifest.json"}) {
    check.require(slurp(out_a / name) == slurp(out_b / name),
                  std::string("re-run artifact differs: ") + name);
  }
  for (const auto& entry : fs::directory_iterator(out_a / "transcripts"))
    check.require(slurp(entry.path()) ==
                      slurp(out_b / "transcripts" / entry.path().filename()),
                  "transcript differs: " + entry.path().filename().string());

  // duplicates were dropped and counted, never re-queried
  const RunResult& run = report_a.runs[0].result;
  check.require(!run.failure, "scripted run failed: " + run.failure.value_or(""));
  check.require(run.state.evaluated_count() == 25, "expected 25 unique evaluations, got " +
                                                       std::to_string(run.state.evaluated_count()));
  check.require(run.oracle_queries == run.state.evaluated_count(),
                "oracle query count must equal the number of unique evaluations");
  check.require(run.oracle_queries < 30, "duplicate proposals must keep the run under budget");
  check.require(run.rows[1].diagnostics.dropped_already_evaluated == 5,
                "five repeated proposals must be counted");
  check.require(run.rows[1].diagnostics.dropped_invalid_op.size() == 1 &&
                    run.rows[1].diagnostics.dropped_invalid_op[0] == "FooNet",
                "the invalid op must be named in diagnostics");

  // budget cap across every strategy at a shared seed
  const BenchmarkTable table = fixture_table(space);
  for (StrategyKind kind :
       {StrategyKind::kRandom, StrategyKind::kEvolutionary, StrategyKind::kRl}) {
    StrategyConfig cfg;
    cfg.kind = kind;
    cfg.iterations = 15;
    cfg.batch_size = 10;
    cfg.seed = 9;
    const RunResult result = run_strategy(space, table, cfg, nullptr);
    const std::uint64_t cap =
        150 + (kind == StrategyKind::kEvolutionary ? cfg.evo.population_size : 0);
    check.require(result.oracle_queries <= cap,
                  std::string(strategy_name(kind)) + " exceeded its query budget");
    check.require(result.oracle_queries == result.state.evaluated_count(),
                  std::string(strategy_name(kind)) + " re-queried an evaluated key");
  }
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

// ---------------------------------------------------------------------------
// 8. Report integrity
// ---------------------------------------------------------------------------
void criterion_report_integrity(Check& check) {
  const fs::path dir = scratch_dir();
  ConfigMap config;
  config["experiment.dataset"] = "cora-fixture";
  config["experiment.benchmark"] = "synthetic";
  config["experiment.planted"] = "GCN,GAT,GCN,Skip-Connection";
  config["experiment.topology"] = "space-1";
  config["experiment.repetitions"] = "3";
  config["strategy.kind"] = "random,evolutionary";
  config["strategy.iterations"] = "5";
  config["strategy.batch_size"] = "10";
  config["strategy.evo.population_size"] = "20";
  config["strategy.evo.parent_count"] = "5";
  config["strategy.seed"] = "11";

  const ExperimentReport report = run_experiment(spec_from_config(config));
  const fs::path out = dir / "integrity";
  emit_report(report, out);

  const VerifyResult verified = verify_report_dir(out);
  check.require(verified.ok, "verify must match bit-exact: " + verified.diff);

  // best-of-R semantics re-derived from the raw runs
  const SearchSpace space = full_space();
  const BenchmarkTable table = fixture_table(space);
  for (const CellSummary& cell : report.cells) {
    const RunRecord* expected = nullptr;
    for (const RunRecord& run : report.runs) {
      if (run.strategy != cell.strategy || run.failed()) continue;
      if (!expected || run.result.state.best().val_accuracy >
                           expected->result.state.best().val_accuracy)
        expected = &run;  // ascending repetition order makes ties keep the earliest
    }
    check.require(expected && cell.best_key == expected->result.state.best().arch.key(),
                  "best-of-R must select on validation accuracy (earliest tie)");
    check.require(cell.test_accuracy == table.query(cell.best_key).test_accuracy,
                  "test accuracy must be read off the selected run's architecture");
  }

  // tampering must be detected
  std::string summary = slurp(out / "summary.md");
  const std::size_t digit = summary.find_first_of("0123456789", summary.find("| random |"));
  summary[digit] = summary[digit] == '9' ? '8' : '9';
  std::ofstream(out / "summary.md", std::ios::binary | std::ios::trunc) << summary;
  check.require(!verify_report_dir(out).ok, "verify must detect an edited summary number");
  fs::remove_all(out);
}

// ---------------------------------------------------------------------------
// 9. Optional reproduction against user-supplied real benchmark data
// ---------------------------------------------------------------------------
bool criterion_real_reproduction(Check& check) {
  const char* manifest_path = std::getenv("GNAS_REAL_BENCH");
  if (!manifest_path || !*manifest_path) return false;  // skipped

  const nlohmann::json doc = nlohmann::json::parse(slurp(manifest_path));
  const BenchmarkTable table = load_benchmark(doc.at("benchmark").get<std::string>(),
                                              OperationRegistry::builtin(), builtin_topologies());
  for (const auto& entry : doc.at("checks")) {
    const std::string arch = entry.at("arch").get<std::string>();
    const Accuracy expected_val = Accuracy::from_percent(entry.at("val").get<double>());
    const int expected_rank = entry.at("rank").get<int>();
    const BenchmarkRecord& record = table.query(arch);
    check.require(record.val_accuracy == expected_val,
                  arch + ": val " + record.val_accuracy.str() + " != " + expected_val.str());
    check.require(table.rank(arch) == expected_rank,
                  arch + ": rank " + std::to_string(table.rank(arch)) +
                      " != " + std::to_string(expected_rank));
  }
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> fn;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "prompt fidelity", criterion_prompt_fidelity, 1.0},
      {2, "parser round-trip and robustness", criterion_parser_round_trip, 5.0},
      {3, "oracle correctness", criterion_oracle_correctness, 10.0},
      {4, "loop correctness (greedy mock)", criterion_loop_correctness, 10.0},
      {5, "strategy comparison at desk scale", criterion_strategy_comparison, 60.0},
      {6, "reinforce sanity", criterion_rl_sanity, 120.0},
      {7, "determinism and budget", criterion_determinism_and_budget, 60.0},
      {8, "report integrity", criterion_report_integrity, 60.0},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.fn(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.budget_seconds)
      check.failures.push_back("runtime " + std::to_string(elapsed) + "s exceeds budget " +
                               std::to_string(criterion.budget_seconds) + "s");
    if (check.failures.empty()) {
      std::printf("[PASS] criterion %d: %s (%.2fs)\n", criterion.id, criterion.name, elapsed);
    } else {
      ++failed;
      std::printf("[FAIL] criterion %d: %s (%.2fs)\n", criterion.id, criterion.name, elapsed);
      for (const std::string& reason : check.failures)
        std::printf("       - %s\n", reason.c_str());
    }
  }

  // criterion 9 runs only with user-supplied converted benchmark data
  {
    Check check;
    try {
      if (criterion_real_reproduction(check)) {
        if (check.failures.empty()) {
          std::printf("[PASS] criterion 9: real-benchmark reproduction\n");
        } else {
          ++failed;
          std::printf("[FAIL] criterion 9: real-benchmark reproduction\n");
          for (const std::string& reason : check.failures)
            std::printf("       - %s\n", reason.c_str());
        }
      } else {
        std::printf(
            "[SKIP] criterion 9: real-benchmark reproduction (set GNAS_REAL_BENCH to a JSON "
            "file {\"benchmark\": path, \"checks\": [{\"arch\",\"val\",\"rank\"}]} to enable)\n");
      }
    } catch (const std::exception& e) {
      ++failed;
      std::printf("[FAIL] criterion 9: real-benchmark reproduction\n       - %s\n", e.what());
    }
  }

  if (failed) {
    std::printf("%d criterion(s) FAILED\n", failed);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
