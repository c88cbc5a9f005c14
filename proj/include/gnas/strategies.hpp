#pragma once

#include <functional>

#include <Eigen/Core>

#include "gnas/llm_client.hpp"
#include "gnas/search_state.hpp"

namespace gnas {

/// Everything a finished (or aborted) run reports.
struct RunResult {
  std::string strategy_label;
  std::uint64_t seed = 0;
  SearchState state;
  std::vector<IterationRow> rows;
  std::vector<CompletionTranscript> transcripts;
  std::uint64_t oracle_queries = 0;
  int gnas_prompts_built = 0;
  int feedback_prompts_built = 0;
  int total_topped_up = 0;
  int stagnant_iterations = 0;  // iterations that evaluated nothing new
  bool early_stop = false;      // space exhausted before the budget
  std::optional<std::string> failure;  // set when the run aborted; state is partial

  /// Per-slot policy probabilities after the run (reinforce strategy only).
  std::vector<std::vector<double>> rl_policy_probs;
};

/// Evaluation hook: returns the record for a key, or nullptr when the key is
/// absent. Strategies query each unique key at most once; tests wrap this to
/// count oracle traffic.
using OracleFn = std::function<const BenchmarkRecord*(const std::string&)>;

OracleFn table_oracle(const BenchmarkTable& table);

/// Policy math for the REINFORCE controller, exposed for gradient checks.
Eigen::ArrayXd softmax(const Eigen::ArrayXd& logits);

/// d/dlogits of advantage * log softmax(logits)[action]
/// = advantage * (onehot(action) - softmax(logits)).
Eigen::ArrayXd reinforce_gradient(const Eigen::ArrayXd& logits, int action, double advantage);

/// d/dlogits of the policy entropy H(softmax(logits)).
Eigen::ArrayXd entropy_gradient(const Eigen::ArrayXd& logits);

struct AdamState {
  Eigen::ArrayXd first_moment;
  Eigen::ArrayXd second_moment;
  long step = 0;
};

/// One adaptive-moment gradient-ascent step (beta1 0.9, beta2 0.999).
void adam_ascend(Eigen::ArrayXd& params, AdamState& state, const Eigen::ArrayXd& gradient,
                 double learning_rate, double epsilon = 1e-8);

/// Seed of the shared per-slot sampling stream. run_random and run_rl draw
/// from this same stream; with a zero learning rate their trajectories are
/// identical. A mock-random backend built on this seed makes the LLM loop
/// reproduce run_random draw-for-draw.
std::uint64_t sampling_stream_seed(std::uint64_t seed);

struct GptRunOptions {
  std::string dataset;  // empty = take the benchmark table's dataset name
  AblationFlags ablation;
  FeedbackOptions feedback;
};

/// The LLM-driven loop: one GNAS prompt, then for each iteration evaluate
/// the proposed batch, fold the history into a feedback prompt, and request
/// the next batch. Parsed duplicates and invalid entries are dropped with
/// diagnostics; an empty valid batch retries the completion once and then
/// tops up with unevaluated uniform-random architectures (flagged in the
/// report). Backend failure aborts with partial state preserved.
RunResult run_gpt4gnas(const SearchSpace& space, const BenchmarkTable& table,
                       const StrategyConfig& cfg, LLMClient& client,
                       const GptRunOptions& options = {});
RunResult run_gpt4gnas_with_oracle(const SearchSpace& space, const std::string& dataset,
                                   const OracleFn& oracle, const StrategyConfig& cfg,
                                   LLMClient& client, const GptRunOptions& options = {});

/// Uniform search. With a budget below the space size, draws
/// iterations * batch_size iid samples and evaluates first occurrences;
/// otherwise evaluates the whole space in seeded shuffled order and stops
/// early (flagged in the report).
RunResult run_random(const SearchSpace& space, const BenchmarkTable& table,
                     const StrategyConfig& cfg);
RunResult run_random_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                                 const StrategyConfig& cfg);

/// Truncation-selection GA: seeded unique population, then per iteration
/// parent selection by fitness, crossover-then-mutation children, worst-out
/// replacement. Only unseen children hit the oracle.
RunResult run_evolutionary(const SearchSpace& space, const BenchmarkTable& table,
                           const StrategyConfig& cfg);
RunResult run_evolutionary_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                                       const StrategyConfig& cfg);

/// REINFORCE with one independent softmax policy per op slot, an
/// exponential-moving-average reward baseline, and adaptive-moment ascent.
/// Reward is validation accuracy / 100.
RunResult run_rl(const SearchSpace& space, const BenchmarkTable& table,
                 const StrategyConfig& cfg);
RunResult run_rl_with_oracle(const SearchSpace& space, const OracleFn& oracle,
                             const StrategyConfig& cfg);

/// Dispatch by cfg.kind. `client` is required for the gpt4gnas strategy.
RunResult run_strategy(const SearchSpace& space, const BenchmarkTable& table,
                       const StrategyConfig& cfg, LLMClient* client,
                       const GptRunOptions& options = {});

}  // namespace gnas
